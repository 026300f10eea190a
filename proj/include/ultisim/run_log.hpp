#pragma once

// Append-only JSONL run log: one header line, then one line per agent
// interaction. The log is the persistence, resume, and replay unit; entries
// are written through a single writer and flushed per line.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ultisim/errors.hpp"
#include "ultisim/game.hpp"
#include "ultisim/persona.hpp"
#include "ultisim/version.hpp"

namespace ultisim {

enum class FailureKind { parse_failure, range_failure, transport_failure };

inline constexpr std::string_view to_string(FailureKind kind) {
    switch (kind) {
        case FailureKind::parse_failure: return "parse_failure";
        case FailureKind::range_failure: return "range_failure";
        case FailureKind::transport_failure: return "transport_failure";
    }
    return "parse_failure";
}

inline std::optional<FailureKind> parse_failure_kind(std::string_view token) {
    if (token == "parse_failure") return FailureKind::parse_failure;
    if (token == "range_failure") return FailureKind::range_failure;
    if (token == "transport_failure") return FailureKind::transport_failure;
    return std::nullopt;
}

// What came out of one agent interaction: an offer (proposer runs), a
// decision (responder runs), or a recorded failure kind.
struct ParsedOutcome {
    enum class Type { offer, decision, failure };
    Type type = Type::failure;
    int offer_coins = 0;
    Decision decision = Decision::reject;
    FailureKind failure = FailureKind::parse_failure;

    static ParsedOutcome make_offer(int coins) {
        ParsedOutcome o;
        o.type = Type::offer;
        o.offer_coins = coins;
        return o;
    }
    static ParsedOutcome make_decision(Decision d) {
        ParsedOutcome o;
        o.type = Type::decision;
        o.decision = d;
        return o;
    }
    static ParsedOutcome make_failure(FailureKind kind) {
        ParsedOutcome o;
        o.type = Type::failure;
        o.failure = kind;
        return o;
    }

    bool ok() const { return type != Type::failure; }
    bool operator==(const ParsedOutcome&) const = default;
};

struct RunLogEntry {
    std::string run_id;
    int agent_index = 0;
    std::string persona_id;
    PersonaCondition condition = PersonaCondition::no_persona;
    Role role = Role::proposer;
    std::optional<int> offer_presented;  // responder runs only
    std::string prompt_hash;             // sha256 of the canonical prompt bytes
    std::string raw_response;
    ParsedOutcome parsed;
    int attempt_count = 1;   // transport attempts summed over re-asks
    int parse_retries = 0;   // re-asks triggered by malformed output
    std::vector<std::string> warnings;
    std::string timestamp;  // ISO 8601 UTC; excluded from determinism checks
};

struct RunLogHeader {
    std::string run_id;
    std::string config_hash;
    int protocol_version = kProtocolVersion;
    std::string model;
    std::string condition_token;
    std::string role_token;
    int n_agents = 0;
};

struct RunLog {
    RunLogHeader header;
    std::vector<RunLogEntry> entries;
};

inline std::string now_iso8601_utc() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const std::time_t secs = system_clock::to_time_t(now);
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(ms));
    return buf;
}

// --- JSON mapping -----------------------------------------------------------

inline nlohmann::json to_json(const RunLogHeader& header) {
    return {
        {"run_id", header.run_id},
        {"config_hash", header.config_hash},
        {"protocol_version", header.protocol_version},
        {"model", header.model},
        {"condition", header.condition_token},
        {"role", header.role_token},
        {"n_agents", header.n_agents},
    };
}

inline nlohmann::json to_json(const ParsedOutcome& outcome) {
    switch (outcome.type) {
        case ParsedOutcome::Type::offer:
            return {{"type", "offer"}, {"value", outcome.offer_coins}};
        case ParsedOutcome::Type::decision:
            return {{"type", "decision"}, {"value", std::string(to_string(outcome.decision))}};
        case ParsedOutcome::Type::failure:
            return {{"type", "failure"}, {"value", std::string(to_string(outcome.failure))}};
    }
    return {};
}

inline nlohmann::json to_json(const RunLogEntry& entry) {
    nlohmann::json j = {
        {"run_id", entry.run_id},
        {"agent_index", entry.agent_index},
        {"persona_id", entry.persona_id},
        {"condition", std::string(condition_token(entry.condition))},
        {"role", std::string(to_string(entry.role))},
        {"prompt_hash", entry.prompt_hash},
        {"raw_response", entry.raw_response},
        {"parsed", to_json(entry.parsed)},
        {"attempt_count", entry.attempt_count},
        {"parse_retries", entry.parse_retries},
        {"warnings", entry.warnings},
        {"timestamp", entry.timestamp},
    };
    if (entry.offer_presented) j["offer_presented"] = *entry.offer_presented;
    return j;
}

inline RunLogHeader header_from_json(const nlohmann::json& j) {
    RunLogHeader header;
    header.run_id = j.at("run_id").get<std::string>();
    header.config_hash = j.at("config_hash").get<std::string>();
    header.protocol_version = j.at("protocol_version").get<int>();
    header.model = j.value("model", "");
    header.condition_token = j.value("condition", "");
    header.role_token = j.value("role", "");
    header.n_agents = j.value("n_agents", 0);
    return header;
}

inline ParsedOutcome outcome_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "offer") return ParsedOutcome::make_offer(j.at("value").get<int>());
    if (type == "decision") {
        auto d = parse_decision(j.at("value").get<std::string>());
        if (!d) throw IoError("bad decision value in run log");
        return ParsedOutcome::make_decision(*d);
    }
    if (type == "failure") {
        auto kind = parse_failure_kind(j.at("value").get<std::string>());
        if (!kind) throw IoError("bad failure kind in run log");
        return ParsedOutcome::make_failure(*kind);
    }
    throw IoError("bad parsed outcome type \"" + type + "\" in run log");
}

inline RunLogEntry entry_from_json(const nlohmann::json& j) {
    RunLogEntry entry;
    entry.run_id = j.at("run_id").get<std::string>();
    entry.agent_index = j.at("agent_index").get<int>();
    entry.persona_id = j.at("persona_id").get<std::string>();
    auto condition = parse_condition(j.at("condition").get<std::string>());
    if (!condition) throw IoError("bad condition token in run log");
    entry.condition = *condition;
    auto role = parse_role(j.at("role").get<std::string>());
    if (!role) throw IoError("bad role token in run log");
    entry.role = *role;
    if (j.contains("offer_presented")) entry.offer_presented = j.at("offer_presented").get<int>();
    entry.prompt_hash = j.at("prompt_hash").get<std::string>();
    entry.raw_response = j.at("raw_response").get<std::string>();
    entry.parsed = outcome_from_json(j.at("parsed"));
    entry.attempt_count = j.at("attempt_count").get<int>();
    entry.parse_retries = j.value("parse_retries", 0);
    entry.warnings = j.value("warnings", std::vector<std::string>{});
    entry.timestamp = j.value("timestamp", "");
    return entry;
}

// --- Writer -----------------------------------------------------------------

class RunLogWriter {
  public:
    // Creates a fresh log with its header line. Refuses to clobber.
    static RunLogWriter create(const std::string& path, const RunLogHeader& header) {
        if (std::ifstream probe(path); probe.good()) {
            throw IoError("run log already exists: " + path);
        }
        RunLogWriter writer(path, std::ios::out);
        writer.out_ << to_json(header).dump() << '\n' << std::flush;
        return writer;
    }

    // Appends to an existing log (resume path).
    static RunLogWriter append_to(const std::string& path) {
        if (std::ifstream probe(path); !probe.good()) {
            throw IoError("run log does not exist: " + path);
        }
        return RunLogWriter(path, std::ios::app);
    }

    void write(const RunLogEntry& entry) { out_ << to_json(entry).dump() << '\n' << std::flush; }

  private:
    RunLogWriter(const std::string& path, std::ios::openmode mode) : out_(path, mode) {
        if (!out_) throw IoError("cannot open run log for writing: " + path);
    }

    std::ofstream out_;
};

// --- Reader -----------------------------------------------------------------

struct LoadedRunLog {
    RunLog log;
    std::uintmax_t clean_byte_length = 0;  // file prefix that parsed cleanly
    bool truncated_tail = false;           // crash remnant after the last full line
};

// Reads a log, tolerating one incomplete trailing line (interrupted write).
// Only newline-terminated lines count as committed: the writer emits each
// record as `json\n`, so an unterminated (or unparseable) final line is a
// crash remnant. A bad non-final line is corruption and is an error, as is a
// duplicate agent_index or an entry whose run_id disagrees with the header.
inline LoadedRunLog read_run_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open run log: " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    LoadedRunLog loaded;
    std::set<int> seen_indices;
    std::size_t offset = 0;
    std::size_t line_no = 0;
    while (offset < content.size()) {
        const std::size_t newline = content.find('\n', offset);
        ++line_no;
        if (newline == std::string::npos) {
            loaded.truncated_tail = true;  // unterminated final line
            break;
        }
        const std::string line = content.substr(offset, newline - offset);
        const bool is_last_line = newline + 1 >= content.size();

        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            if (is_last_line && line_no > 1) {
                loaded.truncated_tail = true;  // torn final write
                break;
            }
            throw IoError(path + ": corrupt line " + std::to_string(line_no));
        }
        if (line_no == 1) {
            if (!j.contains("protocol_version")) {
                throw IoError(path + ": first line is not a run log header");
            }
            loaded.log.header = header_from_json(j);
            if (loaded.log.header.protocol_version != kProtocolVersion) {
                throw IoError(path + ": unsupported protocol version " +
                              std::to_string(loaded.log.header.protocol_version));
            }
        } else {
            RunLogEntry entry;
            try {
                entry = entry_from_json(j);
            } catch (const nlohmann::json::exception& e) {
                throw IoError(path + ": bad entry at line " + std::to_string(line_no) + ": " +
                              e.what());
            }
            if (entry.run_id != loaded.log.header.run_id) {
                throw IoError(path + ": entry run_id \"" + entry.run_id +
                              "\" does not match header \"" + loaded.log.header.run_id + "\"");
            }
            if (!seen_indices.insert(entry.agent_index).second) {
                throw IoError(path + ": duplicate agent_index " +
                              std::to_string(entry.agent_index));
            }
            loaded.log.entries.push_back(std::move(entry));
        }
        offset = newline + 1;
        loaded.clean_byte_length = offset;
    }
    if (line_no == 0) throw IoError(path + ": empty run log");
    return loaded;
}

}  // namespace ultisim
