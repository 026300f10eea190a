#pragma once

// Orchestration: builds each agent's prompt, drives the backend under
// bounded concurrency, applies the parse re-ask loop, and appends entries to
// the run log in agent-index order. Resume fills exactly the missing
// indices of an interrupted run and refuses logs whose config hash differs.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "ultisim/backend.hpp"
#include "ultisim/config.hpp"
#include "ultisim/csv.hpp"
#include "ultisim/errors.hpp"
#include "ultisim/game.hpp"
#include "ultisim/hash.hpp"
#include "ultisim/http_backend.hpp"
#include "ultisim/persona.hpp"
#include "ultisim/prompt.hpp"
#include "ultisim/replay.hpp"
#include "ultisim/run_log.hpp"
#include "ultisim/synthetic.hpp"

namespace ultisim {

struct RunPlan {
    Config config;
    PersonaCondition condition = PersonaCondition::no_persona;
    Role role = Role::proposer;
    std::string run_id;
    int n_agents = 0;  // <= 0 means "use config.run.n_agents"
};

inline std::string default_run_id(std::string_view backend_kind, Role role,
                                  PersonaCondition condition) {
    return std::string(backend_kind) + "-" + std::string(to_string(role)) + "-" +
           std::string(condition_token(condition));
}

// A plan with all inputs loaded, validated, and hashed.
struct PreparedRun {
    RunPlan plan;
    std::vector<PersonaRecord> personas;  // exactly n_agents records
    std::vector<Offer> offers;            // responder runs: one offer per agent
    std::string config_hash;
    std::string log_path;

    int n_agents() const { return static_cast<int>(personas.size()); }
};

// Agent i is paired with the i-th offer in file order; the pairing is fixed
// across conditions and backends for a given offers file.
struct OfferAssignment {
    std::vector<std::pair<int, Offer>> pairs;
    bool operator==(const OfferAssignment&) const = default;
};

inline OfferAssignment offer_assignment(const PreparedRun& run) {
    OfferAssignment assignment;
    assignment.pairs.reserve(run.offers.size());
    for (std::size_t i = 0; i < run.offers.size(); ++i) {
        assignment.pairs.emplace_back(static_cast<int>(i), run.offers[i]);
    }
    return assignment;
}

inline PreparedRun prepare_run(RunPlan plan) {
    const Config& cfg = plan.config;
    if (plan.n_agents <= 0) plan.n_agents = cfg.run.n_agents;
    if (plan.run_id.empty()) {
        plan.run_id = default_run_id(cfg.backend.kind, plan.role, plan.condition);
    }
    if (cfg.data.personas.empty()) throw ConfigError("config: data.personas is required");

    PreparedRun run;
    PersonaSchema schema{cfg.data.delimiter, cfg.data.columns};
    run.personas = load_personas_file(cfg.data.personas, schema);
    if (static_cast<int>(run.personas.size()) < plan.n_agents) {
        throw ConfigError("persona file has " + std::to_string(run.personas.size()) +
                          " records, need " + std::to_string(plan.n_agents));
    }
    run.personas.resize(static_cast<std::size_t>(plan.n_agents));

    std::string offers_sha;
    if (plan.role == Role::responder) {
        if (cfg.data.offers.empty()) {
            throw ConfigError("config: data.offers is required for responder runs");
        }
        const auto raw_offers = load_offers_file(cfg.data.offers);
        if (static_cast<int>(raw_offers.size()) != plan.n_agents) {
            throw ConfigError("offers file has " + std::to_string(raw_offers.size()) +
                              " offers, need exactly " + std::to_string(plan.n_agents));
        }
        run.offers.reserve(static_cast<std::size_t>(plan.n_agents));
        for (int i = 0; i < plan.n_agents; ++i) {
            const auto checked = validate_offer(raw_offers[static_cast<std::size_t>(i)], cfg.game);
            if (const auto* err = std::get_if<OfferRangeError>(&checked)) {
                throw SchemaError("offers line for agent " + std::to_string(i) + ": " +
                                  std::to_string(err->raw) + " is outside 0.." +
                                  std::to_string(err->total_coins));
            }
            run.offers.push_back(std::get<Offer>(checked));
        }
        offers_sha = sha256_file_hex(cfg.data.offers);
    }

    run.config_hash = config_hash(cfg, plan.condition, plan.role, plan.n_agents,
                                  sha256_file_hex(cfg.data.personas), offers_sha);
    run.log_path =
        (std::filesystem::path(cfg.run.out_dir) / (plan.run_id + ".jsonl")).string();
    run.plan = std::move(plan);
    return run;
}

inline std::unique_ptr<AgentBackend> make_backend(const PreparedRun& run) {
    const Config& cfg = run.plan.config;
    if (cfg.backend.kind == "synthetic") {
        return std::make_unique<SyntheticBackend>(run.personas, run.plan.role, run.offers,
                                                  cfg.synthetic, cfg.game);
    }
    if (cfg.backend.kind == "http") {
        HttpBackendConfig http;
        http.base_url = cfg.backend.base_url;
        http.completions_path = cfg.backend.completions_path;
        http.model = cfg.backend.model;
        http.api_key_env = cfg.backend.api_key_env;
        return std::make_unique<HttpChatBackend>(std::move(http), cfg.retry);
    }
    if (cfg.backend.kind == "replay") {
        const LoadedRunLog loaded = read_run_log(cfg.backend.replay_log);
        if (loaded.log.header.config_hash != run.config_hash) {
            throw ConfigError("replay log " + cfg.backend.replay_log +
                              " was recorded under a different configuration");
        }
        return std::make_unique<ReplayBackend>(loaded.log);
    }
    throw ConfigError("unknown backend kind \"" + cfg.backend.kind + "\"");
}

struct RunSummary {
    int n_agents = 0;
    int n_ok = 0;
    int n_parse_failures = 0;
    int n_range_failures = 0;
    int n_transport_failures = 0;
    int total_parse_retries = 0;
    bool degraded = false;  // more than 10% of agents ended in a failure

    int n_failed() const { return n_parse_failures + n_range_failures + n_transport_failures; }
};

inline RunSummary summarize(const RunLog& log) {
    RunSummary s;
    s.n_agents = log.header.n_agents;
    for (const auto& entry : log.entries) {
        s.total_parse_retries += entry.parse_retries;
        if (entry.parsed.ok()) {
            ++s.n_ok;
            continue;
        }
        switch (entry.parsed.failure) {
            case FailureKind::parse_failure: ++s.n_parse_failures; break;
            case FailureKind::range_failure: ++s.n_range_failures; break;
            case FailureKind::transport_failure: ++s.n_transport_failures; break;
        }
    }
    s.degraded = s.n_failed() * 10 > s.n_agents;
    return s;
}

namespace detail {

inline FailureKind failure_kind_of(const ParseError& err) {
    return err.kind == ParseError::Kind::range_failure ? FailureKind::range_failure
                                                       : FailureKind::parse_failure;
}

}  // namespace detail

// Runs one agent end to end: prompt, completion, parse, re-ask loop. A
// TransportError surfaced by the backend becomes a recorded failure; auth,
// config, and replay-miss errors propagate and abort the run.
inline RunLogEntry simulate_agent(const PreparedRun& run, AgentBackend& backend, int index) {
    const Config& cfg = run.plan.config;
    const PersonaRecord& persona = run.personas[static_cast<std::size_t>(index)];

    const auto persona_block = render_persona_block(select_traits(persona, run.plan.condition),
                                                    demographics_of(persona), run.plan.condition);
    std::string prompt;
    std::optional<int> offer_presented;
    if (run.plan.role == Role::proposer) {
        prompt = render_proposer_prompt(persona_block, cfg.game);
    } else {
        const Offer offer = run.offers[static_cast<std::size_t>(index)];
        offer_presented = offer.coins;
        prompt = render_responder_prompt(persona_block, offer, cfg.game);
    }

    RunLogEntry entry;
    entry.run_id = run.plan.run_id;
    entry.agent_index = index;
    entry.persona_id = persona.persona_id;
    entry.condition = run.plan.condition;
    entry.role = run.plan.role;
    entry.offer_presented = offer_presented;
    entry.prompt_hash = sha256_hex(prompt);

    CompletionRequest request;
    request.prompt = prompt;
    request.model_name = cfg.backend.model;
    request.temperature = cfg.backend.temperature;
    request.max_output_tokens = cfg.backend.max_output_tokens;
    request.request_tag = run.plan.run_id + "/" + std::to_string(index);

    int attempts = 0;
    for (int ask = 0; ask <= cfg.retry.parse_retry_limit; ++ask) {
        CompletionResult result;
        try {
            result = backend.complete(request);
        } catch (const TransportError&) {
            entry.parsed = ParsedOutcome::make_failure(FailureKind::transport_failure);
            entry.attempt_count = attempts > 0 ? attempts : 1;
            entry.parse_retries = ask;
            entry.timestamp = now_iso8601_utc();
            return entry;
        }
        attempts += result.attempt_count;
        entry.raw_response = result.raw_text;
        entry.attempt_count = attempts;
        entry.parse_retries = ask;

        const ParseError* err = nullptr;
        if (run.plan.role == Role::proposer) {
            const ProposerParse parsed = parse_proposer_response(result.raw_text, cfg.game);
            if (const auto* ok = std::get_if<ParsedProposerResponse>(&parsed)) {
                entry.parsed = ParsedOutcome::make_offer(ok->offer.coins);
                entry.warnings = ok->warnings;
                entry.timestamp = now_iso8601_utc();
                return entry;
            }
            err = &std::get<ParseError>(parsed);
            entry.parsed = ParsedOutcome::make_failure(detail::failure_kind_of(*err));
        } else {
            const ResponderParse parsed = parse_responder_response(result.raw_text);
            if (const auto* ok = std::get_if<ParsedResponderResponse>(&parsed)) {
                entry.parsed = ParsedOutcome::make_decision(ok->decision);
                entry.timestamp = now_iso8601_utc();
                return entry;
            }
            err = &std::get<ParseError>(parsed);
            entry.parsed = ParsedOutcome::make_failure(detail::failure_kind_of(*err));
        }
    }
    entry.timestamp = now_iso8601_utc();
    return entry;
}

struct RunResult {
    RunSummary summary;
    RunLog log;  // full log after the run (existing entries plus new ones)
    std::string log_path;
};

// Executes the plan against the backend. With resume == false the log file
// must not already exist. With resume == true an existing log is validated
// (config hash, protocol version), a torn final line is truncated away, and
// only the missing agent indices run; a complete log is a no-op.
inline RunResult run_experiment(const PreparedRun& run, AgentBackend& backend,
                                bool resume = false) {
    const Config& cfg = run.plan.config;
    std::filesystem::create_directories(cfg.run.out_dir);

    RunLogHeader header;
    header.run_id = run.plan.run_id;
    header.config_hash = run.config_hash;
    header.model = cfg.backend.model;
    header.condition_token = std::string(condition_token(run.plan.condition));
    header.role_token = std::string(to_string(run.plan.role));
    header.n_agents = run.n_agents();

    std::vector<RunLogEntry> existing;
    std::vector<int> missing;
    std::optional<RunLogWriter> writer;
    const bool log_exists = std::filesystem::exists(run.log_path);
    if (resume && log_exists) {
        LoadedRunLog loaded = read_run_log(run.log_path);
        if (loaded.truncated_tail) {
            std::filesystem::resize_file(run.log_path, loaded.clean_byte_length);
        }
        if (loaded.log.header.config_hash != run.config_hash) {
            throw ConfigError("cannot resume " + run.log_path +
                              ": it was produced under a different configuration");
        }
        std::set<int> seen;
        for (const auto& entry : loaded.log.entries) {
            if (entry.agent_index < 0 || entry.agent_index >= run.n_agents()) {
                throw IoError(run.log_path + ": agent_index " +
                              std::to_string(entry.agent_index) + " is out of range");
            }
            seen.insert(entry.agent_index);
        }
        existing = std::move(loaded.log.entries);
        for (int i = 0; i < run.n_agents(); ++i) {
            if (!seen.count(i)) missing.push_back(i);
        }
        if (!missing.empty()) writer.emplace(RunLogWriter::append_to(run.log_path));
    } else {
        writer.emplace(RunLogWriter::create(run.log_path, header));
        missing.resize(static_cast<std::size_t>(run.n_agents()));
        for (int i = 0; i < run.n_agents(); ++i) missing[static_cast<std::size_t>(i)] = i;
    }

    std::vector<RunLogEntry> fresh(missing.size());
    if (!missing.empty()) {
        std::vector<std::optional<RunLogEntry>> slots(missing.size());
        std::atomic<std::size_t> cursor{0};
        std::mutex mu;
        std::size_t next_to_write = 0;
        std::exception_ptr first_error;

        auto worker = [&] {
            for (;;) {
                const std::size_t pos = cursor.fetch_add(1);
                if (pos >= missing.size()) return;
                RunLogEntry entry;
                try {
                    entry = simulate_agent(run, backend, missing[pos]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first_error) first_error = std::current_exception();
                    cursor.store(missing.size());
                    return;
                }
                std::lock_guard<std::mutex> lock(mu);
                slots[pos] = std::move(entry);
                while (next_to_write < slots.size() && slots[next_to_write]) {
                    writer->write(*slots[next_to_write]);
                    fresh[next_to_write] = std::move(*slots[next_to_write]);
                    slots[next_to_write].reset();
                    ++next_to_write;
                }
            }
        };

        const int n_workers =
            std::min<int>(cfg.run.concurrency, static_cast<int>(missing.size()));
        if (n_workers <= 1) {
            worker();
        } else {
            std::vector<std::thread> threads;
            threads.reserve(static_cast<std::size_t>(n_workers));
            for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
            for (auto& t : threads) t.join();
        }
        if (first_error) std::rethrow_exception(first_error);
        fresh.resize(next_to_write);  // all of them, absent an error
    }

    RunResult result;
    result.log.header = header;
    result.log.entries = std::move(existing);
    for (auto& entry : fresh) result.log.entries.push_back(std::move(entry));
    std::sort(result.log.entries.begin(), result.log.entries.end(),
              [](const RunLogEntry& a, const RunLogEntry& b) {
                  return a.agent_index < b.agent_index;
              });
    result.summary = summarize(result.log);
    result.log_path = run.log_path;
    return result;
}

}  // namespace ultisim
