#pragma once

// Four-section prompt rendering (persona, game explanation, role query,
// output format) and parsing of structured JSON replies into game moves.
// Rendering is byte-stable: identical inputs always produce identical text,
// and the golden files under tests/fixtures/golden pin every template.

#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ultisim/format.hpp"
#include "ultisim/game.hpp"
#include "ultisim/persona.hpp"

namespace ultisim {

struct Demographics {
    int crt_score = 0;
    int age = 0;
    std::string gender;
    std::string country;
};

inline Demographics demographics_of(const PersonaRecord& record) {
    return {record.crt_score, record.age, record.gender, record.country};
}

// Sections are joined by one blank line, persona first when present.
struct PromptSections {
    std::optional<std::string> persona_block;
    std::string game_description;
    std::string role_query;
    std::string output_format;

    std::string full() const {
        std::string text;
        if (persona_block) {
            text += *persona_block;
            text += "\n\n";
        }
        text += game_description;
        text += "\n\n";
        text += role_query;
        text += "\n\n";
        text += output_format;
        return text;
    }
};

namespace prompt_text {

inline constexpr std::string_view kPersonaPreamble =
    "You embody a character with the following personality traits and demographics, each "
    "quantified by a value. A mean of 0 and a standard deviation of 1 are assumed for these "
    "values, where higher values signify a stronger inclination towards the corresponding "
    "trait:";

// Present only when a persona block precedes the game description.
inline constexpr std::string_view kPersonaBridge =
    "Play the following game as someone of this personality. ";

inline constexpr std::string_view kGameIntro = "Here is the game description.";

inline constexpr std::string_view kGameParagraph =
    "A stack of coins is being divided between a proposer and a responder. The proposer "
    "decides how much to give the responder, and the responder decides whether or not to "
    "accept the offer. If the offer is accepted, the players split the money as the proposer "
    "suggested. If the offer is rejected, both parties receive no coin.";

inline constexpr std::string_view kFormatIntro =
    "Please tell me your decision in the following JSON format.";

}  // namespace prompt_text

// Absent under the no-persona condition; otherwise the preamble, one
// "- Label : value" line per trait with shortest round-trip decimals, then
// the demographic lines.
inline std::optional<std::string> render_persona_block(const std::vector<TraitLine>& traits,
                                                       const Demographics& demo,
                                                       PersonaCondition condition) {
    if (condition == PersonaCondition::no_persona) return std::nullopt;
    std::string block(prompt_text::kPersonaPreamble);
    for (const auto& trait : traits) {
        block += "\n- ";
        block += trait.label;
        block += " : ";
        block += format_decimal(trait.value);
    }
    block += "\n- Age : " + std::to_string(demo.age);
    block += "\n- Gender : " + demo.gender;
    block += "\n- CRT Score : " + std::to_string(demo.crt_score) + " of 3";
    block += "\n- Country of Residence: " + demo.country;
    return block;
}

namespace detail {

inline std::string game_description(bool with_persona) {
    std::string text;
    if (with_persona) text += prompt_text::kPersonaBridge;
    text += prompt_text::kGameIntro;
    text += "\n";
    text += prompt_text::kGameParagraph;
    return text;
}

inline std::string coin_stakes_sentence(const GameConfig& config) {
    return std::to_string(config.total_coins) + " coins will be divided. Each coin will be redeemed " +
           format_decimal(config.coin_value_usd) + " real-world dollar after the experiment.";
}

}  // namespace detail

inline PromptSections build_proposer_sections(const std::optional<std::string>& persona_block,
                                              const GameConfig& config) {
    PromptSections sections;
    sections.persona_block = persona_block;
    sections.game_description = detail::game_description(persona_block.has_value());
    sections.role_query =
        "You are a proposer. " + detail::coin_stakes_sentence(config) + " How would you suggest?";
    sections.output_format = std::string(prompt_text::kFormatIntro) +
                             "\n{\n"
                             "    \"Reason\": \"Your explanation here\",\n"
                             "    \"Responder\": \"Number of coins for the responder\",\n"
                             "    \"Proposer\": \"Number of coins for yourself\"\n"
                             "}";
    return sections;
}

inline PromptSections build_responder_sections(const std::optional<std::string>& persona_block,
                                               Offer offer, const GameConfig& config) {
    PromptSections sections;
    sections.persona_block = persona_block;
    sections.game_description = detail::game_description(persona_block.has_value());
    sections.role_query = "You are a responder. " + detail::coin_stakes_sentence(config) +
                          " The proposer offers you " + std::to_string(offer.coins) + " of the " +
                          std::to_string(config.total_coins) +
                          " coins. Do you accept or reject?";
    sections.output_format = std::string(prompt_text::kFormatIntro) +
                             "\n{\n"
                             "    \"Reason\": \"Your explanation here\",\n"
                             "    \"Decision\": \"accept or reject\"\n"
                             "}";
    return sections;
}

inline std::string render_proposer_prompt(const std::optional<std::string>& persona_block,
                                          const GameConfig& config) {
    return build_proposer_sections(persona_block, config).full();
}

inline std::string render_responder_prompt(const std::optional<std::string>& persona_block,
                                           Offer offer, const GameConfig& config) {
    return build_responder_sections(persona_block, offer, config).full();
}

// ---------------------------------------------------------------------------
// Response parsing

struct ParseError {
    enum class Kind { parse_failure, range_failure };
    Kind kind = Kind::parse_failure;
    std::string detail;
    std::string raw;  // original model text, carried into the run log
};

struct ParsedProposerResponse {
    std::string reason;
    Offer offer;  // the "Responder" field, validated against the game config
    std::optional<int> proposer_coins;
    std::vector<std::string> warnings;
};

struct ParsedResponderResponse {
    std::string reason;
    Decision decision = Decision::reject;
};

using ProposerParse = std::variant<ParsedProposerResponse, ParseError>;
using ResponderParse = std::variant<ParsedResponderResponse, ParseError>;

// First brace-balanced {...} block, scanning candidate opening braces left to
// right and respecting JSON string quoting. Later blocks are ignored so
// chatty output parses deterministically.
inline std::optional<std::string> extract_first_json_block(std::string_view raw) {
    for (std::size_t start = 0; start < raw.size(); ++start) {
        if (raw[start] != '{') continue;
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            const char c = raw[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) return std::string(raw.substr(start, i - start + 1));
            }
        }
    }
    return std::nullopt;
}

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// JSON numbers and numeric strings both count; the value must be integral.
inline std::optional<int> coerce_int(const nlohmann::json& v) {
    if (v.is_number_integer()) {
        const auto n = v.get<long long>();
        if (n < -2147483648LL || n > 2147483647LL) return std::nullopt;
        return static_cast<int>(n);
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (!std::isfinite(d) || d != std::trunc(d)) return std::nullopt;
        if (d < -2147483648.0 || d > 2147483647.0) return std::nullopt;
        return static_cast<int>(d);
    }
    if (v.is_string()) {
        const std::string cell = trim(v.get<std::string>());
        return parse_int_cell(cell);
    }
    return std::nullopt;
}

inline std::optional<nlohmann::json> parse_block(const std::string& raw, ParseError& err) {
    auto block = extract_first_json_block(raw);
    if (!block) {
        err = {ParseError::Kind::parse_failure, "no JSON object found", raw};
        return std::nullopt;
    }
    nlohmann::json parsed = nlohmann::json::parse(*block, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        err = {ParseError::Kind::parse_failure, "first brace block is not a JSON object", raw};
        return std::nullopt;
    }
    return parsed;
}

inline std::string reason_of(const nlohmann::json& obj) {
    auto it = obj.find("Reason");
    if (it == obj.end()) return "";
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

}  // namespace detail

// Keys are matched case-sensitively ("Reason", "Responder", "Proposer").
// The Responder field is authoritative for the offer; a Proposer field that
// does not complete the pie only raises a warning.
inline ProposerParse parse_proposer_response(const std::string& raw, const GameConfig& config) {
    ParseError err;
    auto obj = detail::parse_block(raw, err);
    if (!obj) return err;

    ParsedProposerResponse out;
    out.reason = detail::reason_of(*obj);

    auto responder_it = obj->find("Responder");
    if (responder_it == obj->end()) {
        return ParseError{ParseError::Kind::parse_failure, "missing \"Responder\" key", raw};
    }
    auto coins = detail::coerce_int(*responder_it);
    if (!coins) {
        return ParseError{ParseError::Kind::parse_failure,
                          "\"Responder\" value is not an integer: " + responder_it->dump(), raw};
    }
    auto offer = validate_offer(*coins, config);
    if (std::holds_alternative<OfferRangeError>(offer)) {
        return ParseError{ParseError::Kind::range_failure,
                          "offer " + std::to_string(*coins) + " outside 0.." +
                              std::to_string(config.total_coins),
                          raw};
    }
    out.offer = std::get<Offer>(offer);

    auto proposer_it = obj->find("Proposer");
    if (proposer_it != obj->end()) {
        auto keep = detail::coerce_int(*proposer_it);
        if (!keep) {
            out.warnings.push_back("unreadable Proposer value; using Responder only");
        } else {
            out.proposer_coins = *keep;
            if (out.offer.coins + *keep != config.total_coins) {
                out.warnings.push_back("sum mismatch: Responder " + std::to_string(out.offer.coins) +
                                       " + Proposer " + std::to_string(*keep) +
                                       " != " + std::to_string(config.total_coins));
            }
        }
    }
    return out;
}

// "Decision" is matched case-insensitively against accept/reject after
// trimming; anything else is a parse failure.
inline ResponderParse parse_responder_response(const std::string& raw) {
    ParseError err;
    auto obj = detail::parse_block(raw, err);
    if (!obj) return err;

    ParsedResponderResponse out;
    out.reason = detail::reason_of(*obj);

    auto decision_it = obj->find("Decision");
    if (decision_it == obj->end()) {
        return ParseError{ParseError::Kind::parse_failure, "missing \"Decision\" key", raw};
    }
    if (!decision_it->is_string()) {
        return ParseError{ParseError::Kind::parse_failure,
                          "\"Decision\" value is not a string: " + decision_it->dump(), raw};
    }
    const std::string token = detail::to_lower(detail::trim(decision_it->get<std::string>()));
    auto decision = parse_decision(token);
    if (!decision) {
        return ParseError{ParseError::Kind::parse_failure,
                          "unrecognized Decision token \"" + decision_it->get<std::string>() + "\"",
                          raw};
    }
    out.decision = *decision;
    return out;
}

}  // namespace ultisim
