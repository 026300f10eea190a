#pragma once

// Econographics-style persona microdata: 21 behavioral indicators grouped
// into six principal components, per-person records with demographics, and
// the three experimental persona conditions.

#include <array>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ultisim/csv.hpp"
#include "ultisim/errors.hpp"

namespace ultisim {

enum class TraitComponent {
    generosity,
    punishment,
    inequality_aversion_wtp,
    wta,
    uncertainty,
    overconfidence,
};

struct BehavioralIndicator {
    std::string_view name;          // canonical dataset column label
    std::string_view prompt_label;  // label rendered on prompt trait lines
    TraitComponent component;
    bool component_representative;  // strongest loading within its component
};

inline constexpr std::size_t kIndicatorCount = 21;

// Fixed column order: Generosity block first, Overconfidence block last.
// Prompt labels for the six representatives use the spelling of the frozen
// prompt template; the remaining labels match the dataset names.
inline const std::array<BehavioralIndicator, kIndicatorCount>& indicator_table() {
    static const std::array<BehavioralIndicator, kIndicatorCount> table = {{
        {"Reciprocity: High", "Reciprocity:High", TraitComponent::generosity, true},
        {"Reciprocity: Low", "Reciprocity: Low", TraitComponent::generosity, false},
        {"Altruism", "Altruism", TraitComponent::generosity, false},
        {"Trust", "Trust", TraitComponent::generosity, false},
        {"Anti-social Punishment", "Anti-social Punishment", TraitComponent::punishment, true},
        {"Pro-social Punishment", "Pro-social Punishment", TraitComponent::punishment, false},
        {"Patience", "Patience", TraitComponent::punishment, false},
        {"Dislike Having More", "Dislike Having More", TraitComponent::inequality_aversion_wtp, false},
        {"Dislike Having Less", "Dislike Having Less", TraitComponent::inequality_aversion_wtp, false},
        {"WTP", "WTP", TraitComponent::inequality_aversion_wtp, false},
        {"Risk Aversion: CR (Certain)", "Risk Aversion: CR Certain", TraitComponent::inequality_aversion_wtp, true},
        {"Risk Aversion: CR (Lottery)", "Risk Aversion: CR (Lottery)", TraitComponent::inequality_aversion_wtp, false},
        {"WTA", "WTA", TraitComponent::wta, false},
        {"Risk Aversion: Gains", "Risk Aversion:Gains", TraitComponent::wta, true},
        {"Risk Aversion: Losses", "Risk Aversion: Losses", TraitComponent::wta, false},
        {"Risk Aversion: Gain/Loss", "Risk Aversion: Gain/Loss", TraitComponent::wta, false},
        {"Ambiguity Aversion", "Ambiguity Aversion", TraitComponent::uncertainty, true},
        {"Compound Lottery Aversion", "Compound Lottery Aversion", TraitComponent::uncertainty, false},
        {"Overestimation", "Overestimation", TraitComponent::overconfidence, false},
        {"Overplacement", "Overplacement", TraitComponent::overconfidence, false},
        {"Overprecision", "Overprecision", TraitComponent::overconfidence, true},
    }};
    return table;
}

inline std::optional<std::size_t> indicator_index(std::string_view name) {
    const auto& table = indicator_table();
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i].name == name) return i;
    }
    return std::nullopt;
}

inline const std::vector<std::size_t>& component_indices(TraitComponent c) {
    static const auto by_component = [] {
        std::map<TraitComponent, std::vector<std::size_t>> m;
        const auto& table = indicator_table();
        for (std::size_t i = 0; i < table.size(); ++i) m[table[i].component].push_back(i);
        return m;
    }();
    return by_component.at(c);
}

struct PersonaRecord {
    std::string persona_id;
    std::array<double, kIndicatorCount> indicators{};  // indexed per indicator_table()
    int crt_score = 0;  // correct Cognitive Reflection Test answers, 0..3
    int age = 0;
    std::string gender;
    std::string country;

    bool operator==(const PersonaRecord&) const = default;
};

inline double component_mean(const PersonaRecord& record, TraitComponent c) {
    const auto& idx = component_indices(c);
    double sum = 0.0;
    for (auto i : idx) sum += record.indicators[i];
    return sum / static_cast<double>(idx.size());
}

enum class PersonaCondition { no_persona, six_traits, twenty_one_traits };

inline constexpr std::string_view condition_token(PersonaCondition c) {
    switch (c) {
        case PersonaCondition::no_persona: return "none";
        case PersonaCondition::six_traits: return "six";
        case PersonaCondition::twenty_one_traits: return "twenty-one";
    }
    return "none";
}

// Row labels of the report table.
inline constexpr std::string_view condition_display_name(PersonaCondition c) {
    switch (c) {
        case PersonaCondition::no_persona: return "Nothing";
        case PersonaCondition::six_traits: return "6 Traits";
        case PersonaCondition::twenty_one_traits: return "21 Traits";
    }
    return "Nothing";
}

// Identifier-safe token for CSV column names and file names.
inline constexpr std::string_view condition_snake(PersonaCondition c) {
    switch (c) {
        case PersonaCondition::no_persona: return "nothing";
        case PersonaCondition::six_traits: return "six_traits";
        case PersonaCondition::twenty_one_traits: return "twenty_one_traits";
    }
    return "nothing";
}

inline std::optional<PersonaCondition> parse_condition(std::string_view token) {
    if (token == "none" || token == "nothing") return PersonaCondition::no_persona;
    if (token == "six" || token == "6" || token == "six-traits") return PersonaCondition::six_traits;
    if (token == "twenty-one" || token == "21" || token == "twenty-one-traits")
        return PersonaCondition::twenty_one_traits;
    return std::nullopt;
}

inline const std::array<PersonaCondition, 3>& all_conditions() {
    static const std::array<PersonaCondition, 3> order = {
        PersonaCondition::no_persona,
        PersonaCondition::six_traits,
        PersonaCondition::twenty_one_traits,
    };
    return order;
}

// Column-name mapping for files whose headers differ from the canonical
// labels. Keys are canonical names (an indicator label or one of persona_id,
// crt_score, age, gender, country); values are the headers actually present.
struct PersonaSchema {
    char delimiter = ',';
    std::map<std::string, std::string> column_overrides;

    std::string resolve(std::string_view canonical) const {
        auto it = column_overrides.find(std::string(canonical));
        return it == column_overrides.end() ? std::string(canonical) : it->second;
    }
};

namespace detail {

inline std::optional<double> parse_double_cell(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    const char* begin = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + cell.size()) return std::nullopt;
    return v;
}

inline std::optional<int> parse_int_cell(const std::string& cell) {
    auto v = parse_double_cell(cell);
    if (!v || *v != std::trunc(*v)) return std::nullopt;
    if (*v < -2147483648.0 || *v > 2147483647.0) return std::nullopt;
    return static_cast<int>(*v);
}

}  // namespace detail

// Loads and validates persona records in file order. Any invalid row aborts
// the load: the protocol needs a fully well-defined population, so there is
// no silent row skipping.
inline std::vector<PersonaRecord> load_personas(std::istream& in, const PersonaSchema& schema = {}) {
    const CsvTable table = read_delimited(in, schema.delimiter);

    auto require_column = [&](std::string_view canonical) {
        const std::string header = schema.resolve(canonical);
        auto idx = table.column(header);
        if (!idx) throw SchemaError("missing column \"" + header + "\"");
        return *idx;
    };

    const std::size_t id_col = require_column("persona_id");
    const std::size_t crt_col = require_column("crt_score");
    const std::size_t age_col = require_column("age");
    const std::size_t gender_col = require_column("gender");
    const std::size_t country_col = require_column("country");
    std::array<std::size_t, kIndicatorCount> indicator_cols{};
    for (std::size_t i = 0; i < kIndicatorCount; ++i) {
        indicator_cols[i] = require_column(indicator_table()[i].name);
    }

    std::vector<PersonaRecord> records;
    records.reserve(table.rows.size());
    std::set<std::string> seen_ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string row_label = "row " + std::to_string(r + 1);
        PersonaRecord record;
        record.persona_id = row[id_col];
        if (record.persona_id.empty()) throw SchemaError(row_label + ": empty persona_id");
        if (!seen_ids.insert(record.persona_id).second) {
            throw SchemaError(row_label + ": duplicate persona_id \"" + record.persona_id + "\"");
        }
        for (std::size_t i = 0; i < kIndicatorCount; ++i) {
            const std::string& cell = row[indicator_cols[i]];
            auto value = detail::parse_double_cell(cell);
            if (!value || !std::isfinite(*value)) {
                throw SchemaError(row_label + ": non-numeric value \"" + cell + "\" for \"" +
                                  std::string(indicator_table()[i].name) + "\"");
            }
            record.indicators[i] = *value;
        }
        auto crt = detail::parse_int_cell(row[crt_col]);
        if (!crt || *crt < 0 || *crt > 3) {
            throw SchemaError(row_label + ": crt_score \"" + row[crt_col] + "\" not in 0..3");
        }
        record.crt_score = *crt;
        auto age = detail::parse_int_cell(row[age_col]);
        if (!age || *age <= 0) {
            throw SchemaError(row_label + ": age \"" + row[age_col] + "\" not a positive integer");
        }
        record.age = *age;
        record.gender = row[gender_col];
        record.country = row[country_col];
        records.push_back(std::move(record));
    }
    return records;
}

inline std::vector<PersonaRecord> load_personas_file(const std::string& path,
                                                     const PersonaSchema& schema = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return load_personas(in, schema);
}

struct TraitLine {
    std::string label;
    double value = 0.0;
    bool operator==(const TraitLine&) const = default;
};

// Trait rows in the order prompts render them. Both orders are frozen
// because prompt bytes depend on them: the six-trait order follows the
// prompt template (Reciprocity:High, Anti-social Punishment,
// Risk Aversion:Gains, Risk Aversion: CR Certain, Ambiguity Aversion,
// Overprecision); the 21-trait order is the indicator table order.
inline std::vector<TraitLine> select_traits(const PersonaRecord& record, PersonaCondition condition) {
    static constexpr std::array<std::size_t, 6> six_order = {0, 4, 13, 10, 16, 20};
    std::vector<TraitLine> traits;
    switch (condition) {
        case PersonaCondition::no_persona:
            break;
        case PersonaCondition::six_traits:
            traits.reserve(six_order.size());
            for (auto i : six_order) {
                traits.push_back({std::string(indicator_table()[i].prompt_label), record.indicators[i]});
            }
            break;
        case PersonaCondition::twenty_one_traits:
            traits.reserve(kIndicatorCount);
            for (std::size_t i = 0; i < kIndicatorCount; ++i) {
                traits.push_back({std::string(indicator_table()[i].prompt_label), record.indicators[i]});
            }
            break;
    }
    return traits;
}

}  // namespace ultisim
