#pragma once

// Alignment metrics: exact 1-Wasserstein distance between empirical offer
// distributions (quantile formulation over the merged step grid), the
// frequency-weighted acceptance-gap distance for responders, and the report
// and figure-data emitters built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ultisim/csv.hpp"
#include "ultisim/errors.hpp"
#include "ultisim/format.hpp"
#include "ultisim/game.hpp"
#include "ultisim/persona.hpp"
#include "ultisim/run_log.hpp"

namespace ultisim {

// Offer fractions in [0,1] (coins divided by the pie), kept sorted.
struct EmpiricalDistribution {
    std::vector<double> samples;

    static EmpiricalDistribution from_fractions(std::vector<double> fractions) {
        if (fractions.empty()) {
            throw EvaluationError("empirical distribution needs at least one sample");
        }
        for (double f : fractions) {
            if (!(f >= 0.0 && f <= 1.0)) {
                throw EvaluationError("sample " + format_decimal(f) + " is outside [0,1]");
            }
        }
        std::sort(fractions.begin(), fractions.end());
        EmpiricalDistribution dist;
        dist.samples = std::move(fractions);
        return dist;
    }

    static EmpiricalDistribution from_offers(const std::vector<int>& offers,
                                             int total_coins = 100) {
        std::vector<double> fractions;
        fractions.reserve(offers.size());
        for (int o : offers) fractions.push_back(static_cast<double>(o) / total_coins);
        return from_fractions(std::move(fractions));
    }

    int n() const { return static_cast<int>(samples.size()); }
};

// Exact W1 on the line via |F_a^-1 - F_b^-1| integrated over the merged
// quantile grid. Breakpoints are compared as integer rationals over m*n, so
// unequal sample counts are handled exactly and the result is bitwise
// symmetric in its arguments.
inline double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto& x = a.samples;
    const auto& y = b.samples;
    if (x.empty() || y.empty()) throw EvaluationError("wasserstein1 needs nonempty samples");
    const std::int64_t m = static_cast<std::int64_t>(x.size());
    const std::int64_t n = static_cast<std::int64_t>(y.size());

    double total = 0.0;
    std::int64_t q = 0;  // current quantile, as a numerator over m*n
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        const std::int64_t qa = static_cast<std::int64_t>(i + 1) * n;
        const std::int64_t qb = static_cast<std::int64_t>(j + 1) * m;
        const std::int64_t next = std::min(qa, qb);
        total += std::abs(x[i] - y[j]) * static_cast<double>(next - q);
        q = next;
        if (qa == next) ++i;
        if (qb == next) ++j;
    }
    return total / (static_cast<double>(m) * static_cast<double>(n));
}

// --- Responder-side structures ----------------------------------------------

struct ResponderObservation {
    int offer = 0;
    Decision decision = Decision::reject;
    bool operator==(const ResponderObservation&) const = default;
};

struct AcceptancePoint {
    double rate = 0.0;
    int count = 0;
    bool operator==(const AcceptancePoint&) const = default;
};

struct AcceptanceCurve {
    std::map<int, AcceptancePoint> points;

    int total_count() const {
        int total = 0;
        for (const auto& [offer, point] : points) total += point.count;
        return total;
    }
};

inline AcceptanceCurve acceptance_curve(const std::vector<ResponderObservation>& observations) {
    if (observations.empty()) {
        throw EvaluationError("acceptance_curve needs at least one observation");
    }
    std::map<int, std::pair<int, int>> counts;  // offer -> (accepted, total)
    for (const auto& obs : observations) {
        auto& [accepted, total] = counts[obs.offer];
        if (obs.decision == Decision::accept) ++accepted;
        ++total;
    }
    AcceptanceCurve curve;
    for (const auto& [offer, c] : counts) {
        curve.points[offer] = {static_cast<double>(c.first) / c.second, c.second};
    }
    return curve;
}

// --- Human benchmark ----------------------------------------------------------

struct HumanBenchmark {
    std::vector<int> proposer_offers;
    std::vector<ResponderObservation> responder_observations;
};

// Proposer side: one integer offer per line. Responder side: CSV with header
// "offer,decision", decision in {accept, reject}. Offers must lie in 0..100.
inline HumanBenchmark load_human_benchmark(const std::string& proposer_path,
                                           const std::string& responder_path) {
    HumanBenchmark human;
    human.proposer_offers = load_offers_file(proposer_path);
    if (human.proposer_offers.empty()) {
        throw SchemaError(proposer_path + ": no offers");
    }
    for (int offer : human.proposer_offers) {
        if (offer < 0 || offer > 100) {
            throw SchemaError(proposer_path + ": offer " + std::to_string(offer) +
                              " is outside 0..100");
        }
    }

    const CsvTable table = read_delimited_file(responder_path);
    const auto offer_col = table.column("offer");
    const auto decision_col = table.column("decision");
    if (!offer_col || !decision_col) {
        throw SchemaError(responder_path + ": expected columns \"offer\" and \"decision\"");
    }
    if (table.rows.empty()) throw SchemaError(responder_path + ": no observations");
    for (std::size_t row = 0; row < table.rows.size(); ++row) {
        const std::string& offer_cell = table.rows[row][*offer_col];
        int offer = 0;
        try {
            std::size_t used = 0;
            offer = std::stoi(offer_cell, &used);
            if (used != offer_cell.size()) throw std::invalid_argument(offer_cell);
        } catch (const std::exception&) {
            throw SchemaError(responder_path + ": row " + std::to_string(row + 1) +
                              ": bad offer \"" + offer_cell + "\"");
        }
        if (offer < 0 || offer > 100) {
            throw SchemaError(responder_path + ": row " + std::to_string(row + 1) + ": offer " +
                              std::to_string(offer) + " is outside 0..100");
        }
        const auto decision = parse_decision(table.rows[row][*decision_col]);
        if (!decision) {
            throw SchemaError(responder_path + ": row " + std::to_string(row + 1) +
                              ": bad decision \"" + table.rows[row][*decision_col] + "\"");
        }
        human.responder_observations.push_back({offer, *decision});
    }
    return human;
}

// --- Extraction from run logs -------------------------------------------------

// Parsed offers of a proposer log, in coins; failed agents are excluded.
inline std::vector<int> offers_from_log(const RunLog& log) {
    if (log.header.role_token != "proposer") {
        throw EvaluationError("run " + log.header.run_id + " is not a proposer log");
    }
    std::vector<int> offers;
    for (const auto& entry : log.entries) {
        if (entry.parsed.type == ParsedOutcome::Type::offer) {
            offers.push_back(entry.parsed.offer_coins);
        }
    }
    return offers;
}

inline std::vector<ResponderObservation> observations_from_log(const RunLog& log) {
    if (log.header.role_token != "responder") {
        throw EvaluationError("run " + log.header.run_id + " is not a responder log");
    }
    std::vector<ResponderObservation> observations;
    for (const auto& entry : log.entries) {
        if (entry.parsed.type != ParsedOutcome::Type::decision) continue;
        if (!entry.offer_presented) {
            throw EvaluationError("run " + log.header.run_id + ": agent " +
                                  std::to_string(entry.agent_index) +
                                  " has a decision but no presented offer");
        }
        observations.push_back({*entry.offer_presented, entry.parsed.decision});
    }
    return observations;
}

inline int failed_count(const RunLog& log) {
    int failed = 0;
    for (const auto& entry : log.entries) {
        if (!entry.parsed.ok()) ++failed;
    }
    return failed;
}

// --- Distances -----------------------------------------------------------------

inline double proposer_distance(const RunLog& sim_log, const HumanBenchmark& human,
                                int total_coins = 100) {
    const auto offers = offers_from_log(sim_log);
    if (offers.empty()) {
        throw EvaluationError("run " + sim_log.header.run_id + " has no parsed offers");
    }
    return wasserstein1(EmpiricalDistribution::from_offers(offers, total_coins),
                        EmpiricalDistribution::from_offers(human.proposer_offers, total_coins));
}

// Human-offer-frequency-weighted mean absolute acceptance-rate gap. Each
// per-offer gap is the W1 distance between the two Bernoulli acceptance
// distributions at that offer. The protocol presents every human offer to
// the simulation, so a missing sim offer is a coverage violation, not a gap.
inline double responder_distance(const AcceptanceCurve& sim, const AcceptanceCurve& human) {
    if (sim.points.empty() || human.points.empty()) {
        throw EvaluationError("responder_distance needs nonempty curves");
    }
    const double total = static_cast<double>(human.total_count());
    double distance = 0.0;
    for (const auto& [offer, human_point] : human.points) {
        const auto it = sim.points.find(offer);
        if (it == sim.points.end()) {
            throw EvaluationError("coverage error: simulated curve has no responses at offer " +
                                  std::to_string(offer) + " observed in human data");
        }
        const double weight = human_point.count / total;
        distance += weight * std::abs(it->second.rate - human_point.rate);
    }
    return distance;
}

// --- Report ----------------------------------------------------------------------

struct ReportRow {
    std::string model;
    PersonaCondition condition = PersonaCondition::no_persona;
    double proposer_distance = 0.0;
    double responder_distance = 0.0;
    int proposer_failures = 0;
    int responder_failures = 0;
};

struct AlignmentReport {
    std::vector<ReportRow> rows;
    bool display_scale_100 = true;  // presentation multiplies by 10^2
};

struct EvaluatedRunPair {
    std::string model;
    PersonaCondition condition = PersonaCondition::no_persona;
    RunLog proposer_log;
    RunLog responder_log;
};

inline AlignmentReport build_report(const std::vector<EvaluatedRunPair>& runs,
                                    const HumanBenchmark& human) {
    const AcceptanceCurve human_curve = acceptance_curve(human.responder_observations);
    AlignmentReport report;
    for (const auto& run : runs) {
        ReportRow row;
        row.model = run.model;
        row.condition = run.condition;
        row.proposer_distance = proposer_distance(run.proposer_log, human);
        row.responder_distance =
            responder_distance(acceptance_curve(observations_from_log(run.responder_log)),
                               human_curve);
        row.proposer_failures = failed_count(run.proposer_log);
        row.responder_failures = failed_count(run.responder_log);
        if (!std::isfinite(row.proposer_distance) || !std::isfinite(row.responder_distance)) {
            throw EvaluationError("non-finite distance for model " + run.model);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace detail {

inline std::string display_distance(double value, bool scale_100) {
    return format_decimal(scale_100 ? value * 100.0 : value);
}

}  // namespace detail

// Markdown table, rows grouped by model in input order with conditions as
// given; per-model minima in each distance column are bolded.
inline std::string format_report_table(const AlignmentReport& report) {
    std::string out = "| Model | Persona | Proposer | Responder |\n| --- | --- | --- | --- |\n";
    std::map<std::string, std::pair<double, double>> minima;
    for (const auto& row : report.rows) {
        auto [it, inserted] =
            minima.emplace(row.model, std::make_pair(row.proposer_distance,
                                                     row.responder_distance));
        if (!inserted) {
            it->second.first = std::min(it->second.first, row.proposer_distance);
            it->second.second = std::min(it->second.second, row.responder_distance);
        }
    }
    for (const auto& row : report.rows) {
        const auto& [min_p, min_r] = minima.at(row.model);
        std::string p = detail::display_distance(row.proposer_distance, report.display_scale_100);
        std::string r = detail::display_distance(row.responder_distance, report.display_scale_100);
        if (row.proposer_distance == min_p) p = "**" + p + "**";
        if (row.responder_distance == min_r) r = "**" + r + "**";
        out += "| " + row.model + " | " + std::string(condition_display_name(row.condition)) +
               " | " + p + " | " + r + " |\n";
    }
    return out;
}

// Unscaled distances, machine-readable.
inline void write_report_csv(const AlignmentReport& report, std::ostream& out) {
    out << "model,condition,proposer_distance,responder_distance,proposer_failures,"
           "responder_failures\n";
    for (const auto& row : report.rows) {
        out << row.model << ',' << condition_snake(row.condition) << ','
            << format_decimal(row.proposer_distance) << ','
            << format_decimal(row.responder_distance) << ',' << row.proposer_failures << ','
            << row.responder_failures << '\n';
    }
}

// --- Figure data -------------------------------------------------------------------

namespace detail {

inline std::string sanitize_for_filename(std::string_view name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out;
}

}  // namespace detail

// Per model: (a) an offer histogram CSV (offer, human_count, one count
// column per condition) and (b) an acceptance-curve CSV (offer, source,
// acceptance_rate, count) with rows ordered by offer then source. Returns
// the written paths.
inline std::vector<std::string> emit_figure_data(const std::vector<EvaluatedRunPair>& runs,
                                                 const HumanBenchmark& human,
                                                 const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    std::vector<std::string> models;
    for (const auto& run : runs) {
        if (std::find(models.begin(), models.end(), run.model) == models.end()) {
            models.push_back(run.model);
        }
    }

    std::map<int, int> human_offer_counts;
    for (int offer : human.proposer_offers) ++human_offer_counts[offer];
    const AcceptanceCurve human_curve = acceptance_curve(human.responder_observations);

    std::vector<std::string> written;
    for (const auto& model : models) {
        std::vector<const EvaluatedRunPair*> model_runs;
        for (const auto& condition : all_conditions()) {
            for (const auto& run : runs) {
                if (run.model == model && run.condition == condition) {
                    model_runs.push_back(&run);
                }
            }
        }

        const std::string tag = detail::sanitize_for_filename(model);
        const auto histogram_path =
            (std::filesystem::path(out_dir) / ("offer_histogram_" + tag + ".csv")).string();
        {
            std::ofstream out(histogram_path, std::ios::binary);
            if (!out) throw IoError("cannot write " + histogram_path);
            out << "offer,human_count";
            for (const auto* run : model_runs) out << ',' << condition_snake(run->condition);
            out << '\n';

            std::vector<std::map<int, int>> sim_counts;
            std::map<int, int> all_offers = human_offer_counts;
            for (const auto* run : model_runs) {
                std::map<int, int> counts;
                for (int offer : offers_from_log(run->proposer_log)) ++counts[offer];
                for (const auto& [offer, count] : counts) all_offers.emplace(offer, 0);
                sim_counts.push_back(std::move(counts));
            }
            for (const auto& [offer, unused] : all_offers) {
                const auto hit = human_offer_counts.find(offer);
                out << offer << ',' << (hit == human_offer_counts.end() ? 0 : hit->second);
                for (const auto& counts : sim_counts) {
                    const auto it = counts.find(offer);
                    out << ',' << (it == counts.end() ? 0 : it->second);
                }
                out << '\n';
            }
        }
        written.push_back(histogram_path);

        const auto acceptance_path =
            (std::filesystem::path(out_dir) / ("acceptance_curve_" + tag + ".csv")).string();
        {
            std::ofstream out(acceptance_path, std::ios::binary);
            if (!out) throw IoError("cannot write " + acceptance_path);
            out << "offer,source,acceptance_rate,count\n";

            std::vector<std::pair<std::string, AcceptanceCurve>> sources;
            sources.emplace_back("human", human_curve);
            for (const auto* run : model_runs) {
                sources.emplace_back(
                    std::string(condition_snake(run->condition)),
                    acceptance_curve(observations_from_log(run->responder_log)));
            }
            std::map<int, int> all_offers;
            for (const auto& [name, curve] : sources) {
                for (const auto& [offer, point] : curve.points) all_offers.emplace(offer, 0);
            }
            for (const auto& [offer, unused] : all_offers) {
                for (const auto& [name, curve] : sources) {
                    const auto it = curve.points.find(offer);
                    if (it == curve.points.end()) continue;
                    out << offer << ',' << name << ',' << format_decimal(it->second.rate) << ','
                        << it->second.count << '\n';
                }
            }
        }
        written.push_back(acceptance_path);
    }
    return written;
}

}  // namespace ultisim
