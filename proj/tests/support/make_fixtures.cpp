// Regenerates the checked-in test fixtures. Data files are frozen: existing
// files are left alone unless --force is given, because the replay logs and
// goldens embed hashes of the data files' exact bytes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ultisim/ultisim.hpp"

#include "test_support.hpp"

namespace {

using namespace ultisim;

bool g_force = false;

bool should_write(const std::string& path) {
    if (!g_force && std::filesystem::exists(path)) {
        std::cout << "exists, skipping: " << path << "\n";
        return false;
    }
    return true;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    std::cout << "wrote " << path << "\n";
}

std::vector<PersonaRecord> generate_personas(int count) {
    std::mt19937 rng(461338);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_int_distribution<int> crt(0, 3);
    std::uniform_int_distribution<int> age(18, 80);
    std::uniform_int_distribution<int> gender_pick(0, 19);

    std::vector<PersonaRecord> personas;
    personas.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        PersonaRecord p;
        char id[16];
        std::snprintf(id, sizeof id, "P%04d", i + 1);
        p.persona_id = id;
        for (auto& value : p.indicators) value = z(rng);
        p.crt_score = crt(rng);
        p.age = age(rng);
        const int g = gender_pick(rng);
        p.gender = g < 10 ? "female" : (g < 19 ? "male" : "nonbinary");
        p.country = "US";
        personas.push_back(std::move(p));
    }
    return personas;
}

std::string personas_csv(const std::vector<PersonaRecord>& personas) {
    std::string out = "persona_id";
    for (const auto& indicator : indicator_table()) {
        out += ',';
        out += indicator.name;
    }
    out += ",crt_score,age,gender,country\n";
    for (const auto& p : personas) {
        out += p.persona_id;
        for (double v : p.indicators) {
            out += ',';
            out += format_decimal(v);
        }
        out += ',' + std::to_string(p.crt_score) + ',' + std::to_string(p.age) + ',' + p.gender +
               ',' + p.country + '\n';
    }
    return out;
}

std::vector<int> generate_human_offers(int count) {
    std::mt19937 rng(882200);
    std::normal_distribution<double> spread(40.0, 10.0);
    std::uniform_int_distribution<int> fair_pick(0, 3);
    std::vector<int> offers;
    offers.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        if (fair_pick(rng) == 0) {
            offers.push_back(50);  // the even-split spike seen in human play
        } else {
            offers.push_back(std::clamp(static_cast<int>(std::lround(spread(rng))), 0, 100));
        }
    }
    return offers;
}

std::string int_lines(const std::vector<int>& values) {
    std::string out;
    for (int v : values) out += std::to_string(v) + '\n';
    return out;
}

// Human responder decisions over the presented offers: accept above a
// per-person threshold drawn once per observation.
std::string responder_csv(const std::vector<int>& presented) {
    std::mt19937 rng(133100);
    std::normal_distribution<double> threshold(25.0, 10.0);
    std::string out = "offer,decision\n";
    for (int offer : presented) {
        const int cut = std::clamp(static_cast<int>(std::lround(threshold(rng))), 0, 100);
        out += std::to_string(offer) + ',' + (offer >= cut ? "accept" : "reject") + '\n';
    }
    return out;
}

Config fixture_config(const std::string& fixture_dir, int n_agents) {
    Config cfg;
    cfg.backend.kind = "synthetic";
    cfg.backend.model = "synthetic-oracle";
    cfg.data.personas = fixture_dir + "/personas_" + std::to_string(n_agents) + ".csv";
    cfg.data.offers = fixture_dir + "/offers_" + std::to_string(n_agents) + ".txt";
    cfg.run.n_agents = n_agents;
    cfg.run.out_dir = fixture_dir + "/replay";
    return cfg;
}

void generate_replay_logs(const std::string& fixture_dir) {
    const std::array<std::pair<PersonaCondition, const char*>, 3> conditions = {{
        {PersonaCondition::no_persona, "none"},
        {PersonaCondition::six_traits, "six"},
        {PersonaCondition::twenty_one_traits, "twentyone"},
    }};
    for (Role role : {Role::proposer, Role::responder}) {
        for (const auto& [condition, tag] : conditions) {
            RunPlan plan;
            plan.config = fixture_config(fixture_dir, 100);
            plan.condition = condition;
            plan.role = role;
            plan.run_id =
                std::string("fixture-") + std::string(to_string(role)) + "-" + tag + "-100";
            plan.n_agents = 100;

            const PreparedRun run = prepare_run(plan);
            if (!should_write(run.log_path)) continue;
            std::filesystem::remove(run.log_path);
            const auto backend = make_backend(run);
            const RunResult result = run_experiment(run, *backend);
            std::cout << "wrote " << result.log_path << " (" << result.summary.n_ok << " ok)\n";
        }
    }
}

void generate_report_goldens(const std::string& fixture_dir) {
    const HumanBenchmark human = load_human_benchmark(fixture_dir + "/human_proposer_100.txt",
                                                      fixture_dir + "/human_responder_100.csv");
    std::vector<EvaluatedRunPair> runs;
    for (const auto& [condition, tag] :
         std::array<std::pair<PersonaCondition, const char*>, 3>{{
             {PersonaCondition::no_persona, "none"},
             {PersonaCondition::six_traits, "six"},
             {PersonaCondition::twenty_one_traits, "twentyone"},
         }}) {
        EvaluatedRunPair pair;
        pair.model = "synthetic-oracle";
        pair.condition = condition;
        pair.proposer_log =
            read_run_log(fixture_dir + "/replay/fixture-proposer-" + tag + "-100.jsonl").log;
        pair.responder_log =
            read_run_log(fixture_dir + "/replay/fixture-responder-" + tag + "-100.jsonl").log;
        runs.push_back(std::move(pair));
    }

    const AlignmentReport report = build_report(runs, human);
    const std::string golden_dir = fixture_dir + "/golden";
    if (should_write(golden_dir + "/report_table.md")) {
        write_text(golden_dir + "/report_table.md", format_report_table(report));
    }
    if (should_write(golden_dir + "/report.csv")) {
        std::ostringstream csv;
        write_report_csv(report, csv);
        write_text(golden_dir + "/report.csv", csv.str());
    }
    if (should_write(golden_dir + "/offer_histogram_synthetic-oracle.csv")) {
        for (const auto& path : emit_figure_data(runs, human, golden_dir)) {
            std::cout << "wrote " << path << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--force") g_force = true;
    }
    const std::string fixture_dir = ULTISIM_FIXTURE_DIR;
    std::filesystem::create_directories(fixture_dir + "/replay");
    std::filesystem::create_directories(fixture_dir + "/golden");

    try {
        const auto personas = generate_personas(1000);
        if (should_write(fixture_dir + "/personas_1000.csv")) {
            write_text(fixture_dir + "/personas_1000.csv", personas_csv(personas));
        }
        if (should_write(fixture_dir + "/personas_100.csv")) {
            write_text(fixture_dir + "/personas_100.csv",
                       personas_csv({personas.begin(), personas.begin() + 100}));
        }
        if (should_write(fixture_dir + "/persona_reference.csv")) {
            write_text(fixture_dir + "/persona_reference.csv",
                       personas_csv({testsup::reference_persona()}));
        }

        const auto human_offers = generate_human_offers(1000);
        if (should_write(fixture_dir + "/human_proposer_1000.txt")) {
            write_text(fixture_dir + "/human_proposer_1000.txt", int_lines(human_offers));
        }
        auto presented = human_offers;
        std::shuffle(presented.begin(), presented.end(), std::mt19937(771021));
        if (should_write(fixture_dir + "/offers_1000.txt")) {
            write_text(fixture_dir + "/offers_1000.txt", int_lines(presented));
        }
        if (should_write(fixture_dir + "/human_responder_1000.csv")) {
            write_text(fixture_dir + "/human_responder_1000.csv", responder_csv(presented));
        }

        const std::vector<int> presented_100(presented.begin(), presented.begin() + 100);
        if (should_write(fixture_dir + "/offers_100.txt")) {
            write_text(fixture_dir + "/offers_100.txt", int_lines(presented_100));
        }
        if (should_write(fixture_dir + "/human_proposer_100.txt")) {
            // Same multiset as the presented offers so the benchmark and the
            // simulated responders share coverage by construction.
            write_text(fixture_dir + "/human_proposer_100.txt", int_lines(presented_100));
        }
        if (should_write(fixture_dir + "/human_responder_100.csv")) {
            write_text(fixture_dir + "/human_responder_100.csv", responder_csv(presented_100));
        }

        generate_replay_logs(fixture_dir);
        generate_report_goldens(fixture_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
