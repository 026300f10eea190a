// Command-line front end: validate-data, simulate, evaluate, report.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ultisim/ultisim.hpp"

namespace {

using namespace ultisim;

struct SimulateArgs {
    std::string config_path;
    std::string backend_override;
    std::string role_token = "proposer";
    std::string condition_token = "none";
    int n_agents = 0;
    std::string run_id;
    bool resume = false;
    std::string out_dir_override;
};

struct EvaluateArgs {
    std::string proposer_log;
    std::string responder_log;
    std::string human_proposer;
    std::string human_responder;
};

struct RunSpec {
    std::string model;
    PersonaCondition condition;
    std::string proposer_log;
    std::string responder_log;
};

struct ReportArgs {
    std::vector<std::string> run_specs;
    std::string human_proposer;
    std::string human_responder;
    std::string out_dir = "report";
};

Config load_config_or_default(const std::string& path) {
    if (path.empty()) return Config{};
    return load_config(path);
}

int cmd_validate_data(const std::string& config_path) {
    const Config cfg = load_config_or_default(config_path);
    if (cfg.data.personas.empty()) {
        throw ConfigError("config: data.personas is required for validate-data");
    }
    PersonaSchema schema{cfg.data.delimiter, cfg.data.columns};
    const auto personas = load_personas_file(cfg.data.personas, schema);
    std::cout << cfg.data.personas << ": " << personas.size() << " persona records, "
              << kIndicatorCount << " indicators each\n";
    if (!cfg.data.offers.empty()) {
        const auto offers = load_offers_file(cfg.data.offers);
        int lo = offers.empty() ? 0 : offers.front();
        int hi = lo;
        for (int o : offers) {
            lo = std::min(lo, o);
            hi = std::max(hi, o);
            if (o < 0 || o > cfg.game.total_coins) {
                throw SchemaError(cfg.data.offers + ": offer " + std::to_string(o) +
                                  " is outside 0.." + std::to_string(cfg.game.total_coins));
            }
        }
        std::cout << cfg.data.offers << ": " << offers.size() << " offers in " << lo << ".." << hi
                  << "\n";
    }
    std::cout << "ok\n";
    return 0;
}

int cmd_simulate(const SimulateArgs& args) {
    Config cfg = load_config_or_default(args.config_path);
    if (!args.backend_override.empty()) cfg.backend.kind = args.backend_override;
    if (!args.out_dir_override.empty()) cfg.run.out_dir = args.out_dir_override;

    const auto role = parse_role(args.role_token);
    if (!role) throw ConfigError("unknown role \"" + args.role_token + "\"");
    const auto condition = parse_condition(args.condition_token);
    if (!condition) throw ConfigError("unknown condition \"" + args.condition_token + "\"");

    RunPlan plan;
    plan.config = std::move(cfg);
    plan.role = *role;
    plan.condition = *condition;
    plan.run_id = args.run_id;
    plan.n_agents = args.n_agents;

    const PreparedRun run = prepare_run(std::move(plan));
    const auto backend = make_backend(run);
    const RunResult result = run_experiment(run, *backend, args.resume);

    const RunSummary& s = result.summary;
    std::cout << "run " << run.plan.run_id << ": " << s.n_ok << "/" << s.n_agents << " ok ("
              << s.n_parse_failures << " parse, " << s.n_range_failures << " range, "
              << s.n_transport_failures << " transport failures; " << s.total_parse_retries
              << " re-asks), log " << result.log_path << "\n";
    if (s.degraded) {
        std::cerr << "warning: run " << run.plan.run_id << " is degraded ("
                  << s.n_failed() << " of " << s.n_agents << " agents failed)\n";
    }
    return 0;
}

int cmd_evaluate(const EvaluateArgs& args) {
    const HumanBenchmark human = load_human_benchmark(args.human_proposer, args.human_responder);
    if (args.proposer_log.empty() && args.responder_log.empty()) {
        throw ConfigError("evaluate needs --proposer-log and/or --responder-log");
    }
    if (!args.proposer_log.empty()) {
        const auto loaded = read_run_log(args.proposer_log);
        const double d = proposer_distance(loaded.log, human);
        std::cout << "proposer distance (run " << loaded.log.header.run_id
                  << "): " << format_decimal(d) << "\n";
    }
    if (!args.responder_log.empty()) {
        const auto loaded = read_run_log(args.responder_log);
        const double d = responder_distance(acceptance_curve(observations_from_log(loaded.log)),
                                            acceptance_curve(human.responder_observations));
        std::cout << "responder distance (run " << loaded.log.header.run_id
                  << "): " << format_decimal(d) << "\n";
    }
    return 0;
}

RunSpec parse_run_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = spec.find(',', start);
        parts.push_back(spec.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (parts.size() != 4) {
        throw ConfigError("--run expects model,condition,proposer_log,responder_log: \"" + spec +
                          "\"");
    }
    const auto condition = parse_condition(parts[1]);
    if (!condition) throw ConfigError("unknown condition \"" + parts[1] + "\" in --run");
    return {parts[0], *condition, parts[2], parts[3]};
}

int cmd_report(const ReportArgs& args) {
    const HumanBenchmark human = load_human_benchmark(args.human_proposer, args.human_responder);
    std::vector<EvaluatedRunPair> runs;
    for (const auto& spec_text : args.run_specs) {
        const RunSpec spec = parse_run_spec(spec_text);
        EvaluatedRunPair pair;
        pair.model = spec.model;
        pair.condition = spec.condition;
        pair.proposer_log = read_run_log(spec.proposer_log).log;
        pair.responder_log = read_run_log(spec.responder_log).log;
        runs.push_back(std::move(pair));
    }

    const AlignmentReport report = build_report(runs, human);
    std::cout << format_report_table(report);

    std::filesystem::create_directories(args.out_dir);
    const auto csv_path = (std::filesystem::path(args.out_dir) / "report.csv").string();
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + csv_path);
        write_report_csv(report, out);
    }
    std::cerr << "wrote " << csv_path << "\n";
    for (const auto& path : emit_figure_data(runs, human, args.out_dir)) {
        std::cerr << "wrote " << path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ultisim: persona-conditioned one-shot ultimatum game simulator"};
    app.require_subcommand(1);

    std::string validate_config;
    auto* validate = app.add_subcommand("validate-data", "Check input data files against schema");
    validate->add_option("--config", validate_config, "JSON config file");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run one experiment (one condition, one role)");
    simulate->add_option("--config", sim.config_path, "JSON config file");
    simulate->add_option("--backend", sim.backend_override, "Backend kind: http|synthetic|replay");
    simulate->add_option("--role", sim.role_token, "proposer|responder")->capture_default_str();
    simulate->add_option("--condition", sim.condition_token, "none|six|twenty-one")
        ->capture_default_str();
    simulate->add_option("--n", sim.n_agents, "Number of agents (default: config run.n_agents)");
    simulate->add_option("--run-id", sim.run_id, "Run identifier (default: derived)");
    simulate->add_flag("--resume", sim.resume, "Resume a partial run log");
    simulate->add_option("--out-dir", sim.out_dir_override, "Run log directory");

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "Compute distances for recorded logs");
    evaluate->add_option("--proposer-log", eval.proposer_log, "Proposer run log");
    evaluate->add_option("--responder-log", eval.responder_log, "Responder run log");
    evaluate->add_option("--human-proposer", eval.human_proposer, "Human offers, one per line")
        ->required();
    evaluate
        ->add_option("--human-responder", eval.human_responder,
                     "Human responder observations CSV (offer,decision)")
        ->required();

    ReportArgs rep;
    auto* report = app.add_subcommand("report", "Build the distance table and figure data");
    report
        ->add_option("--run", rep.run_specs,
                     "model,condition,proposer_log,responder_log (repeatable)")
        ->required();
    report->add_option("--human-proposer", rep.human_proposer, "Human offers, one per line")
        ->required();
    report
        ->add_option("--human-responder", rep.human_responder,
                     "Human responder observations CSV (offer,decision)")
        ->required();
    report->add_option("--out-dir", rep.out_dir, "Output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate_data(validate_config);
        if (simulate->parsed()) return cmd_simulate(sim);
        if (evaluate->parsed()) return cmd_evaluate(eval);
        if (report->parsed()) return cmd_report(rep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
