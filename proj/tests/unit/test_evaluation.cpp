#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ultisim/evaluation.hpp"

#include "../support/test_support.hpp"

using namespace ultisim;

namespace {

EmpiricalDistribution dist(std::vector<double> fractions) {
    return EmpiricalDistribution::from_fractions(std::move(fractions));
}

std::vector<double> random_fractions(std::mt19937& rng, int n) {
    // 0.01 grid keeps expected values exactly computable by hand.
    std::uniform_int_distribution<int> coins(0, 100);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(coins(rng) / 100.0);
    return out;
}

}  // namespace

TEST_CASE("EmpiricalDistribution validates and sorts its samples") {
    const auto d = dist({0.9, 0.1, 0.5});
    CHECK(d.samples == std::vector<double>{0.1, 0.5, 0.9});
    CHECK(d.n() == 3);

    CHECK_THROWS_AS(dist({}), EvaluationError);
    CHECK_THROWS_AS(dist({0.5, 1.5}), EvaluationError);
    CHECK_THROWS_AS(dist({-0.1}), EvaluationError);

    const auto from_coins = EmpiricalDistribution::from_offers({40, 50, 0, 100});
    CHECK(from_coins.samples == std::vector<double>{0.0, 0.4, 0.5, 1.0});
    const auto small_pie = EmpiricalDistribution::from_offers({5}, 10);
    CHECK(small_pie.samples == std::vector<double>{0.5});
}

TEST_CASE("wasserstein1 reproduces hand-computed values") {
    CHECK(wasserstein1(dist({0.0, 1.0}), dist({0.5, 0.5})) == 0.5);
    CHECK(wasserstein1(dist({0.0}), dist({0.0, 1.0})) == 0.5);
    CHECK(wasserstein1(dist({0.4}), dist({0.5})) == Catch::Approx(0.1).margin(1e-15));
    CHECK(wasserstein1(dist({0.0, 0.0, 1.0}), dist({1.0})) ==
          Catch::Approx(2.0 / 3.0).margin(1e-15));

    const auto empty_arg = [] { return wasserstein1(EmpiricalDistribution{}, dist({0.5})); };
    CHECK_THROWS_AS(empty_arg(), EvaluationError);
}

TEST_CASE("wasserstein1 is a metric on sampled distributions") {
    std::mt19937 rng(20240817);
    std::uniform_int_distribution<int> size(1, 40);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = dist(random_fractions(rng, size(rng)));
        const auto b = dist(random_fractions(rng, size(rng)));
        const auto c = dist(random_fractions(rng, size(rng)));
        const double ab = wasserstein1(a, b);
        const double ba = wasserstein1(b, a);
        const double ac = wasserstein1(a, c);
        const double cb = wasserstein1(c, b);
        CHECK(ab >= 0.0);
        CHECK(ab == ba);  // bitwise symmetry
        CHECK(ab <= ac + cb + 1e-9);
        CHECK(wasserstein1(a, a) == 0.0);
    }
}

TEST_CASE("wasserstein1 matches two independent oracles") {
    std::mt19937 rng(7011);
    std::uniform_int_distribution<int> size(1, 30);
    for (int trial = 0; trial < 100; ++trial) {
        const auto xs = random_fractions(rng, size(rng));
        const auto ys = random_fractions(rng, size(rng));
        const double got = wasserstein1(dist(xs), dist(ys));
        CHECK(got == Catch::Approx(testsup::cdf_area_w1(xs, ys)).margin(1e-9));
        CHECK(got == Catch::Approx(testsup::replication_w1(xs, ys)).margin(1e-9));
    }
    // Equal sizes small enough for the exact matching oracle.
    std::uniform_int_distribution<int> small(1, 10);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = small(rng);
        const auto xs = random_fractions(rng, n);
        const auto ys = random_fractions(rng, n);
        CHECK(wasserstein1(dist(xs), dist(ys)) ==
              Catch::Approx(testsup::assignment_w1(xs, ys)).margin(1e-9));
    }
}

TEST_CASE("wasserstein1 is translation invariant, and shifts cost their length") {
    std::mt19937 rng(5150);
    for (int trial = 0; trial < 30; ++trial) {
        auto xs = random_fractions(rng, 17);
        auto ys = random_fractions(rng, 5);
        const double base = wasserstein1(dist(xs), dist(ys));
        // Shrink into [0, 0.5] then shift both by the same constant.
        for (auto& v : xs) v *= 0.5;
        for (auto& v : ys) v *= 0.5;
        const double half = wasserstein1(dist(xs), dist(ys));
        CHECK(half == Catch::Approx(base * 0.5).margin(1e-12));
        auto xs_shifted = xs;
        auto ys_shifted = ys;
        for (auto& v : xs_shifted) v += 0.25;
        for (auto& v : ys_shifted) v += 0.25;
        CHECK(wasserstein1(dist(xs_shifted), dist(ys_shifted)) ==
              Catch::Approx(half).margin(1e-12));
    }
    // A pure shift of the same sample set costs exactly the shift.
    auto xs = random_fractions(rng, 23);
    for (auto& v : xs) v *= 0.5;
    auto shifted = xs;
    for (auto& v : shifted) v += 0.25;
    CHECK(wasserstein1(dist(xs), dist(shifted)) == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("acceptance_curve aggregates per-offer rates and counts") {
    const std::vector<ResponderObservation> observations = {
        {10, Decision::reject},
        {10, Decision::accept},
        {50, Decision::accept},
    };
    const auto curve = acceptance_curve(observations);
    REQUIRE(curve.points.size() == 2);
    CHECK(curve.points.at(10) == AcceptancePoint{0.5, 2});
    CHECK(curve.points.at(50) == AcceptancePoint{1.0, 1});
    CHECK(curve.total_count() == 3);

    CHECK_THROWS_AS(acceptance_curve({}), EvaluationError);
}

TEST_CASE("responder_distance weights gaps by human offer frequency") {
    AcceptanceCurve human;
    human.points[20] = {0.5, 2};
    human.points[50] = {1.0, 2};
    AcceptanceCurve sim;
    sim.points[20] = {1.0, 2};
    sim.points[50] = {1.0, 2};
    CHECK(responder_distance(sim, human) == 0.25);

    // Extra simulated offers are ignored; they carry no human weight.
    sim.points[77] = {0.0, 5};
    CHECK(responder_distance(sim, human) == 0.25);

    // Identical curves are at distance zero exactly.
    CHECK(responder_distance(human, human) == 0.0);
}

TEST_CASE("responder_distance raises a coverage error for missing offers") {
    AcceptanceCurve human;
    human.points[20] = {0.5, 2};
    human.points[50] = {1.0, 2};
    AcceptanceCurve sim;
    sim.points[20] = {1.0, 2};
    CHECK_THROWS_MATCHES(responder_distance(sim, human), EvaluationError,
                         Catch::Matchers::Message(
                             "coverage error: simulated curve has no responses at offer 50 "
                             "observed in human data"));

    const auto empty_curve = [&] { return responder_distance(AcceptanceCurve{}, human); };
    CHECK_THROWS_AS(empty_curve(), EvaluationError);
}

TEST_CASE("responder_distance stays within the unit interval") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> rate(0.0, 1.0);
    std::uniform_int_distribution<int> count(1, 9);
    for (int trial = 0; trial < 50; ++trial) {
        AcceptanceCurve human;
        AcceptanceCurve sim;
        for (int offer = 0; offer <= 100; offer += 10) {
            human.points[offer] = {rate(rng), count(rng)};
            sim.points[offer] = {rate(rng), count(rng)};
        }
        const double d = responder_distance(sim, human);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
}

// ---------------------------------------------------------------------------
// Log extraction and distances over logs

namespace {

RunLog proposer_log_with(const std::vector<int>& offers, int failures = 0,
                         const std::string& run_id = "p") {
    RunLog log;
    log.header.run_id = run_id;
    log.header.role_token = "proposer";
    log.header.n_agents = static_cast<int>(offers.size()) + failures;
    int index = 0;
    for (int coins : offers) {
        RunLogEntry entry;
        entry.run_id = run_id;
        entry.agent_index = index++;
        entry.parsed = ParsedOutcome::make_offer(coins);
        log.entries.push_back(entry);
    }
    for (int f = 0; f < failures; ++f) {
        RunLogEntry entry;
        entry.run_id = run_id;
        entry.agent_index = index++;
        entry.parsed = ParsedOutcome::make_failure(FailureKind::parse_failure);
        log.entries.push_back(entry);
    }
    return log;
}

RunLog responder_log_with(const std::vector<ResponderObservation>& observations,
                          const std::string& run_id = "r") {
    RunLog log;
    log.header.run_id = run_id;
    log.header.role_token = "responder";
    log.header.n_agents = static_cast<int>(observations.size());
    int index = 0;
    for (const auto& obs : observations) {
        RunLogEntry entry;
        entry.run_id = run_id;
        entry.agent_index = index++;
        entry.offer_presented = obs.offer;
        entry.parsed = ParsedOutcome::make_decision(obs.decision);
        log.entries.push_back(entry);
    }
    return log;
}

}  // namespace

TEST_CASE("offers_from_log keeps parsed offers and drops failures") {
    const auto log = proposer_log_with({40, 50, 30}, 2);
    CHECK(offers_from_log(log) == std::vector<int>{40, 50, 30});
    CHECK(failed_count(log) == 2);

    const auto wrong_role = responder_log_with({{40, Decision::accept}});
    CHECK_THROWS_AS(offers_from_log(wrong_role), EvaluationError);
}

TEST_CASE("observations_from_log pairs decisions with presented offers") {
    const auto log = responder_log_with({{10, Decision::reject}, {60, Decision::accept}});
    const auto observations = observations_from_log(log);
    REQUIRE(observations.size() == 2);
    CHECK(observations[0] == ResponderObservation{10, Decision::reject});
    CHECK(observations[1] == ResponderObservation{60, Decision::accept});

    CHECK_THROWS_AS(observations_from_log(proposer_log_with({40})), EvaluationError);

    auto corrupt = responder_log_with({{10, Decision::reject}});
    corrupt.entries[0].offer_presented.reset();
    CHECK_THROWS_AS(observations_from_log(corrupt), EvaluationError);

    // Failed agents simply do not contribute observations.
    auto with_failure = responder_log_with({{10, Decision::reject}});
    RunLogEntry failed;
    failed.run_id = "r";
    failed.agent_index = 1;
    failed.parsed = ParsedOutcome::make_failure(FailureKind::transport_failure);
    with_failure.entries.push_back(failed);
    CHECK(observations_from_log(with_failure).size() == 1);
}

TEST_CASE("proposer_distance measures the offer-distribution gap") {
    HumanBenchmark human;
    human.proposer_offers = std::vector<int>(100, 50);
    const auto log = proposer_log_with(std::vector<int>(25, 40));
    CHECK(proposer_distance(log, human) == Catch::Approx(0.10).margin(1e-15));
    // Self-distance is exactly zero.
    HumanBenchmark same;
    same.proposer_offers = {40, 40, 40};
    CHECK(proposer_distance(proposer_log_with({40, 40, 40}), same) == 0.0);

    const auto all_failed = proposer_log_with({}, 3);
    CHECK_THROWS_MATCHES(proposer_distance(all_failed, human), EvaluationError,
                         Catch::Matchers::Message("run p has no parsed offers"));
}

TEST_CASE("load_human_benchmark reads both sides and validates them") {
    const auto scratch = testsup::make_scratch_dir("benchmark");
    const auto proposer_path = scratch + "/p.txt";
    const auto responder_path = scratch + "/r.csv";
    testsup::write_file(proposer_path, "50\n40\n50\n");
    testsup::write_file(responder_path, "offer,decision\n20,reject\n20,accept\n50,accept\n");

    const auto human = load_human_benchmark(proposer_path, responder_path);
    CHECK(human.proposer_offers == std::vector<int>{50, 40, 50});
    REQUIRE(human.responder_observations.size() == 3);
    CHECK(human.responder_observations[0] == ResponderObservation{20, Decision::reject});
    CHECK(human.responder_observations[2] == ResponderObservation{50, Decision::accept});

    SECTION("proposer file errors") {
        testsup::write_file(proposer_path, "\n");
        CHECK_THROWS_AS(load_human_benchmark(proposer_path, responder_path), SchemaError);
        testsup::write_file(proposer_path, "50\n101\n");
        CHECK_THROWS_AS(load_human_benchmark(proposer_path, responder_path), SchemaError);
        CHECK_THROWS_AS(load_human_benchmark(scratch + "/missing.txt", responder_path), IoError);
    }
    SECTION("responder file errors") {
        testsup::write_file(responder_path, "offer,verdict\n20,accept\n");
        CHECK_THROWS_AS(load_human_benchmark(proposer_path, responder_path), SchemaError);
        testsup::write_file(responder_path, "offer,decision\n");
        CHECK_THROWS_AS(load_human_benchmark(proposer_path, responder_path), SchemaError);
        testsup::write_file(responder_path, "offer,decision\ntwenty,accept\n");
        CHECK_THROWS_MATCHES(load_human_benchmark(proposer_path, responder_path), SchemaError,
                             Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                                 "row 1: bad offer \"twenty\"")));
        testsup::write_file(responder_path, "offer,decision\n20,accept\n30,shrug\n");
        CHECK_THROWS_MATCHES(load_human_benchmark(proposer_path, responder_path), SchemaError,
                             Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                                 "row 2: bad decision \"shrug\"")));
        testsup::write_file(responder_path, "offer,decision\n104,accept\n");
        CHECK_THROWS_AS(load_human_benchmark(proposer_path, responder_path), SchemaError);
    }
}

// ---------------------------------------------------------------------------
// Report assembly and rendering

namespace {

// All offer fractions used here are exact binary values (0, 1/4, 1/2, 1),
// so every distance below is computed without rounding and exact string
// expectations are safe.
HumanBenchmark small_human() {
    HumanBenchmark human;
    human.proposer_offers = {50, 50, 25, 25};
    human.responder_observations = {
        {20, Decision::reject},
        {20, Decision::accept},
        {50, Decision::accept},
        {50, Decision::accept},
    };
    return human;
}

std::vector<EvaluatedRunPair> small_runs() {
    std::vector<EvaluatedRunPair> runs;
    const std::vector<ResponderObservation> perfect = {
        {20, Decision::reject},
        {20, Decision::accept},
        {50, Decision::accept},
        {50, Decision::accept},
    };
    const std::vector<ResponderObservation> harsh = {
        {20, Decision::reject},
        {20, Decision::reject},
        {50, Decision::accept},
        {50, Decision::accept},
    };
    runs.push_back({"model-a", PersonaCondition::no_persona,
                    proposer_log_with(std::vector<int>(4, 0), 0, "a-none-p"),
                    responder_log_with(harsh, "a-none-r")});
    runs.push_back({"model-a", PersonaCondition::six_traits,
                    proposer_log_with({25, 25, 50, 50}, 1, "a-six-p"),
                    responder_log_with(perfect, "a-six-r")});
    runs.push_back({"model-b", PersonaCondition::six_traits,
                    proposer_log_with(std::vector<int>(4, 100), 0, "b-six-p"),
                    responder_log_with(harsh, "b-six-r")});
    return runs;
}

}  // namespace

TEST_CASE("build_report computes one row per run pair") {
    const auto report = build_report(small_runs(), small_human());
    REQUIRE(report.rows.size() == 3);
    CHECK(report.display_scale_100);

    // model-a, Nothing: every offer 0 against human {.25,.25,.5,.5} ->
    // mean gap (2*.25 + 2*.5)/4 = .375, exact in binary.
    CHECK(report.rows[0].model == "model-a");
    CHECK(report.rows[0].condition == PersonaCondition::no_persona);
    CHECK(report.rows[0].proposer_distance == 0.375);
    // Human curve: 20 -> 1/2 accept, 50 -> 1. Harsh sim: 20 -> 0, 50 -> 1.
    CHECK(report.rows[0].responder_distance == 0.25);
    CHECK(report.rows[0].proposer_failures == 0);

    // model-a, 6 Traits: identical offers and decisions -> both zero.
    CHECK(report.rows[1].proposer_distance == 0.0);
    CHECK(report.rows[1].responder_distance == 0.0);
    CHECK(report.rows[1].proposer_failures == 1);

    // model-b, 6 Traits: every offer 100 -> mean gap (2*.75 + 2*.5)/4.
    CHECK(report.rows[2].model == "model-b");
    CHECK(report.rows[2].proposer_distance == 0.625);
}

TEST_CASE("format_report_table bolds per-model minima and scales by 100") {
    const auto table = format_report_table(build_report(small_runs(), small_human()));
    const std::string expected =
        "| Model | Persona | Proposer | Responder |\n"
        "| --- | --- | --- | --- |\n"
        "| model-a | Nothing | 37.5 | 25 |\n"
        "| model-a | 6 Traits | **0** | **0** |\n"
        "| model-b | 6 Traits | **62.5** | **25** |\n";
    CHECK(table == expected);
}

TEST_CASE("write_report_csv stores unscaled distances") {
    std::ostringstream out;
    write_report_csv(build_report(small_runs(), small_human()), out);
    const std::string expected =
        "model,condition,proposer_distance,responder_distance,proposer_failures,"
        "responder_failures\n"
        "model-a,nothing,0.375,0.25,0,0\n"
        "model-a,six_traits,0,0,1,0\n"
        "model-b,six_traits,0.625,0.25,0,0\n";
    CHECK(out.str() == expected);
}

TEST_CASE("displayed distances are exactly the stored value times 100") {
    AlignmentReport report;
    ReportRow low;
    low.model = "m";
    low.condition = PersonaCondition::no_persona;
    low.proposer_distance = 0.123456789;
    low.responder_distance = 0.25;
    ReportRow high = low;
    high.condition = PersonaCondition::six_traits;
    high.proposer_distance = 0.2;
    high.responder_distance = 0.5;
    report.rows = {low, high};
    const auto table = format_report_table(report);
    CHECK(table.find("| **" + format_decimal(0.123456789 * 100.0) + "** |") != std::string::npos);
    CHECK(table.find("| " + format_decimal(0.2 * 100.0) + " |") != std::string::npos);
    CHECK(table.find("| **" + format_decimal(0.25 * 100.0) + "** |") != std::string::npos);
}

TEST_CASE("emit_figure_data writes per-model histogram and curve CSVs") {
    const auto out_dir = testsup::make_scratch_dir("figures");
    const auto paths = emit_figure_data(small_runs(), small_human(), out_dir);
    REQUIRE(paths.size() == 4);
    CHECK(paths[0] == out_dir + "/offer_histogram_model-a.csv");
    CHECK(paths[1] == out_dir + "/acceptance_curve_model-a.csv");
    CHECK(paths[2] == out_dir + "/offer_histogram_model-b.csv");
    CHECK(paths[3] == out_dir + "/acceptance_curve_model-b.csv");

    const std::string histogram_a = testsup::read_file(paths[0]);
    CHECK(histogram_a ==
          "offer,human_count,nothing,six_traits\n"
          "0,0,4,0\n"
          "25,2,0,2\n"
          "50,2,0,2\n");
    const std::string curve_a = testsup::read_file(paths[1]);
    CHECK(curve_a ==
          "offer,source,acceptance_rate,count\n"
          "20,human,0.5,2\n"
          "20,nothing,0,2\n"
          "20,six_traits,0.5,2\n"
          "50,human,1,2\n"
          "50,nothing,1,2\n"
          "50,six_traits,1,2\n");

    const std::string histogram_b = testsup::read_file(paths[2]);
    CHECK(histogram_b ==
          "offer,human_count,six_traits\n"
          "25,2,0\n"
          "50,2,0\n"
          "100,0,4\n");

    // Emission is deterministic: a second pass writes identical bytes.
    const auto second_dir = testsup::make_scratch_dir("figures2");
    const auto second = emit_figure_data(small_runs(), small_human(), second_dir);
    CHECK(testsup::read_file(second[0]) == histogram_a);
    CHECK(testsup::read_file(second[1]) == curve_a);
}

TEST_CASE("figure file names survive awkward model names") {
    auto runs = small_runs();
    runs.resize(1);
    runs[0].model = "weird/model:v2 beta";
    const auto out_dir = testsup::make_scratch_dir("figures3");
    const auto paths = emit_figure_data(runs, small_human(), out_dir);
    CHECK(paths[0] == out_dir + "/offer_histogram_weird_model_v2_beta.csv");
}
