#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "driftsurf/harness.hpp"
#include "driftsurf/transitions_log.hpp"

using namespace driftsurf;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.dataset = DatasetSpec::from_name("SINE1");
  cfg.dataset.generator.total_steps = 30;
  cfg.dataset.generator.batch_size = 40;
  cfg.algos = {"driftsurf", "aware"};
  cfg.trials = 2;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("presets carry the per-dataset hyperparameters", "[harness]") {
  const DatasetPreset sea = dataset_preset("SEA0");
  CHECK(sea.mu == 1e-2);
  CHECK(sea.eta == 1e-3);
  CHECK(sea.generator.batch_size == 1000);
  const DatasetPreset sine = dataset_preset("SINE1");
  CHECK(sine.mu == 1e-3);
  CHECK(sine.eta == 2e-1);
  CHECK(sine.generator.batch_size == 100);
  const DatasetPreset hyper = dataset_preset("HYPER-FAST");
  CHECK(hyper.generator.hyper_magnitude == 0.1);
  CHECK(hyper.eta == 1e-2);
  CHECK_THROWS_AS(dataset_preset("NOPE"), std::invalid_argument);
}

TEST_CASE("rho expressions resolve against the batch size", "[harness]") {
  CHECK(resolve_rho("2m", 100) == 200);
  CHECK(resolve_rho("4m", 250) == 1000);
  CHECK(resolve_rho("m", 250) == 250);
  CHECK(resolve_rho("512", 100) == 512);
}

TEST_CASE("config validation reports field paths", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.algos = {"driftsurf", "bogus"};
  CHECK_THROWS_WITH(run_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("algos[1]"));
  cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_WITH(run_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("trials"));
  cfg = small_config();
  cfg.dataset.mu = 0.0;
  CHECK_THROWS_WITH(run_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("dataset.mu"));
  cfg = small_config();
  cfg.rho = "xm2";
  CHECK_THROWS_WITH(run_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("rho"));
}

TEST_CASE("one record per algorithm, trial, and time step", "[harness]") {
  const ExperimentConfig cfg = small_config();
  const RunResult result = run_experiment(cfg);
  CHECK(result.records.size() == 2u * 2u * 30u);
  std::int64_t driftsurf_rows = 0;
  for (const StepRecord& r : result.records) {
    CHECK(r.zero_one_risk >= 0.0);
    CHECK(r.zero_one_risk <= 1.0);
    CHECK(r.gradients_spent == r.expected_gradients);
    if (r.algorithm == "driftsurf") ++driftsurf_rows;
  }
  CHECK(driftsurf_rows == 2 * 30);
  CHECK(result.summary.size() == 2);
}

TEST_CASE("runs are bit-identical for a fixed seed", "[harness]") {
  const ExperimentConfig cfg = small_config();
  const RunResult a = run_experiment(cfg);
  const RunResult b = run_experiment(cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].zero_one_risk == b.records[i].zero_one_risk);
    CHECK(a.records[i].model_id == b.records[i].model_id);
    CHECK(a.records[i].state == b.records[i].state);
  }
  REQUIRE(a.transitions.size() == b.transitions.size());
  for (std::size_t i = 0; i < a.transitions.size(); ++i)
    CHECK(a.transitions[i].event.time_step == b.transitions[i].event.time_step);
}

TEST_CASE("records do not depend on the trial parallelism", "[harness]") {
  const ExperimentConfig cfg = small_config();
  setenv("DRIFTSURF_THREADS", "1", 1);
  const RunResult serial = run_experiment(cfg);
  setenv("DRIFTSURF_THREADS", "4", 1);
  const RunResult parallel = run_experiment(cfg);
  unsetenv("DRIFTSURF_THREADS");
  REQUIRE(serial.records.size() == parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].trial == parallel.records[i].trial);
    CHECK(serial.records[i].zero_one_risk == parallel.records[i].zero_one_risk);
  }
}

TEST_CASE("an algorithm's trajectory ignores its co-runners", "[harness]") {
  ExperimentConfig alone = small_config();
  alone.algos = {"driftsurf"};
  ExperimentConfig crowd = small_config();
  crowd.algos = {"aware", "driftsurf", "aue"};
  const RunResult a = run_experiment(alone);
  const RunResult b = run_experiment(crowd);
  std::vector<double> risks_alone, risks_crowd;
  for (const StepRecord& r : a.records)
    if (r.algorithm == "driftsurf") risks_alone.push_back(r.zero_one_risk);
  for (const StepRecord& r : b.records)
    if (r.algorithm == "driftsurf") risks_crowd.push_back(r.zero_one_risk);
  CHECK(risks_alone == risks_crowd);
}

TEST_CASE("duplicate algorithms are rejected", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.algos = {"driftsurf", "aware", "driftsurf"};
  CHECK_THROWS_WITH(run_experiment(cfg),
                    Catch::Matchers::ContainsSubstring("duplicate"));
}

TEST_CASE("every algorithm is scored before any of them trains", "[harness]") {
  // The first step's risk must come from the untouched initial model: zero
  // weights predict +1, so the risk equals the share of negative labels in
  // the first batch.
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  const RunResult result = run_experiment(cfg);

  GeneratorSpec g = cfg.dataset.generator;
  g.seed = cfg.seed;  // trial 0 stream
  const StreamData stream = generate(g);
  double neg = 0.0;
  for (const LabeledPoint& p : stream.batches[0]->points)
    if (p.label < 0) neg += 1.0;
  const double expected = neg / static_cast<double>(stream.batches[0]->size());

  for (const StepRecord& r : result.records)
    if (r.time_step == 0)
      CHECK_THAT(r.zero_one_risk, Catch::Matchers::WithinAbs(expected, 1e-12));
}

TEST_CASE("per-algorithm budgets divide across aue experts", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.algos = {"aue"};
  cfg.trials = 1;
  cfg.rho = "4m";
  cfg.rho_mode = BudgetMode::per_algorithm;
  const RunResult result = run_experiment(cfg);
  const std::int64_t rho = 4 * cfg.dataset.generator.batch_size;
  for (const StepRecord& r : result.records) {
    const std::int64_t live = std::min<std::int64_t>(r.time_step + 2, 10);
    CHECK(r.gradients_spent == (rho / live) * live);
  }
}

TEST_CASE("summarize averages over time then takes the trial median",
          "[harness]") {
  std::vector<StepRecord> records;
  for (int trial = 0; trial < 5; ++trial)
    for (std::int64_t t = 0; t < 4; ++t) {
      StepRecord r;
      r.trial = trial;
      r.time_step = t;
      r.algorithm = "toy";
      r.zero_one_risk = 0.1 * (trial + 1);  // constant within a trial
      records.push_back(r);
    }
  const auto rows = summarize(records, "unit");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].dataset == "unit");
  CHECK(rows[0].algorithm == "toy");
  CHECK_THAT(rows[0].mean_misclass_median,
             Catch::Matchers::WithinAbs(0.3, 1e-12));
}

TEST_CASE("constant risk summarizes to itself", "[harness]") {
  std::vector<StepRecord> records;
  for (std::int64_t t = 0; t < 7; ++t) {
    StepRecord r;
    r.trial = 0;
    r.time_step = t;
    r.algorithm = "toy";
    r.zero_one_risk = 0.2;
    records.push_back(r);
  }
  CHECK_THAT(summarize(records, "unit")[0].mean_misclass_median,
             Catch::Matchers::WithinAbs(0.2, 1e-12));
}

TEST_CASE("csv outputs are written with headers and quoting", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  const RunResult result = run_experiment(cfg);

  write_records_csv("harness_records_test.csv", result.records);
  std::ifstream in("harness_records_test.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "trial,time_step,algorithm,zero_one_risk,state,model_id,"
        "gradients_spent");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == result.records.size());
  std::remove("harness_records_test.csv");

  write_summary_csv("harness_summary_test.csv", result.summary);
  std::ifstream sin("harness_summary_test.csv");
  std::getline(sin, header);
  CHECK(header == "dataset,algorithm,mean_misclass_median");
  std::remove("harness_summary_test.csv");

  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("transition logs hold one json object per line", "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  cfg.algos = {"driftsurf"};
  const RunResult result = run_experiment(cfg);
  REQUIRE_FALSE(result.transitions.empty());

  write_transitions_log("harness_transitions_test.log", result.transitions);
  std::ifstream in("harness_transitions_test.log");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto obj = nlohmann::json::parse(line);
    CHECK(obj.contains("time_step"));
    CHECK(obj.contains("kind"));
    CHECK(obj.contains("trigger"));
    CHECK(obj.contains("risk_predictive"));
    ++lines;
  }
  CHECK(lines == result.transitions.size());
  std::remove("harness_transitions_test.log");
}

TEST_CASE("injected swaps feed the oracle baseline's drift times",
          "[harness]") {
  ExperimentConfig cfg = small_config();
  cfg.algos = {"aware"};
  cfg.trials = 1;
  cfg.dataset = DatasetSpec::from_name("SEA0");
  cfg.dataset.generator.stationary = true;
  cfg.dataset.generator.batch_size = 50;
  cfg.dataset.generator.total_steps = 40;
  cfg.dataset.swap_steps = {15};
  const RunResult result = run_experiment(cfg);
  bool reset_seen = false;
  for (const StepRecord& r : result.records)
    if (r.time_step == 15) reset_seen = (r.state == "reset");
  CHECK(reset_seen);
}
