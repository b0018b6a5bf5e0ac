#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftsurf/harness.hpp"
#include "driftsurf/optimizers.hpp"

namespace driftsurf {

// Empirical check of one theoretical quantity: the measured values per seed,
// their median, the reference they are held against, and a pass flag that is
// a pure function of the measured values.
struct ProbeReport {
  std::string quantity;
  std::vector<double> per_seed;
  double median_value = 0.0;
  std::string reference;
  bool pass = false;
};

// R_S(w) - R_S(w*) with logistic (training) risk; w* from the full-batch
// reference optimizer.
inline double measure_suboptimality(const Vector& w,
                                    std::span<const LabeledPoint* const> pts,
                                    const LossConfig& cfg, double tol = 1e-8) {
  const Vector opt = erm_optimize(pts, cfg, tol);
  return segment_risk(w, pts, cfg, RiskKind::logistic) -
         segment_risk(opt, pts, cfg, RiskKind::logistic);
}

// First step >= drift_time at which the serving model's training segment
// holds only post-drift data, minus drift_time. nullopt = never recovered.
inline std::optional<std::int64_t> measure_recovery(
    const std::vector<StepRecord>& records, int trial,
    const std::string& algorithm, std::int64_t drift_time) {
  for (const StepRecord& r : records) {
    if (r.trial != trial || r.algorithm != algorithm) continue;
    if (r.time_step < drift_time) continue;
    if (r.model_segment_start < 0 || r.model_segment_start >= drift_time)
      return r.time_step - drift_time;
  }
  return std::nullopt;
}

// Reactive entries and predictive-model replacements within a known
// stationary step range [first, last].
inline std::pair<int, int> measure_false_positives(
    const std::vector<TrialTransition>& transitions, int trial,
    const std::string& algorithm, std::int64_t first, std::int64_t last) {
  int entries = 0, switches = 0;
  for (const TrialTransition& t : transitions) {
    if (t.trial != trial || t.algorithm != algorithm) continue;
    if (t.event.time_step < first || t.event.time_step > last) continue;
    if (t.event.kind == "enter_reactive") ++entries;
    if (t.event.kind == "exit_reactive" && t.event.trigger == "switch")
      ++switches;
  }
  return {entries, switches};
}

namespace probe_detail {

inline ExperimentConfig stationary_config(std::uint64_t seed, int trials,
                                          std::vector<std::int64_t> swaps) {
  ExperimentConfig cfg;
  cfg.dataset = DatasetSpec::from_name("SEA0");
  cfg.dataset.generator.stationary = true;
  cfg.dataset.swap_steps = std::move(swaps);
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

}  // namespace probe_detail

// Training-risk gap to the reference optimum at growing checkpoints of a
// stationary run; the gap should not grow with more data and iterations.
inline std::vector<ProbeReport> probe_suboptimality(std::uint64_t seed,
                                                    int trials) {
  const std::vector<std::int64_t> checkpoints = {10, 20, 40};
  std::vector<std::vector<double>> values(checkpoints.size());

  for (int trial = 0; trial < trials; ++trial) {
    GeneratorSpec g = dataset_preset("SEA0").generator;
    g.stationary = true;
    g.batch_size = 100;
    g.total_steps = 40;
    g.seed = seed + static_cast<std::uint64_t>(trial);
    const StreamData stream = generate(g);
    const DatasetPreset preset = dataset_preset("SEA0");

    Model model(UpdateProcess::strsaga, stream.dim, preset.eta,
                LossConfig{preset.mu}, 1);
    Rng rng(derive_seed(g.seed, {0x9021u}));
    for (const BatchPtr& batch : stream.batches) {
      model.update(batch, 2 * stream.batch_size, rng);
      for (std::size_t c = 0; c < checkpoints.size(); ++c)
        if (batch->time_step + 1 == checkpoints[c])
          values[c].push_back(measure_suboptimality(
              model.w(), model.sample_points(), LossConfig{preset.mu}));
    }
  }

  std::vector<ProbeReport> reports;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    ProbeReport r;
    r.quantity = "subopt_t" + std::to_string(checkpoints[c]);
    r.per_seed = values[c];
    r.median_value = median(values[c]);
    r.reference = "non-increasing across checkpoints";
    r.pass = c == 0 || r.median_value <= reports[c - 1].median_value + 1e-12;
    reports.push_back(std::move(r));
  }
  return reports;
}

// Steps until the serving model holds only post-drift data after a full
// label swap at step 30.
inline std::vector<ProbeReport> probe_recovery(std::uint64_t seed, int trials) {
  ExperimentConfig cfg = probe_detail::stationary_config(seed, trials, {30});
  cfg.algos = {"driftsurf", "aware"};
  const RunResult result = run_experiment(cfg);

  ProbeReport ds, aware;
  ds.quantity = "recovery_driftsurf";
  ds.reference = "<= 2r = 8 in at least 4 of 5 runs";
  aware.quantity = "recovery_aware";
  aware.reference = "= 0";
  int ds_fast = 0;
  bool aware_all_zero = true;
  for (int trial = 0; trial < trials; ++trial) {
    const auto d = measure_recovery(result.records, trial, "driftsurf", 30);
    const auto a = measure_recovery(result.records, trial, "aware", 30);
    ds.per_seed.push_back(d ? static_cast<double>(*d) : -1.0);
    aware.per_seed.push_back(a ? static_cast<double>(*a) : -1.0);
    if (d && *d <= 8) ++ds_fast;
    if (!a || *a != 0) aware_all_zero = false;
  }
  ds.median_value = median(ds.per_seed);
  aware.median_value = median(aware.per_seed);
  ds.pass = ds_fast * 5 >= trials * 4;
  aware.pass = aware_all_zero;
  return {ds, aware};
}

// Reactive entries, model replacements, and detector resets over a
// drift-free stream.
inline std::vector<ProbeReport> probe_false_positives(std::uint64_t seed,
                                                      int trials) {
  ExperimentConfig cfg = probe_detail::stationary_config(seed, trials, {});
  cfg.algos = {"driftsurf", "mddm-g"};
  const RunResult result = run_experiment(cfg);

  ProbeReport entries, switches, resets;
  entries.quantity = "driftsurf_reactive_entries";
  entries.reference = "reported";
  switches.quantity = "driftsurf_model_switches";
  switches.reference = "median <= 1";
  resets.quantity = "mddm_resets";
  resets.reference = "reported for comparison";
  for (int trial = 0; trial < trials; ++trial) {
    const auto [e, s] =
        measure_false_positives(result.transitions, trial, "driftsurf", 0, 99);
    entries.per_seed.push_back(e);
    switches.per_seed.push_back(s);
    std::int64_t models = 0;
    for (const StepRecord& r : result.records)
      if (r.trial == trial && r.algorithm == "mddm-g")
        models = std::max(models, r.model_id);
    resets.per_seed.push_back(static_cast<double>(models - 1));
  }
  entries.median_value = median(entries.per_seed);
  switches.median_value = median(switches.per_seed);
  resets.median_value = median(resets.per_seed);
  entries.pass = true;
  switches.pass = switches.median_value <= 1.0;
  resets.pass = true;
  return {entries, switches, resets};
}

}  // namespace driftsurf
