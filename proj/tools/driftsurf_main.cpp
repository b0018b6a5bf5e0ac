#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftsurf/driftsurf.hpp"
#include "driftsurf/transitions_log.hpp"

namespace fs = std::filesystem;
using namespace driftsurf;

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<std::int64_t> split_steps(const std::string& csv) {
  std::vector<std::int64_t> out;
  for (const std::string& item : split_list(csv)) out.push_back(std::stoll(item));
  return out;
}

// Options shared by `run` and `sweep`.
struct RunOptions {
  std::string dataset = "SEA0";
  std::string algos = "driftsurf,aware,mddm-g,aue";
  std::string rho = "2m";
  std::string rho_mode = "per-model";
  int trials = 5;
  std::uint64_t seed = 1;
  std::string out = "results";
  std::int64_t steps = 0;
  std::int64_t batch = 0;
  double mu = 0.0;
  double eta = 0.0;
  double noise = -1.0;
  bool stationary = false;
  std::string swap_at, rotate_at, drift_times;
  std::string rotate_axes = "0,1";
  double rotate_deg = 180.0;
  std::string process = "strsaga";
  std::string init = "zero";
  int aue_k = 10;
  int reactive_len = 4;
  double delta = 0.1;
  double delta_prime = -1.0;  // default: delta / 2
  bool no_greedy = false;
  std::string detection_risk = "zero-one";
  // CSV ingestion
  std::string label_col = "label";
  std::string label_map;  // "up=1,down=-1"
  std::string categorical;
  bool scale = false;
  bool no_intercept = false;
};

ExperimentConfig build_config(const RunOptions& opt) {
  ExperimentConfig cfg;
  cfg.dataset = DatasetSpec::from_name(opt.dataset);
  if (!cfg.dataset.csv.path.empty()) {
    cfg.dataset.csv.label_column = opt.label_col;
    for (const std::string& pair : split_list(opt.label_map)) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("label-map: expected raw=+1 pairs");
      cfg.dataset.csv.label_map[pair.substr(0, eq)] =
          std::stoi(pair.substr(eq + 1));
    }
    cfg.dataset.csv.categorical = split_list(opt.categorical);
    cfg.dataset.csv.scale_to_unit = opt.scale;
    cfg.dataset.csv.add_intercept = !opt.no_intercept;
    if (opt.batch > 0) cfg.dataset.csv.batch_size = opt.batch;
    if (opt.steps > 0) cfg.dataset.csv.total_steps = opt.steps;
    if (opt.mu > 0.0) cfg.dataset.mu = opt.mu;
    if (opt.eta > 0.0) cfg.dataset.eta = opt.eta;
    if (opt.mu <= 0.0 || opt.eta <= 0.0)
      std::cerr << "note: csv datasets default to mu=" << cfg.dataset.mu
                << ", eta=" << cfg.dataset.eta
                << "; set --mu/--eta explicitly for real runs\n";
  } else {
    if (opt.steps > 0) cfg.dataset.generator.total_steps = opt.steps;
    if (opt.batch > 0) cfg.dataset.generator.batch_size = opt.batch;
    if (opt.noise >= 0.0) cfg.dataset.generator.noise_rate = opt.noise;
    if (opt.stationary) cfg.dataset.generator.stationary = true;
    if (opt.mu > 0.0) cfg.dataset.mu = opt.mu;
    if (opt.eta > 0.0) cfg.dataset.eta = opt.eta;
    if (opt.no_intercept) cfg.dataset.generator.add_intercept = false;
  }
  if (!opt.swap_at.empty()) cfg.dataset.swap_steps = split_steps(opt.swap_at);
  if (!opt.rotate_at.empty()) {
    cfg.dataset.rotation_steps = split_steps(opt.rotate_at);
    const auto axes = split_steps(opt.rotate_axes);
    if (axes.size() != 2)
      throw std::invalid_argument("rotate-axes: expected two indices");
    cfg.dataset.rotation_axes = {static_cast<std::size_t>(axes[0]),
                                 static_cast<std::size_t>(axes[1])};
    cfg.dataset.rotation_deg = opt.rotate_deg;
  }

  cfg.algos = split_list(opt.algos);
  cfg.rho = opt.rho;
  if (opt.rho_mode == "per-model") cfg.rho_mode = BudgetMode::per_model;
  else if (opt.rho_mode == "per-alg" || opt.rho_mode == "per-algorithm")
    cfg.rho_mode = BudgetMode::per_algorithm;
  else throw std::invalid_argument("rho-mode: expected per-model or per-alg");
  cfg.trials = opt.trials;
  cfg.seed = opt.seed;
  if (opt.process == "strsaga") cfg.process = UpdateProcess::strsaga;
  else if (opt.process == "sgd") cfg.process = UpdateProcess::sgd;
  else throw std::invalid_argument("update-process: expected strsaga or sgd");
  if (opt.init == "zero") cfg.init = InitKind::zero;
  else if (opt.init == "gaussian") cfg.init = InitKind::gaussian;
  else throw std::invalid_argument("init: expected zero or gaussian");
  cfg.aue_capacity = opt.aue_k;
  cfg.driftsurf.reactive_length = opt.reactive_len;
  cfg.driftsurf.delta = opt.delta;
  cfg.driftsurf.delta_prime =
      opt.delta_prime >= 0.0 ? opt.delta_prime : opt.delta / 2.0;
  cfg.driftsurf.greedy = !opt.no_greedy;
  if (opt.detection_risk == "zero-one")
    cfg.driftsurf.detection_risk = RiskKind::zero_one;
  else if (opt.detection_risk == "logistic")
    cfg.driftsurf.detection_risk = RiskKind::logistic;
  else
    throw std::invalid_argument("detection-risk: expected zero-one or logistic");
  if (!opt.drift_times.empty()) {
    cfg.aware_drift_times = split_steps(opt.drift_times);
    cfg.aware_times_set = true;
  }
  return cfg;
}

void add_run_options(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--dataset", opt.dataset,
                  "SEA0|SEA10|SEA20|SEA30|SEA-gradual|HYPER-SLOW|HYPER-FAST|"
                  "SINE1|MIXED|CIRCLES|csv:<path>");
  cmd->add_option("--algos", opt.algos,
                  "comma list: driftsurf,driftsurf-ng,aware,mddm-g,mddm-a,"
                  "mddm-e,aue,aue2,obl,1pass-sgd");
  cmd->add_option("--rho", opt.rho, "gradients per step: 2m, 4m, or a count");
  cmd->add_option("--rho-mode", opt.rho_mode, "per-model|per-alg");
  cmd->add_option("--trials", opt.trials, "independent trials");
  cmd->add_option("--seed", opt.seed, "base seed; trial t uses seed+t");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--steps", opt.steps, "stream length override");
  cmd->add_option("--m", opt.batch, "batch size override");
  cmd->add_option("--mu", opt.mu, "L2 regularization override");
  cmd->add_option("--eta", opt.eta, "step size override");
  cmd->add_option("--noise", opt.noise, "label noise override");
  cmd->add_flag("--stationary", opt.stationary, "freeze the first concept");
  cmd->add_option("--swap-at", opt.swap_at, "label-swap steps, e.g. 30,60");
  cmd->add_option("--rotate-at", opt.rotate_at, "rotation steps");
  cmd->add_option("--rotate-axes", opt.rotate_axes, "rotation plane, e.g. 0,7");
  cmd->add_option("--rotate-deg", opt.rotate_deg, "rotation angle");
  cmd->add_option("--drift-times", opt.drift_times,
                  "oracle drift times for aware (default: schedule)");
  cmd->add_option("--update-process", opt.process, "strsaga|sgd");
  cmd->add_option("--init", opt.init, "model init: zero|gaussian");
  cmd->add_option("--aue-k", opt.aue_k, "aue expert capacity");
  cmd->add_option("--r", opt.reactive_len, "reactive state length");
  cmd->add_option("--delta", opt.delta, "reactive entry threshold");
  cmd->add_option("--delta-prime", opt.delta_prime,
                  "stable-model threshold (default delta/2)");
  cmd->add_flag("--no-greedy", opt.no_greedy, "disable greedy serving");
  cmd->add_option("--detection-risk", opt.detection_risk,
                  "zero-one|logistic");
  cmd->add_option("--label-col", opt.label_col, "csv label column");
  cmd->add_option("--label-map", opt.label_map, "csv label map, up=1,down=-1");
  cmd->add_option("--categorical", opt.categorical, "csv one-hot columns");
  cmd->add_flag("--scale", opt.scale, "csv min-max scaling to [0,1]");
  cmd->add_flag("--no-intercept", opt.no_intercept,
                "do not append a constant-1 feature");
}

RunResult do_run(const RunOptions& opt) {
  const ExperimentConfig cfg = build_config(opt);
  RunResult result = run_experiment(cfg);

  fs::create_directories(opt.out);
  write_records_csv((fs::path(opt.out) / "records.csv").string(),
                    result.records);
  write_summary_csv((fs::path(opt.out) / "summary.csv").string(),
                    result.summary);
  write_timeseries_csv((fs::path(opt.out) / "timeseries.csv").string(),
                       result.records, result.dataset_name);
  write_transitions_log((fs::path(opt.out) / "transitions.log").string(),
                        result.transitions);

  std::cout << "dataset=" << result.dataset_name << " trials=" << cfg.trials
            << " rho=" << cfg.rho << " mode="
            << (cfg.rho_mode == BudgetMode::per_model ? "per-model" : "per-alg")
            << "\n";
  for (const SummaryRow& row : result.summary)
    std::cout << "  " << row.algorithm << ": " << row.mean_misclass_median
              << "\n";
  std::cout << "wrote " << opt.out << "/records.csv, summary.csv, "
            << "timeseries.csv, transitions.log\n";
  return result;
}

// Sweep config: one key=value per line, '#' comments. dataset, rho and
// rho-mode accept comma lists and expand into a grid; the remaining keys are
// shared by every cell.
int do_sweep(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot open sweep config: " << config_path << "\n";
    return 2;
  }
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::cerr << config_path << ":" << lineno << ": expected key=value\n";
      return 2;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  RunOptions base;
  if (kv.count("algos")) base.algos = kv["algos"];
  if (kv.count("trials")) base.trials = std::stoi(kv["trials"]);
  if (kv.count("seed")) base.seed = std::stoull(kv["seed"]);
  if (kv.count("out")) base.out = kv["out"];
  if (kv.count("steps")) base.steps = std::stoll(kv["steps"]);
  if (kv.count("m")) base.batch = std::stoll(kv["m"]);
  if (kv.count("mu")) base.mu = std::stod(kv["mu"]);
  if (kv.count("eta")) base.eta = std::stod(kv["eta"]);
  if (kv.count("noise")) base.noise = std::stod(kv["noise"]);
  if (kv.count("swap-at")) base.swap_at = kv["swap-at"];
  if (kv.count("rotate-at")) base.rotate_at = kv["rotate-at"];
  if (kv.count("rotate-axes")) base.rotate_axes = kv["rotate-axes"];
  if (kv.count("rotate-deg")) base.rotate_deg = std::stod(kv["rotate-deg"]);
  if (kv.count("stationary")) base.stationary = kv["stationary"] == "true";
  if (kv.count("update-process")) base.process = kv["update-process"];
  if (kv.count("aue-k")) base.aue_k = std::stoi(kv["aue-k"]);
  if (kv.count("r")) base.reactive_len = std::stoi(kv["r"]);
  if (kv.count("delta")) base.delta = std::stod(kv["delta"]);
  if (kv.count("no-greedy")) base.no_greedy = kv["no-greedy"] == "true";

  const auto datasets = split_list(kv.count("dataset") ? kv["dataset"] : "SEA0");
  const auto rhos = split_list(kv.count("rho") ? kv["rho"] : "2m");
  const auto modes =
      split_list(kv.count("rho-mode") ? kv["rho-mode"] : "per-model");

  fs::create_directories(base.out);
  const fs::path sweep_summary = fs::path(base.out) / "summary.csv";
  if (fs::exists(sweep_summary)) fs::remove(sweep_summary);

  for (const std::string& dataset : datasets) {
    for (const std::string& rho : rhos) {
      for (const std::string& mode : modes) {
        RunOptions opt = base;
        opt.dataset = dataset;
        opt.rho = rho;
        opt.rho_mode = mode;
        opt.out = (fs::path(base.out) / (dataset + "_" + rho + "_" + mode))
                      .string();
        std::cout << "== " << dataset << " rho=" << rho << " mode=" << mode
                  << "\n";
        const RunResult result = do_run(opt);
        write_summary_csv(sweep_summary.string(), result.summary, true);
      }
    }
  }
  std::cout << "sweep summary: " << sweep_summary.string() << "\n";
  return 0;
}

int do_probe(const std::string& quantity, std::uint64_t seed, int trials,
             const std::string& out, bool as_json) {
  std::vector<ProbeReport> reports;
  auto extend = [&](std::vector<ProbeReport> more) {
    reports.insert(reports.end(), more.begin(), more.end());
  };
  if (quantity == "all" || quantity == "subopt")
    extend(probe_suboptimality(seed, trials));
  if (quantity == "all" || quantity == "recovery")
    extend(probe_recovery(seed, trials));
  if (quantity == "all" || quantity == "false-positives")
    extend(probe_false_positives(seed, trials));
  if (reports.empty()) {
    std::cerr << "probe: unknown quantity '" << quantity
              << "' (use subopt|recovery|false-positives|all)\n";
    return 2;
  }

  std::ostringstream body;
  if (as_json) {
    for (const ProbeReport& r : reports) {
      nlohmann::json obj = {{"quantity", r.quantity},
                            {"per_seed", r.per_seed},
                            {"median", r.median_value},
                            {"reference", r.reference},
                            {"pass", r.pass}};
      body << obj << "\n";
    }
  } else {
    body << "quantity,per_seed,median,reference,pass\n";
    for (const ProbeReport& r : reports) {
      std::ostringstream seeds;
      for (std::size_t i = 0; i < r.per_seed.size(); ++i) {
        if (i) seeds << "|";
        seeds << r.per_seed[i];
      }
      std::ostringstream med;
      med << r.median_value;
      body << csv_row({r.quantity, seeds.str(), med.str(), r.reference,
                       r.pass ? "true" : "false"});
    }
  }

  if (out.empty() || out == "-") {
    std::cout << body.str();
  } else {
    std::ofstream file(out);
    file << body.str();
    std::cout << "wrote " << out << "\n";
  }
  bool all_pass = true;
  for (const ProbeReport& r : reports) all_pass = all_pass && r.pass;
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming learning under concept drift: prequential "
               "benchmark runner"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run_cmd =
      app.add_subcommand("run", "run one experiment and write csv outputs");
  add_run_options(run_cmd, run_opt);

  std::string sweep_config;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run a grid from a key=value config file");
  sweep_cmd->add_option("--config", sweep_config, "sweep config path")
      ->required();

  std::string probe_quantity = "all";
  std::uint64_t probe_seed = 1;
  int probe_trials = 5;
  std::string probe_out = "-";
  bool probe_json = false;
  CLI::App* probe_cmd = app.add_subcommand(
      "probe", "empirical checks of the analysis quantities");
  probe_cmd->add_option("--quantity", probe_quantity,
                        "subopt|recovery|false-positives|all");
  probe_cmd->add_option("--seed", probe_seed, "base seed");
  probe_cmd->add_option("--trials", probe_trials, "seeds per quantity");
  probe_cmd->add_option("--out", probe_out, "output path or - for stdout");
  probe_cmd->add_flag("--json", probe_json, "emit json lines instead of csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      do_run(run_opt);
      return 0;
    }
    if (sweep_cmd->parsed()) return do_sweep(sweep_config);
    if (probe_cmd->parsed())
      return do_probe(probe_quantity, probe_seed, probe_trials, probe_out,
                      probe_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
