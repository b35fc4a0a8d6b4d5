#include "dsm/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsm/calibrate.hpp"
#include "dsm/error.hpp"
#include "dsm/gibbs.hpp"
#include "dsm/io.hpp"
#include "dsm/simdata.hpp"

#ifndef DSM_VERSION
#define DSM_VERSION "0.1.0"
#endif

namespace dsm::cli {
namespace fs = std::filesystem;
namespace {

using Json = nlohmann::ordered_json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Common {
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::string config_path;
};

struct SamplerFlags {
  std::string data;
  std::size_t iterations = 10000;
  std::size_t burn_in = 1000;
  double rho = 0.3;
  std::string metric = "abs";
  double ig_shape = 1.0;
  double ig_rate = 1.0;
  std::string pred_set;
  std::size_t pred_count = 0;
  std::string holdout;
};

void add_sampler_flags(CLI::App& cmd, SamplerFlags& f) {
  cmd.add_option("--data", f.data, "Dataset CSV (index,y[,x1..xp][,coord|,lat,lon])")->required();
  cmd.add_option("--iterations", f.iterations, "Gibbs iterations G")->capture_default_str();
  cmd.add_option("--burn-in", f.burn_in, "Burn-in g0")->capture_default_str();
  cmd.add_option("--rho", f.rho, "Basis range rho in exp(-rho d)")->capture_default_str();
  cmd.add_option("--metric", f.metric, "Basis distance")->check(CLI::IsMember({"abs", "greatcircle"}))->capture_default_str();
  cmd.add_option("--ig-shape", f.ig_shape, "Inverse-gamma prior shape a")->capture_default_str();
  cmd.add_option("--ig-rate", f.ig_rate, "Inverse-gamma prior rate b")->capture_default_str();
  cmd.add_option("--pred-set", f.pred_set, "CSV whose index column lists the prediction set A");
  cmd.add_option("--pred-count", f.pred_count, "Equally spaced prediction set of this size");
  cmd.add_option("--holdout", f.holdout,
                 "CSV whose index column lists held-out observations (never subsampled; default A)");
}

struct LoadedProblem {
  DatasetView data;
  SamplerConfig config;
};

LoadedProblem load_problem(const SamplerFlags& f, std::uint64_t seed) {
  LoadedProblem lp;
  lp.data = read_dataset(f.data);
  const std::size_t N = lp.data.size();
  SamplerConfig& c = lp.config;
  c.iterations = f.iterations;
  c.burn_in = f.burn_in;
  c.ig_shape = f.ig_shape;
  c.ig_rate = f.ig_rate;
  c.basis.rho = f.rho;
  c.basis.metric = f.metric == "greatcircle" ? Metric::GreatCircle : Metric::AbsoluteDifference;
  c.seed = RngSeed{seed};
  if (lp.data.coords.cols() != c.basis.coord_dims()) {
    throw InvalidParameter(f.metric == "greatcircle" ? "--metric greatcircle needs lat,lon columns"
                                                     : "--metric abs needs a single coord column");
  }
  if (!f.holdout.empty()) {
    c.holdout = read_index_set(f.holdout);
    validate_index_set(c.holdout, N, "holdout set");
  }
  if (!f.pred_set.empty() && f.pred_count > 0) throw InvalidParameter("give at most one of --pred-set, --pred-count");
  if (!f.pred_set.empty()) {
    c.prediction_set = read_index_set(f.pred_set);
  } else if (f.pred_count > 0) {
    c.prediction_set = equally_spaced_indices(N, f.pred_count);
  } else if (!c.holdout.empty()) {
    c.prediction_set = c.holdout;
  } else {
    c.prediction_set = equally_spaced_indices(N, std::min<std::size_t>(N, 1000));
  }
  c.validate(N);
  return lp;
}

Json manifest(const std::string& command, const std::vector<std::string>& args, const Common& common,
              const std::string& dataset) {
  Json j;
  j["command"] = command;
  j["args"] = args;
  j["config_path"] = common.config_path;
  j["dataset_path"] = dataset;
  j["output_dir"] = common.output_dir;
  j["timestamp"] = utc_timestamp();
  j["version"] = DSM_VERSION;
  j["seed"] = common.seed;
  return j;
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

int cmd_simulate(const Common& common, const Ar1Config& config, const std::vector<std::string>& args) {
  const SimulatedSeries sim = generate_ar1(config);
  const fs::path out(common.output_dir);
  prepare_output_dir(out);
  write_dataset(out / "data.csv", sim.data);
  write_truth(out / "truth.csv", sim.truth_mu);
  write_index_set(out / "prediction_set.csv", sim.prediction_set);
  Json m = manifest("simulate", args, common, "");
  m["N"] = config.N;
  m["phi"] = config.phi;
  m["noise_var"] = config.noise_var;
  m["pred_count"] = config.prediction_count;
  write_text(out / "manifest.json", m.dump(2) + "\n");
  return kSuccess;
}

int cmd_fit(const Common& common, const SamplerFlags& flags, std::size_t n, const std::vector<std::string>& args) {
  LoadedProblem lp = load_problem(flags, common.seed);
  lp.config.record_trace = true;
  const ChainOutput out = run_chain(lp.data, lp.config, n);

  const fs::path dir(common.output_dir);
  prepare_output_dir(dir);
  write_predictions(dir / "predictions.csv", out);
  write_trace(dir / "trace.csv", out);
  Json timing;
  timing["n"] = out.n_used;
  timing["wall_seconds"] = out.elapsed_wall_seconds;
  timing["cpu_seconds"] = out.elapsed_cpu_seconds;
  timing["iterations"] = lp.config.iterations;
  timing["burn_in"] = lp.config.burn_in;
  timing["iterations_kept"] = out.iterations_kept;
  timing["jitter_events"] = out.jitter_events;
  write_text(dir / "timing.json", timing.dump(2) + "\n");

  Json m = manifest("fit", args, common, flags.data);
  m["n"] = out.n_used;
  m["iterations"] = lp.config.iterations;
  m["burn_in"] = lp.config.burn_in;
  m["iterations_kept"] = out.iterations_kept;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return kSuccess;
}

int cmd_calibrate(const Common& common, const SamplerFlags& flags, const std::string& grid_text, SweepPlan plan,
                  const std::string& truth_path, const std::vector<std::string>& args) {
  const LoadedProblem lp = load_problem(flags, common.seed);
  plan.n_grid = parse_n_grid(grid_text);
  plan.validate(lp.data.size());
  std::optional<IndexedValues> truth;
  if (!truth_path.empty()) truth = read_indexed(truth_path, "mu");

  const CalibrationReport report = run_sweep(lp.data, lp.config, plan);

  const fs::path dir(common.output_dir);
  prepare_output_dir(dir);
  std::ostringstream csv;
  write_report_csv(csv, report);
  write_text(dir / "report.csv", csv.str());
  write_text(dir / "summary.json", summary_json(report, plan));
  for (const auto& e : report.per_n) {
    if (e.output) write_predictions(dir / ("predictions_n" + std::to_string(e.n) + ".csv"), *e.output);
  }
  if (truth) {
    std::map<std::size_t, double> mu;
    for (std::size_t k = 0; k < truth->index.size(); ++k) mu[truth->index[k]] = truth->value[k];
    std::ostringstream fig;
    fig << "n,rmspe,wall_seconds,cpu_seconds,diff_to_next\n";
    for (std::size_t k = 0; k < report.per_n.size(); ++k) {
      const auto& e = report.per_n[k];
      fig << e.n << ',';
      if (e.output) {
        Eigen::VectorXd t(e.output->mu_hat.size());
        for (Eigen::Index i = 0; i < t.size(); ++i) {
          const auto it = mu.find(e.output->prediction_set[static_cast<std::size_t>(i)]);
          if (it == mu.end()) throw InvalidParameter("truth file lacks a prediction-set index");
          t(i) = it->second;
        }
        fig << format_double(rmspe(t, e.output->mu_hat)) << ',' << format_double(e.output->elapsed_wall_seconds) << ','
            << format_double(e.output->elapsed_cpu_seconds);
      } else {
        fig << ",,";
      }
      fig << ',';
      if (k < report.pairwise_diffs.size() && std::isfinite(report.pairwise_diffs[k].squared_norm)) {
        fig << format_double(report.pairwise_diffs[k].squared_norm);
      }
      fig << '\n';
    }
    write_text(dir / "figure_data.csv", fig.str());
  }
  for (const auto& e : report.per_n) {
    if (!e.output) std::cerr << "n=" << e.n << " failed: " << e.error << '\n';
  }

  Json m = manifest("calibrate", args, common, flags.data);
  m["n_grid"] = plan.n_grid;
  m["budget_seconds"] = plan.budget_seconds;
  m["max_parallel"] = plan.max_parallel;
  m["selected_n"] = report.selected_n;
  m["budget_met"] = report.budget_met;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  std::cout << "selected_n=" << report.selected_n << " budget_met=" << (report.budget_met ? "true" : "false") << '\n';
  return kSuccess;
}

int cmd_score(const Common& common, const std::string& predictions_path, const std::string& truth_path,
              const std::string& holdout_path, const std::vector<std::string>& args) {
  if (truth_path.empty() == holdout_path.empty()) throw InvalidParameter("give exactly one of --truth, --holdout");
  const IndexedValues pred = read_indexed(predictions_path, "mu_hat");
  const bool against_truth = !truth_path.empty();
  const IndexedValues ref = against_truth ? read_indexed(truth_path, "mu") : read_indexed(holdout_path, "y");

  std::map<std::size_t, double> lookup;
  for (std::size_t k = 0; k < ref.index.size(); ++k) lookup[ref.index[k]] = ref.value[k];
  std::map<std::size_t, double> predicted;
  for (std::size_t k = 0; k < pred.index.size(); ++k) predicted[pred.index[k]] = pred.value[k];

  // RMSPE scores every prediction against the latent truth; RSTE scores every
  // held-out observation, so each side must cover the other's index set.
  std::vector<std::size_t> missing;
  if (against_truth) {
    for (const auto& [i, v] : predicted) {
      if (!lookup.count(i)) missing.push_back(i);
    }
  } else {
    for (const auto& [i, v] : lookup) {
      if (!predicted.count(i)) missing.push_back(i);
    }
  }
  if (!missing.empty() || predicted.empty()) {
    std::ostringstream msg;
    msg << (against_truth ? "truth file lacks prediction indices:" : "predictions lack holdout indices:");
    for (std::size_t k = 0; k < missing.size() && k < 20; ++k) msg << ' ' << (missing[k] + 1);
    if (missing.size() > 20) msg << " ... (" << missing.size() << " total)";
    throw InvalidParameter(msg.str());
  }

  const std::map<std::size_t, double>& keys = against_truth ? predicted : lookup;
  Eigen::VectorXd a(static_cast<Eigen::Index>(keys.size())), b(static_cast<Eigen::Index>(keys.size()));
  Eigen::Index k = 0;
  for (const auto& [i, v] : keys) {
    a(k) = lookup.at(i);
    b(k) = predicted.at(i);
    ++k;
  }
  Json metrics;
  metrics["metric"] = against_truth ? "rmspe" : "rste";
  metrics["value"] = against_truth ? rmspe(a, b) : rste(a, b);
  metrics["count"] = keys.size();

  const fs::path dir(common.output_dir);
  prepare_output_dir(dir);
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  write_text(dir / "manifest.json", manifest("score", args, common, predictions_path).dump(2) + "\n");
  std::cout << metrics["metric"].get<std::string>() << '=' << format_double(metrics["value"].get<double>()) << '\n';
  return kSuccess;
}

int cmd_split(const Common& common, const std::string& data_path, double fraction,
              const std::vector<std::string>& args) {
  const DatasetView data = read_dataset(data_path);
  Rng rng = make_rng(RngSeed{common.seed});
  const SplitDataset split = split_holdout(data, fraction, rng);
  const fs::path dir(common.output_dir);
  prepare_output_dir(dir);
  std::ostringstream os;
  os << "index,y\n";
  for (std::size_t k = 0; k < split.holdout_indices.size(); ++k) {
    os << (split.holdout_indices[k] + 1) << ',' << format_double(split.holdout_y(static_cast<Eigen::Index>(k))) << '\n';
  }
  write_text(dir / "holdout.csv", os.str());
  write_index_set(dir / "train_index.csv", split.train_indices);
  Json m = manifest("split", args, common, data_path);
  m["fraction"] = fraction;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return kSuccess;
}

}  // namespace

std::vector<std::size_t> parse_n_grid(const std::string& text) {
  auto to_count = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw InvalidParameter("--n-grid: not an integer: '" + s + "'");
    }
    if (pos != s.size() || v < 1) throw InvalidParameter("--n-grid: values must be positive integers");
    return static_cast<std::size_t>(v);
  };
  std::vector<std::size_t> grid;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw InvalidParameter("--n-grid: expected a:b:step");
    const std::size_t a = to_count(parts[0]), b = to_count(parts[1]), step = to_count(parts[2]);
    for (std::size_t v = a; v <= b; v += step) grid.push_back(v);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) grid.push_back(to_count(p));
  }
  if (grid.empty()) throw InvalidParameter("--n-grid: empty grid");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] <= grid[k - 1]) throw InvalidParameter("--n-grid must be strictly increasing");
  }
  return grid;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Subset-model Gibbs sampler with compute-budget calibration"};
  app.set_version_flag("--version", std::string(DSM_VERSION));
  app.require_subcommand(1);
  Common common;
  app.set_config("--config", "", "INI/TOML file supplying flag values");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--output-dir", common.output_dir, "Directory for outputs")->capture_default_str();
    cmd->add_option("--seed", common.seed, "Master RNG seed")->capture_default_str();
  };

  Ar1Config ar1;
  auto* sim = app.add_subcommand("simulate", "Generate an AR(1)-with-noise dataset");
  add_common(sim);
  sim->add_option("--N", ar1.N, "Number of observations")->capture_default_str();
  sim->add_option("--phi", ar1.phi, "AR coefficient")->capture_default_str();
  sim->add_option("--noise-var", ar1.noise_var, "Innovation and measurement variance")->capture_default_str();
  sim->add_option("--pred-count", ar1.prediction_count, "Size of the equally spaced prediction set")->capture_default_str();

  SamplerFlags fit_flags;
  std::size_t fit_n = 0;
  auto* fit = app.add_subcommand("fit", "Run one chain at subset size n");
  add_common(fit);
  add_sampler_flags(*fit, fit_flags);
  fit->add_option("--n", fit_n, "Subset size")->required();

  SamplerFlags cal_flags;
  std::string grid_text;
  std::string cal_truth;
  std::string time_basis = "wall";
  SweepPlan plan;
  auto* cal = app.add_subcommand("calibrate", "Sweep subset sizes and pick n for a time budget");
  add_common(cal);
  add_sampler_flags(*cal, cal_flags);
  cal->add_option("--n-grid", grid_text, "Grid a:b:step or comma list")->required();
  cal->add_option("--budget-seconds", plan.budget_seconds, "Time budget per fit")->capture_default_str();
  cal->add_option("--max-parallel", plan.max_parallel, "Concurrent chains")->capture_default_str();
  cal->add_option("--time-basis", time_basis, "Timing used for selection")
      ->check(CLI::IsMember({"wall", "cpu"}))
      ->capture_default_str();
  cal->add_option("--truth", cal_truth, "truth.csv; adds figure_data.csv with RMSPE per n");

  std::string predictions_path, truth_path, holdout_path;
  auto* score = app.add_subcommand("score", "RMSPE against truth.csv or RSTE against held-out data");
  add_common(score);
  score->add_option("--predictions", predictions_path, "predictions.csv")->required();
  score->add_option("--truth", truth_path, "truth.csv (index,mu)");
  score->add_option("--holdout", holdout_path, "held-out observations (index,y)");

  std::string split_data;
  double split_fraction = 0.2;
  auto* split = app.add_subcommand("split", "Draw a random holdout set");
  add_common(split);
  split->add_option("--data", split_data, "Dataset CSV")->required();
  split->add_option("--fraction", split_fraction, "Holdout fraction in (0,1)")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kValidationError;
  }
  if (auto* cfg = app.get_config_ptr(); cfg && cfg->count() > 0) common.config_path = cfg->as<std::string>();

  try {
    if (*sim) {
      ar1.seed = RngSeed{common.seed};
      return cmd_simulate(common, ar1, args);
    }
    if (*fit) return cmd_fit(common, fit_flags, fit_n, args);
    if (*cal) {
      plan.time_basis = time_basis == "cpu" ? TimeBasis::Cpu : TimeBasis::Wall;
      return cmd_calibrate(common, cal_flags, grid_text, plan, cal_truth, args);
    }
    if (*score) return cmd_score(common, predictions_path, truth_path, holdout_path, args);
    if (*split) return cmd_split(common, split_data, split_fraction, args);
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const IoError& e) {
    std::cerr << "I/O failure: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kValidationError;
}

}  // namespace dsm::cli
