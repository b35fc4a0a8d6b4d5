#include "dsm/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "dsm/io.hpp"

namespace dsm {

void SweepPlan::validate(std::size_t N) const {
  if (n_grid.empty()) throw InvalidParameter("n grid must be nonempty");
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    if (n_grid[k] < 1) throw InvalidParameter("n grid values must be >= 1");
    if (k > 0 && n_grid[k] <= n_grid[k - 1]) throw InvalidParameter("n grid must be strictly increasing");
  }
  if (n_grid.back() > N) throw InvalidParameter("largest grid point exceeds N");
  if (!(budget_seconds > 0.0)) throw InvalidParameter("budget must be > 0 seconds");
  if (max_parallel < 1) throw InvalidParameter("max_parallel must be >= 1");
}

BudgetSelection select_budget_n(std::span<const GridTiming> timings, double budget_seconds) {
  if (timings.empty()) throw InvalidParameter("select_budget_n: no completed grid points");
  const GridTiming* best = nullptr;
  for (const auto& t : timings) {
    if (t.seconds > budget_seconds) continue;
    if (!best || t.seconds > best->seconds || (t.seconds == best->seconds && t.n > best->n)) best = &t;
  }
  if (best) return {best->n, true};
  const GridTiming* fastest = &timings.front();
  for (const auto& t : timings) {
    if (t.seconds < fastest->seconds || (t.seconds == fastest->seconds && t.n > fastest->n)) fastest = &t;
  }
  return {fastest->n, false};
}

CalibrationReport run_sweep(const DatasetView& data, const SamplerConfig& config, const SweepPlan& plan,
                            const ChainRunner& runner) {
  plan.validate(data.size());
  config.validate(data.size());

  const std::size_t B = plan.n_grid.size();
  CalibrationReport report;
  report.time_basis = plan.time_basis;
  report.per_n.resize(B);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < B; k = next++) {
      SweepEntry& entry = report.per_n[k];
      entry.n = plan.n_grid[k];
      SamplerConfig chain_config = config;
      chain_config.seed = derive_seed(config.seed, k);
      try {
        entry.output = runner(data, chain_config, entry.n);
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
    }
  };
  const std::size_t threads = std::min(plan.max_parallel, B);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t k = 0; k + 1 < B; ++k) {
    const auto& a = report.per_n[k].output;
    const auto& b = report.per_n[k + 1].output;
    const double diff = (a && b) ? pairwise_difference(a->mu_hat, b->mu_hat) : std::numeric_limits<double>::quiet_NaN();
    report.pairwise_diffs.push_back({plan.n_grid[k], diff});
  }

  std::vector<GridTiming> timings;
  for (const auto& entry : report.per_n) {
    if (!entry.output) continue;
    const double t = plan.time_basis == TimeBasis::Wall ? entry.output->elapsed_wall_seconds
                                                        : entry.output->elapsed_cpu_seconds;
    timings.push_back({entry.n, t});
  }
  if (timings.empty()) {
    throw NumericalError("every chain in the sweep failed; first error: " + report.per_n.front().error,
                         plan.n_grid.front());
  }
  const BudgetSelection sel = select_budget_n(timings, plan.budget_seconds);
  report.selected_n = sel.n;
  report.budget_met = sel.budget_met;
  return report;
}

void write_report_csv(std::ostream& os, const CalibrationReport& report) {
  os << "n,wall_seconds,cpu_seconds,diff_to_next\n";
  for (std::size_t k = 0; k < report.per_n.size(); ++k) {
    const auto& e = report.per_n[k];
    os << e.n << ',';
    if (e.output) os << format_double(e.output->elapsed_wall_seconds) << ',' << format_double(e.output->elapsed_cpu_seconds);
    else os << ',';
    os << ',';
    if (k < report.pairwise_diffs.size() && std::isfinite(report.pairwise_diffs[k].squared_norm)) {
      os << format_double(report.pairwise_diffs[k].squared_norm);
    }
    os << '\n';
  }
}

std::string summary_json(const CalibrationReport& report, const SweepPlan& plan) {
  nlohmann::ordered_json j;
  j["selected_n"] = report.selected_n;
  j["budget_met"] = report.budget_met;
  j["budget_seconds"] = plan.budget_seconds;
  j["time_basis"] = report.time_basis == TimeBasis::Wall ? "wall" : "cpu";
  j["grid_size"] = report.per_n.size();
  std::size_t failed = 0;
  for (const auto& e : report.per_n) failed += e.output ? 0 : 1;
  j["failed"] = failed;
  return j.dump(2) + "\n";
}

}  // namespace dsm
