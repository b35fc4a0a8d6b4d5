#ifndef DSM_CALIBRATE_HPP
#define DSM_CALIBRATE_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsm/gibbs.hpp"
#include "dsm/model.hpp"

namespace dsm {

enum class TimeBasis { Wall, Cpu };

struct SweepPlan {
  std::vector<std::size_t> n_grid;  // strictly increasing
  double budget_seconds = 300.0;
  std::size_t max_parallel = 1;
  TimeBasis time_basis = TimeBasis::Wall;

  void validate(std::size_t N) const;
};

struct SweepEntry {
  std::size_t n = 0;
  std::optional<ChainOutput> output;
  std::string error;  // set when the chain failed
};

struct PairwiseDiff {
  std::size_t n;        // grid point n_i
  double squared_norm;  // |mu_hat(n_i) - mu_hat(n_{i+1})|^2; NaN if either chain failed
};

struct CalibrationReport {
  std::vector<SweepEntry> per_n;
  std::size_t selected_n = 0;
  std::vector<PairwiseDiff> pairwise_diffs;
  bool budget_met = false;
  TimeBasis time_basis = TimeBasis::Wall;
};

struct GridTiming {
  std::size_t n;
  double seconds;
};

struct BudgetSelection {
  std::size_t n;
  bool budget_met;
};

/// Among grid points whose time does not exceed the budget, the one closest
/// to it (ties toward larger n). If none fits, the fastest point with
/// budget_met = false. Throws on an empty list.
BudgetSelection select_budget_n(std::span<const GridTiming> timings, double budget_seconds);

/// (a - b)'(a - b).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pairwise_difference(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw InvalidParameter("pairwise_difference: length mismatch");
  return (a - b).squaredNorm();
}

using ChainRunner = std::function<ChainOutput(const DatasetView&, const SamplerConfig&, std::size_t)>;

/// One chain per grid point, at most `max_parallel` at a time. Chain k uses
/// seed derive_seed(config.seed, k), so results do not depend on scheduling.
/// `runner` defaults to run_chain; tests inject fakes to control timings.
CalibrationReport run_sweep(const DatasetView& data, const SamplerConfig& config, const SweepPlan& plan,
                            const ChainRunner& runner = run_chain);

/// `n,wall_seconds,cpu_seconds,diff_to_next`, one row per grid point.
void write_report_csv(std::ostream& os, const CalibrationReport& report);
/// Flat JSON object: selected_n, budget_met, budget_seconds, time_basis, grid_size, failed.
std::string summary_json(const CalibrationReport& report, const SweepPlan& plan);

}  // namespace dsm

#endif  // DSM_CALIBRATE_HPP
