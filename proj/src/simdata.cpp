#include "dsm/simdata.hpp"

#include <iostream>
#include <string>

namespace dsm {

void Ar1Config::validate() const {
  if (N < 1) throw InvalidParameter("N must be >= 1");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw InvalidParameter("noise variance must be > 0");
  if (!std::isfinite(phi)) throw InvalidParameter("phi must be finite");
  if (prediction_count < 1 || prediction_count > N) {
    throw InvalidParameter("prediction count must be in [1, N]; got " + std::to_string(prediction_count));
  }
}

std::vector<std::size_t> equally_spaced_indices(std::size_t N, std::size_t m) {
  if (m < 1 || m > N) throw InvalidParameter("equally spaced indices need 1 <= m <= N");
  std::vector<std::size_t> idx(m);
  for (std::size_t j = 0; j < m; ++j) {
    // floor((2j+1) N / 2m), computed without overflow for N up to ~2^62 / m.
    idx[j] = static_cast<std::size_t>((static_cast<unsigned __int128>(2 * j + 1) * N) / (2 * m));
  }
  return idx;
}

SimulatedSeries generate_ar1(const Ar1Config& config) {
  config.validate();
  Rng rng = make_rng(config.seed);
  const auto N = static_cast<Eigen::Index>(config.N);

  Eigen::VectorXd mu(N);
  if (config.initial_mu) {
    mu(0) = *config.initial_mu;
  } else if (std::abs(config.phi) < 1.0) {
    mu(0) = draw_normal(0.0, config.noise_var / (1.0 - config.phi * config.phi), rng);
  } else {
    std::clog << "warning: |phi| >= 1, AR(1) is not stationary; starting from Normal(0, noise_var)\n";
    mu(0) = draw_normal(0.0, config.noise_var, rng);
  }
  for (Eigen::Index i = 1; i < N; ++i) mu(i) = config.phi * mu(i - 1) + draw_normal(0.0, config.noise_var, rng);

  Eigen::VectorXd y(N);
  for (Eigen::Index i = 0; i < N; ++i) y(i) = mu(i) + draw_normal(0.0, config.noise_var, rng);

  SimulatedSeries out;
  out.data = DatasetView::intercept_only(std::move(y));
  out.truth_mu = std::move(mu);
  out.prediction_set = equally_spaced_indices(config.N, config.prediction_count);
  return out;
}

SplitDataset split_holdout(const DatasetView& data, double holdout_fraction, Rng& rng) {
  data.validate();
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) throw InvalidParameter("holdout fraction must be in (0,1)");
  const std::size_t N = data.size();
  const auto holdout_size = static_cast<std::size_t>(std::floor(holdout_fraction * static_cast<double>(N)));
  if (holdout_size < 1) throw InvalidParameter("holdout fraction selects no observations");
  if (holdout_size >= N) throw InvalidParameter("holdout fraction leaves no training observations");

  const SubsetMask holdout = draw_srswor(holdout_size, N, rng);
  SplitDataset split;
  split.holdout_indices = holdout.active();
  split.train_indices.reserve(N - holdout_size);
  for (std::size_t i = 0; i < N; ++i) {
    if (!holdout.contains(i)) split.train_indices.push_back(i);
  }

  auto take = [&](const std::vector<std::size_t>& rows) {
    DatasetView v;
    v.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) v.y(static_cast<Eigen::Index>(k)) = data.y(static_cast<Eigen::Index>(rows[k]));
    v.x = gather_rows(data.x, rows);
    v.coords = gather_rows(data.coords, rows);
    return v;
  };
  split.train = take(split.train_indices);
  DatasetView held = take(split.holdout_indices);
  split.holdout_y = std::move(held.y);
  split.holdout_x = std::move(held.x);
  split.holdout_coords = std::move(held.coords);
  return split;
}

}  // namespace dsm
