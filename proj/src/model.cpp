#include "dsm/model.hpp"

#include <string>

namespace dsm {

void DatasetView::validate() const {
  const Eigen::Index N = y.size();
  if (N < 1) throw InvalidParameter("dataset must hold at least one observation");
  if (x.rows() != N || x.cols() < 1) throw InvalidParameter("covariate matrix must be N x p with p >= 1");
  if (coords.rows() != N || coords.cols() < 1) throw InvalidParameter("coordinate matrix must have N rows");
  if (!y.allFinite() || !x.allFinite() || !coords.allFinite()) {
    throw InvalidParameter("dataset contains non-finite values");
  }
}

DatasetView DatasetView::intercept_only(Eigen::VectorXd y) {
  const Eigen::Index N = y.size();
  DatasetView data;
  data.y = std::move(y);
  data.x = Eigen::MatrixXd::Ones(N, 1);
  data.coords = Eigen::VectorXd::LinSpaced(N, 1.0, static_cast<double>(N));
  return data;
}

void BasisConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidParameter("basis rho must be > 0");
}

SubsetDesign build_subset_design(const DatasetView& data, const BasisConfig& basis, const SubsetMask& mask) {
  if (mask.universe() != data.size()) throw InvalidParameter("subset mask universe does not match N");
  if (data.coords.cols() != basis.coord_dims()) throw InvalidParameter("coordinate columns do not match metric");
  const auto& active = mask.active();
  SubsetDesign design;
  design.y.resize(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) design.y(static_cast<Eigen::Index>(k)) = data.y(static_cast<Eigen::Index>(active[k]));
  design.x = gather_rows(data.x, active);
  design.psi = kernel_matrix(gather_rows(data.coords, active), basis);
  return design;
}

ChainState ChainState::initial(std::size_t N, std::size_t p) {
  ChainState s;
  s.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  s.eta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  s.xi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  return s;
}

void ChainState::validate() const {
  if (!(sigma2 > 0.0) || !(sigma2_eta > 0.0) || !(sigma2_xi > 0.0) || !(sigma2_beta > 0.0)) {
    throw InvalidParameter("chain state variances must be > 0");
  }
  if (!beta.allFinite() || !eta.allFinite() || !xi.allFinite()) throw InvalidParameter("chain state is not finite");
}

void FixedVariances::validate() const {
  if (!(sigma2 > 0.0) || !(sigma2_eta > 0.0) || !(sigma2_xi > 0.0) || !(sigma2_beta > 0.0)) {
    throw InvalidParameter("fixed variances must be > 0");
  }
}

void validate_index_set(const std::vector<std::size_t>& indices, std::size_t N, const char* what) {
  if (indices.empty()) throw InvalidParameter(std::string(what) + " must be nonempty");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= N) throw InvalidParameter(std::string(what) + " index out of range");
    if (k > 0 && indices[k] <= indices[k - 1]) {
      throw InvalidParameter(std::string(what) + " must be strictly increasing");
    }
  }
}

void SamplerConfig::validate(std::size_t N) const {
  if (!(ig_shape > 0.0) || !(ig_rate > 0.0)) throw InvalidParameter("inverse-gamma shape and rate must be > 0");
  if (iterations == 0 || burn_in >= iterations) throw InvalidParameter("need 0 <= burn_in < iterations");
  validate_index_set(prediction_set, N, "prediction set");
  basis.validate();
  if (fixed_variances) fixed_variances->validate();
  if (fixed_subset && (fixed_subset->universe() != N || fixed_subset->size() == 0)) {
    throw InvalidParameter("fixed subset must be a nonempty mask over N");
  }
  if (!holdout.empty()) validate_index_set(holdout, N, "holdout set");
}

PredictionBasis::PredictionBasis(const DatasetView& data, const BasisConfig& basis,
                                 std::vector<std::size_t> prediction_set)
    : indices_(std::move(prediction_set)) {
  validate_index_set(indices_, data.size(), "prediction set");
  if (data.coords.cols() != basis.coord_dims()) throw InvalidParameter("coordinate columns do not match metric");
  x_ = gather_rows(data.x, indices_);
  psi_ = kernel_matrix(gather_rows(data.coords, indices_), basis);
}

Eigen::VectorXd PredictionBasis::evaluate(const ChainState& state) const {
  const auto m = static_cast<Eigen::Index>(indices_.size());
  Eigen::VectorXd eta_a(m), xi_a(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(indices_[static_cast<std::size_t>(k)]);
    eta_a(k) = state.eta(i);
    xi_a(k) = state.xi(i);
  }
  Eigen::VectorXd mu = x_ * state.beta;
  mu.noalias() += psi_ * eta_a;
  return mu + xi_a;
}

Eigen::VectorXd predict_mu(const ChainState& state, const DatasetView& data, const BasisConfig& basis,
                           const std::vector<std::size_t>& prediction_set) {
  return PredictionBasis(data, basis, prediction_set).evaluate(state);
}

}  // namespace dsm
