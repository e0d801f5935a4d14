#include "parityforge/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace parityforge {

LossModel::LossModel(double eps, std::optional<int> kmax) : epsilon(eps), k_max(kmax) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
  if (k_max && *k_max < 0) throw std::invalid_argument("k_max must be >= 0");
}

int LossModel::effective_k_max(const TruncationConfig& trunc) const {
  return k_max ? std::min(*k_max, trunc.n_cut) : trunc.n_cut;
}

namespace {

// log of |<n-k|E_k|n>| = 0.5 log C(n,k) + 0.5 k log(1-eta) + 0.5 (n-k) log(eta).
double log_kraus_element(std::size_t n, std::size_t k, double log_eta, double log_loss) {
  const double log_binom =
      detail::log_factorial(n) - detail::log_factorial(k) - detail::log_factorial(n - k);
  return 0.5 * log_binom + 0.5 * static_cast<double>(k) * log_loss +
         0.5 * static_cast<double>(n - k) * log_eta;
}

}  // namespace

OperatorMatrix loss_kraus(double eta, int k, const TruncationConfig& trunc) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (k < 0) throw std::invalid_argument("Kraus index must be >= 0");
  const auto dim = static_cast<Eigen::Index>(trunc.dimension());
  Matrix e = Matrix::Zero(dim, dim);
  const auto kk = static_cast<std::size_t>(k);
  if (eta == 1.0) {
    if (k == 0) e.setIdentity();
    return {std::move(e), OperatorKind::general};
  }
  const double log_eta = std::log(eta);
  const double log_loss = std::log1p(-eta);
  for (Eigen::Index n = k; n < dim; ++n) {
    e(n - k, n) = std::exp(log_kraus_element(static_cast<std::size_t>(n), kk, log_eta, log_loss));
  }
  return {std::move(e), OperatorKind::general};
}

MixedState apply_loss(const MixedState& rho, const LossModel& loss) {
  if (loss.lossless()) return rho;
  const auto dim = rho.rho.rows();
  const double eta = loss.eta();
  const double log_eta = std::log(eta);
  const double log_loss = std::log(loss.epsilon);
  const int k_max = loss.k_max ? std::min<int>(*loss.k_max, static_cast<int>(dim) - 1)
                               : static_cast<int>(dim) - 1;

  // E_k only shifts n -> n-k with a real weight, so
  // (E_k rho E_k^dag)_{ij} = w_k(i+k) w_k(j+k) rho_{i+k, j+k}.
  Matrix out = Matrix::Zero(dim, dim);
  Eigen::VectorXd w(dim);
  for (int k = 0; k <= k_max; ++k) {
    const Eigen::Index span = dim - k;
    for (Eigen::Index n = 0; n < span; ++n) {
      w(n) = std::exp(log_kraus_element(static_cast<std::size_t>(n + k), static_cast<std::size_t>(k),
                                        log_eta, log_loss));
    }
    const auto wv = w.head(span);
    out.topLeftCorner(span, span).array() +=
        (wv * wv.transpose()).cast<complex>().array() * rho.rho.bottomRightCorner(span, span).array();
  }
  return MixedState(std::move(out));
}

PureStepOutcome measure_project(const PureState& psi, const OperatorMatrix& projector) {
  if (projector.dimension() != psi.dimension())
    throw DimensionMismatch(projector.dimension(), psi.dimension());
  Vector projected = projector.entries * psi.amplitudes;
  const double p = projected.squaredNorm() / psi.norm_squared();
  if (!(p >= kZeroProbabilityThreshold)) throw ZeroProbability(p);
  projected /= std::sqrt(projected.squaredNorm());
  return {PureState(std::move(projected), true), p};
}

StepOutcome measure_project(const MixedState& rho, const OperatorMatrix& projector) {
  if (projector.dimension() != rho.dimension())
    throw DimensionMismatch(projector.dimension(), rho.dimension());
  Matrix projected = projector.entries * rho.rho * projector.entries.adjoint();
  const double p = projected.trace().real() / rho.trace();
  if (!(p >= kZeroProbabilityThreshold)) throw ZeroProbability(p);
  MixedState out(projected / projected.trace().real());
  out.hermitize();
  return {std::move(out), p};
}

Matrix detail::project_displaced_even(const Matrix& displacement, const Matrix& rho) {
  Matrix inner = displacement.adjoint() * rho * displacement;
  const auto dim = inner.rows();
  for (Eigen::Index n = 1; n < dim; n += 2) {
    inner.row(n).setZero();
    inner.col(n).setZero();
  }
  return displacement * inner * displacement.adjoint();
}

StepOutcome detail::finish_cycle(Matrix projected, const LossModel& loss) {
  const double p = projected.trace().real();
  if (!(p >= kZeroProbabilityThreshold)) throw ZeroProbability(p);
  MixedState after = apply_loss(MixedState(std::move(projected)), loss);
  after.rho /= p;
  after.hermitize();
  return {std::move(after), p};
}

StepOutcome measurement_cycle(const MixedState& rho, complex alpha, const LossModel& loss,
                              const TruncationConfig& trunc) {
  if (rho.dimension() != trunc.dimension()) throw DimensionMismatch(rho.dimension(), trunc.dimension());
  const Matrix d = displacement_matrix(alpha, trunc).entries;
  // Probabilities are relative to the incoming trace.
  Matrix projected = detail::project_displaced_even(d, rho.rho / rho.trace());
  return detail::finish_cycle(std::move(projected), loss);
}

}  // namespace parityforge
