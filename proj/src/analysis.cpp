#include "parityforge/analysis.hpp"

#include <cmath>

namespace parityforge {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

QuadratureMoments quadrature_moments(const State& state) {
  return std::visit(
      overloaded{
          [](const PureState& psi) {
            const Vector& c = psi.amplitudes;
            const double norm = c.squaredNorm();
            complex a1 = 0.0, a2 = 0.0;
            double number = 0.0;
            for (Eigen::Index n = 0; n < c.size(); ++n) {
              const double nn = static_cast<double>(n);
              number += nn * std::norm(c(n));
              if (n >= 1) a1 += std::conj(c(n - 1)) * std::sqrt(nn) * c(n);
              if (n >= 2) a2 += std::conj(c(n - 2)) * std::sqrt(nn * (nn - 1.0)) * c(n);
            }
            return QuadratureMoments{a1 / norm, a2 / norm, number / norm};
          },
          [](const MixedState& rho) {
            const Matrix& r = rho.rho;
            const double tr = rho.trace();
            complex a1 = 0.0, a2 = 0.0;
            double number = 0.0;
            // Tr(rho a) = sum_n rho_{n, n-1} sqrt(n).
            for (Eigen::Index n = 0; n < r.rows(); ++n) {
              const double nn = static_cast<double>(n);
              number += nn * r(n, n).real();
              if (n >= 1) a1 += r(n, n - 1) * std::sqrt(nn);
              if (n >= 2) a2 += r(n, n - 2) * std::sqrt(nn * (nn - 1.0));
            }
            return QuadratureMoments{a1 / tr, a2 / tr, number / tr};
          },
      },
      state);
}

double quadrature_variance(const State& state, double theta) {
  const QuadratureMoments mom = quadrature_moments(state);
  const complex e = std::polar(1.0, -theta);
  const double second = 0.25 * (2.0 * mom.mean_number + 1.0 + 2.0 * std::real(mom.mean_a2 * e * e));
  const double first = std::real(mom.mean_a * e);
  return second - first * first;
}

CovarianceSummary covariance_summary(const State& state) {
  const QuadratureMoments mom = quadrature_moments(state);
  // Var(theta) = c0 + c cos(2 theta) + s sin(2 theta).
  const double ra = mom.mean_a.real(), ia = mom.mean_a.imag();
  const double c0 = 0.25 * (2.0 * mom.mean_number + 1.0) - 0.5 * std::norm(mom.mean_a);
  const double c = 0.5 * mom.mean_a2.real() - 0.5 * (ra * ra - ia * ia);
  const double s = 0.5 * mom.mean_a2.imag() - ra * ia;
  const double amp = std::hypot(c, s);
  double theta = 0.5 * (std::atan2(s, c) + kPi);
  theta = std::fmod(theta, kPi);
  if (theta < 0.0) theta += kPi;
  return {c0 - amp, c0 + amp, theta};
}

SqueezingReport squeezing_db(const State& state, bool fit) {
  const CovarianceSummary cov = covariance_summary(state);
  SqueezingReport report;
  report.var_min = cov.var_min;
  report.var_max = cov.var_max;
  report.theta_min = cov.theta_min;
  report.s_db = -10.0 * std::log10(cov.var_min / kVacuumVariance);
  if (fit) {
    SqueezeFitOptions opts;
    opts.theta_fixed = cov.theta_min;
    const SqueezeFit best = fit_squeezed(state, opts);
    report.best_fit_xi = best.xi;
    report.best_fit_fidelity = best.fidelity;
  }
  return report;
}

double fidelity(const PureState& a, const PureState& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch(a.dimension(), b.dimension());
  const complex overlap = a.amplitudes.dot(b.amplitudes);
  return std::norm(overlap) / (a.norm_squared() * b.norm_squared());
}

namespace {

double pure_mixed_fidelity(const PureState& psi, const MixedState& rho) {
  if (psi.dimension() != rho.dimension()) throw DimensionMismatch(psi.dimension(), rho.dimension());
  const complex v = psi.amplitudes.dot(rho.rho * psi.amplitudes);
  return v.real() / (psi.norm_squared() * rho.trace());
}

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.cast<complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

double uhlmann_fidelity(const MixedState& a, const MixedState& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch(a.dimension(), b.dimension());
  const Matrix ra = psd_sqrt(a.rho / a.trace());
  const Matrix inner = ra * (b.rho / b.trace()) * ra;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double root_sum = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return root_sum * root_sum;
}

}  // namespace

double fidelity(const State& a, const State& b) {
  return std::visit(
      overloaded{
          [](const PureState& x, const PureState& y) { return fidelity(x, y); },
          [](const PureState& x, const MixedState& y) { return pure_mixed_fidelity(x, y); },
          [](const MixedState& x, const PureState& y) { return pure_mixed_fidelity(y, x); },
          [](const MixedState& x, const MixedState& y) { return uhlmann_fidelity(x, y); },
      },
      a, b);
}

OperatorMatrix parity_hamiltonian(const std::vector<double>& points, const TruncationConfig& trunc) {
  if (points.empty()) throw InvalidSequence("parity Hamiltonian needs at least one point");
  const auto dim = static_cast<Eigen::Index>(trunc.dimension());
  Matrix h = Matrix::Zero(dim, dim);
  for (double t : points) h -= displaced_parity(ParitySign::even, complex(0.0, t), trunc).entries;
  h = (0.5 * (h + h.adjoint())).eval();
  return {std::move(h), OperatorKind::hermitian};
}

GroundState ground_state(const OperatorMatrix& h) {
  const double scale = std::max(1.0, h.entries.cwiseAbs().maxCoeff());
  const double residual = (h.entries - h.entries.adjoint()).cwiseAbs().maxCoeff();
  if (residual > 1e-9 * scale) throw NotHermitian(residual);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h.entries);
  Vector v = eig.eigenvectors().col(0);
  // Fix the global phase so the largest amplitude is real and positive.
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  v *= std::polar(1.0, -std::arg(v(idx)));
  return {eig.eigenvalues()(0), PureState(v.normalized(), true)};
}

}  // namespace parityforge
