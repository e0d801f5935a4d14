#include "parityforge/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace parityforge {

// ---------------------------------------------------------------------------
// errors

namespace {
std::string tail_message(double mass, double tol) {
  std::ostringstream os;
  os << "tail population " << mass << " exceeds tolerance " << tol
     << " (increase n_cut)";
  return os.str();
}

std::string zero_probability_message(double p, std::optional<std::size_t> step) {
  std::ostringstream os;
  os << "post-selected branch has probability " << p;
  if (step) os << " at step " << *step;
  return os.str();
}

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "invalid configuration";
  for (const auto& s : v) out += "; " + s;
  return out;
}
}  // namespace

TailOverflow::TailOverflow(double tail_mass, double tolerance)
    : Error(tail_message(tail_mass, tolerance)), tail_mass_(tail_mass), tolerance_(tolerance) {}

ZeroProbability::ZeroProbability(double probability, std::optional<std::size_t> step)
    : Error(zero_probability_message(probability, step)), probability_(probability), step_(step) {}

ZeroProbability ZeroProbability::at_step(std::size_t step) const {
  return ZeroProbability(probability_, step);
}

DimensionMismatch::DimensionMismatch(std::size_t lhs, std::size_t rhs)
    : Error("dimension mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}

NotHermitian::NotHermitian(double residual)
    : Error("operator is not Hermitian (residual " + std::to_string(residual) + ")") {}

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

// ---------------------------------------------------------------------------
// value types

TruncationConfig::TruncationConfig(int n_cut_, double tail_tolerance_)
    : n_cut(n_cut_), tail_tolerance(tail_tolerance_) {
  if (n_cut < 2) throw std::invalid_argument("n_cut must be at least 2");
  if (!(tail_tolerance > 0.0 && tail_tolerance < 1.0))
    throw std::invalid_argument("tail_tolerance must lie in (0, 1)");
}

std::size_t TruncationConfig::tail_levels() const {
  return std::max<std::size_t>(1, dimension() / 10);
}

SqueezeParameter::SqueezeParameter(double r_, double phase_) : r(r_), phase(phase_) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("squeezing r must be >= 0");
  if (!std::isfinite(phase)) throw std::invalid_argument("squeezing phase must be finite");
  phase = std::fmod(phase, 2.0 * kPi);
  if (phase < 0.0) phase += 2.0 * kPi;
}

PureState PureState::normalized_copy() const {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw ZeroProbability(n2);
  return PureState(amplitudes / std::sqrt(n2), true);
}

PureState PureState::fock(std::size_t n, const TruncationConfig& trunc) {
  if (n >= trunc.dimension()) throw std::out_of_range("Fock index beyond truncation");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(trunc.dimension()));
  v(static_cast<Eigen::Index>(n)) = 1.0;
  return PureState(std::move(v), true);
}

MixedState MixedState::from_pure(const PureState& psi) {
  return MixedState(psi.amplitudes * psi.amplitudes.adjoint());
}

// ---------------------------------------------------------------------------
// helpers

double detail::log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double tail_population(const Vector& amplitudes, const TruncationConfig& trunc) {
  const auto dim = amplitudes.size();
  const auto top = static_cast<Eigen::Index>(trunc.tail_levels());
  const double total = amplitudes.squaredNorm();
  if (total == 0.0) return 0.0;
  return amplitudes.tail(std::min(top, dim)).squaredNorm() / total;
}

double tail_population(const MixedState& state, const TruncationConfig& trunc) {
  const Eigen::VectorXd pops = state.populations();
  const auto top = static_cast<Eigen::Index>(trunc.tail_levels());
  const double total = pops.sum();
  if (total == 0.0) return 0.0;
  return pops.tail(std::min(top, pops.size())).sum() / total;
}

namespace {

void check_tail(const Vector& amps, const TruncationConfig& trunc, TailCheck check) {
  if (check == TailCheck::renormalize) return;
  const double tail = tail_population(amps, trunc);
  if (tail > trunc.tail_tolerance) throw TailOverflow(tail, trunc.tail_tolerance);
}

Eigen::Index as_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

}  // namespace

// ---------------------------------------------------------------------------
// operators

std::pair<OperatorMatrix, OperatorMatrix> ladder_matrices(const TruncationConfig& trunc) {
  const auto dim = as_index(trunc.dimension());
  Matrix a = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  Matrix ad = a.adjoint();
  return {OperatorMatrix{std::move(a), OperatorKind::general},
          OperatorMatrix{std::move(ad), OperatorKind::general}};
}

PureState coherent_state(complex alpha, const TruncationConfig& trunc, TailCheck check) {
  const auto dim = as_index(trunc.dimension());
  Vector c = Vector::Zero(dim);
  const double mod = std::abs(alpha);
  if (mod == 0.0) {
    c(0) = 1.0;
    return PureState(std::move(c), true);
  }
  const double arg = std::arg(alpha);
  const double log_mod = std::log(mod);
  for (Eigen::Index n = 0; n < dim; ++n) {
    const double nn = static_cast<double>(n);
    const double log_abs = -0.5 * mod * mod + nn * log_mod -
                           0.5 * detail::log_factorial(static_cast<std::size_t>(n));
    c(n) = std::polar(std::exp(log_abs), nn * arg);
  }
  check_tail(c, trunc, check);
  c.normalize();
  return PureState(std::move(c), true);
}

Matrix detail::displacement_block(complex alpha, Eigen::Index rows, Eigen::Index cols) {
  Matrix d = Matrix::Zero(rows, cols);
  const double mod = std::abs(alpha);
  if (mod == 0.0) {
    for (Eigen::Index n = 0; n < std::min(rows, cols); ++n) d(n, n) = 1.0;
    return d;
  }
  const double x = mod * mod;
  const double log_mod = std::log(mod);
  const double arg = std::arg(alpha);
  constexpr double kRescale = 1e150;
  const double log_rescale = std::log(kRescale);

  // For k = m - n >= 0:
  //   <n+k|D|n> = sqrt(n!/(n+k)!) |alpha|^k e^{-x/2} L_n^{(k)}(x) e^{i k arg}
  // g_n below is the real prefactor sqrt(n!/(n+k)!) |alpha|^k e^{-x/2} L_n^{(k)}(x),
  // carried as h_n * exp(log_scale) so that tiny starting values never flush to zero.
  // The upper diagonal follows from <n|D|n+k> = (-1)^k conj(<n+k|D|n>).
  for (Eigen::Index k = 0; k < std::max(rows, cols); ++k) {
    const Eigen::Index n_lower = k < rows ? std::min(cols, rows - k) : 0;
    const Eigen::Index n_upper = (k > 0 && k < cols) ? std::min(rows, cols - k) : 0;
    const Eigen::Index n_end = std::max(n_lower, n_upper);
    const double kk = static_cast<double>(k);
    const complex phase_lower = std::polar(1.0, kk * arg);
    const complex phase_upper = (k % 2 == 0 ? 1.0 : -1.0) * std::conj(phase_lower);
    double log_scale = kk * log_mod - 0.5 * x - 0.5 * detail::log_factorial(static_cast<std::size_t>(k));
    double scale = std::exp(log_scale);
    double h_prev2 = 0.0;
    double h_prev = 1.0;
    for (Eigen::Index n = 0; n < n_end; ++n) {
      double h;
      if (n == 0) {
        h = 1.0;
      } else {
        const double nn = static_cast<double>(n);
        const double c1 = (2.0 * nn - 1.0 + kk - x) * std::sqrt(nn / (nn + kk));
        const double c2 = (nn > 1.0)
                              ? (nn - 1.0 + kk) * std::sqrt(nn * (nn - 1.0) / ((nn + kk) * (nn + kk - 1.0)))
                              : 0.0;
        h = (c1 * h_prev - c2 * h_prev2) / nn;
        h_prev2 = h_prev;
      }
      h_prev = h;
      if (std::abs(h_prev) > kRescale) {
        h_prev /= kRescale;
        h_prev2 /= kRescale;
        log_scale += log_rescale;
        scale = std::exp(log_scale);
      }
      const double g = h_prev * scale;
      if (n < n_lower) d(n + k, n) = g * phase_lower;
      if (n < n_upper) d(n, n + k) = g * phase_upper;
    }
  }
  return d;
}

OperatorMatrix displacement_matrix(complex alpha, const TruncationConfig& trunc) {
  const auto dim = as_index(trunc.dimension());
  return {detail::displacement_block(alpha, dim, dim), OperatorKind::unitary};
}

DisplacementProduct combine_displacements(complex alpha, complex beta) {
  return {std::imag(alpha * std::conj(beta)), alpha + beta};
}

OperatorMatrix squeeze_matrix(const SqueezeParameter& xi, const TruncationConfig& trunc) {
  const auto dim = as_index(trunc.dimension());
  if (xi.r == 0.0) return {Matrix::Identity(dim, dim), OperatorKind::unitary};
  const auto [a, ad] = ladder_matrices(trunc);
  const complex z = xi.xi();
  const Matrix a2 = a.entries * a.entries;
  const Matrix ad2 = ad.entries * ad.entries;
  // G = (z^* a^2 - z a^dag^2)/2 is anti-Hermitian; H = iG is Hermitian and S = exp(-iH).
  const Matrix h = complex(0.0, 0.5) * (std::conj(z) * a2 - z * ad2);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Vector phases = (complex(0.0, -1.0) * eig.eigenvalues().cast<complex>()).array().exp();
  Matrix s = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  const Vector col0 = s.col(0);
  check_tail(col0, trunc, TailCheck::enforce);
  return {std::move(s), OperatorKind::unitary};
}

PureState squeezed_vacuum(const SqueezeParameter& xi, const TruncationConfig& trunc, TailCheck check) {
  const auto dim = as_index(trunc.dimension());
  Vector c = Vector::Zero(dim);
  if (xi.r == 0.0) {
    c(0) = 1.0;
    return PureState(std::move(c), true);
  }
  const double log_tanh = std::log(std::tanh(xi.r));
  const double log_norm = -0.5 * std::log(std::cosh(xi.r));
  for (Eigen::Index n = 0; 2 * n < dim; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const double nn = static_cast<double>(n);
    const double log_abs = log_norm + 0.5 * detail::log_factorial(2 * un) - nn * std::log(2.0) -
                           detail::log_factorial(un) + nn * log_tanh;
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    c(2 * n) = sign * std::polar(std::exp(log_abs), nn * xi.phase);
  }
  check_tail(c, trunc, check);
  c.normalize();
  return PureState(std::move(c), true);
}

std::pair<OperatorMatrix, OperatorMatrix> parity_projectors(const TruncationConfig& trunc) {
  const auto dim = as_index(trunc.dimension());
  Matrix even = Matrix::Zero(dim, dim);
  Matrix odd = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n) (n % 2 == 0 ? even : odd)(n, n) = 1.0;
  return {OperatorMatrix{std::move(even), OperatorKind::projector},
          OperatorMatrix{std::move(odd), OperatorKind::projector}};
}

OperatorMatrix displaced_parity(ParitySign sign, complex alpha, const TruncationConfig& trunc) {
  const Matrix d = displacement_matrix(alpha, trunc).entries;
  const auto dim = d.rows();
  const int keep = sign == ParitySign::even ? 0 : 1;
  // D P D^dag only involves the columns of D on the kept parity.
  Matrix kept = Matrix::Zero(dim, dim);
  for (Eigen::Index n = keep; n < dim; n += 2) kept.col(n) = d.col(n);
  Matrix p = kept * d.adjoint();
  return {std::move(p), OperatorKind::projector};
}

std::pair<OperatorMatrix, OperatorMatrix> dispersive_projectors(double tau,
                                                                const TruncationConfig& trunc) {
  const auto dim = as_index(trunc.dimension());
  Matrix plus = Matrix::Zero(dim, dim);
  Matrix minus = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n) {
    plus(n, n) = std::cos(static_cast<double>(n) * tau);
    minus(n, n) = std::sin(static_cast<double>(n) * tau);
  }
  // Not projectors in general (entries can be negative); tagged Hermitian.
  return {OperatorMatrix{std::move(plus), OperatorKind::hermitian},
          OperatorMatrix{std::move(minus), OperatorKind::hermitian}};
}

OperatorMatrix quadrature_matrix(double theta, const TruncationConfig& trunc) {
  const auto [a, ad] = ladder_matrices(trunc);
  const complex e = std::polar(1.0, theta);
  Matrix x = 0.5 * (std::conj(e) * a.entries + e * ad.entries);
  return {std::move(x), OperatorKind::hermitian};
}

double unitarity_defect(const OperatorMatrix& op, std::size_t block) {
  const auto k = as_index(block);
  const Matrix prod = op.entries.leftCols(k).adjoint() * op.entries.leftCols(k);
  return (prod - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
}

double idempotence_defect(const OperatorMatrix& op, std::size_t block) {
  const auto k = as_index(block);
  const Matrix sq = op.entries * op.entries.leftCols(k);
  return (sq - op.entries.leftCols(k)).topRows(k).cwiseAbs().maxCoeff();
}

double unitarity_defect(const OperatorMatrix& op, const TruncationConfig& trunc) {
  return unitarity_defect(op, trunc.protected_dimension());
}

double idempotence_defect(const OperatorMatrix& op, const TruncationConfig& trunc) {
  return idempotence_defect(op, trunc.protected_dimension());
}

std::size_t displacement_safe_dimension(complex alpha, const TruncationConfig& trunc) {
  // D(alpha)|k> is supported below (sqrt(k) + |alpha|)^2 up to a super-exponentially
  // small tail; 1.5 extra units of radius push that tail under 1e-8.
  const double radius = std::sqrt(static_cast<double>(trunc.dimension())) - std::abs(alpha) - 1.5;
  if (radius <= 0.0) return 0;
  const auto safe = static_cast<std::size_t>(std::floor(radius * radius));
  return std::min(safe, trunc.protected_dimension());
}

// ---------------------------------------------------------------------------
// Displacer

// x = V diag(lambda) V^T for the truncated quadrature x = (a + a^dag)/2.
// D(alpha) = R V diag(exp(2 i |alpha| lambda)) V^T R^dag with R = exp(i phi n),
// phi = arg(alpha) - pi/2, since alpha a^dag - alpha^* a = 2 i |alpha| x^(phi).
struct Displacer::Spectrum {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;

  explicit Spectrum(const TruncationConfig& trunc) {
    const auto dim = as_index(trunc.dimension());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index n = 1; n < dim; ++n) {
      x(n - 1, n) = x(n, n - 1) = 0.5 * std::sqrt(static_cast<double>(n));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x);
    vectors = eig.eigenvectors();
    values = eig.eigenvalues();
  }

  Vector rotation(complex alpha) const {
    const double phi = std::arg(alpha) - kPi / 2.0;
    Vector r(values.size());
    for (Eigen::Index n = 0; n < r.size(); ++n) r(n) = std::polar(1.0, phi * static_cast<double>(n));
    return r;
  }

  Vector phases(complex alpha) const {
    return (complex(0.0, 2.0 * std::abs(alpha)) * values.cast<complex>()).array().exp();
  }

  Vector apply(complex alpha, const Vector& v) const {
    if (alpha == complex(0.0)) return v;
    const Vector r = rotation(alpha);
    Vector w = r.conjugate().cwiseProduct(v);
    Vector spectral = vectors.transpose().cast<complex>() * w;
    spectral = spectral.cwiseProduct(phases(alpha));
    w = vectors.cast<complex>() * spectral;
    return r.cwiseProduct(w);
  }

  Matrix matrix(complex alpha) const {
    const auto dim = values.size();
    if (alpha == complex(0.0)) return Matrix::Identity(dim, dim);
    const Vector r = rotation(alpha);
    const Matrix vc = vectors.cast<complex>();
    Matrix m = r.asDiagonal() * vc * phases(alpha).asDiagonal() * vc.transpose() * r.conjugate().asDiagonal();
    return m;
  }
};

Displacer::Displacer(const TruncationConfig& trunc, DisplacementConvention convention)
    : trunc_(trunc), convention_(convention) {
  if (convention_ == DisplacementConvention::truncated_generator)
    spectrum_ = std::make_shared<const Spectrum>(trunc_);
}

Matrix Displacer::matrix(complex alpha) const {
  if (spectrum_) return spectrum_->matrix(alpha);
  return displacement_matrix(alpha, trunc_).entries;
}

Vector Displacer::apply(complex alpha, const Vector& v) const {
  if (spectrum_) return spectrum_->apply(alpha, v);
  return displacement_matrix(alpha, trunc_).entries * v;
}

Vector Displacer::displaced_even(complex alpha, const Vector& v) const {
  if (spectrum_) {
    Vector inner = spectrum_->apply(-alpha, v);
    for (Eigen::Index n = 1; n < inner.size(); n += 2) inner(n) = 0.0;
    return spectrum_->apply(alpha, inner);
  }
  return detail::apply_displaced_parity(displacement_matrix(alpha, trunc_).entries, v);
}

Matrix Displacer::conjugate(complex alpha, const Matrix& rho) const {
  const Matrix d = matrix(alpha);
  return d * rho * d.adjoint();
}

OperatorMatrix displacement_matrix(complex alpha, const TruncationConfig& trunc,
                                   DisplacementConvention convention) {
  if (convention == DisplacementConvention::exact_elements) return displacement_matrix(alpha, trunc);
  return {Displacer(trunc, convention).matrix(alpha), OperatorKind::unitary};
}

Vector detail::apply_displaced_parity(const Matrix& displacement, const Vector& psi) {
  Vector inner = displacement.adjoint() * psi;
  for (Eigen::Index n = 1; n < inner.size(); n += 2) inner(n) = 0.0;
  return displacement * inner;
}

}  // namespace parityforge
