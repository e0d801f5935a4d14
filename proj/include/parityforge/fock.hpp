#pragma once

// Truncated Fock-space states and operators for a single bosonic mode.
//
// All objects live on the span of |0>..|n_cut>. Matrices are dense; the
// top levels are corrupted by truncation, so algebraic identities are only
// checked on the "protected" lower part of the space.

#include <complex>
#include <cstddef>
#include <memory>
#include <utility>

#include <Eigen/Dense>

#include "parityforge/errors.hpp"

namespace parityforge {

using complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
/// Vacuum quadrature variance.
inline constexpr double kVacuumVariance = 0.25;

struct TruncationConfig {
  int n_cut = 200;
  double tail_tolerance = 1e-6;

  TruncationConfig() = default;
  explicit TruncationConfig(int n_cut_, double tail_tolerance_ = 1e-6);

  std::size_t dimension() const { return static_cast<std::size_t>(n_cut) + 1; }
  /// Number of levels in the top 10% of the space (at least one).
  std::size_t tail_levels() const;
  /// Dimension of the lower 90% on which algebra is trusted.
  std::size_t protected_dimension() const { return dimension() - tail_levels(); }
};

struct PureState {
  Vector amplitudes;
  bool normalized = false;

  PureState() = default;
  PureState(Vector amps, bool is_normalized)
      : amplitudes(std::move(amps)), normalized(is_normalized) {}

  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes.size()); }
  double norm_squared() const { return amplitudes.squaredNorm(); }
  /// Returns a copy scaled to unit norm. Throws ZeroProbability on a null vector.
  PureState normalized_copy() const;

  static PureState fock(std::size_t n, const TruncationConfig& trunc);
  static PureState vacuum(const TruncationConfig& trunc) { return fock(0, trunc); }
};

struct MixedState {
  Matrix rho;

  MixedState() = default;
  explicit MixedState(Matrix m) : rho(std::move(m)) {}

  static MixedState from_pure(const PureState& psi);

  std::size_t dimension() const { return static_cast<std::size_t>(rho.rows()); }
  double trace() const { return rho.trace().real(); }
  void hermitize() { rho = (0.5 * (rho + rho.adjoint())).eval(); }
  Eigen::VectorXd populations() const { return rho.diagonal().real(); }
};

enum class OperatorKind { unitary, projector, hermitian, general };

struct OperatorMatrix {
  Matrix entries;
  OperatorKind kind = OperatorKind::general;

  std::size_t dimension() const { return static_cast<std::size_t>(entries.rows()); }
};

struct SqueezeParameter {
  double r = 0.0;
  /// Squeezing phase in [0, 2*pi).
  double phase = 0.0;

  SqueezeParameter() = default;
  SqueezeParameter(double r_, double phase_ = 0.0);
  complex xi() const { return std::polar(r, phase); }
};

enum class ParitySign { even, odd };

/// Whether state constructors throw TailOverflow or silently renormalize.
enum class TailCheck { enforce, renormalize };

/// Total population in the top 10% of levels.
double tail_population(const Vector& amplitudes, const TruncationConfig& trunc);
double tail_population(const MixedState& state, const TruncationConfig& trunc);

/// (a, a^dagger) with a|n> = sqrt(n)|n-1>.
std::pair<OperatorMatrix, OperatorMatrix> ladder_matrices(const TruncationConfig& trunc);

PureState coherent_state(complex alpha, const TruncationConfig& trunc,
                         TailCheck check = TailCheck::enforce);

/// D(alpha) = exp(alpha a^dagger - alpha^* a) from closed-form matrix
/// elements. Entries are evaluated with a rescaled associated-Laguerre
/// recurrence, which stays finite for n_cut in the thousands.
OperatorMatrix displacement_matrix(complex alpha, const TruncationConfig& trunc);

/// How D(alpha) is restricted to the truncated space.
///
/// exact_elements: the true matrix elements <m|D|n>, m, n <= n_cut. Columns whose
///   displaced support leaves the space lose norm.
/// truncated_generator: exp(alpha a^dag - alpha^* a) of the truncated ladder
///   operators. Exactly unitary on the truncated space, but reflects population
///   at the boundary instead of losing it.
enum class DisplacementConvention { exact_elements, truncated_generator };

/// exp of the truncated generator, via a spectral decomposition of x.
OperatorMatrix displacement_matrix(complex alpha, const TruncationConfig& trunc,
                                   DisplacementConvention convention);

/// Largest dimension k such that D(alpha) keeps |0>..|k-1> inside the
/// truncated space to double precision; capped at the protected dimension.
std::size_t displacement_safe_dimension(complex alpha, const TruncationConfig& trunc);

/// Applies displacements to vectors and density matrices in a chosen convention.
/// For truncated_generator the eigendecomposition of x = (a + a^dag)/2 is
/// computed once and vector applications cost O(n^2).
class Displacer {
 public:
  Displacer(const TruncationConfig& trunc, DisplacementConvention convention);

  DisplacementConvention convention() const { return convention_; }
  Matrix matrix(complex alpha) const;
  Vector apply(complex alpha, const Vector& v) const;
  /// D(alpha) P+ D(-alpha) v.
  Vector displaced_even(complex alpha, const Vector& v) const;
  /// D rho D^dag.
  Matrix conjugate(complex alpha, const Matrix& rho) const;

 private:
  struct Spectrum;
  TruncationConfig trunc_;
  DisplacementConvention convention_;
  std::shared_ptr<const Spectrum> spectrum_;
};

struct DisplacementProduct {
  double phase;
  complex total;
};

/// D(alpha) D(beta) = exp(i * phase) D(alpha + beta), phase = Im(alpha beta^*).
DisplacementProduct combine_displacements(complex alpha, complex beta);

/// S(xi) = exp((xi^* a^2 - xi a^dagger^2) / 2), exponentiated through a
/// Hermitian eigendecomposition of the truncated generator.
OperatorMatrix squeeze_matrix(const SqueezeParameter& xi, const TruncationConfig& trunc);

PureState squeezed_vacuum(const SqueezeParameter& xi, const TruncationConfig& trunc,
                          TailCheck check = TailCheck::enforce);

/// (P+, P-) projectors on even / odd Fock levels.
std::pair<OperatorMatrix, OperatorMatrix> parity_projectors(const TruncationConfig& trunc);

/// D(alpha) P± D(-alpha).
OperatorMatrix displaced_parity(ParitySign sign, complex alpha, const TruncationConfig& trunc);

/// (M+, M-) = (diag cos(n tau), diag sin(n tau)).
std::pair<OperatorMatrix, OperatorMatrix> dispersive_projectors(double tau,
                                                                const TruncationConfig& trunc);

/// x^(theta) = (a e^{-i theta} + a^dagger e^{i theta}) / 2.
OperatorMatrix quadrature_matrix(double theta, const TruncationConfig& trunc);

/// Largest deviation of U^dagger U from identity on the protected block.
double unitarity_defect(const OperatorMatrix& op, const TruncationConfig& trunc);
/// Largest deviation of P^2 from P on the protected block.
double idempotence_defect(const OperatorMatrix& op, const TruncationConfig& trunc);
/// Same checks restricted to the leading `block` x `block` corner.
double unitarity_defect(const OperatorMatrix& op, std::size_t block);
double idempotence_defect(const OperatorMatrix& op, std::size_t block);

namespace detail {
/// log(n!) via lgamma.
double log_factorial(std::size_t n);
/// Exact matrix elements <m|D(alpha)|n> for m < rows, n < cols.
Matrix displacement_block(complex alpha, Eigen::Index rows, Eigen::Index cols);
/// Applies D(alpha) P_+ D(-alpha) to psi without materializing the projector.
Vector apply_displaced_parity(const Matrix& displacement, const Vector& psi);
}  // namespace detail

}  // namespace parityforge
