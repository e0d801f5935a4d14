#pragma once

// Per-measurement bosonic loss and the post-selected measurement cycle.

#include <optional>

#include "parityforge/fock.hpp"

namespace parityforge {

/// Success probabilities below this are treated as an impossible branch.
inline constexpr double kZeroProbabilityThreshold = 1e-12;

struct LossModel {
  /// Loss probability per measurement, epsilon = 1 - eta.
  double epsilon = 0.0;
  /// Highest Kraus index kept; unset means n_cut (exact on the truncated space).
  std::optional<int> k_max;

  LossModel() = default;
  explicit LossModel(double eps, std::optional<int> kmax = std::nullopt);

  double eta() const { return 1.0 - epsilon; }
  bool lossless() const { return epsilon == 0.0; }
  int effective_k_max(const TruncationConfig& trunc) const;
};

struct StepOutcome {
  MixedState state;
  double success_probability = 0.0;
};

struct PureStepOutcome {
  PureState state;
  double success_probability = 0.0;
};

/// E_k = sqrt((1-eta)^k / k!) sqrt(eta)^{a^dag a} a^k.
OperatorMatrix loss_kraus(double eta, int k, const TruncationConfig& trunc);

/// sum_k E_k rho E_k^dag. Trace preserving when k_max = n_cut.
MixedState apply_loss(const MixedState& rho, const LossModel& loss);

/// Projects and renormalizes. The probability is read off before renormalizing.
PureStepOutcome measure_project(const PureState& psi, const OperatorMatrix& projector);
StepOutcome measure_project(const MixedState& rho, const OperatorMatrix& projector);

/// One lossy cycle: project on P+(alpha), apply loss, renormalize by the
/// pre-loss trace, then symmetrize rho.
StepOutcome measurement_cycle(const MixedState& rho, complex alpha, const LossModel& loss,
                              const TruncationConfig& trunc);

namespace detail {
/// D P+ D^dag rho D P+ D^dag for a precomputed displacement matrix.
Matrix project_displaced_even(const Matrix& displacement, const Matrix& rho);
/// Completes a projection step: probability check, loss, renormalization.
StepOutcome finish_cycle(Matrix projected, const LossModel& loss);
}  // namespace detail

}  // namespace parityforge
