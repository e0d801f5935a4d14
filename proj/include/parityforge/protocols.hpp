#pragma once

// Post-selected preparation protocols built from displacements and
// even-parity projections: squeezing, multi-component cats and GKP combs.
//
// Products apply right to left: step 1 acts on the state first. Outputs are
// defined up to a global phase.

#include <optional>
#include <variant>
#include <vector>

#include "parityforge/channels.hpp"
#include "parityforge/fock.hpp"

namespace parityforge {

using State = std::variant<PureState, MixedState>;

struct DisplacementSequence {
  /// Squeezing orientation.
  double theta = 0.0;
  std::vector<double> times;

  std::size_t size() const { return times.size(); }
  /// Measurement point of step m (0-based): i e^{i theta} t_m.
  complex point(std::size_t m) const;
  /// t_m - t_{m-1} with t_{-1} = 0.
  std::vector<double> increments() const;
};

struct CatSequence {
  std::vector<complex> alphas;
};

struct GkpSpec {
  DisplacementSequence squeeze_stage;
  double delta = 2.0 * 1.7724538509055160273;  // 2 sqrt(pi)
  int comb_steps = 2;
};

struct RunLog {
  std::vector<double> per_step_probabilities;
  double cumulative_probability = 1.0;
  /// State after each step, only filled when requested.
  std::vector<State> checkpoints;

  void record(double p);
};

struct RunResult {
  State state;
  RunLog log;

  const PureState& pure() const { return std::get<PureState>(state); }
  const MixedState& mixed() const { return std::get<MixedState>(state); }
  bool is_pure() const { return std::holds_alternative<PureState>(state); }
};

struct RunOptions {
  /// Use the folded form D(i e^{i theta} t_M) prod P+ D(-i e^{i theta} dt_m). Lossless only.
  bool folded = false;
  /// Evolve a density matrix even when epsilon = 0.
  bool force_density_matrix = false;
  bool checkpoint = false;
  DisplacementConvention convention = DisplacementConvention::exact_elements;
};

/// t_m = (-1)^{m-1} t_max (1 - floor((m-1)/2) / floor((M-1)/2)). Odd M only.
DisplacementSequence symmetric_sequence(int m_count, double t_max, double theta = 0.0);
/// t_m = t_max (1 - (m-1)/(M-1)).
DisplacementSequence linear_sequence(int m_count, double t_max, double theta = 0.0);

RunResult run_squeezing(const DisplacementSequence& seq, const LossModel& loss,
                        const TruncationConfig& trunc, const RunOptions& options = {});

/// prod_m P+ D(alpha_m) |0>.
RunResult run_cat(const CatSequence& seq, const LossModel& loss, const TruncationConfig& trunc,
                  const RunOptions& options = {});

/// Normalized e^{i phi}|a1+a2> + e^{-i phi}|a1-a2> + e^{-i phi}|-a1+a2> + e^{i phi}|-a1-a2>,
/// phi = Im(a2 a1^*).
PureState analytic_cat_m2(complex alpha1, complex alpha2, const TruncationConfig& trunc);

/// alpha_m = i^{(1+(-1)^m)/2} 2^{floor((m-1)/2) - 1} delta.
CatSequence cat_lattice_sequence(int m_count, double delta);

/// c_n -> (-1)^n c_n.
PureState point_reflect(const PureState& psi);
MixedState point_reflect(const MixedState& rho);

/// Squeezing stage followed by P+ D(m delta / 2) for m = 1..comb_steps.
RunResult run_gkp(const GkpSpec& spec, const LossModel& loss, const TruncationConfig& trunc,
                  const RunOptions& options = {});

/// Full composite operator prod_m P+(i e^{i theta} t_m), built as dense matrices.
/// Used to cross-check runner probabilities.
Matrix squeezing_projector(const DisplacementSequence& seq, const TruncationConfig& trunc);

}  // namespace parityforge
