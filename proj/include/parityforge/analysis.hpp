#pragma once

// State characterization: Wigner grids, quadrature statistics, fidelities,
// best-fit squeezed / GKP parameters and the parity-sum Hamiltonian.

#include <optional>
#include <vector>

#include "parityforge/fock.hpp"
#include "parityforge/protocols.hpp"

namespace parityforge {

struct Interval {
  double lo = -6.0;
  double hi = 6.0;
};

struct WignerGridSpec {
  Interval x_range{};
  Interval p_range{};
  int resolution = 241;
  /// Worker threads for the grid; 0 means hardware concurrency.
  unsigned jobs = 0;
};

struct WignerGrid {
  Interval x_range;
  Interval p_range;
  int resolution = 0;
  std::vector<double> xs;
  std::vector<double> ps;
  /// values(i, j) = W(x_i + i p_j).
  Eigen::MatrixXd values;

  double cell_area() const;
  /// Riemann sum of W over the grid.
  double integral() const;
};

/// W(alpha) = (2/pi) <D(-alpha) psi| Pi |D(-alpha) psi>, Pi = diag((-1)^n).
double wigner_point(const PureState& psi, complex alpha);
double wigner_point(const MixedState& rho, complex alpha);
WignerGrid wigner(const State& state, const WignerGridSpec& spec);

/// Var(x^(theta)) with <a a^dag> = <a^dag a> + 1 taken from the exact commutator.
double quadrature_variance(const State& state, double theta);

struct QuadratureMoments {
  complex mean_a;      ///< <a>
  complex mean_a2;     ///< <a^2>
  double mean_number;  ///< <a^dag a>
};
QuadratureMoments quadrature_moments(const State& state);

struct SqueezingReport {
  double s_db = 0.0;
  double theta_min = 0.0;
  double var_min = kVacuumVariance;
  double var_max = kVacuumVariance;
  SqueezeParameter best_fit_xi{};
  double best_fit_fidelity = 0.0;
};

struct CovarianceSummary {
  double var_min;
  double var_max;
  /// Quadrature angle of the minimal variance, in [0, pi).
  double theta_min;
};
/// Eigen-decomposition of the symmetrized (x, p) covariance matrix.
CovarianceSummary covariance_summary(const State& state);

/// S_dB = -10 log10(var_min / 0.25), plus the best-fit squeezed vacuum.
SqueezingReport squeezing_db(const State& state, bool fit = true);

/// |<a|b>|^2, <psi|rho|psi>, or the Uhlmann fidelity for two density matrices.
double fidelity(const State& a, const State& b);
double fidelity(const PureState& a, const PureState& b);

struct SqueezeFit {
  SqueezeParameter xi;
  double fidelity = 0.0;
};

struct SqueezeFitOptions {
  std::optional<double> theta_fixed;  ///< quadrature angle of the squeezed axis
  double r_max = 4.0;
  double scan_step = 0.05;
  double tolerance = 1e-4;
};

/// Maximizes F(state, squeezed_vacuum(r e^{2 i theta})) over r.
SqueezeFit fit_squeezed(const State& state, const SqueezeFitOptions& options = {});

/// sum_j exp(-x_j^2 / (2 sigma^2)) D(x_j) S(r)|0>, x_j = (2j+1) delta / 2, normalized.
/// Terms are dropped once the envelope weight falls below 1e-8.
PureState approx_gkp_state(double r, double sigma_env, double delta, const TruncationConfig& trunc,
                           TailCheck check = TailCheck::enforce);

struct GkpFitReport {
  double r_opt = 0.0;
  double sigma_env_opt = 0.0;
  double fidelity = 0.0;
};

struct GkpFitOptions {
  Interval r_range{0.2, 3.0};
  double r_step = 0.1;
  Interval sigma_range{1.0, 12.0};
  double sigma_step = 0.5;
  int restarts = 3;
  double tolerance = 1e-4;
};

GkpFitReport fit_gkp(const State& state, double delta, const GkpFitOptions& options = {});

/// H = -sum_n P+(i t_n).
OperatorMatrix parity_hamiltonian(const std::vector<double>& points, const TruncationConfig& trunc);

struct GroundState {
  double energy;
  PureState state;
};

/// Lowest eigenpair via a dense Hermitian eigensolver. Throws NotHermitian.
GroundState ground_state(const OperatorMatrix& h);

}  // namespace parityforge
