#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "parityforge/analysis.hpp"

using namespace parityforge;

namespace {

constexpr double kTwoOverPi = 2.0 / kPi;

PureState pure(Vector v) { return PureState(v.normalized(), true); }

PureState m3_output(const TruncationConfig& t) {
  return run_squeezing(symmetric_sequence(3, 0.8), LossModel(), t).pure();
}

}  // namespace

TEST_SUITE("wigner") {
  TEST_CASE("values at the origin") {
    const TruncationConfig t(20);
    CHECK(wigner_point(PureState::vacuum(t), 0.0) == doctest::Approx(kTwoOverPi));
    CHECK(wigner_point(PureState::fock(1, t), 0.0) == doctest::Approx(-kTwoOverPi));
    CHECK(wigner_point(MixedState::from_pure(PureState::fock(2, t)), 0.0) == doctest::Approx(kTwoOverPi));
  }

  TEST_CASE("coherent state is a displaced Gaussian") {
    const TruncationConfig t(60);
    const complex beta(0.7, -0.5);
    const PureState c = coherent_state(beta, t);
    for (const complex alpha : {complex(0, 0), complex(0.7, -0.5), complex(1.5, 1.0), complex(-2.0, 0.3)}) {
      const double expected = kTwoOverPi * std::exp(-2.0 * std::norm(alpha - beta));
      CHECK(std::abs(wigner_point(c, alpha) - expected) < 1e-12);
    }
  }

  TEST_CASE("mixed state matches the padded displaced parity") {
    std::mt19937 rng(2);
    std::normal_distribution<double> g;
    Matrix a = Matrix::Zero(30, 3);
    for (Eigen::Index i = 0; i < 10; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) a(i, j) = complex(g(rng), g(rng));
    Matrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    const MixedState state(rho);
    for (const complex alpha : {complex(0.2, 0.1), complex(-1.0, 1.3), complex(2.5, 0.0)}) {
      CHECK(std::abs(wigner_point(state, alpha) - oracle::wigner(rho, alpha, 200)) < 1e-10);
    }
  }

  TEST_CASE("grid integrates to one for the M=3 output") {
    const TruncationConfig t(201);
    const PureState psi = m3_output(t);
    WignerGridSpec spec;
    spec.x_range = {-5.0, 5.0};
    spec.p_range = {-5.0, 5.0};
    spec.resolution = 161;
    const WignerGrid grid = wigner(psi, spec);
    CHECK(std::abs(grid.integral() - 1.0) < 1e-3);
    CHECK(grid.values.cwiseAbs().maxCoeff() <= kTwoOverPi + 1e-6);
    const WignerGrid mixed = wigner(MixedState::from_pure(psi), spec);
    CHECK((mixed.values - grid.values).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("bound holds for lossy and coarse-truncated states") {
    const TruncationConfig t(51);
    const RunResult r = run_squeezing(symmetric_sequence(3, 0.8), LossModel(0.15), t);
    WignerGridSpec spec;
    spec.resolution = 41;
    const WignerGrid grid = wigner(r.state, spec);
    CHECK(grid.values.cwiseAbs().maxCoeff() <= kTwoOverPi + 1e-6);
    CHECK(std::abs(grid.integral() - 1.0) < 1e-2);
  }

  TEST_CASE("grid layout and threading are deterministic") {
    const TruncationConfig t(30);
    const PureState psi = coherent_state(complex(0.5, 0.5), t);
    WignerGridSpec spec;
    spec.x_range = {-2.0, 1.0};
    spec.p_range = {0.0, 3.0};
    spec.resolution = 7;
    spec.jobs = 1;
    const WignerGrid one = wigner(psi, spec);
    spec.jobs = 4;
    const WignerGrid four = wigner(psi, spec);
    CHECK(one.values == four.values);
    CHECK(one.xs.front() == -2.0);
    CHECK(one.xs.back() == 1.0);
    CHECK(one.ps[3] == doctest::Approx(1.5));
    CHECK(one.values(2, 5) == doctest::Approx(wigner_point(psi, complex(one.xs[2], one.ps[5]))));
    CHECK(one.cell_area() == doctest::Approx(0.25));
  }

  TEST_CASE("cat lattice shows four positive peaks and fringes") {
    const double d = 2.0 * std::sqrt(kPi);
    const TruncationConfig t(201);
    const PureState cat = run_cat(cat_lattice_sequence(2, d), LossModel(), t).pure();
    WignerGridSpec spec;
    spec.x_range = {-2 * d, 2 * d};
    spec.p_range = {-2 * d, 2 * d};
    spec.resolution = 57;
    const WignerGrid grid = wigner(cat, spec);
    const double step = 4 * d / 56;
    // Components sit at (+-d/2, +-d/2).
    for (double sx : {-1.0, 1.0}) {
      for (double sp : {-1.0, 1.0}) {
        const complex peak(sx * d / 2, sp * d / 2);
        CHECK(wigner_point(cat, peak) > 0.1);
        int bi = 0, bj = 0;
        double best = -1.0;
        for (int i = 0; i < grid.resolution; ++i) {
          for (int j = 0; j < grid.resolution; ++j) {
            const double x = grid.xs[static_cast<std::size_t>(i)];
            const double p = grid.ps[static_cast<std::size_t>(j)];
            if (std::abs(x - peak.real()) > d / 4 || std::abs(p - peak.imag()) > d / 4) continue;
            if (grid.values(i, j) > best) {
              best = grid.values(i, j);
              bi = i;
              bj = j;
            }
          }
        }
        CHECK(std::abs(grid.xs[static_cast<std::size_t>(bi)] - peak.real()) <= step);
        CHECK(std::abs(grid.ps[static_cast<std::size_t>(bj)] - peak.imag()) <= step);
      }
    }
    CHECK(grid.values.minCoeff() < -0.1);
  }

  TEST_CASE("invalid resolution") {
    WignerGridSpec spec;
    spec.resolution = 0;
    CHECK_THROWS_AS(wigner(PureState::vacuum(TruncationConfig(5)), spec), std::invalid_argument);
  }
}

TEST_SUITE("quadratures") {
  TEST_CASE("vacuum variance is isotropic") {
    const TruncationConfig t(10);
    for (double th : {0.0, 0.4, kPi / 2, 2.0}) CHECK(quadrature_variance(PureState::vacuum(t), th) == doctest::Approx(0.25));
  }

  TEST_CASE("squeezed vacuum variances") {
    const TruncationConfig t(150);
    const PureState sv = squeezed_vacuum(SqueezeParameter(1.0), t);
    CHECK(quadrature_variance(sv, 0.0) == doctest::Approx(std::exp(-2.0) / 4).epsilon(1e-9));
    CHECK(quadrature_variance(sv, kPi / 2) == doctest::Approx(std::exp(2.0) / 4).epsilon(1e-9));
  }

  TEST_CASE("variance matches explicit operator moments") {
    std::mt19937 rng(8);
    std::normal_distribution<double> g;
    Vector v = Vector::Zero(25);
    for (Eigen::Index n = 0; n < 25; ++n) v(n) = complex(g(rng), g(rng));
    const PureState psi = pure(v);
    for (double th : {0.0, 0.9, 2.3}) {
      CHECK(std::abs(quadrature_variance(psi, th) - oracle::variance(psi.amplitudes, th)) < 1e-10);
      CHECK(std::abs(quadrature_variance(MixedState::from_pure(psi), th) - oracle::variance(psi.amplitudes, th)) < 1e-10);
    }
  }

  TEST_CASE("covariance extrema bracket every angle") {
    const PureState psi = m3_output(TruncationConfig(150));
    const CovarianceSummary c = covariance_summary(psi);
    CHECK(c.var_min <= c.var_max);
    CHECK(quadrature_variance(psi, c.theta_min) == doctest::Approx(c.var_min).epsilon(1e-10));
    for (int k = 0; k < 12; ++k) {
      const double v = quadrature_variance(psi, k * kPi / 12);
      CHECK(v >= c.var_min - 1e-12);
      CHECK(v <= c.var_max + 1e-12);
    }
  }
}

TEST_SUITE("squeezing report") {
  TEST_CASE("vacuum has zero dB") {
    const SqueezingReport r = squeezing_db(PureState::vacuum(TruncationConfig(10)), false);
    CHECK(std::abs(r.s_db) < 1e-12);
  }

  TEST_CASE("squeezed vacuum r=1 gives 20 log10(e)") {
    const TruncationConfig t(150);
    const SqueezingReport r = squeezing_db(squeezed_vacuum(SqueezeParameter(1.0), t));
    CHECK(r.s_db == doctest::Approx(20.0 * std::log10(std::exp(1.0))).epsilon(1e-8));
    CHECK(std::abs(r.theta_min) < 1e-8);
    CHECK(r.best_fit_xi.r == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.best_fit_fidelity > 1.0 - 1e-8);
  }

  TEST_CASE("rotated squeezing is found at the right angle") {
    const TruncationConfig t(150);
    const PureState sv = squeezed_vacuum(SqueezeParameter(0.6, 1.0), t);
    const SqueezingReport r = squeezing_db(sv, false);
    CHECK(r.theta_min == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(r.var_min == doctest::Approx(std::exp(-1.2) / 4).epsilon(1e-9));
  }

  TEST_CASE("invariant under point reflection and global phase") {
    const PureState psi = m3_output(TruncationConfig(150));
    const SqueezingReport base = squeezing_db(psi, false);
    const SqueezingReport reflected = squeezing_db(point_reflect(psi), false);
    PureState phased = psi;
    phased.amplitudes *= std::polar(1.0, 1.234);
    const SqueezingReport rotated = squeezing_db(phased, false);
    CHECK(reflected.s_db == doctest::Approx(base.s_db).epsilon(1e-12));
    CHECK(rotated.s_db == doctest::Approx(base.s_db).epsilon(1e-12));

    const PureState c = coherent_state(complex(0.4, 0.9), TruncationConfig(60));
    CHECK(squeezing_db(point_reflect(c), false).s_db == doctest::Approx(squeezing_db(c, false).s_db));
  }

  TEST_CASE("uncertainty product for random pure states") {
    std::mt19937 rng(13);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
      Vector v = Vector::Zero(30);
      for (Eigen::Index n = 0; n < 20; ++n) v(n) = complex(g(rng), g(rng));
      const CovarianceSummary c = covariance_summary(pure(v));
      CHECK(c.var_min * c.var_max >= 1.0 / 16 - 1e-6);
    }
  }
}

TEST_SUITE("fidelity") {
  TEST_CASE("pure examples") {
    const TruncationConfig t(40);
    const PureState vac = PureState::vacuum(t);
    CHECK(fidelity(vac, vac) == doctest::Approx(1.0));
    CHECK(fidelity(vac, PureState::fock(1, t)) == 0.0);
    CHECK(fidelity(vac, coherent_state(1.0, t)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }

  TEST_CASE("pure-mixed is the expectation value and symmetric") {
    const TruncationConfig t(40);
    const PureState a = coherent_state(complex(0.3, 0.2), t);
    const MixedState rho = apply_loss(MixedState::from_pure(coherent_state(complex(0.8, -0.1), t)), LossModel(0.3));
    const double expected = a.amplitudes.dot(rho.rho * a.amplitudes).real();
    CHECK(fidelity(State(a), State(rho)) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(fidelity(State(rho), State(a)) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("mixed-mixed is the Uhlmann fidelity") {
    const TruncationConfig t(30);
    const MixedState a = apply_loss(MixedState::from_pure(coherent_state(complex(0.5, 0.5), t)), LossModel(0.4));
    const MixedState b = apply_loss(MixedState::from_pure(PureState::fock(2, t)), LossModel(0.2));
    CHECK(std::abs(fidelity(State(a), State(b)) - oracle::uhlmann(a.rho, b.rho)) < 1e-8);
    CHECK(fidelity(State(a), State(a)) == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(fidelity(PureState::vacuum(TruncationConfig(5)), PureState::vacuum(TruncationConfig(6))),
                    DimensionMismatch);
  }
}

TEST_SUITE("squeezed fit") {
  TEST_CASE("self fit recovers r") {
    const TruncationConfig t(150);
    const SqueezeFit fit = fit_squeezed(squeezed_vacuum(SqueezeParameter(1.2), t));
    CHECK(std::abs(fit.xi.r - 1.2) < 1e-3);
    CHECK(fit.fidelity >= 1.0 - 1e-8);
  }

  TEST_CASE("fit fidelity bounds every scanned r") {
    const TruncationConfig t(201);
    const PureState psi = m3_output(t);
    const SqueezeFit fit = fit_squeezed(psi, {0.0});
    CHECK(fit.xi.r == doctest::Approx(1.2).epsilon(0.05));
    for (int k = 0; k <= 80; ++k) {
      const double r = 0.05 * k;
      const PureState sv = squeezed_vacuum(SqueezeParameter(r), t, TailCheck::renormalize);
      CHECK(fit.fidelity >= oracle::pure_fidelity(psi.amplitudes, sv.amplitudes) - 1e-12);
    }
  }
}

TEST_SUITE("gkp states") {
  TEST_CASE("narrow envelope keeps the two nearest peaks") {
    const TruncationConfig t(120);
    const double d = 2.0 * std::sqrt(kPi);
    const PureState g = approx_gkp_state(1.0, 0.3, d, t);
    const Vector sv = oracle::squeezed_vacuum(1.0, 0.0, 121).normalized();
    const Matrix dp = oracle::displacement(std::sqrt(kPi), 121, 300);
    const Matrix dm = oracle::displacement(-std::sqrt(kPi), 121, 300);
    CHECK(oracle::pure_fidelity(g.amplitudes, dp * sv + dm * sv) > 1.0 - 1e-8);
  }

  TEST_CASE("symmetric comb has even parity") {
    const PureState g = approx_gkp_state(1.0, 3.0, 2.0 * std::sqrt(kPi), TruncationConfig(301));
    double odd = 0.0;
    for (Eigen::Index n = 1; n < g.amplitudes.size(); n += 2) odd += std::norm(g.amplitudes(n));
    CHECK(odd < 1e-12);
  }

  TEST_CASE("comb sum is converged") {
    const double d = 2.0 * std::sqrt(kPi);
    const TruncationConfig t(301);
    const PureState g = approx_gkp_state(1.0, 3.0, d, t);
    // Real displacements commute, so the peaks are stepped by D(delta) on a padded space.
    const Eigen::Index big = 520;
    const Matrix step = oracle::displacement(d, big, big);
    const Vector sv = oracle::squeezed_vacuum(1.0, 0.0, big).normalized();
    Vector right = oracle::displacement(d / 2, big, big) * sv;
    Vector left = step.adjoint() * right;
    Vector sum = Vector::Zero(big);
    for (int j = 0; j < 6; ++j) {
      const double x = (2 * j + 1) * d / 2;
      const double w = std::exp(-x * x / (2 * 9.0));
      sum += w * (right + left);
      right = (step * right).eval();
      left = (step.adjoint() * left).eval();
    }
    CHECK(1.0 - oracle::pure_fidelity(g.amplitudes, sum.head(302)) < 1e-8);
  }

  TEST_CASE("self fit recovers r and sigma") {
    const double d = 2.0 * std::sqrt(kPi);
    const TruncationConfig t(201);
    const PureState g = approx_gkp_state(1.0, 4.0, d, t);
    const GkpFitReport fit = fit_gkp(g, d);
    CHECK(std::abs(fit.r_opt - 1.0) < 1e-2);
    CHECK(std::abs(fit.sigma_env_opt - 4.0) < 1e-2);
    CHECK(fit.fidelity >= 1.0 - 1e-6);
  }

  TEST_CASE("wide envelope overflows a small space") {
    CHECK_THROWS_AS(approx_gkp_state(1.0, 8.0, 2.0 * std::sqrt(kPi), TruncationConfig(40)), TailOverflow);
  }
}

TEST_SUITE("parity hamiltonian") {
  TEST_CASE("single point at the origin") {
    const TruncationConfig t(20);
    const OperatorMatrix h = parity_hamiltonian({0.0}, t);
    const GroundState g = ground_state(h);
    CHECK(g.energy == doctest::Approx(-1.0));
    CHECK(oracle::pure_fidelity(g.state.amplitudes, oracle::even_projector(21) * g.state.amplitudes) ==
          doctest::Approx(1.0));
    CHECK(std::abs(PureState::vacuum(t).amplitudes.dot(h.entries * PureState::vacuum(t).amplitudes) + 1.0) < 1e-14);
  }

  TEST_CASE("spectrum lies in [-N, N]") {
    const auto pts = symmetric_sequence(5, 1.2).times;
    const OperatorMatrix h = parity_hamiltonian(pts, TruncationConfig(150));
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.entries);
    CHECK(es.eigenvalues().minCoeff() >= -5.0 - 1e-8);
    CHECK(es.eigenvalues().maxCoeff() <= 5.0 + 1e-8);
  }

  TEST_CASE("five symmetric points reach the bottom of the spectrum") {
    const TruncationConfig t(301);
    const GroundState g = ground_state(parity_hamiltonian(symmetric_sequence(5, 1.2).times, t));
    CHECK(g.energy >= -5.0);
    CHECK(g.energy <= -4.9);
    CHECK(g.state.norm_squared() == doctest::Approx(1.0));
  }

  // t = 0.6 and 1.2 are commensurate, so comb-like states share the near-degenerate
  // bottom of the spectrum and the lowest eigenvector is not the squeezed one.
  TEST_CASE("five symmetric points produce a squeezed ground state" * doctest::should_fail()) {
    const TruncationConfig t(301);
    const GroundState g = ground_state(parity_hamiltonian(symmetric_sequence(5, 1.2).times, t));
    CHECK(squeezing_db(g.state, false).s_db > 10.0);
  }

  TEST_CASE("number operator") {
    const OperatorMatrix n{oracle::number(12), OperatorKind::hermitian};
    const GroundState g = ground_state(n);
    CHECK(std::abs(g.energy) < 1e-14);
    CHECK(std::abs(g.state.amplitudes(0)) == doctest::Approx(1.0));
  }

  TEST_CASE("non-Hermitian input is rejected") {
    OperatorMatrix m{oracle::annihilation(6), OperatorKind::general};
    CHECK_THROWS_AS(ground_state(m), NotHermitian);
  }
}
