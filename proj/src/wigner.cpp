#include <algorithm>
#include <cmath>
#include <thread>

#include "parityforge/analysis.hpp"

namespace parityforge {

namespace {

constexpr double kTwoOverPi = 2.0 / kPi;

// Sum over columns of (-1)^n |(D(-alpha) V)_{n,j}|^2 w_j.
double parity_expectation(const Matrix& d_minus, const Matrix& vectors, const Eigen::VectorXd& weights) {
  const Matrix moved = d_minus * vectors;
  double total = 0.0;
  for (Eigen::Index j = 0; j < moved.cols(); ++j) {
    double acc = 0.0;
    for (Eigen::Index n = 0; n < moved.rows(); ++n) {
      const double pop = std::norm(moved(n, j));
      acc += (n % 2 == 0) ? pop : -pop;
    }
    total += weights(j) * acc;
  }
  return total;
}

// Pure states are a single weighted column; mixed states are spectrally
// decomposed once and negligible eigenvalues are dropped.
struct SpectralForm {
  Matrix vectors;
  Eigen::VectorXd weights;
  /// Leading levels that carry any weight.
  Eigen::Index occupied = 0;
};

// Levels above the last one with population > 1e-30 are dropped.
Eigen::Index occupied_levels(const Matrix& vectors, const Eigen::VectorXd& weights) {
  for (Eigen::Index n = vectors.rows() - 1; n >= 0; --n) {
    double pop = 0.0;
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) pop += std::abs(weights(j)) * std::norm(vectors(n, j));
    if (pop > 1e-30) return n + 1;
  }
  return 1;
}

SpectralForm spectral_form(const State& state) {
  if (const auto* psi = std::get_if<PureState>(&state)) {
    SpectralForm f{psi->amplitudes, Eigen::VectorXd::Constant(1, 1.0 / psi->norm_squared())};
    f.occupied = occupied_levels(f.vectors, f.weights);
    return f;
  }
  const auto& rho = std::get<MixedState>(state);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (rho.rho + rho.rho.adjoint()) / rho.trace());
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double cutoff = 1e-14 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (std::abs(vals(i)) > cutoff) keep.push_back(i);
  SpectralForm f{Matrix(rho.rho.rows(), static_cast<Eigen::Index>(keep.size())),
                 Eigen::VectorXd(static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    f.vectors.col(col) = eig.eigenvectors().col(keep[j]);
    f.weights(col) = vals(keep[j]);
  }
  f.occupied = occupied_levels(f.vectors, f.weights);
  return f;
}

// D(-alpha) is evaluated on a working space large enough that no occupied
// level is displaced past its last row, so W is exact for the truncated state.
double wigner_from_spectral(const SpectralForm& f, complex alpha) {
  const Eigen::Index cols = f.occupied;
  const double reach = std::sqrt(static_cast<double>(cols - 1)) + std::abs(alpha) + 6.0;
  const Eigen::Index rows = std::max(cols, static_cast<Eigen::Index>(std::ceil(reach * reach)));
  const Matrix d = detail::displacement_block(-alpha, rows, cols);
  return kTwoOverPi * parity_expectation(d, f.vectors.topRows(cols), f.weights);
}

std::vector<double> linspace(Interval iv, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = 0.5 * (iv.lo + iv.hi);
    return out;
  }
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = iv.lo + (iv.hi - iv.lo) * i / (n - 1);
  return out;
}

}  // namespace

double WignerGrid::cell_area() const {
  if (resolution < 2) return 0.0;
  return (x_range.hi - x_range.lo) / (resolution - 1) * (p_range.hi - p_range.lo) / (resolution - 1);
}

double WignerGrid::integral() const { return values.sum() * cell_area(); }

double wigner_point(const PureState& psi, complex alpha) {
  return wigner_from_spectral(spectral_form(State(psi)), alpha);
}

double wigner_point(const MixedState& rho, complex alpha) {
  return wigner_from_spectral(spectral_form(State(rho)), alpha);
}

WignerGrid wigner(const State& state, const WignerGridSpec& spec) {
  if (spec.resolution < 1) throw std::invalid_argument("Wigner grid resolution must be >= 1");
  WignerGrid grid;
  grid.x_range = spec.x_range;
  grid.p_range = spec.p_range;
  grid.resolution = spec.resolution;
  grid.xs = linspace(spec.x_range, spec.resolution);
  grid.ps = linspace(spec.p_range, spec.resolution);
  grid.values = Eigen::MatrixXd::Zero(spec.resolution, spec.resolution);

  const SpectralForm form = spectral_form(state);
  unsigned jobs = spec.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.jobs;
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(spec.resolution));

  // Rows are interleaved across workers; each worker writes disjoint entries.
  auto work = [&](unsigned worker) {
    for (int i = static_cast<int>(worker); i < spec.resolution; i += static_cast<int>(jobs)) {
      for (int j = 0; j < spec.resolution; ++j) {
        grid.values(i, j) = wigner_from_spectral(
            form, complex(grid.xs[static_cast<std::size_t>(i)], grid.ps[static_cast<std::size_t>(j)]));
      }
    }
  };
  if (jobs <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  return grid;
}

}  // namespace parityforge
