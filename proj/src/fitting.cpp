#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "parityforge/analysis.hpp"

namespace parityforge {

namespace {

constexpr double kEnvelopeCutoff = 1e-8;
constexpr double kGoldenRatio = 0.61803398874989484820;

TruncationConfig trunc_for(std::size_t dim, double tol = 1e-6) {
  TruncationConfig t;
  t.n_cut = static_cast<int>(dim) - 1;
  t.tail_tolerance = tol;
  return t;
}

std::size_t dimension_of(const State& s) {
  return std::visit([](const auto& v) { return v.dimension(); }, s);
}

template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kGoldenRatio * (b - a);
  double d = a + kGoldenRatio * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGoldenRatio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGoldenRatio * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

// Nelder-Mead maximization in two dimensions.
struct Simplex2 {
  std::array<std::array<double, 2>, 3> points;
  std::array<double, 3> values;
};

template <class F>
std::pair<std::array<double, 2>, double> nelder_mead_max(F&& f, std::array<double, 2> start,
                                                         std::array<double, 2> step, double tol,
                                                         int max_iter = 400) {
  Simplex2 s;
  s.points = {start, {start[0] + step[0], start[1]}, {start[0], start[1] + step[1]}};
  for (int i = 0; i < 3; ++i) s.values[i] = f(s.points[i]);
  auto blend = [](const std::array<double, 2>& a, const std::array<double, 2>& b, double t) {
    return std::array<double, 2>{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  };
  for (int iter = 0; iter < max_iter; ++iter) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return s.values[i] > s.values[j]; });
    const auto best = s.points[order[0]];
    const auto good = s.points[order[1]];
    const auto worst = s.points[order[2]];
    const double size = std::max({std::hypot(good[0] - best[0], good[1] - best[1]),
                                  std::hypot(worst[0] - best[0], worst[1] - best[1])});
    if (size < tol) break;
    const std::array<double, 2> centroid{0.5 * (best[0] + good[0]), 0.5 * (best[1] + good[1])};
    const auto reflected = blend(centroid, worst, -1.0);
    const double fr = f(reflected);
    if (fr > s.values[order[0]]) {
      const auto expanded = blend(centroid, worst, -2.0);
      const double fe = f(expanded);
      if (fe > fr) {
        s.points[order[2]] = expanded;
        s.values[order[2]] = fe;
      } else {
        s.points[order[2]] = reflected;
        s.values[order[2]] = fr;
      }
      continue;
    }
    if (fr > s.values[order[1]]) {
      s.points[order[2]] = reflected;
      s.values[order[2]] = fr;
      continue;
    }
    const auto contracted = blend(centroid, worst, 0.5);
    const double fc = f(contracted);
    if (fc > s.values[order[2]]) {
      s.points[order[2]] = contracted;
      s.values[order[2]] = fc;
      continue;
    }
    for (int k : {order[1], order[2]}) {
      s.points[k] = blend(best, s.points[k], 0.5);
      s.values[k] = f(s.points[k]);
    }
  }
  int arg = 0;
  for (int i = 1; i < 3; ++i)
    if (s.values[i] > s.values[arg]) arg = i;
  return {s.points[arg], s.values[arg]};
}

// Symmetric comb pieces u_k = D(x_k) b + D(-x_k) b with x_k = (2k+1) delta/2 and
// b = S(r)|0>. Displacement matrices are cached because delta is fixed.
class GkpBasis {
 public:
  GkpBasis(double delta, std::size_t dim) : delta_(delta), trunc_(trunc_for(dim)) {}

  double offset(int k) const { return (2.0 * k + 1.0) * delta_ / 2.0; }

  double weight(int k, double sigma) const {
    const double x = offset(k);
    return std::exp(-x * x / (2.0 * sigma * sigma));
  }

  int terms_for(double sigma) const {
    int k = 0;
    while (weight(k, sigma) >= kEnvelopeCutoff) ++k;
    return std::max(k, 1);
  }

  const Matrix& displacement(int k) {
    auto it = cache_.find(k);
    if (it == cache_.end())
      it = cache_.emplace(k, displacement_matrix(complex(offset(k), 0.0), trunc_).entries).first;
    return it->second;
  }

  /// Columns u_0..u_{K-1}.
  Matrix pieces(double r, int count) {
    const Vector base = squeezed_vacuum(SqueezeParameter(r), trunc_, TailCheck::renormalize).amplitudes;
    Matrix u(base.size(), count);
    for (int k = 0; k < count; ++k) {
      const Matrix& d = displacement(k);
      u.col(k) = d * base + d.adjoint() * base;
    }
    return u;
  }

  Eigen::VectorXd weights(double sigma, int count) const {
    Eigen::VectorXd w(count);
    for (int k = 0; k < count; ++k) w(k) = weight(k, sigma);
    return w;
  }

 private:
  double delta_;
  TruncationConfig trunc_;
  std::map<int, Matrix> cache_;
};

// F(target, sum_k w_k u_k) from projected Gram data.
struct ProjectedTarget {
  Matrix target_block;  // U^dag rho U (or |U^dag psi><U^dag psi|)
  Matrix gram;          // U^dag U
};

ProjectedTarget project_target(const State& target, const Matrix& u) {
  ProjectedTarget out;
  out.gram = u.adjoint() * u;
  if (const auto* psi = std::get_if<PureState>(&target)) {
    const Vector o = u.adjoint() * psi->amplitudes / std::sqrt(psi->norm_squared());
    out.target_block = o * o.adjoint();
  } else {
    const auto& rho = std::get<MixedState>(target);
    out.target_block = u.adjoint() * (rho.rho / rho.trace()) * u;
  }
  return out;
}

double projected_fidelity(const ProjectedTarget& pt, const Eigen::VectorXd& w) {
  const Vector wc = w.cast<complex>();
  const double num = wc.dot(pt.target_block * wc).real();
  const double den = wc.dot(pt.gram * wc).real();
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

SqueezeFit fit_squeezed(const State& state, const SqueezeFitOptions& options) {
  const std::size_t dim = dimension_of(state);
  const TruncationConfig trunc = trunc_for(dim);
  const double theta = options.theta_fixed ? *options.theta_fixed : covariance_summary(state).theta_min;
  // Quadrature angle theta is squeezed by xi = r e^{2 i theta}.
  const double phase = 2.0 * theta;
  auto score = [&](double r) {
    const PureState cand = squeezed_vacuum(SqueezeParameter(std::max(0.0, r), phase), trunc, TailCheck::renormalize);
    return fidelity(State(cand), state);
  };
  const int steps = static_cast<int>(std::floor(options.r_max / options.scan_step + 1e-9));
  double best_r = 0.0;
  double best_f = -1.0;
  for (int i = 0; i <= steps; ++i) {
    const double r = i * options.scan_step;
    const double f = score(r);
    if (f > best_f) {
      best_f = f;
      best_r = r;
    }
  }
  const double lo = std::max(0.0, best_r - options.scan_step);
  const double hi = std::min(options.r_max, best_r + options.scan_step);
  const double refined = golden_section_max(score, lo, hi, options.tolerance);
  const double refined_f = score(refined);
  if (refined_f > best_f) {
    best_f = refined_f;
    best_r = refined;
  }
  return {SqueezeParameter(best_r, phase), best_f};
}

PureState approx_gkp_state(double r, double sigma_env, double delta, const TruncationConfig& trunc,
                           TailCheck check) {
  if (!(sigma_env > 0.0)) throw std::invalid_argument("sigma_env must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  GkpBasis basis(delta, trunc.dimension());
  const int count = basis.terms_for(sigma_env);
  const Matrix u = basis.pieces(r, count);
  Vector v = u * basis.weights(sigma_env, count).cast<complex>();
  if (check == TailCheck::enforce) {
    const double tail = tail_population(v, trunc);
    if (tail > trunc.tail_tolerance) throw TailOverflow(tail, trunc.tail_tolerance);
  }
  const double n2 = v.squaredNorm();
  if (!(n2 > 0.0)) throw ZeroProbability(n2);
  return PureState(v / std::sqrt(n2), true);
}

GkpFitReport fit_gkp(const State& state, double delta, const GkpFitOptions& options) {
  GkpBasis basis(delta, dimension_of(state));

  auto evaluate = [&](double r, double sigma) {
    if (r < 0.0 || sigma <= 0.0) return -1.0;
    const int count = basis.terms_for(sigma);
    const ProjectedTarget pt = project_target(state, basis.pieces(r, count));
    return projected_fidelity(pt, basis.weights(sigma, count));
  };

  struct Cell {
    double r, sigma, f;
  };
  std::vector<Cell> cells;
  const int nr = static_cast<int>(std::floor((options.r_range.hi - options.r_range.lo) / options.r_step + 1e-9));
  const int ns = static_cast<int>(
      std::floor((options.sigma_range.hi - options.sigma_range.lo) / options.sigma_step + 1e-9));
  const int max_count = basis.terms_for(options.sigma_range.hi);
  for (int i = 0; i <= nr; ++i) {
    const double r = options.r_range.lo + i * options.r_step;
    // One projection per r serves every sigma on the grid.
    const ProjectedTarget pt = project_target(state, basis.pieces(r, max_count));
    for (int j = 0; j <= ns; ++j) {
      const double sigma = options.sigma_range.lo + j * options.sigma_step;
      const int count = basis.terms_for(sigma);
      const ProjectedTarget sub{pt.target_block.topLeftCorner(count, count), pt.gram.topLeftCorner(count, count)};
      cells.push_back({r, sigma, projected_fidelity(sub, basis.weights(sigma, count))});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.f > b.f; });

  GkpFitReport best{cells.front().r, cells.front().sigma, cells.front().f};
  const int restarts = std::min<int>(options.restarts, static_cast<int>(cells.size()));
  for (int i = 0; i < restarts; ++i) {
    const auto [point, value] = nelder_mead_max(
        [&](const std::array<double, 2>& p) { return evaluate(p[0], p[1]); }, {cells[i].r, cells[i].sigma},
        {0.5 * options.r_step, 0.5 * options.sigma_step}, options.tolerance);
    if (value > best.fidelity) best = {point[0], point[1], value};
  }
  return best;
}

}  // namespace parityforge
