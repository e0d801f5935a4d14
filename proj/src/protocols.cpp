#include "parityforge/protocols.hpp"

#include <cmath>
#include <stdexcept>

namespace parityforge {

complex DisplacementSequence::point(std::size_t m) const {
  return complex(0.0, 1.0) * std::polar(1.0, theta) * times.at(m);
}

std::vector<double> DisplacementSequence::increments() const {
  std::vector<double> dt(times.size());
  double prev = 0.0;
  for (std::size_t m = 0; m < times.size(); ++m) {
    dt[m] = times[m] - prev;
    prev = times[m];
  }
  return dt;
}

void RunLog::record(double p) {
  per_step_probabilities.push_back(p);
  cumulative_probability *= p;
}

DisplacementSequence symmetric_sequence(int m_count, double t_max, double theta) {
  if (m_count < 1) throw InvalidSequence("M must be >= 1");
  if (m_count % 2 == 0) throw InvalidSequence("M must be odd for the symmetric ansatz");
  if (!(t_max >= 0.0)) throw InvalidSequence("t_max must be >= 0");
  DisplacementSequence seq{theta, {}};
  if (m_count == 1) {
    seq.times = {0.0};
    return seq;
  }
  const int half = (m_count - 1) / 2;
  for (int m = 1; m <= m_count; ++m) {
    const double sign = (m % 2 == 1) ? 1.0 : -1.0;
    const double frac = 1.0 - static_cast<double>((m - 1) / 2) / static_cast<double>(half);
    // Keep an exact zero (not -0.0) for the closing measurement.
    seq.times.push_back(frac == 0.0 ? 0.0 : sign * t_max * frac);
  }
  return seq;
}

DisplacementSequence linear_sequence(int m_count, double t_max, double theta) {
  if (m_count < 2) throw InvalidSequence("M must be >= 2 for the linear ansatz");
  DisplacementSequence seq{theta, {}};
  for (int m = 1; m <= m_count; ++m) {
    seq.times.push_back(t_max * (1.0 - static_cast<double>(m - 1) / static_cast<double>(m_count - 1)));
  }
  return seq;
}

namespace {

// Post-selected evolution shared by all runners. Each step is either the
// sandwich D P+ D^dag or P+ D; with loss the channel follows every projection.
class Evolution {
 public:
  Evolution(State initial, const LossModel& loss, const TruncationConfig& trunc, const RunOptions& options)
      : state_(std::move(initial)),
        loss_(loss),
        displacer_(trunc, options.convention),
        checkpoint_(options.checkpoint) {}

  void displaced_parity(complex alpha) {
    if (auto* psi = std::get_if<PureState>(&state_)) {
      finish_pure(displacer_.displaced_even(alpha, psi->amplitudes));
    } else {
      const Matrix d = displacer_.matrix(alpha);
      finish_mixed(detail::project_displaced_even(d, std::get<MixedState>(state_).rho));
    }
  }

  void displace_then_parity(complex alpha) {
    if (auto* psi = std::get_if<PureState>(&state_)) {
      Vector out = displacer_.apply(alpha, psi->amplitudes);
      for (Eigen::Index n = 1; n < out.size(); n += 2) out(n) = 0.0;
      finish_pure(std::move(out));
    } else {
      Matrix moved = displacer_.conjugate(alpha, std::get<MixedState>(state_).rho);
      for (Eigen::Index n = 1; n < moved.rows(); n += 2) {
        moved.row(n).setZero();
        moved.col(n).setZero();
      }
      finish_mixed(std::move(moved));
    }
  }

  // Unitary displacement; not a measurement, so nothing is logged.
  void displace(complex alpha) {
    if (auto* psi = std::get_if<PureState>(&state_)) {
      psi->amplitudes = displacer_.apply(alpha, psi->amplitudes);
    } else {
      auto& rho = std::get<MixedState>(state_);
      rho.rho = displacer_.conjugate(alpha, rho.rho);
    }
  }

  RunResult finish() && { return RunResult{std::move(state_), std::move(log_)}; }

 private:
  std::size_t next_step() const { return log_.per_step_probabilities.size() + 1; }

  void finish_pure(Vector out) {
    const double p = out.squaredNorm();
    if (!(p >= kZeroProbabilityThreshold)) throw ZeroProbability(p, next_step());
    out /= std::sqrt(p);
    state_ = PureState(std::move(out), true);
    after_step(p);
  }

  void finish_mixed(Matrix projected) {
    StepOutcome outcome;
    try {
      outcome = detail::finish_cycle(std::move(projected), loss_);
    } catch (const ZeroProbability& e) {
      throw e.at_step(next_step());
    }
    state_ = std::move(outcome.state);
    after_step(outcome.success_probability);
  }

  void after_step(double p) {
    log_.record(p);
    if (checkpoint_) log_.checkpoints.push_back(state_);
  }

  State state_;
  RunLog log_;
  LossModel loss_;
  Displacer displacer_;
  bool checkpoint_;
};

State initial_vacuum(const LossModel& loss, const TruncationConfig& trunc, const RunOptions& options) {
  const PureState vac = PureState::vacuum(trunc);
  if (!loss.lossless() || options.force_density_matrix) return MixedState::from_pure(vac);
  return vac;
}

void check_tail_of(const State& state, const TruncationConfig& trunc) {
  const double tail = std::visit(
      [&](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, PureState>) {
          return tail_population(s.amplitudes, trunc);
        } else {
          return tail_population(s, trunc);
        }
      },
      state);
  if (tail > trunc.tail_tolerance) throw TailOverflow(tail, trunc.tail_tolerance);
}

void run_squeezing_steps(Evolution& evo, const DisplacementSequence& seq, bool folded) {
  if (!folded) {
    for (std::size_t m = 0; m < seq.size(); ++m) evo.displaced_parity(seq.point(m));
    return;
  }
  const complex dir = complex(0.0, 1.0) * std::polar(1.0, seq.theta);
  for (double dt : seq.increments()) evo.displace_then_parity(-dir * dt);
  if (!seq.times.empty()) evo.displace(dir * seq.times.back());
}

}  // namespace

RunResult run_squeezing(const DisplacementSequence& seq, const LossModel& loss,
                        const TruncationConfig& trunc, const RunOptions& options) {
  if (options.folded && (!loss.lossless() || options.force_density_matrix))
    throw InvalidSequence("the folded sequence form is only defined for lossless pure-state runs");
  Evolution evo(initial_vacuum(loss, trunc, options), loss, trunc, options);
  run_squeezing_steps(evo, seq, options.folded);
  return std::move(evo).finish();
}

RunResult run_cat(const CatSequence& seq, const LossModel& loss, const TruncationConfig& trunc,
                  const RunOptions& options) {
  Evolution evo(initial_vacuum(loss, trunc, options), loss, trunc, options);
  for (const complex& alpha : seq.alphas) evo.displace_then_parity(alpha);
  RunResult result = std::move(evo).finish();
  check_tail_of(result.state, trunc);
  return result;
}

PureState analytic_cat_m2(complex alpha1, complex alpha2, const TruncationConfig& trunc) {
  const double phi = std::imag(alpha2 * std::conj(alpha1));
  const complex plus = std::polar(1.0, phi);
  const complex minus = std::conj(plus);
  // Unnormalized components; each coherent state carries its own e^{-|a|^2/2}.
  auto component = [&](complex a) { return coherent_state(a, trunc).amplitudes; };
  Vector v = plus * component(alpha1 + alpha2) + minus * component(alpha1 - alpha2) +
             minus * component(-alpha1 + alpha2) + plus * component(-alpha1 - alpha2);
  const double n2 = v.squaredNorm();
  if (!(n2 > 0.0)) throw ZeroProbability(n2);
  return PureState(v / std::sqrt(n2), true);
}

CatSequence cat_lattice_sequence(int m_count, double delta) {
  if (m_count < 1) throw InvalidSequence("M must be >= 1");
  if (!(delta > 0.0)) throw InvalidSequence("delta must be > 0");
  CatSequence seq;
  for (int m = 1; m <= m_count; ++m) {
    const bool imaginary = (m % 2 == 0);
    const double magnitude = std::ldexp(delta, (m - 1) / 2 - 1);
    seq.alphas.push_back(imaginary ? complex(0.0, magnitude) : complex(magnitude, 0.0));
  }
  return seq;
}

PureState point_reflect(const PureState& psi) {
  PureState out = psi;
  for (Eigen::Index n = 1; n < out.amplitudes.size(); n += 2) out.amplitudes(n) = -out.amplitudes(n);
  return out;
}

MixedState point_reflect(const MixedState& rho) {
  MixedState out = rho;
  for (Eigen::Index i = 0; i < out.rho.rows(); ++i)
    for (Eigen::Index j = 0; j < out.rho.cols(); ++j)
      if ((i + j) % 2 == 1) out.rho(i, j) = -out.rho(i, j);
  return out;
}

RunResult run_gkp(const GkpSpec& spec, const LossModel& loss, const TruncationConfig& trunc,
                  const RunOptions& options) {
  if (!(spec.delta > 0.0)) throw InvalidSequence("delta must be > 0");
  if (spec.comb_steps < 0) throw InvalidSequence("comb_steps must be >= 0");
  if (options.folded && (!loss.lossless() || options.force_density_matrix))
    throw InvalidSequence("the folded sequence form is only defined for lossless pure-state runs");
  Evolution evo(initial_vacuum(loss, trunc, options), loss, trunc, options);
  run_squeezing_steps(evo, spec.squeeze_stage, options.folded);
  for (int m = 1; m <= spec.comb_steps; ++m) evo.displace_then_parity(complex(m * spec.delta / 2.0, 0.0));
  RunResult result = std::move(evo).finish();
  check_tail_of(result.state, trunc);
  return result;
}

Matrix squeezing_projector(const DisplacementSequence& seq, const TruncationConfig& trunc) {
  const auto dim = static_cast<Eigen::Index>(trunc.dimension());
  Matrix total = Matrix::Identity(dim, dim);
  for (std::size_t m = 0; m < seq.size(); ++m) {
    total = (displaced_parity(ParitySign::even, seq.point(m), trunc).entries * total).eval();
  }
  return total;
}

}  // namespace parityforge
