#include "parityforge/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

namespace parityforge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double odd_population(const State& state) {
  double odd = 0.0;
  if (const auto* psi = std::get_if<PureState>(&state)) {
    for (Eigen::Index n = 1; n < psi->amplitudes.size(); n += 2) odd += std::norm(psi->amplitudes(n));
    return odd / psi->amplitudes.squaredNorm();
  }
  const auto& rho = std::get<MixedState>(state);
  for (Eigen::Index n = 1; n < rho.rho.rows(); n += 2) odd += rho.rho(n, n).real();
  return odd / rho.trace();
}

std::vector<complex> squeeze_points(const DisplacementSequence& seq) {
  std::vector<complex> points;
  for (std::size_t m = 0; m < seq.size(); ++m) points.push_back(seq.point(m));
  return points;
}

void copy_log(const RunLog& log, PointReport& report) {
  report.per_step_probabilities = log.per_step_probabilities;
  report.cumulative_probability = log.cumulative_probability;
}

void require_valid(const RunConfig& config) {
  Diagnostics d = validate(config);
  if (!d.ok()) throw ConfigError(std::move(d.errors));
}

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "IoError"; }
};

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

bool has_live_axis(const RunConfig& config) {
  for (const SweepAxis& axis : config.sweep)
    if (!axis.values.empty()) return true;
  return false;
}

}  // namespace

PointOutcome execute_point(const RunConfig& config) {
  const TruncationConfig trunc = config.truncation();
  const LossModel loss = config.loss();
  const RunOptions options = config.run_options();

  PointOutcome out;
  auto start = Clock::now();
  switch (config.protocol) {
    case Protocol::squeeze: {
      const DisplacementSequence seq = config.squeeze_sequence();
      RunResult result = run_squeezing(seq, loss, trunc, options);
      out.protocol_seconds = seconds_since(start);
      start = Clock::now();
      out.step_points = squeeze_points(seq);
      copy_log(result.log, out.report);
      out.report.squeezing = squeezing_db(result.state, config.fit);
      out.state = std::move(result.state);
      break;
    }
    case Protocol::cat: {
      const CatSequence seq = config.cat_sequence();
      RunResult result = run_cat(seq, loss, trunc, options);
      out.protocol_seconds = seconds_since(start);
      start = Clock::now();
      out.step_points = seq.alphas;
      copy_log(result.log, out.report);
      CatReport cat;
      if (seq.alphas.size() == 2) {
        const PureState target = analytic_cat_m2(seq.alphas[0], seq.alphas[1], trunc);
        cat.fidelity_vs_analytic = fidelity(result.state, State(target));
      }
      out.report.cat = cat;
      out.state = std::move(result.state);
      break;
    }
    case Protocol::gkp: {
      const GkpSpec spec = config.gkp_spec();
      RunResult result = run_gkp(spec, loss, trunc, options);
      out.protocol_seconds = seconds_since(start);
      start = Clock::now();
      out.step_points = squeeze_points(spec.squeeze_stage);
      for (int m = 1; m <= spec.comb_steps; ++m) out.step_points.emplace_back(m * spec.delta / 2.0, 0.0);
      copy_log(result.log, out.report);
      if (config.fit) out.report.gkp = fit_gkp(result.state, spec.delta);
      out.state = std::move(result.state);
      break;
    }
    case Protocol::hamiltonian: {
      const DisplacementSequence seq = config.squeeze_sequence();
      RunResult protocol = run_squeezing(seq, loss, trunc, options);
      GroundState ground = ground_state(parity_hamiltonian(seq.times, trunc));
      out.protocol_seconds = seconds_since(start);
      start = Clock::now();
      out.step_points = squeeze_points(seq);
      copy_log(protocol.log, out.report);
      out.report.hamiltonian =
          HamiltonianReport{ground.energy, fidelity(State(ground.state), protocol.state)};
      out.state = std::move(ground.state);
      out.report.squeezing = squeezing_db(out.state, config.fit);
      break;
    }
  }
  out.report.odd_population = odd_population(out.state);
  out.analysis_seconds = seconds_since(start);
  return out;
}

std::vector<std::vector<std::pair<std::string, double>>> sweep_grid(const std::vector<SweepAxis>& axes) {
  std::vector<std::vector<std::pair<std::string, double>>> grid{{}};
  for (const SweepAxis& axis : axes) {
    if (axis.values.empty()) continue;
    std::vector<std::vector<std::pair<std::string, double>>> next;
    next.reserve(grid.size() * axis.values.size());
    for (const auto& prefix : grid) {
      for (double v : axis.values) {
        auto row = prefix;
        row.emplace_back(axis.parameter, v);
        next.push_back(std::move(row));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

std::vector<SweepPoint> run_sweep(const RunConfig& config, unsigned jobs) {
  const auto grid = sweep_grid(config.sweep);
  std::vector<SweepPoint> points(grid.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      SweepPoint& point = points[i];
      point.coordinates = grid[i];
      try {
        RunConfig local = config;
        for (const auto& [name, value] : grid[i]) local = local.with_parameter(name, value);
        require_valid(local);
        point.result = execute_point(local).report;
      } catch (const std::exception& e) {
        point.result = PointReport{};
        point.result.error = ErrorRecord::from_exception(e);
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return points;
}

unsigned resolve_jobs(std::optional<unsigned> flag) {
  if (const char* env = std::getenv("PARITYFORGE_JOBS"); env && *env) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (*end != '\0' || value < 1) throw ConfigError({"PARITYFORGE_JOBS must be a positive integer"});
    return static_cast<unsigned>(value);
  }
  if (flag && *flag > 0) return *flag;
  return std::max(1u, std::thread::hardware_concurrency());
}

int run(const RunConfig& config, unsigned jobs, std::ostream& err) {
  const auto start = Clock::now();
  const std::filesystem::path dir = config.output_dir;
  bool dir_ready = false;
  try {
    require_valid(config);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output_dir " + dir.string());
    dir_ready = true;

    ReportFile report;
    report.config = config;

    if (has_live_axis(config)) {
      report.sweep = run_sweep(config, jobs);
      report.timings["sweep_s"] = seconds_since(start);
      const auto path = dir / "sweep.csv";
      auto out = open_output(path);
      write_sweep_csv(out, config.protocol, config.sweep, report.sweep);
      close_output(out, path);
      report.files["sweep"] = "sweep.csv";
    } else {
      PointOutcome point = execute_point(config);
      report.timings["protocol_s"] = point.protocol_seconds;
      report.timings["analysis_s"] = point.analysis_seconds;
      if (config.wants(OutputKind::state)) {
        const auto path = dir / "state.csv";
        auto out = open_output(path);
        write_state_csv(out, point.state, config.mixed_state_format);
        close_output(out, path);
        report.files["state"] = "state.csv";
      }
      if (config.wants(OutputKind::wigner)) {
        const auto t = Clock::now();
        WignerGridSpec spec = config.effective_wigner_grid();
        spec.jobs = jobs;
        const WignerGrid grid = wigner(point.state, spec);
        const auto path = dir / "wigner.csv";
        auto out = open_output(path);
        write_wigner_csv(out, grid);
        close_output(out, path);
        report.files["wigner"] = "wigner.csv";
        report.timings["wigner_s"] = seconds_since(t);
      }
      if (config.wants(OutputKind::log)) {
        const auto path = dir / "log.csv";
        auto out = open_output(path);
        write_log_csv(out, point.step_points, point.report);
        close_output(out, path);
        report.files["log"] = "log.csv";
      }
      report.result = std::move(point.report);
    }

    report.timings["total_s"] = seconds_since(start);
    if (config.wants(OutputKind::report)) {
      report.files["report"] = "report.json";
      nlohmann::json doc = report;
      write_json(dir / "report.json", doc);
    }
    return kExitOk;
  } catch (const std::exception& e) {
    const ErrorRecord rec = ErrorRecord::from_exception(e);
    const nlohmann::json doc = rec;
    err << doc.dump() << '\n';
    if (dir_ready) {
      try {
        write_json(dir / "error.json", doc);
      } catch (const std::exception&) {
      }
    }
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfigError;
    if (dynamic_cast<const IoError*>(&e)) return kExitIoError;
    return kExitRunError;
  }
}

}  // namespace parityforge
