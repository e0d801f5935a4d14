#include "parityforge/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace parityforge {

using nlohmann::json;

namespace {

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<Protocol> kProtocols[] = {
    {Protocol::squeeze, "squeeze"}, {Protocol::cat, "cat"}, {Protocol::gkp, "gkp"}, {Protocol::hamiltonian, "hamiltonian"}};
constexpr EnumName<Ansatz> kAnsatze[] = {
    {Ansatz::symmetric, "symmetric"}, {Ansatz::linear, "linear"}, {Ansatz::explicit_times, "explicit"}};
constexpr EnumName<OutputKind> kOutputs[] = {
    {OutputKind::state, "state"}, {OutputKind::report, "report"}, {OutputKind::wigner, "wigner"}, {OutputKind::log, "log"}};
constexpr EnumName<MixedStateFormat> kFormats[] = {
    {MixedStateFormat::diagonal, "diagonal"}, {MixedStateFormat::full, "full"}};
constexpr EnumName<DisplacementConvention> kConventions[] = {
    {DisplacementConvention::exact_elements, "exact_elements"},
    {DisplacementConvention::truncated_generator, "truncated_generator"}};

template <typename Enum, std::size_t N>
const char* name_of(const EnumName<Enum> (&table)[N], Enum value) {
  for (const auto& entry : table)
    if (entry.value == value) return entry.name;
  return "?";
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(const EnumName<Enum> (&table)[N], const std::string& text) {
  for (const auto& entry : table)
    if (text == entry.name) return entry.value;
  return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string choices(const EnumName<Enum> (&table)[N]) {
  std::string out;
  for (const auto& entry : table) {
    if (!out.empty()) out += ", ";
    out += entry.name;
  }
  return out;
}

const std::set<std::string> kKnownKeys = {
    "protocol", "ansatz", "M", "t_max", "theta", "epsilon", "n_cut", "tail_tolerance", "k_max",
    "delta", "comb_steps", "folded", "displacement", "times", "alphas", "fit", "sweep", "outputs",
    "output_dir", "wigner_grid", "mixed_state_format", "seedless"};

// Collects every malformed field instead of stopping at the first one.
class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {}

  std::vector<std::string>& violations() { return violations_; }
  bool has(const char* key) const { return doc_.contains(key); }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_number()) return fail(key, "must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(key, "must be finite");
  }

  void integer(const char* key, int& out) {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_number_integer()) return fail(key, "must be an integer");
    out = v.get<int>();
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_boolean()) return fail(key, "must be true or false");
    out = v.get<bool>();
  }

  template <typename Enum, std::size_t N>
  void enumeration(const char* key, const EnumName<Enum> (&table)[N], Enum& out) {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (v.is_string())
      if (auto parsed = parse_enum(table, v.get<std::string>())) {
        out = *parsed;
        return;
      }
    fail(key, "must be one of: " + choices(table));
  }

  void fail(const std::string& key, const std::string& message) { violations_.push_back(key + ": " + message); }

 private:
  const json& doc_;
  std::vector<std::string> violations_;
};

std::optional<complex> parse_complex(const json& v) {
  if (v.is_number()) return complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return complex(v[0].get<double>(), v[1].get<double>());
  return std::nullopt;
}

std::optional<Interval> parse_interval(const json& v) {
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Interval{v[0].get<double>(), v[1].get<double>()};
  return std::nullopt;
}

std::vector<double> expand_range(double lo, double hi, int steps) {
  std::vector<double> values;
  if (steps <= 0) return values;
  if (steps == 1) return {lo};
  values.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    // Exact endpoints; interior points by linear interpolation.
    const double f = static_cast<double>(i) / static_cast<double>(steps - 1);
    values.push_back(i == steps - 1 ? hi : lo + (hi - lo) * f);
  }
  return values;
}

void parse_axis(const json& v, Reader& reader, std::vector<SweepAxis>& axes) {
  const std::string where = "sweep";
  if (!v.is_object()) return reader.fail(where, "each axis must be an object");
  if (v.empty()) return;  // empty descriptor: no sweep
  SweepAxis axis;
  if (!v.contains("parameter") || !v.at("parameter").is_string())
    return reader.fail(where, "axis needs a string \"parameter\"");
  axis.parameter = v.at("parameter").get<std::string>();
  if (v.contains("values")) {
    if (!v.at("values").is_array()) return reader.fail(where, "\"values\" must be an array");
    for (const auto& x : v.at("values")) {
      if (!x.is_number()) return reader.fail(where, "\"values\" must contain numbers");
      axis.values.push_back(x.get<double>());
    }
  } else if (v.contains("min") || v.contains("max") || v.contains("steps")) {
    if (!v.contains("min") || !v.contains("max") || !v.contains("steps") || !v.at("min").is_number() ||
        !v.at("max").is_number() || !v.at("steps").is_number_integer())
      return reader.fail(where, "range axis needs numeric \"min\", \"max\" and integer \"steps\"");
    const int steps = v.at("steps").get<int>();
    if (steps < 0) return reader.fail(where, "\"steps\" must be >= 0");
    axis.values = expand_range(v.at("min").get<double>(), v.at("max").get<double>(), steps);
  }
  axes.push_back(std::move(axis));
}

int default_cutoff(Protocol protocol, int m_count, double epsilon) {
  if (protocol == Protocol::cat) return 201;
  if (protocol == Protocol::gkp) return m_count <= 3 ? 201 : 301;
  if (epsilon > 0.0) return 51;
  if (m_count <= 3) return 201;
  if (m_count <= 11) return 601;
  return 1001;
}

bool is_integral(double x) { return std::floor(x) == x; }

}  // namespace

std::string to_string(Protocol p) { return name_of(kProtocols, p); }
std::string to_string(Ansatz a) { return name_of(kAnsatze, a); }
std::string to_string(OutputKind k) { return name_of(kOutputs, k); }

const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names = {"M",     "t_max",      "theta",          "epsilon",
                                                 "n_cut", "comb_steps", "tail_tolerance", "delta"};
  return names;
}

bool RunConfig::wants(OutputKind kind) const {
  return std::find(outputs.begin(), outputs.end(), kind) != outputs.end();
}

TruncationConfig RunConfig::truncation() const { return TruncationConfig(n_cut, tail_tolerance); }

LossModel RunConfig::loss() const { return LossModel(epsilon, k_max); }

RunOptions RunConfig::run_options() const {
  RunOptions options;
  options.folded = folded;
  options.convention = displacement;
  return options;
}

DisplacementSequence RunConfig::squeeze_sequence() const {
  switch (ansatz) {
    case Ansatz::symmetric:
      return symmetric_sequence(M, t_max, theta);
    case Ansatz::linear:
      return linear_sequence(M, t_max, theta);
    case Ansatz::explicit_times:
      return DisplacementSequence{theta, times};
  }
  throw InvalidSequence("unknown ansatz");
}

CatSequence RunConfig::cat_sequence() const {
  if (!alphas.empty()) return CatSequence{alphas};
  return cat_lattice_sequence(M, delta);
}

GkpSpec RunConfig::gkp_spec() const { return GkpSpec{squeeze_sequence(), delta, comb_steps}; }

WignerGridSpec RunConfig::effective_wigner_grid() const {
  if (wigner_grid) return *wigner_grid;
  WignerGridSpec spec;
  if (protocol == Protocol::cat) {
    spec.x_range = {-2.0 * delta, 2.0 * delta};
    spec.p_range = {-2.0 * delta, 2.0 * delta};
  }
  return spec;
}

RunConfig RunConfig::with_parameter(const std::string& name, double value) const {
  RunConfig c = *this;
  if (name == "M") c.M = static_cast<int>(value);
  else if (name == "t_max") c.t_max = value;
  else if (name == "theta") c.theta = value;
  else if (name == "epsilon") c.epsilon = value;
  else if (name == "n_cut") c.n_cut = static_cast<int>(value);
  else if (name == "comb_steps") c.comb_steps = static_cast<int>(value);
  else if (name == "tail_tolerance") c.tail_tolerance = value;
  else if (name == "delta") c.delta = value;
  else throw ConfigError({"sweep: unknown parameter \"" + name + "\""});
  c.sweep.clear();
  return c;
}

void to_json(json& j, const RunConfig& c) {
  j = json::object();
  j["protocol"] = to_string(c.protocol);
  j["ansatz"] = to_string(c.ansatz);
  j["M"] = c.M;
  j["t_max"] = c.t_max;
  j["theta"] = c.theta;
  j["epsilon"] = c.epsilon;
  j["n_cut"] = c.n_cut;
  j["tail_tolerance"] = c.tail_tolerance;
  j["k_max"] = c.k_max ? json(*c.k_max) : json(nullptr);
  j["delta"] = c.delta;
  j["comb_steps"] = c.comb_steps;
  j["folded"] = c.folded;
  j["displacement"] = name_of(kConventions, c.displacement);
  j["times"] = c.times;
  json alphas = json::array();
  for (const complex& a : c.alphas) alphas.push_back({a.real(), a.imag()});
  j["alphas"] = alphas;
  j["fit"] = c.fit;
  json sweep = json::array();
  for (const SweepAxis& axis : c.sweep) sweep.push_back({{"parameter", axis.parameter}, {"values", axis.values}});
  j["sweep"] = sweep;
  json outputs = json::array();
  for (OutputKind k : c.outputs) outputs.push_back(to_string(k));
  j["outputs"] = outputs;
  j["output_dir"] = c.output_dir.string();
  if (c.wigner_grid) {
    j["wigner_grid"] = {{"x", {c.wigner_grid->x_range.lo, c.wigner_grid->x_range.hi}},
                        {"p", {c.wigner_grid->p_range.lo, c.wigner_grid->p_range.hi}},
                        {"resolution", c.wigner_grid->resolution}};
  } else {
    j["wigner_grid"] = nullptr;
  }
  j["mixed_state_format"] = name_of(kFormats, c.mixed_state_format);
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError({"config must be a JSON object"});
  RunConfig c;
  Reader r(doc);
  for (const auto& [key, value] : doc.items())
    if (!kKnownKeys.count(key)) r.fail(key, "unknown field");

  r.enumeration("protocol", kProtocols, c.protocol);
  r.enumeration("ansatz", kAnsatze, c.ansatz);
  r.integer("M", c.M);
  r.number("t_max", c.t_max);
  r.number("theta", c.theta);
  r.number("epsilon", c.epsilon);
  r.number("tail_tolerance", c.tail_tolerance);
  r.number("delta", c.delta);
  r.integer("comb_steps", c.comb_steps);
  r.boolean("folded", c.folded);
  r.boolean("fit", c.fit);
  r.enumeration("displacement", kConventions, c.displacement);
  r.enumeration("mixed_state_format", kFormats, c.mixed_state_format);
  if (r.has("seedless")) {
    bool seedless = true;
    r.boolean("seedless", seedless);
    if (!seedless) r.fail("seedless", "runs are always deterministic; only true is accepted");
  }

  if (r.has("k_max") && !doc.at("k_max").is_null()) {
    int k = 0;
    r.integer("k_max", k);
    c.k_max = k;
  }

  if (r.has("times")) {
    const json& v = doc.at("times");
    if (!v.is_array()) {
      r.fail("times", "must be an array of numbers");
    } else {
      for (const auto& x : v) {
        if (!x.is_number()) {
          r.fail("times", "must be an array of numbers");
          break;
        }
        c.times.push_back(x.get<double>());
      }
    }
  }
  if (c.ansatz == Ansatz::explicit_times && !r.has("M")) c.M = static_cast<int>(c.times.size());

  if (r.has("alphas")) {
    const json& v = doc.at("alphas");
    if (!v.is_array()) {
      r.fail("alphas", "must be an array of [re, im] pairs");
    } else {
      for (const auto& x : v) {
        auto a = parse_complex(x);
        if (!a) {
          r.fail("alphas", "must be an array of [re, im] pairs");
          break;
        }
        c.alphas.push_back(*a);
      }
    }
    if (c.protocol == Protocol::cat && !r.has("M")) c.M = static_cast<int>(c.alphas.size());
  }

  if (r.has("n_cut")) {
    r.integer("n_cut", c.n_cut);
  } else {
    c.n_cut = default_cutoff(c.protocol, c.M, c.epsilon);
  }

  if (r.has("sweep")) {
    const json& v = doc.at("sweep");
    if (v.is_array()) {
      for (const auto& axis : v) parse_axis(axis, r, c.sweep);
    } else if (!v.is_null()) {
      parse_axis(v, r, c.sweep);
    }
  }

  if (r.has("outputs")) {
    const json& v = doc.at("outputs");
    c.outputs.clear();
    if (!v.is_array()) {
      r.fail("outputs", "must be an array");
    } else {
      for (const auto& x : v) {
        std::optional<OutputKind> kind;
        if (x.is_string()) kind = parse_enum(kOutputs, x.get<std::string>());
        if (!kind) {
          r.fail("outputs", "entries must be one of: " + choices(kOutputs));
          continue;
        }
        if (!c.wants(*kind)) c.outputs.push_back(*kind);
      }
    }
  }

  if (r.has("output_dir")) {
    if (doc.at("output_dir").is_string()) {
      c.output_dir = doc.at("output_dir").get<std::string>();
    } else {
      r.fail("output_dir", "must be a string path");
    }
  }

  if (r.has("wigner_grid") && !doc.at("wigner_grid").is_null()) {
    const json& v = doc.at("wigner_grid");
    WignerGridSpec spec = c.effective_wigner_grid();
    if (!v.is_object()) {
      r.fail("wigner_grid", "must be an object with x, p and resolution");
    } else {
      if (v.contains("x")) {
        if (auto iv = parse_interval(v.at("x"))) spec.x_range = *iv;
        else r.fail("wigner_grid.x", "must be [lo, hi]");
      }
      if (v.contains("p")) {
        if (auto iv = parse_interval(v.at("p"))) spec.p_range = *iv;
        else r.fail("wigner_grid.p", "must be [lo, hi]");
      }
      if (v.contains("resolution")) {
        if (v.at("resolution").is_number_integer()) spec.resolution = v.at("resolution").get<int>();
        else r.fail("wigner_grid.resolution", "must be an integer");
      }
    }
    c.wigner_grid = spec;
  }

  if (!r.violations().empty()) throw ConfigError(r.violations());
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({"config is not valid JSON: " + std::string(e.what())});
  }
  return parse_config(doc);
}

int recommended_cutoff_for_radius(double radius, double tolerance) {
  // Poisson(|alpha|^2) mass above the protected 90% of levels.
  const double mean = radius * radius;
  auto tail_mass = [&](int n_cut) {
    const TruncationConfig trunc(n_cut);
    const auto first = static_cast<int>(trunc.protected_dimension());
    if (mean == 0.0) return first == 0 ? 1.0 : 0.0;
    double mass = 0.0;
    for (int n = first; n <= n_cut + 200; ++n)
      mass += std::exp(n * std::log(mean) - mean - detail::log_factorial(static_cast<std::size_t>(n)));
    return mass;
  };
  int n_cut = 10;
  while (tail_mass(n_cut) > tolerance && n_cut < 100000) n_cut += std::max(1, n_cut / 20);
  return n_cut;
}

namespace {

double phase_space_radius(const RunConfig& c) {
  switch (c.protocol) {
    case Protocol::squeeze:
    case Protocol::hamiltonian:
      return std::abs(c.t_max);
    case Protocol::cat: {
      double r = 0.0;
      if (!c.alphas.empty()) {
        for (const complex& a : c.alphas) r += std::abs(a);
      } else if (c.M >= 1 && c.M <= 60 && c.delta > 0.0) {
        for (const complex& a : cat_lattice_sequence(c.M, c.delta).alphas) r += std::abs(a);
      }
      return r;
    }
    case Protocol::gkp:
      // Comb displacements m delta / 2, m = 1..comb_steps, on top of the squeezed core.
      return std::abs(c.t_max) + c.delta * c.comb_steps * (c.comb_steps + 1) / 4.0;
  }
  return 0.0;
}

}  // namespace

Diagnostics validate(const RunConfig& c) {
  Diagnostics d;
  auto error = [&](std::string s) { d.errors.push_back(std::move(s)); };

  if (c.protocol != Protocol::cat) {
    switch (c.ansatz) {
      case Ansatz::symmetric:
        if (c.M < 1) error("M must be >= 1");
        else if (c.M % 2 == 0) error("M must be odd for the symmetric ansatz");
        break;
      case Ansatz::linear:
        if (c.M < 2) error("M must be >= 2 for the linear ansatz");
        break;
      case Ansatz::explicit_times:
        if (c.times.empty()) error("times: the explicit ansatz needs at least one time");
        if (static_cast<std::size_t>(c.M) != c.times.size())
          error("M must equal the number of explicit times (" + std::to_string(c.times.size()) + ")");
        break;
    }
    if (c.ansatz != Ansatz::explicit_times && !(c.t_max >= 0.0)) error("t_max must be >= 0");
  } else {
    if (c.alphas.empty() && c.M < 1) error("M must be >= 1");
    if (!c.alphas.empty() && static_cast<std::size_t>(c.M) != c.alphas.size())
      error("M must equal the number of explicit alphas (" + std::to_string(c.alphas.size()) + ")");
  }
  if (!(c.epsilon >= 0.0 && c.epsilon < 1.0)) error("epsilon must lie in [0, 1)");
  if (c.n_cut < 2) error("n_cut must be >= 2");
  if (!(c.tail_tolerance > 0.0 && c.tail_tolerance < 1.0)) error("tail_tolerance must lie in (0, 1)");
  if (c.k_max && *c.k_max < 0) error("k_max must be >= 0");
  if ((c.protocol == Protocol::cat || c.protocol == Protocol::gkp) && !(c.delta > 0.0)) error("delta must be > 0");
  if (c.protocol == Protocol::gkp && c.comb_steps < 0) error("comb_steps must be >= 0");
  if (c.folded && c.epsilon > 0.0) error("folded sequences are only defined for lossless runs (epsilon = 0)");
  if (c.folded && c.protocol == Protocol::cat) error("folded applies to squeezing sequences only");
  if (c.protocol == Protocol::hamiltonian && c.theta != 0.0) error("theta must be 0 for the hamiltonian protocol");
  if (c.wigner_grid) {
    const auto& g = *c.wigner_grid;
    if (g.resolution < 2) error("wigner_grid.resolution must be >= 2");
    if (!(g.x_range.hi > g.x_range.lo) || !(g.p_range.hi > g.p_range.lo))
      error("wigner_grid ranges must satisfy lo < hi");
  }

  std::set<std::string> seen;
  std::size_t live_axes = 0;
  const auto& names = sweepable_parameters();
  for (const SweepAxis& axis : c.sweep) {
    if (std::find(names.begin(), names.end(), axis.parameter) == names.end()) {
      error("sweep: \"" + axis.parameter + "\" is not a numeric config field");
      continue;
    }
    if (!seen.insert(axis.parameter).second) error("sweep: \"" + axis.parameter + "\" appears twice");
    if (axis.values.empty()) {
      d.notes.push_back("sweep axis \"" + axis.parameter + "\" has no values and is ignored");
      continue;
    }
    ++live_axes;
    const bool integral_field = axis.parameter == "M" || axis.parameter == "n_cut" || axis.parameter == "comb_steps";
    if (integral_field && !std::all_of(axis.values.begin(), axis.values.end(), is_integral))
      error("sweep: \"" + axis.parameter + "\" takes integer values");
    if (axis.parameter == "epsilon" && c.folded) error("sweep: epsilon cannot be swept with folded sequences");
  }
  if (live_axes == 0) d.notes.push_back("no sweep: a single point will be run");

  if (d.errors.empty()) {
    const int baseline = default_cutoff(c.protocol, c.M, c.epsilon);
    const int tail = recommended_cutoff_for_radius(phase_space_radius(c), c.tail_tolerance);
    const int recommended = std::max(baseline, tail);
    if (c.n_cut < recommended) {
      std::ostringstream msg;
      msg << "n_cut=" << c.n_cut << " is likely too small for this " << to_string(c.protocol)
          << " run; recommend n_cut >= " << recommended;
      d.warnings.push_back(msg.str());
    }
    if (c.epsilon > 0.0 && c.n_cut > 101) {
      d.notes.push_back("lossy runs evolve a density matrix; n_cut=" + std::to_string(c.n_cut) +
                        " may be slow");
    }
  }
  return d;
}

}  // namespace parityforge
