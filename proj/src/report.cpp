#include "parityforge/report.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace parityforge {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j.at(key).is_null()) v = j.at(key).get<T>();
  else v.reset();
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += (ch == '\n' || ch == '\r') ? ' ' : ch;
  }
  return out + "\"";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

double parse_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw ConfigError({"state CSV line " + std::to_string(line) + ": bad number \"" + s + "\""});
  return value;
}

long parse_index(const std::string& s, std::size_t line) {
  const double v = parse_double(s, line);
  if (v < 0 || v != static_cast<double>(static_cast<long>(v)))
    throw ConfigError({"state CSV line " + std::to_string(line) + ": bad index \"" + s + "\""});
  return static_cast<long>(v);
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

ErrorRecord ErrorRecord::from_exception(const std::exception& e) {
  ErrorRecord rec;
  rec.message = e.what();
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    rec.kind = err->kind();
  } else {
    rec.kind = "InternalError";
  }
  if (const auto* z = dynamic_cast<const ZeroProbability*>(&e)) {
    rec.step = z->step();
    rec.probability = z->probability();
  }
  if (const auto* t = dynamic_cast<const TailOverflow*>(&e)) rec.tail_mass = t->tail_mass();
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) rec.violations = c->violations();
  return rec;
}

void to_json(json& j, const ErrorRecord& e) {
  j = {{"kind", e.kind}, {"message", e.message}};
  put_optional(j, "step", e.step);
  put_optional(j, "tail_mass", e.tail_mass);
  put_optional(j, "probability", e.probability);
  if (!e.violations.empty()) j["violations"] = e.violations;
}

void from_json(const json& j, ErrorRecord& e) {
  e.kind = j.at("kind").get<std::string>();
  e.message = j.at("message").get<std::string>();
  get_optional(j, "step", e.step);
  get_optional(j, "tail_mass", e.tail_mass);
  get_optional(j, "probability", e.probability);
  e.violations = j.value("violations", std::vector<std::string>{});
}

void to_json(json& j, const SqueezingReport& r) {
  j = {{"s_db", r.s_db},
       {"theta_min", r.theta_min},
       {"var_min", r.var_min},
       {"var_max", r.var_max},
       {"best_fit_xi", {{"r", r.best_fit_xi.r}, {"phase", r.best_fit_xi.phase}}},
       {"best_fit_fidelity", r.best_fit_fidelity}};
}

void from_json(const json& j, SqueezingReport& r) {
  r.s_db = j.at("s_db").get<double>();
  r.theta_min = j.at("theta_min").get<double>();
  r.var_min = j.at("var_min").get<double>();
  r.var_max = j.at("var_max").get<double>();
  r.best_fit_xi.r = j.at("best_fit_xi").at("r").get<double>();
  r.best_fit_xi.phase = j.at("best_fit_xi").at("phase").get<double>();
  r.best_fit_fidelity = j.at("best_fit_fidelity").get<double>();
}

void to_json(json& j, const GkpFitReport& r) {
  j = {{"r_opt", r.r_opt}, {"sigma_env_opt", r.sigma_env_opt}, {"fidelity", r.fidelity}};
}

void from_json(const json& j, GkpFitReport& r) {
  r.r_opt = j.at("r_opt").get<double>();
  r.sigma_env_opt = j.at("sigma_env_opt").get<double>();
  r.fidelity = j.at("fidelity").get<double>();
}

void to_json(json& j, const PointReport& r) {
  j = {{"log", {{"per_step_probabilities", r.per_step_probabilities},
                {"cumulative_probability", r.cumulative_probability}}},
       {"odd_population", r.odd_population}};
  put_optional(j, "squeezing", r.squeezing);
  put_optional(j, "gkp", r.gkp);
  if (r.cat) {
    j["cat"] = json::object();
    put_optional(j["cat"], "fidelity_vs_analytic", r.cat->fidelity_vs_analytic);
  }
  if (r.hamiltonian) {
    j["hamiltonian"] = {{"ground_energy", r.hamiltonian->ground_energy},
                        {"fidelity_vs_protocol", r.hamiltonian->fidelity_vs_protocol}};
  }
  put_optional(j, "error", r.error);
}

void from_json(const json& j, PointReport& r) {
  const json& log = j.at("log");
  r.per_step_probabilities = log.at("per_step_probabilities").get<std::vector<double>>();
  r.cumulative_probability = log.at("cumulative_probability").get<double>();
  r.odd_population = j.at("odd_population").get<double>();
  get_optional(j, "squeezing", r.squeezing);
  get_optional(j, "gkp", r.gkp);
  r.cat.reset();
  if (j.contains("cat")) {
    CatReport cat;
    get_optional(j.at("cat"), "fidelity_vs_analytic", cat.fidelity_vs_analytic);
    r.cat = cat;
  }
  r.hamiltonian.reset();
  if (j.contains("hamiltonian")) {
    r.hamiltonian = HamiltonianReport{j.at("hamiltonian").at("ground_energy").get<double>(),
                                      j.at("hamiltonian").at("fidelity_vs_protocol").get<double>()};
  }
  get_optional(j, "error", r.error);
}

void to_json(json& j, const ReportFile& r) {
  j = json::object();
  j["schema_version"] = r.schema_version;
  j["config"] = r.config;
  if (r.result) j["result"] = *r.result;
  if (!r.sweep.empty()) {
    json rows = json::array();
    for (const SweepPoint& p : r.sweep) {
      json coords = json::array();
      for (const auto& [name, value] : p.coordinates) coords.push_back({{"parameter", name}, {"value", value}});
      rows.push_back({{"coordinates", coords}, {"result", p.result}});
    }
    j["sweep"] = rows;
  }
  j["files"] = r.files;
  j["timings"] = r.timings;
}

void from_json(const json& j, ReportFile& r) {
  r.schema_version = j.at("schema_version").get<std::string>();
  if (r.schema_version != kSchemaVersion)
    throw ConfigError({"unsupported report schema_version \"" + r.schema_version + "\""});
  r.config = parse_config(j.at("config"));
  get_optional(j, "result", r.result);
  r.sweep.clear();
  if (j.contains("sweep")) {
    for (const json& row : j.at("sweep")) {
      SweepPoint p;
      for (const json& c : row.at("coordinates"))
        p.coordinates.emplace_back(c.at("parameter").get<std::string>(), c.at("value").get<double>());
      p.result = row.at("result").get<PointReport>();
      r.sweep.push_back(std::move(p));
    }
  }
  r.files = j.value("files", std::map<std::string, std::string>{});
  r.timings = j.value("timings", std::map<std::string, double>{});
}

ReportFile read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open report " + path.string()});
  return json::parse(in).get<ReportFile>();
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void write_state_csv(std::ostream& out, const State& state, MixedStateFormat format) {
  if (const auto* psi = std::get_if<PureState>(&state)) {
    out << "index,re,im\n";
    for (Eigen::Index n = 0; n < psi->amplitudes.size(); ++n) {
      const complex c = psi->amplitudes(n);
      out << n << ',' << format_number(c.real()) << ',' << format_number(c.imag()) << '\n';
    }
    return;
  }
  const Matrix& rho = std::get<MixedState>(state).rho;
  if (format == MixedStateFormat::diagonal) {
    out << "index,rho_nn\n";
    for (Eigen::Index n = 0; n < rho.rows(); ++n) out << n << ',' << format_number(rho(n, n).real()) << '\n';
    return;
  }
  out << "row,col,re,im\n";
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
      out << i << ',' << j << ',' << format_number(rho(i, j).real()) << ',' << format_number(rho(i, j).imag())
          << '\n';
}

State read_state_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ConfigError({"state CSV is empty"});
  header = trim(header);
  enum class Layout { pure, diagonal, full };
  Layout layout;
  if (header == "index,re,im") layout = Layout::pure;
  else if (header == "index,rho_nn") layout = Layout::diagonal;
  else if (header == "row,col,re,im") layout = Layout::full;
  else throw ConfigError({"state CSV has unknown header \"" + header + "\""});

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) rows.push_back(split(line, ','));
  }
  const std::size_t width = layout == Layout::pure ? 3 : layout == Layout::diagonal ? 2 : 4;
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (rows[k].size() != width)
      throw ConfigError({"state CSV line " + std::to_string(k + 2) + ": expected " + std::to_string(width) +
                         " fields"});

  if (layout == Layout::pure || layout == Layout::diagonal) {
    Vector values = Vector::Zero(static_cast<Eigen::Index>(rows.size()));
    std::vector<bool> seen(rows.size(), false);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const long n = parse_index(rows[k][0], k + 2);
      if (n >= static_cast<long>(rows.size()) || seen[n])
        throw ConfigError({"state CSV line " + std::to_string(k + 2) + ": index out of range or repeated"});
      seen[n] = true;
      const double re = parse_double(rows[k][1], k + 2);
      const double im = layout == Layout::pure ? parse_double(rows[k][2], k + 2) : 0.0;
      values(n) = complex(re, im);
    }
    if (layout == Layout::pure) return PureState(values, false);
    return MixedState(Matrix(values.asDiagonal()));
  }

  const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(rows.size()))));
  if (static_cast<std::size_t>(dim * dim) != rows.size())
    throw ConfigError({"state CSV: full matrix needs n^2 rows"});
  Matrix rho = Matrix::Zero(dim, dim);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const long i = parse_index(rows[k][0], k + 2);
    const long j = parse_index(rows[k][1], k + 2);
    if (i >= dim || j >= dim) throw ConfigError({"state CSV line " + std::to_string(k + 2) + ": index out of range"});
    rho(i, j) = complex(parse_double(rows[k][2], k + 2), parse_double(rows[k][3], k + 2));
  }
  return MixedState(std::move(rho));
}

State read_state_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open state file " + path.string()});
  return read_state_csv(in);
}

void write_wigner_csv(std::ostream& out, const WignerGrid& grid) {
  out << "x,p,W\n";
  for (std::size_t i = 0; i < grid.xs.size(); ++i)
    for (std::size_t j = 0; j < grid.ps.size(); ++j)
      out << format_number(grid.xs[i]) << ',' << format_number(grid.ps[j]) << ','
          << format_number(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
}

void write_log_csv(std::ostream& out, const std::vector<complex>& points, const PointReport& result) {
  out << "step,alpha_re,alpha_im,probability,cumulative\n";
  double cumulative = 1.0;
  for (std::size_t m = 0; m < result.per_step_probabilities.size(); ++m) {
    const double p = result.per_step_probabilities[m];
    cumulative *= p;
    const complex a = m < points.size() ? points[m] : complex{};
    out << (m + 1) << ',' << format_number(a.real()) << ',' << format_number(a.imag()) << ','
        << format_number(p) << ',' << format_number(cumulative) << '\n';
  }
}

namespace {

struct Column {
  const char* name;
  std::optional<double> (*get)(const PointReport&);
};

std::vector<Column> metric_columns(Protocol protocol) {
  auto p_suc = [](const PointReport& r) -> std::optional<double> {
    if (r.error) return std::nullopt;
    return r.cumulative_probability;
  };
  switch (protocol) {
    case Protocol::squeeze:
      return {
          {"p_suc", p_suc},
          {"s_db", [](const PointReport& r) { return r.squeezing ? std::optional(r.squeezing->s_db) : std::nullopt; }},
          {"theta_min",
           [](const PointReport& r) { return r.squeezing ? std::optional(r.squeezing->theta_min) : std::nullopt; }},
          {"var_min",
           [](const PointReport& r) { return r.squeezing ? std::optional(r.squeezing->var_min) : std::nullopt; }},
          {"r_fit",
           [](const PointReport& r) { return r.squeezing ? std::optional(r.squeezing->best_fit_xi.r) : std::nullopt; }},
          {"fit_fidelity",
           [](const PointReport& r) {
             return r.squeezing ? std::optional(r.squeezing->best_fit_fidelity) : std::nullopt;
           }},
      };
    case Protocol::gkp:
      return {
          {"p_suc", p_suc},
          {"r_opt", [](const PointReport& r) { return r.gkp ? std::optional(r.gkp->r_opt) : std::nullopt; }},
          {"sigma_env_opt",
           [](const PointReport& r) { return r.gkp ? std::optional(r.gkp->sigma_env_opt) : std::nullopt; }},
          {"gkp_fidelity", [](const PointReport& r) { return r.gkp ? std::optional(r.gkp->fidelity) : std::nullopt; }},
      };
    case Protocol::cat:
      return {
          {"p_suc", p_suc},
          {"fidelity_vs_analytic",
           [](const PointReport& r) { return r.cat ? r.cat->fidelity_vs_analytic : std::nullopt; }},
      };
    case Protocol::hamiltonian:
      return {
          {"ground_energy",
           [](const PointReport& r) {
             return r.hamiltonian ? std::optional(r.hamiltonian->ground_energy) : std::nullopt;
           }},
          {"fidelity_vs_protocol",
           [](const PointReport& r) {
             return r.hamiltonian ? std::optional(r.hamiltonian->fidelity_vs_protocol) : std::nullopt;
           }},
          {"s_db", [](const PointReport& r) { return r.squeezing ? std::optional(r.squeezing->s_db) : std::nullopt; }},
      };
  }
  return {};
}

}  // namespace

void write_sweep_csv(std::ostream& out, Protocol protocol, const std::vector<SweepAxis>& axes,
                     const std::vector<SweepPoint>& points) {
  const std::vector<Column> columns = metric_columns(protocol);
  std::vector<std::string> axis_names;
  for (const SweepAxis& axis : axes)
    if (!axis.values.empty()) axis_names.push_back(axis.parameter);

  bool first = true;
  auto sep = [&] {
    if (!first) out << ',';
    first = false;
  };
  for (const auto& name : axis_names) sep(), out << name;
  for (const Column& c : columns) sep(), out << c.name;
  sep(), out << "error";
  out << ",error_detail\n";

  for (const SweepPoint& point : points) {
    first = true;
    for (const auto& [name, value] : point.coordinates) sep(), out << format_number(value);
    for (const Column& c : columns) {
      sep();
      if (auto v = c.get(point.result)) out << format_number(*v);
    }
    sep();
    if (point.result.error) {
      const ErrorRecord& e = *point.result.error;
      out << e.kind << ',';
      std::string detail = e.message;
      if (e.step) detail += " [step " + std::to_string(*e.step) + "]";
      if (e.tail_mass) detail += " [tail_mass " + format_number(*e.tail_mass) + "]";
      out << csv_quote(detail);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

}  // namespace parityforge
