// parityforge: run, validate and post-process measurement-based state preparation runs.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "parityforge/config.hpp"
#include "parityforge/report.hpp"
#include "parityforge/runner.hpp"

namespace pf = parityforge;

namespace {

int print_error(const std::exception& e, int status) {
  const nlohmann::json doc = pf::ErrorRecord::from_exception(e);
  std::cerr << doc.dump() << '\n';
  return status;
}

std::optional<unsigned> jobs_flag(int jobs) {
  if (jobs > 0) return static_cast<unsigned>(jobs);
  return std::nullopt;
}

// XLO,XHI,PLO,PHI[,RES]
pf::WignerGridSpec parse_grid(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw pf::ConfigError({"--grid: bad number \"" + item + "\""});
    }
  }
  if (values.size() != 4 && values.size() != 5)
    throw pf::ConfigError({"--grid expects XLO,XHI,PLO,PHI[,RESOLUTION]"});
  pf::WignerGridSpec spec;
  spec.x_range = {values[0], values[1]};
  spec.p_range = {values[2], values[3]};
  if (values.size() == 5) spec.resolution = static_cast<int>(values[4]);
  std::vector<std::string> problems;
  if (!(spec.x_range.hi > spec.x_range.lo) || !(spec.p_range.hi > spec.p_range.lo))
    problems.push_back("--grid ranges must satisfy lo < hi");
  if (spec.resolution < 2) problems.push_back("--grid resolution must be >= 2");
  if (!problems.empty()) throw pf::ConfigError(problems);
  return spec;
}

int cmd_run(const std::string& config_path, const std::string& output_dir, int jobs) {
  try {
    pf::RunConfig config = pf::load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    return pf::run(config, pf::resolve_jobs(jobs_flag(jobs)), std::cerr);
  } catch (const pf::ConfigError& e) {
    return print_error(e, pf::kExitConfigError);
  }
}

int cmd_validate(const std::string& config_path, bool as_json) {
  pf::Diagnostics d;
  try {
    d = pf::validate(pf::load_config(config_path));
  } catch (const pf::ConfigError& e) {
    d.errors = e.violations();
  }
  if (as_json) {
    std::cout << nlohmann::json{{"ok", d.ok()}, {"errors", d.errors}, {"warnings", d.warnings}, {"notes", d.notes}}
                     .dump(2)
              << '\n';
  } else {
    for (const auto& s : d.errors) std::cout << "error: " << s << '\n';
    for (const auto& s : d.warnings) std::cout << "warning: " << s << '\n';
    for (const auto& s : d.notes) std::cout << "note: " << s << '\n';
    if (d.ok()) std::cout << "ok\n";
  }
  return d.ok() ? pf::kExitOk : pf::kExitConfigError;
}

int cmd_wigner(const std::string& state_path, const std::string& grid_text, const std::string& out_path, int jobs) {
  try {
    pf::WignerGridSpec spec = grid_text.empty() ? pf::WignerGridSpec{} : parse_grid(grid_text);
    spec.jobs = pf::resolve_jobs(jobs_flag(jobs));
    const pf::State state = pf::read_state_csv(std::filesystem::path(state_path));
    const pf::WignerGrid grid = pf::wigner(state, spec);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    pf::write_wigner_csv(out, grid);
    out.close();
    if (!out) throw std::runtime_error("failed writing " + out_path);
    return pf::kExitOk;
  } catch (const pf::ConfigError& e) {
    return print_error(e, pf::kExitConfigError);
  } catch (const pf::Error& e) {
    return print_error(e, pf::kExitRunError);
  } catch (const std::exception& e) {
    return print_error(e, pf::kExitIoError);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measurement-based squeezed, cat and GKP state preparation in a truncated Fock space"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "Execute a config (single point or sweep) and write outputs");
  run->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "Override output_dir from the config");
  run->add_option("-j,--jobs", jobs, "Worker threads (default: all cores; PARITYFORGE_JOBS overrides)");

  bool as_json = false;
  auto* validate = app.add_subcommand("validate", "Static checks of a config; writes nothing");
  validate->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  validate->add_flag("--json", as_json, "Print diagnostics as JSON");

  std::string state_path;
  std::string grid_text;
  std::string out_path = "wigner.csv";
  auto* wig = app.add_subcommand("wigner", "Wigner grid of a state CSV");
  wig->add_option("state", state_path, "State CSV written by `run`")->required()->check(CLI::ExistingFile);
  wig->add_option("--grid", grid_text, "XLO,XHI,PLO,PHI[,RESOLUTION] (default -6,6,-6,6,241)");
  wig->add_option("--out", out_path, "Output CSV (x,p,W)");
  wig->add_option("-j,--jobs", jobs, "Worker threads (default: all cores; PARITYFORGE_JOBS overrides)");

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(config_path, output_dir, jobs);
  if (*validate) return cmd_validate(config_path, as_json);
  return cmd_wigner(state_path, grid_text, out_path, jobs);
}
