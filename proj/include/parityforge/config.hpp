#pragma once

// Declarative run configuration for the command-line driver.
//
// Configs are JSON documents; complex numbers are two-element [re, im] arrays.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parityforge/analysis.hpp"
#include "parityforge/protocols.hpp"

namespace parityforge {

enum class Protocol { squeeze, cat, gkp, hamiltonian };
enum class Ansatz { symmetric, linear, explicit_times };
enum class OutputKind { state, report, wigner, log };
enum class MixedStateFormat { diagonal, full };

/// One sweep axis over a numeric config field. Either a range (min, max, steps)
/// or an explicit value list; ranges are expanded into `values` on parse.
struct SweepAxis {
  std::string parameter;
  std::vector<double> values;

  bool operator==(const SweepAxis&) const = default;
};

struct RunConfig {
  Protocol protocol = Protocol::squeeze;
  Ansatz ansatz = Ansatz::symmetric;
  int M = 3;
  double t_max = 0.8;
  double theta = 0.0;
  double epsilon = 0.0;
  int n_cut = 201;
  double tail_tolerance = 1e-6;
  std::optional<int> k_max;
  double delta = 2.0 * 1.7724538509055160273;
  int comb_steps = 2;
  bool folded = false;
  DisplacementConvention displacement = DisplacementConvention::exact_elements;
  /// Explicit squeezing times (ansatz = explicit).
  std::vector<double> times;
  /// Explicit cat displacements; empty means the square-lattice schedule.
  std::vector<complex> alphas;
  /// Whether to run best-fit searches (squeezed / GKP).
  bool fit = true;

  std::vector<SweepAxis> sweep;
  std::vector<OutputKind> outputs{OutputKind::report};
  std::filesystem::path output_dir = "out";
  std::optional<WignerGridSpec> wigner_grid;
  MixedStateFormat mixed_state_format = MixedStateFormat::diagonal;

  bool wants(OutputKind kind) const;
  TruncationConfig truncation() const;
  LossModel loss() const;
  RunOptions run_options() const;
  /// Squeezing-stage sequence from the ansatz fields.
  DisplacementSequence squeeze_sequence() const;
  CatSequence cat_sequence() const;
  GkpSpec gkp_spec() const;
  /// Grid from the config, or the per-protocol default.
  WignerGridSpec effective_wigner_grid() const;
  /// Copy with one numeric field replaced (used by sweeps).
  RunConfig with_parameter(const std::string& name, double value) const;
};

/// Numeric fields a sweep axis may name.
const std::vector<std::string>& sweepable_parameters();

std::string to_string(Protocol p);
std::string to_string(Ansatz a);
std::string to_string(OutputKind k);

void to_json(nlohmann::json& j, const RunConfig& c);
/// Throws ConfigError listing every malformed field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

struct Diagnostics {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;

  bool ok() const { return errors.empty(); }
};

/// Static checks; never writes files.
Diagnostics validate(const RunConfig& config);

/// Smallest n_cut whose top-10% tail holds at most `tolerance` of a coherent
/// state with |alpha| = radius.
int recommended_cutoff_for_radius(double radius, double tolerance);

}  // namespace parityforge
