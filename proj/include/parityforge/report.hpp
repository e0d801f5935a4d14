#pragma once

// Machine-readable run outputs: the JSON report and the CSV files for states,
// Wigner grids, step logs and sweeps. CSV numbers carry 17 significant digits.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "parityforge/analysis.hpp"
#include "parityforge/config.hpp"

namespace parityforge {

inline constexpr const char* kSchemaVersion = "1";

/// Failure description written to error.json, stderr and sweep rows.
struct ErrorRecord {
  std::string kind;
  std::string message;
  std::optional<std::size_t> step;
  std::optional<double> tail_mass;
  std::optional<double> probability;
  std::vector<std::string> violations;

  static ErrorRecord from_exception(const std::exception& e);
  bool operator==(const ErrorRecord&) const = default;
};

struct CatReport {
  /// Only defined for two-step cats.
  std::optional<double> fidelity_vs_analytic;
};

struct HamiltonianReport {
  double ground_energy = 0.0;
  double fidelity_vs_protocol = 0.0;
};

/// Results of one protocol point.
struct PointReport {
  std::vector<double> per_step_probabilities;
  double cumulative_probability = 1.0;
  /// Population on odd Fock levels of the output.
  double odd_population = 0.0;
  std::optional<SqueezingReport> squeezing;
  std::optional<GkpFitReport> gkp;
  std::optional<CatReport> cat;
  std::optional<HamiltonianReport> hamiltonian;
  std::optional<ErrorRecord> error;
};

struct SweepPoint {
  /// (parameter, value) in axis order.
  std::vector<std::pair<std::string, double>> coordinates;
  PointReport result;
};

struct ReportFile {
  std::string schema_version = kSchemaVersion;
  RunConfig config;
  /// Single-point runs.
  std::optional<PointReport> result;
  /// Sweeps, in grid order.
  std::vector<SweepPoint> sweep;
  /// Output name -> file name relative to the report.
  std::map<std::string, std::string> files;
  /// Wall-clock seconds per phase.
  std::map<std::string, double> timings;
};

void to_json(nlohmann::json& j, const ErrorRecord& e);
void from_json(const nlohmann::json& j, ErrorRecord& e);
void to_json(nlohmann::json& j, const SqueezingReport& r);
void from_json(const nlohmann::json& j, SqueezingReport& r);
void to_json(nlohmann::json& j, const GkpFitReport& r);
void from_json(const nlohmann::json& j, GkpFitReport& r);
void to_json(nlohmann::json& j, const PointReport& r);
void from_json(const nlohmann::json& j, PointReport& r);
void to_json(nlohmann::json& j, const ReportFile& r);
void from_json(const nlohmann::json& j, ReportFile& r);

ReportFile read_report(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_number(double x);

/// Pure: index,re,im. Mixed: index,rho_nn or row,col,re,im.
void write_state_csv(std::ostream& out, const State& state, MixedStateFormat format);
/// Reads any of the three state layouts. A diagonal file yields a diagonal density matrix.
State read_state_csv(std::istream& in);
State read_state_csv(const std::filesystem::path& path);

/// x,p,W with x varying slowest.
void write_wigner_csv(std::ostream& out, const WignerGrid& grid);
/// step,alpha_re,alpha_im,probability,cumulative.
void write_log_csv(std::ostream& out, const std::vector<complex>& points, const PointReport& result);
/// One row per point: axis columns, protocol metrics, error, error_detail.
void write_sweep_csv(std::ostream& out, Protocol protocol, const std::vector<SweepAxis>& axes,
                     const std::vector<SweepPoint>& points);

}  // namespace parityforge
