#pragma once

// Machine-readable verification runs. Every subcommand maps to run(), which
// executes the checks, assembles a report {config, results, version}, writes
// it as JSON or CSV, and returns a process exit code:
//   0  every check passed
//   1  at least one check failed
//   2  usage or configuration error
// Reports embed their fully resolved configuration; re-running from that
// embedded configuration reproduces the report byte for byte.

#include <cstdint>
#include <string>
#include <vector>

#include "detlab/quadrature.hpp"

namespace detlab::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string subcommand;
  int n = 2;
  double p = 2.0;
  double eps = 0.1;
  double alpha = 0.5;
  double beta = 0.5;
  double delta = 0.05;
  std::vector<double> x0;        // empty -> default pattern
  std::vector<double> eps_list;  // hardy-scan widths
  std::vector<double> r_list;    // ma-mass radii
  std::string profile = "cone";  // ma-mass profile name
  int deriv_i = 0;               // weak-hessian indices
  int deriv_j = 0;
  int count = 10;                // corpus size
  std::string field_json;        // optional field-description record
  quadrature::IntegrationScheme scheme;
  std::uint64_t seed = 12345;
  std::string out;               // empty -> stdout
  std::string format = "json";   // "json" | "csv"
};

struct CheckResult {
  std::string check;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  RunConfig config;
  std::vector<CheckResult> results;
  // Optional numeric series (e.g. the blow-up scan); emitted only in CSV.
  std::vector<std::string> series_columns;
  std::vector<std::vector<double>> series_rows;
  std::string version = kVersion;

  bool all_passed() const;
};

/// Executes the configured subcommand. On success the report is written to
/// config.out (or stdout) and copied to *out_report when given.
int run(const RunConfig& config, Report* out_report = nullptr);

std::string report_to_string(const Report& report);

/// Strict parsers: unknown keys are rejected.
RunConfig config_from_json(const std::string& json_text);
std::string config_to_json(const RunConfig& config);

/// Re-parses the embedded config of a serialized report (JSON or CSV).
RunConfig config_from_report_text(const std::string& report_text);

/// Default integration scheme; DETLAB_DEFAULT_DEPTH overrides the dyadic
/// depth when set to a positive integer.
quadrature::IntegrationScheme default_scheme();

/// Known subcommand names, for usage messages.
const std::vector<std::string>& subcommands();

}  // namespace detlab::cli
