#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "homdip/averaging.hpp"

namespace homdip {

/// Schema violation located in the config text.
class ConfigDiagnostic : public std::invalid_argument {
 public:
  ConfigDiagnostic(const std::string& source, int line, const std::string& field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

struct EnsembleSpec {
  Scenario scenario = Scenario::two_sided;
  ScreenModel model = ScreenModel::quadratic;
  std::vector<double> strength_w;
  int n_realizations = 1;
  bool check_constant_visibility = false;
  bool check_monotone_visibility = false;
  std::optional<double> min_visibility;
};

struct ExponentSpec {
  std::string swept_param;  // "beta" or "zeta"
  PhaseMatching phase_matching = PhaseMatching::sinc;
  std::vector<double> values;
  double alpha = 4.19;
  double beta = 0.173;
  double zeta = 0.0;
  std::optional<double> expected;
  double tolerance = 0.0;
};

struct RunConfig {
  nlohmann::json echo;
  std::uint64_t master_seed = 0;
  int ell = 1;
  SpdcParams spdc;
  double spectral_width = 0.0;
  std::vector<double> dz;
  std::optional<Grid2D> grid;
  PolarKernelOptions polar;
  std::vector<EnsembleSpec> ensembles;
  std::vector<ExponentSpec> exponents;
};

/// Parses and validates a config document; throws ConfigDiagnostic.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunOptions {
  int workers = 1;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

struct RunManifest {
  nlohmann::json config;
  std::uint64_t master_seed = 0;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
  std::vector<CheckResult> checks;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

/// Executes every scan, writes dip_curve.csv, visibility.csv, exponents.csv
/// and manifest.json into out_dir.
RunManifest run(const RunConfig& config, const RunOptions& options);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace homdip
