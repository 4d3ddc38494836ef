#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homdip/hom.hpp"

namespace homdip {

enum class Scenario { no_turbulence, one_sided, two_sided };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct ScanConfig {
  Scenario scenario = Scenario::two_sided;
  TurbulenceParams turbulence;
  SpdcParams spdc;
  double spectral_width = 0.0;
  std::vector<double> dz;
  int n_realizations = 1;
  std::uint64_t master_seed = 0;
  int ell = 1;
  int workers = 1;
  /// Screen grid; defaults to Grid2D::default_for(w0, w_p).
  std::optional<Grid2D> grid;

  Grid2D screen_grid() const;
  void validate() const;
};

struct EnsembleResult {
  DipCurve curve;
  double visibility = 0.0;
  double vis_stderr = 0.0;
  int n_realizations = 0;
};

/// Monte Carlo average over independent screen draws; realisation i uses
/// seeds derive_seed(master, 2i) and derive_seed(master, 2i + 1) for paths A
/// and B. Results do not depend on the worker count.
EnsembleResult ensemble_dip(const ScanConfig& config, const CoincidenceEngine& engine);
EnsembleResult ensemble_dip(const ScanConfig& config);

/// Ensemble-averaged probability from the Gaussian-moment quadrature.
double quadrature_P(double alpha, double beta, double zeta, const SpectralParams& sp, PhaseMatching pm);

struct FormDecomposition {
  double baseline_level = 0.0;
  double fill_level = 0.0;
  /// Largest |residual| of the fitted form, relative to the baseline.
  double fit_residual = 0.0;
};

FormDecomposition decompose_form(double p_at_dz0, double p_plateau);
/// Least-squares fit of P(dz) = baseline (1 - s) + fill s with s = sinc(4 pi W dz).
FormDecomposition decompose_form(const DipCurve& curve, double spectral_width);

struct ScalingPoint {
  double parameter;
  double fill;
  /// Plateau at the same point; 0 disables the small-value guard.
  double plateau = 0.0;
};

struct ExponentFit {
  double exponent = 0.0;
  double stderr_ = 0.0;
  int n_points = 0;
};

/// Log-log least-squares slope of fill against parameter. Points whose fill
/// is below 1e3 eps times their plateau are dropped first. Requires at least
/// five remaining points spanning a decade, all with positive fill.
ExponentFit scaling_exponent(const std::vector<ScalingPoint>& points);

}  // namespace homdip
