#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homdip/fieldgrid.hpp"

namespace homdip {

enum class ScreenModel { kolmogorov, quadratic };

std::string to_string(ScreenModel m);
ScreenModel screen_model_from_string(const std::string& s);

/// Turbulence strength W = w_p / r0 together with the screen model.
struct TurbulenceParams {
  double strength_w = 0.0;
  double w_p = 1.0;
  ScreenModel model = ScreenModel::quadratic;

  /// Fried parameter implied by W; infinite when W = 0.
  double r0() const;
  void validate() const;
};

/// One realisation of a thin random phase screen.
struct PhaseScreen {
  Grid2D grid;
  RealArray<double> theta;
  std::uint64_t seed = 0;
  ScreenModel model = ScreenModel::quadratic;
  /// Phase gradient (rad/m) when the screen is exactly theta = tilt . r.
  std::optional<Eigen::Vector2d> tilt;

  /// The zero screen on `g`.
  static PhaseScreen zero(const Grid2D& g, ScreenModel model = ScreenModel::quadratic);
  /// Exact tilt screen theta = tilt . r.
  static PhaseScreen from_tilt(const Grid2D& g, const Eigen::Vector2d& tilt);

  /// Bilinear interpolation of theta at (x, y); exact for tilt screens.
  double phase_at(double x, double y) const;
};

double fried_parameter(double cn2, double path_length, double wavelength);
double strength_w(double w_p, double r0);
double zeta(double strength_w);
double quadratic_structure_fn(double separation, const TurbulenceParams& params);

/// Draws a screen. Span warnings are appended to `warnings` when non-null.
PhaseScreen make_screen(const TurbulenceParams& params, const Grid2D& grid, std::uint64_t seed,
                        std::vector<std::string>* warnings = nullptr);

struct StructureEstimate {
  double separation;
  double value;
  double stderr_;
};

/// Ensemble estimate of E[(theta(r+dr) - theta(r))^2], averaged over the x and
/// y axes. Separations are rounded to whole pixels; the rounded value is
/// reported.
std::vector<StructureEstimate> estimate_structure_fn(const std::vector<PhaseScreen>& screens,
                                                     const std::vector<double>& separations);

/// PSCR export: single real channel in the CFLD layout.
void write_pscr(const std::string& path, const PhaseScreen& s);
PhaseScreen read_pscr(const std::string& path);

}  // namespace homdip
