#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace homdip {

enum class PhaseMatching { sinc, gaussian };

std::string to_string(PhaseMatching pm);
PhaseMatching phase_matching_from_string(const std::string& s);

/// Pump, crystal and detection parameters of the down-converted state.
///
/// `detection_waist` is the waist w0 of the LG modes used for detection;
/// it fixes alpha = (w0/w_p)^2.
struct SpdcParams {
  double lambda_pump = 355e-9;
  double w_p = 58.9e-6;
  double crystal_len = 3e-3;
  double n_o = 1.77;
  double detection_waist = 120.57e-6;
  PhaseMatching phase_matching = PhaseMatching::sinc;

  /// Crystal length over pump Rayleigh range, n_o L lambda / (pi w_p^2).
  double beta() const;
  double alpha() const;
  void validate() const;

  /// Parameters reproducing the given (alpha, beta) at fixed pump waist and
  /// wavelength; the crystal length absorbs beta.
  static SpdcParams from_ratios(double alpha, double beta, double w_p = 58.9e-6,
                                PhaseMatching pm = PhaseMatching::sinc);
};

double crystal_ratio(const SpdcParams& params);

/// Relative-coordinate kernel g(a) with a = |r1 - r2|^2 / (2 beta w_p^2):
/// pi/2 - Si(a) for sinc phase matching, exp(-a) for the Gaussian model.
double relative_kernel(double a, PhaseMatching pm);

/// Spatial two-photon amplitude
/// F(r1, r2) = exp(-|r1 + r2|^2 / (4 w_p^2)) g(|r1 - r2|^2 / (2 beta w_p^2)).
/// Real and exchange-symmetric by construction.
class BiphotonAmplitude {
 public:
  explicit BiphotonAmplitude(const SpdcParams& params);

  double operator()(const Eigen::Vector2d& r1, const Eigen::Vector2d& r2) const;
  /// Same, from |r1|, |r2| and the angle between them.
  double polar(double rho1, double rho2, double dphi) const;

  const SpdcParams& params() const { return params_; }

 private:
  SpdcParams params_;
  double beta_;
};

inline double biphoton_amplitude(const Eigen::Vector2d& r1, const Eigen::Vector2d& r2, const SpdcParams& params) {
  return BiphotonAmplitude(params)(r1, r2);
}

struct ModalCoefficients {
  /// alpha_ell for ell = 0..ell_max, normalised so that
  /// sum_ell (2 - delta_ell0) |alpha_ell|^2 = 1.
  std::vector<std::complex<double>> alpha;
  /// Extrapolated sum_{ell > ell_max} |alpha_ell|^2 (geometric tail).
  double tail_mass = 0.0;
};

struct PolarKernelOptions;

/// Projections of F onto u_ell (x) u_{-ell} (p = 0 modes at the detection waist).
/// The default overload uses a 192-node radial rule.
ModalCoefficients modal_coefficients(const SpdcParams& params, int ell_max = 10);
ModalCoefficients modal_coefficients(const SpdcParams& params, int ell_max, const PolarKernelOptions& options);

}  // namespace homdip
