#pragma once

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "homdip/fieldgrid.hpp"
#include "homdip/gaussian_moments.hpp"
#include "homdip/polar.hpp"
#include "homdip/spdc.hpp"
#include "homdip/turbulence.hpp"

namespace homdip {

enum class PathPair { AB, CD };

/// Two-photon state over ordered mode pairs: amplitude(m, n) is the amplitude
/// for azimuthal index m in the first path (A or C) and n in the second (B or D).
struct TwoPhotonModalState {
  PathPair paths = PathPair::AB;
  std::map<std::pair<int, int>, std::complex<double>> amplitudes;

  std::complex<double> amplitude(int m, int n) const;
  double norm_squared() const;
  /// Path-label swap: amplitude(m, n) -> amplitude(n, m).
  TwoPhotonModalState swapped() const;
};

std::complex<double> inner_product(const TwoPhotonModalState& a, const TwoPhotonModalState& b);

/// (|ell, -ell> + sign |-ell, ell>) / sqrt(2); ell = 0 with sign = +1 gives |0, 0>.
TwoPhotonModalState bell_state(int ell, int sign);

/// Balanced beamsplitter A -> (C + D)/sqrt(2), B -> (C - D)/sqrt(2).
/// `coincidence` holds the one-photon-per-port part; the bunched parts are
/// reported as probabilities.
struct BeamsplitterOutput {
  TwoPhotonModalState coincidence;
  double p_both_c = 0.0;
  double p_both_d = 0.0;

  double total_probability() const { return coincidence.norm_squared() + p_both_c + p_both_d; }
};
BeamsplitterOutput beamsplitter(const TwoPhotonModalState& state);

/// T[m, l] = <u_m | e^{i theta} | u_l> over the listed modes.
Eigen::MatrixXcd turbulence_modal_matrix(const PhaseScreen& screen, const std::vector<LGIndex>& modes,
                                         const Grid2D& grid);

/// (alpha_ell / 2)(T[-ell,-ell] - T[ell,ell]) for T restricted to the ordered
/// pair {ell, -ell}: t(0,0) = T[ell,ell], t(1,1) = T[-ell,-ell].
std::complex<double> transition_amplitude(const Eigen::Matrix2cd& t, std::complex<double> alpha_ell);

struct SpectralParams {
  /// W in 1/m.
  double spectral_width = 0.0;
  double dz = 0.0;
};

/// W = bandwidth / center^2 for a filter of the given width at the given wavelength.
double spectral_width_from_filter(double bandwidth, double center_wavelength);

/// sinc(4 pi W dz).
double spectral_factor(const SpectralParams& sp);

enum class AmplitudeRoute { automatic, analytic, polar };

/// Evaluates the per-realisation detection amplitudes for one SPDC source.
/// Tilt screens with |ell| = 1 use the closed-form Gaussian route; any other
/// screen uses the polar kernel, which is built on first use.
class CoincidenceEngine {
 public:
  explicit CoincidenceEngine(const SpdcParams& params, const PolarKernelOptions& polar = {},
                             AmplitudeRoute route = AmplitudeRoute::automatic);

  /// Null screens mean no turbulence in that path.
  ScreenAmplitudes amplitudes(const PhaseScreen* a, const PhaseScreen* b, int ell) const;

  const SpdcParams& params() const { return params_; }
  const PolarKernel& kernel() const;

 private:
  ScreenAmplitudes polar_amplitudes(const PhaseScreen* a, const PhaseScreen* b, int ell) const;

  SpdcParams params_;
  PolarKernelOptions polar_options_;
  AmplitudeRoute route_;
  mutable std::once_flag kernel_once_;
  mutable std::unique_ptr<PolarKernel> kernel_;
};

/// (1 - s)(|m1|^2 + |m2|^2) + s |m1 - m2|^2 with s the spectral factor.
double coincidence_probability(const ScreenAmplitudes& amps, double s);

double coincidence_probability_realization(const CoincidenceEngine& engine, const PhaseScreen* a,
                                           const PhaseScreen* b, int ell, const SpectralParams& sp);

struct DipCurve {
  std::vector<double> dz;
  std::vector<double> p;
  std::vector<double> stderr_;
};

/// Indices of the dz points whose |spectral factor| is below 0.05.
std::vector<std::size_t> plateau_indices(const std::vector<double>& dz, double spectral_width);

/// (C_out - C_in) / (C_out + C_in) with C_in at the dz closest to zero and
/// C_out the mean over the plateau points.
double visibility(const DipCurve& curve, double spectral_width);

}  // namespace homdip
