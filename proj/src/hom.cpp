#include "homdip/hom.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "homdip/error.hpp"
#include "homdip/special.hpp"

namespace homdip {

std::complex<double> TwoPhotonModalState::amplitude(int m, int n) const {
  const auto it = amplitudes.find({m, n});
  return it == amplitudes.end() ? 0.0 : it->second;
}

double TwoPhotonModalState::norm_squared() const {
  double s = 0.0;
  for (const auto& [key, a] : amplitudes) s += std::norm(a);
  return s;
}

TwoPhotonModalState TwoPhotonModalState::swapped() const {
  TwoPhotonModalState out{paths, {}};
  for (const auto& [key, a] : amplitudes) out.amplitudes[{key.second, key.first}] = a;
  return out;
}

std::complex<double> inner_product(const TwoPhotonModalState& a, const TwoPhotonModalState& b) {
  if (a.paths != b.paths) throw DomainError("inner_product: states live on different path pairs");
  std::complex<double> s = 0.0;
  for (const auto& [key, amp] : a.amplitudes) s += std::conj(amp) * b.amplitude(key.first, key.second);
  return s;
}

TwoPhotonModalState bell_state(int ell, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("bell_state: sign must be +1 or -1");
  TwoPhotonModalState s;
  if (ell == 0) {
    if (sign == -1) throw DomainError("bell_state: the antisymmetric state vanishes for ell = 0");
    s.amplitudes[{0, 0}] = 1.0;
    return s;
  }
  const double h = 1.0 / std::numbers::sqrt2;
  s.amplitudes[{ell, -ell}] = h;
  s.amplitudes[{-ell, ell}] = sign * h;
  return s;
}

BeamsplitterOutput beamsplitter(const TwoPhotonModalState& state) {
  if (state.paths != PathPair::AB) throw DomainError("beamsplitter: input must be on paths A, B");
  BeamsplitterOutput out;
  out.coincidence.paths = PathPair::CD;
  // A photon in mode m and B photon in mode n contribute -1/2 to (C=m, D=n)
  // and +1/2 to (C=n, D=m); the bunched parts keep the exchange-symmetric
  // component of the amplitude.
  for (const auto& [key, a] : state.amplitudes) {
    const auto [m, n] = key;
    out.coincidence.amplitudes[{m, n}] += -0.5 * a;
    out.coincidence.amplitudes[{n, m}] += 0.5 * a;
  }
  std::set<std::pair<int, int>> keys;
  for (const auto& [key, a] : state.amplitudes) {
    keys.insert(key);
    keys.insert({key.second, key.first});
  }
  double symmetric = 0.0;
  for (const auto& [m, n] : keys) symmetric += std::norm(0.5 * (state.amplitude(m, n) + state.amplitude(n, m)));
  out.p_both_c = 0.5 * symmetric;
  out.p_both_d = 0.5 * symmetric;
  return out;
}

Eigen::MatrixXcd turbulence_modal_matrix(const PhaseScreen& screen, const std::vector<LGIndex>& modes,
                                         const Grid2D& grid) {
  require_same_grid(grid, screen.grid, "turbulence_modal_matrix");
  if (modes.empty()) throw DomainError("turbulence_modal_matrix: no modes given");
  for (const auto& m : modes)
    if (m.w0 != modes.front().w0) throw DomainError("turbulence_modal_matrix: modes must share w0");
  std::vector<ComplexField> fields;
  std::vector<ComplexField> turbed;
  for (const auto& m : modes) {
    fields.push_back(lg_mode<double>(m, grid));
    turbed.push_back(apply_phase(fields.back(), screen.grid, screen.theta));
  }
  const auto k = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXcd t(k, k);
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) t(r, c) = overlap(fields[r], turbed[c]);
  return t;
}

std::complex<double> transition_amplitude(const Eigen::Matrix2cd& t, std::complex<double> alpha_ell) {
  return 0.5 * alpha_ell * (t(1, 1) - t(0, 0));
}

double spectral_width_from_filter(double bandwidth, double center_wavelength) {
  if (!(bandwidth > 0.0) || !(center_wavelength > 0.0))
    throw DomainError("spectral_width_from_filter: inputs must be positive");
  return bandwidth / (center_wavelength * center_wavelength);
}

double spectral_factor(const SpectralParams& sp) {
  if (!(sp.spectral_width > 0.0)) throw DomainError("spectral_factor: spectral width must be positive");
  return sinc(4.0 * std::numbers::pi * sp.spectral_width * sp.dz);
}

CoincidenceEngine::CoincidenceEngine(const SpdcParams& params, const PolarKernelOptions& polar, AmplitudeRoute route)
    : params_(params), polar_options_(polar), route_(route) {
  params_.validate();
}

const PolarKernel& CoincidenceEngine::kernel() const {
  std::call_once(kernel_once_, [this] { kernel_ = std::make_unique<PolarKernel>(params_, polar_options_); });
  return *kernel_;
}

ScreenAmplitudes CoincidenceEngine::amplitudes(const PhaseScreen* a, const PhaseScreen* b, int ell) const {
  if (ell == 0) throw DomainError("CoincidenceEngine: ell must be non-zero");
  const bool tilts = (!a || a->tilt) && (!b || b->tilt);
  const bool analytic = route_ == AmplitudeRoute::analytic ||
                        (route_ == AmplitudeRoute::automatic && tilts && std::abs(ell) == 1);
  if (!analytic) return polar_amplitudes(a, b, ell);
  if (!tilts) throw DomainError("CoincidenceEngine: the analytic route needs tilt screens");
  const Eigen::Vector2d ka = a ? Eigen::Vector2d(*a->tilt * params_.w_p) : Eigen::Vector2d::Zero();
  const Eigen::Vector2d kb = b ? Eigen::Vector2d(*b->tilt * params_.w_p) : Eigen::Vector2d::Zero();
  return tilt_amplitudes(params_.alpha(), params_.beta(), params_.phase_matching, ka, kb, ell);
}

ScreenAmplitudes CoincidenceEngine::polar_amplitudes(const PhaseScreen* a, const PhaseScreen* b, int ell) const {
  const PolarKernel& k = kernel();
  const int nr = k.n_radial();
  const int na = k.n_angular();
  if (2 * std::abs(ell) >= na) throw DomainError("CoincidenceEngine: ell aliases on the angular grid");
  const double w0 = std::sqrt(params_.alpha());
  const double wp = params_.w_p;

  PolarSamples phase_a(nr, na), phase_b(nr, na), conj_plus(nr, na), conj_minus(nr, na);
  for (int i = 0; i < nr; ++i) {
    const double rho = k.radius()[i];
    const double radial = lg_radial(std::abs(ell), 0, w0, rho);
    for (int j = 0; j < na; ++j) {
      const double phi = k.angle(j);
      const double x = rho * wp * std::cos(phi), y = rho * wp * std::sin(phi);
      phase_a(i, j) = a ? std::polar(1.0, a->phase_at(x, y)) : 1.0;
      phase_b(i, j) = b ? std::polar(1.0, b->phase_at(x, y)) : 1.0;
      conj_plus(i, j) = std::polar(radial, -ell * phi);   // u*_ell
      conj_minus(i, j) = std::polar(radial, ell * phi);   // u*_{-ell}
    }
  }
  const std::complex<double> m1 = k.apply(conj_plus * phase_a, conj_minus * phase_b);
  const std::complex<double> m2 = k.apply(conj_minus * phase_a, conj_plus * phase_b);
  return {m1, m2, m1 - m2};
}

double coincidence_probability(const ScreenAmplitudes& amps, double s) {
  return (1.0 - s) * (std::norm(amps.m1) + std::norm(amps.m2)) + s * std::norm(amps.diff);
}

double coincidence_probability_realization(const CoincidenceEngine& engine, const PhaseScreen* a,
                                           const PhaseScreen* b, int ell, const SpectralParams& sp) {
  return coincidence_probability(engine.amplitudes(a, b, ell), spectral_factor(sp));
}

std::vector<std::size_t> plateau_indices(const std::vector<double>& dz, double spectral_width) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dz.size(); ++i)
    if (std::abs(spectral_factor({spectral_width, dz[i]})) < 0.05) out.push_back(i);
  return out;
}

double visibility(const DipCurve& curve, double spectral_width) {
  if (curve.dz.empty() || curve.dz.size() != curve.p.size()) throw DomainError("visibility: malformed dip curve");
  const auto plateau = plateau_indices(curve.dz, spectral_width);
  if (plateau.empty())
    throw DomainError("visibility: no dz point on the plateau (|sinc(4 pi W dz)| < 0.05); widen the dz scan");
  std::size_t centre = 0;
  for (std::size_t i = 1; i < curve.dz.size(); ++i)
    if (std::abs(curve.dz[i]) < std::abs(curve.dz[centre])) centre = i;
  double c_out = 0.0;
  for (auto i : plateau) c_out += curve.p[i];
  c_out /= static_cast<double>(plateau.size());
  const double c_in = curve.p[centre];
  if (!(c_out + c_in > 0.0)) throw DomainError("visibility: zero counts");
  return (c_out - c_in) / (c_out + c_in);
}

}  // namespace homdip
