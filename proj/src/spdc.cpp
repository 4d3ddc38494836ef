#include "homdip/spdc.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "homdip/error.hpp"
#include "homdip/fieldgrid.hpp"
#include "homdip/polar.hpp"
#include "homdip/special.hpp"

namespace homdip {

std::string to_string(PhaseMatching pm) { return pm == PhaseMatching::sinc ? "sinc" : "gaussian"; }

PhaseMatching phase_matching_from_string(const std::string& s) {
  if (s == "sinc") return PhaseMatching::sinc;
  if (s == "gaussian") return PhaseMatching::gaussian;
  throw ConfigError("unknown phase matching '" + s + "' (expected sinc or gaussian)");
}

double SpdcParams::beta() const { return n_o * crystal_len * lambda_pump / (std::numbers::pi * w_p * w_p); }

double SpdcParams::alpha() const { return (detection_waist / w_p) * (detection_waist / w_p); }

void SpdcParams::validate() const {
  if (!(lambda_pump > 0.0)) throw DomainError("lambda_pump must be positive");
  if (!(w_p > 0.0)) throw DomainError("w_p must be positive");
  if (!(crystal_len > 0.0)) throw DomainError("crystal_len must be positive");
  if (!(n_o > 0.0)) throw DomainError("n_o must be positive");
  if (!(detection_waist > 0.0)) throw DomainError("detection_waist must be positive");
}

SpdcParams SpdcParams::from_ratios(double alpha, double beta, double w_p, PhaseMatching pm) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("from_ratios: alpha and beta must be positive");
  SpdcParams p;
  p.w_p = w_p;
  p.detection_waist = std::sqrt(alpha) * w_p;
  p.crystal_len = beta * std::numbers::pi * w_p * w_p / (p.n_o * p.lambda_pump);
  p.phase_matching = pm;
  return p;
}

double crystal_ratio(const SpdcParams& params) {
  params.validate();
  return params.beta();
}

double relative_kernel(double a, PhaseMatching pm) {
  if (pm == PhaseMatching::gaussian) return std::exp(-a);
  return 0.5 * std::numbers::pi - sine_integral(a);
}

BiphotonAmplitude::BiphotonAmplitude(const SpdcParams& params) : params_(params), beta_(params.beta()) {
  params_.validate();
}

double BiphotonAmplitude::operator()(const Eigen::Vector2d& r1, const Eigen::Vector2d& r2) const {
  const double wp2 = params_.w_p * params_.w_p;
  const double s2 = (r1 + r2).squaredNorm();
  const double d2 = (r1 - r2).squaredNorm();
  return std::exp(-s2 / (4.0 * wp2)) * relative_kernel(d2 / (2.0 * beta_ * wp2), params_.phase_matching);
}

double BiphotonAmplitude::polar(double rho1, double rho2, double dphi) const {
  const double wp2 = params_.w_p * params_.w_p;
  const double c = 2.0 * rho1 * rho2 * std::cos(dphi);
  const double sum = rho1 * rho1 + rho2 * rho2;
  return std::exp(-(sum + c) / (4.0 * wp2)) * relative_kernel((sum - c) / (2.0 * beta_ * wp2), params_.phase_matching);
}

ModalCoefficients modal_coefficients(const SpdcParams& params, int ell_max) {
  // The high-ell projections pick up the oscillating tail of the sinc kernel
  // at large |r1 - r2|, which needs a finer radial rule than the amplitudes.
  return modal_coefficients(params, ell_max, PolarKernelOptions{192, 256, 4.0});
}

ModalCoefficients modal_coefficients(const SpdcParams& params, int ell_max, const PolarKernelOptions& options) {
  if (ell_max < 1) throw DomainError("modal_coefficients: ell_max must be >= 1");
  if (2 * ell_max >= options.n_angular) throw DomainError("modal_coefficients: n_angular too small for ell_max");
  const PolarKernel kernel(params, options);
  const double w0 = std::sqrt(params.alpha());

  ModalCoefficients out;
  double total = 0.0;
  for (int ell = 0; ell <= ell_max; ++ell) {
    Eigen::VectorXd radial(kernel.n_radial());
    for (int i = 0; i < kernel.n_radial(); ++i) radial[i] = lg_radial(ell, 0, w0, kernel.radius()[i]);
    // <u_ell (x) u_{-ell}, F>: conjugated modes carry e^{-i ell phi1} e^{+i ell phi2}.
    const std::complex<double> a = kernel.apply_harmonic(radial, -ell, radial, ell);
    out.alpha.push_back(a);
    total += (ell == 0 ? 1.0 : 2.0) * std::norm(a);
  }
  if (!(total > 0.0)) throw QuadratureError("modal_coefficients: vanishing projection", 0.0);
  const double scale = 1.0 / std::sqrt(total);
  for (auto& a : out.alpha) a *= scale;

  const double last = std::norm(out.alpha[ell_max]);
  const double prev = std::norm(out.alpha[ell_max - 1]);
  const double q = prev > 0.0 ? last / prev : 0.0;
  out.tail_mass = q < 1.0 ? last * q / (1.0 - q) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace homdip
