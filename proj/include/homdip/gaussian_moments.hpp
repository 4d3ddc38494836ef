#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

#include "homdip/spdc.hpp"

namespace homdip {

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;
using Matrix8c = Eigen::Matrix<std::complex<double>, 8, 8>;
using Vector8c = Eigen::Matrix<std::complex<double>, 8, 1>;

/// Expands a particle-level coupling matrix (one row per transverse position
/// r1..r4) to the 8x8 quadratic form over x = (x1, y1, x2, y2, x3, y3, x4, y4),
/// i.e. Q8 = Qp (x) I2. The integrand weight is exp(-x^T Q8 x / 2 + b^T x).
Matrix8c assemble_q8(const Matrix4c& particle);

/// Inverse and normalisation of a complex symmetric Gaussian weight.
struct GaussianMoments {
  Matrix8c sigma;                      // Q8^{-1}
  Vector8c mean;                       // Q8^{-1} b
  std::complex<double> normalisation;  // int exp(-x^T Q8 x / 2 + b^T x) d^8x
};

/// Throws QuadratureError when cond(Q8) exceeds 1e12. The determinant branch
/// is taken from det(Qp), which is unambiguous because Q8 = Qp (x) I2.
GaussianMoments gaussian_moments(const Matrix4c& particle, const Vector8c& linear = Vector8c::Zero());

/// E[(L1.x)(L2.x)] and E[(L1.x)(L2.x)(L3.x)(L4.x)] under the normalised weight,
/// by Wick pairing around the mean.
std::complex<double> wick(const GaussianMoments& g, const Vector8c& l1, const Vector8c& l2);
std::complex<double> wick(const GaussianMoments& g, const Vector8c& l1, const Vector8c& l2, const Vector8c& l3,
                          const Vector8c& l4);

/// Per-realisation amplitudes for |ell| = 1 detection under tilt screens
/// theta_A = kA . r and theta_B = kB . r (k in units of 1/w_p):
///   m1 = int u*_ell(r1) u*_{-ell}(r2) e^{i theta_A(r1) + i theta_B(r2)} F,
///   m2 = same with the detection modes exchanged,
///   diff = m1 - m2 evaluated from the antisymmetric integrand directly.
/// Amplitudes are in units of w_p^2 with unit-norm modes and F(0,0) = pi/2
/// (sinc) or 1 (gaussian).
struct ScreenAmplitudes {
  std::complex<double> m1, m2, diff;
};
ScreenAmplitudes tilt_amplitudes(double alpha, double beta, PhaseMatching pm, const Eigen::Vector2d& k_a,
                                 const Eigen::Vector2d& k_b, int ell = 1, double rel_tol = 1e-11);

/// Ensemble-averaged probability levels for two-sided quadratic turbulence:
/// plateau = P(dz -> inf) and fill = P(dz = 0), so that
/// P(dz) = plateau (1 - s(dz)) + fill s(dz).
struct DipLevels {
  double plateau;
  double fill;
  double plateau_error;
  double fill_error;
};
DipLevels quadrature_levels(double alpha, double beta, double zeta, PhaseMatching pm, double rel_tol = 1e-9);

}  // namespace homdip
