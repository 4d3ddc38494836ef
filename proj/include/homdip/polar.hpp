#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "homdip/spdc.hpp"

namespace homdip {

struct PolarKernelOptions {
  int n_radial = 96;
  int n_angular = 256;
  /// Outer radius in units of the detection waist.
  double radius_in_waists = 4.0;
};

/// Samples of a transverse function on the polar nodes of a PolarKernel,
/// rows = radial nodes, columns = angular nodes.
using PolarSamples = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Discretisation of the bilinear form
///   M(a, b) = int int a(r1) F(r1, r2) b(r2) d^2r1 d^2r2
/// on a polar product grid: Gauss-Legendre in radius, uniform in angle.
///
/// F depends on the angles only through their difference, so the angular
/// double sum is diagonal in the discrete Fourier index and costs
/// n_radial^2 * n_angular per evaluation. All lengths are in units of w_p.
class PolarKernel {
 public:
  PolarKernel(const SpdcParams& params, const PolarKernelOptions& options = {});

  int n_radial() const { return static_cast<int>(radius_.size()); }
  int n_angular() const { return n_angular_; }
  const Eigen::VectorXd& radius() const { return radius_; }
  double angle(int j) const;

  /// Bilinear form on sampled functions (shape n_radial x n_angular).
  std::complex<double> apply(const PolarSamples& a, const PolarSamples& b) const;

  /// Bilinear form for a(r) = A(rho) e^{i m_a phi}, b(r) = B(rho) e^{i m_b phi};
  /// zero unless m_a = -m_b.
  std::complex<double> apply_harmonic(const Eigen::VectorXd& a_radial, int m_a, const Eigen::VectorXd& b_radial,
                                      int m_b) const;

 private:
  const Eigen::MatrixXd& block(int m) const;
  Eigen::MatrixXcd angular_dft(const PolarSamples& s) const;

  Eigen::VectorXd radius_;
  int n_angular_;
  // blocks_[m] = (2 pi / N)^2 / N * diag(W) Fhat_m diag(W), m = 0..N/2.
  std::vector<Eigen::MatrixXd> blocks_;
};

}  // namespace homdip
