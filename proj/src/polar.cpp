#include "homdip/polar.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>

#include "homdip/error.hpp"
#include "homdip/special.hpp"

namespace homdip {

PolarKernel::PolarKernel(const SpdcParams& params, const PolarKernelOptions& options) : n_angular_(options.n_angular) {
  params.validate();
  if (options.n_radial < 8) throw DomainError("PolarKernel: n_radial must be >= 8");
  if (options.n_angular < 8 || options.n_angular % 2 != 0) throw DomainError("PolarKernel: n_angular must be even, >= 8");
  if (!(options.radius_in_waists > 0.0)) throw DomainError("PolarKernel: radius_in_waists must be positive");

  // Work in units of w_p.
  SpdcParams unit = params;
  unit.detection_waist = params.detection_waist / params.w_p;
  unit.w_p = 1.0;
  unit.crystal_len = params.beta() * std::numbers::pi / (unit.n_o * unit.lambda_pump);
  const BiphotonAmplitude f(unit);

  const int nr = options.n_radial;
  const int na = n_angular_;
  const QuadratureRule rule = gauss_legendre(nr, 0.0, options.radius_in_waists * unit.detection_waist);
  radius_ = rule.nodes;
  const Eigen::VectorXd w = rule.weights.cwiseProduct(rule.nodes);

  const int half = na / 2;
  blocks_.assign(half + 1, Eigen::MatrixXd::Zero(nr, nr));
  const double scale = std::pow(2.0 * std::numbers::pi / na, 2) / na;

  Eigen::FFT<double> fft;
  std::vector<double> samples(na);
  std::vector<std::complex<double>> spectrum;
  for (int i = 0; i < nr; ++i) {
    for (int k = i; k < nr; ++k) {
      for (int j = 0; j < na; ++j) samples[j] = f.polar(radius_[i], radius_[k], angle(j));
      fft.fwd(spectrum, samples);
      for (int m = 0; m <= half; ++m) {
        const double v = scale * w[i] * w[k] * spectrum[m].real();
        blocks_[m](i, k) = v;
        blocks_[m](k, i) = v;
      }
    }
  }
}

double PolarKernel::angle(int j) const { return 2.0 * std::numbers::pi * j / n_angular_; }

const Eigen::MatrixXd& PolarKernel::block(int m) const {
  m = ((m % n_angular_) + n_angular_) % n_angular_;
  return blocks_[m <= n_angular_ / 2 ? m : n_angular_ - m];
}

Eigen::MatrixXcd PolarKernel::angular_dft(const PolarSamples& s) const {
  if (s.rows() != n_radial() || s.cols() != n_angular_) throw GridError("PolarKernel: sample shape mismatch");
  Eigen::FFT<double> fft;
  Eigen::MatrixXcd out(n_radial(), n_angular_);
  Eigen::VectorXcd in(n_angular_), row(n_angular_);
  for (int i = 0; i < n_radial(); ++i) {
    in = s.row(i).transpose();
    fft.fwd(row, in);
    out.row(i) = row.transpose();
  }
  return out;
}

std::complex<double> PolarKernel::apply(const PolarSamples& a, const PolarSamples& b) const {
  const Eigen::MatrixXcd ah = angular_dft(a);
  const Eigen::MatrixXcd bh = angular_dft(b);
  std::complex<double> total = 0.0;
  for (int m = 0; m < n_angular_; ++m) {
    const int neg = (n_angular_ - m) % n_angular_;
    const Eigen::VectorXcd kb = block(m) * bh.col(m);
    total += ah.col(neg).cwiseProduct(kb).sum();
  }
  return total;
}

std::complex<double> PolarKernel::apply_harmonic(const Eigen::VectorXd& a_radial, int m_a,
                                                 const Eigen::VectorXd& b_radial, int m_b) const {
  if (a_radial.size() != n_radial() || b_radial.size() != n_radial())
    throw GridError("PolarKernel: radial sample size mismatch");
  if (2 * std::abs(m_a) >= n_angular_ || 2 * std::abs(m_b) >= n_angular_)
    throw DomainError("PolarKernel: harmonic index aliases on the angular grid");
  if (m_a != -m_b) return 0.0;
  const double n = n_angular_;
  return n * n * a_radial.dot(block(m_b) * b_radial);
}

}  // namespace homdip
