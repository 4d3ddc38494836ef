#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homdip/error.hpp"
#include "homdip/fieldgrid.hpp"
#include "homdip/polar.hpp"
#include "homdip/special.hpp"
#include "homdip/spdc.hpp"

using namespace homdip;

namespace {

// Fourier-domain oracle for the relative-coordinate factor. The phase-matching
// term sinc(beta |q|^2 / 2) is written as (1/2) int_{-1}^{1} exp(i beta q^2 xi / 2)
// dxi; with a Gaussian regulator exp(-eps q^2) the q-integral is elementary
// and leaves a smooth 1-D integral over xi. Returns the value divided by the
// transform's constant pi / (beta/2).
double relative_factor_oracle(double d2, double beta, double eps) {
  const double b = 0.5 * beta;
  auto part = [&](bool imag) {
    return [=](double xi) {
      const std::complex<double> den(eps, -b * xi);
      const std::complex<double> v = 0.5 * std::numbers::pi / den * std::exp(-d2 / (4.0 * den));
      return imag ? v.imag() : v.real();
    };
  };
  const double re = integrate_adaptive(part(false), -1.0, 1.0, 1e-13, 1e-11, 20000).value;
  return re * b / std::numbers::pi;
}

// Closed-form projection of the double-Gaussian state onto u_l (x) u_{-l}
// (lengths in units of w_p): geometric in l.
double gaussian_alpha(int ell, double alpha, double beta) {
  const double w02 = alpha;
  const double a = 0.25 + 0.5 / beta + 1.0 / w02;
  const double b = 0.25 - 0.5 / beta;
  return 2.0 * std::numbers::pi / w02 * std::pow(-2.0 * b / w02, ell) / std::pow(a * a - b * b, ell + 1);
}

}  // namespace

TEST_CASE("crystal ratio") {
  SpdcParams p;
  p.lambda_pump = 355e-9;
  p.w_p = 58.9e-6;
  p.crystal_len = 3e-3;
  p.n_o = 1.77;
  CHECK(crystal_ratio(p) == doctest::Approx(0.173).epsilon(1e-3 / 0.173));
  // Back-solved index from the published ratio.
  CHECK(0.173 * std::numbers::pi * p.w_p * p.w_p / (p.crystal_len * p.lambda_pump) == doctest::Approx(1.77).epsilon(1e-2));
  SpdcParams q = p;
  q.w_p *= 2;
  CHECK(crystal_ratio(q) == doctest::Approx(crystal_ratio(p) / 4));
  q = p;
  q.crystal_len = 1e-12;
  CHECK(crystal_ratio(q) < 1e-9);
  q.crystal_len = 0.0;
  CHECK_THROWS_AS(crystal_ratio(q), DomainError);
  const SpdcParams r = SpdcParams::from_ratios(4.19, 0.173);
  CHECK(r.alpha() == doctest::Approx(4.19));
  CHECK(r.beta() == doctest::Approx(0.173));
}

TEST_CASE("biphoton amplitude symmetry and pump envelope") {
  const SpdcParams p = SpdcParams::from_ratios(4.19, 0.173);
  const BiphotonAmplitude f(p);
  const Eigen::Vector2d r1(20e-6, -5e-6), r2(-7e-6, 31e-6);
  CHECK(f(r1, r2) == f(r2, r1));
  CHECK(f(r1, r1) / f(Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()) ==
        doctest::Approx(std::exp(-r1.squaredNorm() / (p.w_p * p.w_p))));
  const double dphi = std::atan2(r2.y(), r2.x()) - std::atan2(r1.y(), r1.x());
  CHECK(f.polar(r1.norm(), r2.norm(), dphi) == doctest::Approx(f(r1, r2)).epsilon(1e-12));
}

TEST_CASE("relative factor matches the Fourier-domain definition") {
  const double beta = 0.173;
  for (double d2 : {0.05, 0.3, 1.0, 2.5}) {
    const double closed = relative_kernel(d2 / (2.0 * beta), PhaseMatching::sinc);
    const double oracle = relative_factor_oracle(d2, beta, 1e-7);
    CAPTURE(d2);
    CHECK(closed == doctest::Approx(oracle).epsilon(1e-3));
  }
}

TEST_CASE("small-beta expansions differ between phase-matching models") {
  const double k2 = 1.0;
  auto slope = [&](auto f) { return std::log(f(1e-3) / f(1e-4)) / std::log(10.0); };
  CHECK(slope([&](double b) { return 1.0 - sinc(b * k2); }) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(slope([&](double b) { return 1.0 - std::exp(-b * k2); }) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("Gaussian-model modal coefficients follow the closed-form geometric spectrum") {
  const double alpha = 4.19, beta = 0.173;
  const SpdcParams p = SpdcParams::from_ratios(alpha, beta, 58.9e-6, PhaseMatching::gaussian);
  const ModalCoefficients m = modal_coefficients(p, 10);
  double norm = 0.0;
  for (int l = 0; l <= 10; ++l) norm += (l == 0 ? 1.0 : 2.0) * std::pow(gaussian_alpha(l, alpha, beta), 2);
  for (int l = 0; l <= 10; ++l) {
    CAPTURE(l);
    CHECK(std::abs(m.alpha[l].imag()) < 1e-12);
    CHECK(m.alpha[l].real() == doctest::Approx(gaussian_alpha(l, alpha, beta) / std::sqrt(norm)).epsilon(1e-6));
    if (l > 0) CHECK(std::abs(m.alpha[l]) < std::abs(m.alpha[l - 1]));
  }
  CHECK(m.tail_mass < 1e-3);
}

TEST_CASE("sinc-model modal coefficients are real, positive and normalised") {
  const SpdcParams p = SpdcParams::from_ratios(4.19, 0.173);
  const ModalCoefficients m = modal_coefficients(p, 10);
  double total = 0.0;
  for (int l = 0; l <= 10; ++l) {
    total += (l == 0 ? 1.0 : 2.0) * std::norm(m.alpha[l]);
    CHECK(m.alpha[l].real() > 0.0);
    CHECK(std::abs(m.alpha[l].imag()) < 1e-12);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.tail_mass < 1e-3);
  CHECK_THROWS_AS(modal_coefficients(p, 0), DomainError);
}

TEST_CASE("modal coefficients are invariant to the overall length scale") {
  const ModalCoefficients a = modal_coefficients(SpdcParams::from_ratios(4.19, 0.173, 58.9e-6), 4);
  const ModalCoefficients b = modal_coefficients(SpdcParams::from_ratios(4.19, 0.173, 3e-3), 4);
  for (int l = 0; l <= 4; ++l) CHECK(std::abs(a.alpha[l] - b.alpha[l]) < 1e-12);
}

TEST_CASE("antisymmetric projection of F vanishes") {
  const SpdcParams p = SpdcParams::from_ratios(4.19, 0.173);
  const PolarKernel k(p);
  const double w0 = std::sqrt(p.alpha());
  for (int ell : {1, 2, 3}) {
    PolarSamples plus(k.n_radial(), k.n_angular()), minus(k.n_radial(), k.n_angular());
    for (int i = 0; i < k.n_radial(); ++i)
      for (int j = 0; j < k.n_angular(); ++j) {
        const double r = lg_radial(ell, 0, w0, k.radius()[i]);
        plus(i, j) = std::polar(r, -ell * k.angle(j));
        minus(i, j) = std::polar(r, ell * k.angle(j));
      }
    const auto sym = k.apply(plus, minus);
    const auto anti = sym - k.apply(minus, plus);
    CAPTURE(ell);
    CHECK(std::abs(anti) < 1e-9 * std::abs(sym));
  }
}
