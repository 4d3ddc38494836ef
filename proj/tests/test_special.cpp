#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homdip/error.hpp"
#include "homdip/special.hpp"

using namespace homdip;

TEST_CASE("sine integral matches reference values on both sides of the series cutoff") {
  // Reference values from an independent implementation (Cephes sici).
  const std::pair<double, double> ref[] = {
      {0.5, 0.49310741804306674}, {1.0, 0.9460830703671831}, {2.0, 1.605412976802695},
      {3.9, 1.7765013604478055},  {4.1, 1.7387436264917688}, {5.0, 1.549931244944674},
      {10.0, 1.658347594218874},  {20.0, 1.5482417010434397}, {50.0, 1.551617072485936},
      {200.0, 1.5683823393394698}};
  for (const auto& [x, si] : ref) {
    CAPTURE(x);
    CHECK(sine_integral(x) == doctest::Approx(si).epsilon(1e-13));
    CHECK(sine_integral(-x) == doctest::Approx(-si).epsilon(1e-13));
  }
  CHECK(sine_integral(0.0) == 0.0);
  CHECK(sine_integral(1e6) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-6));
}

TEST_CASE("sine integral agrees with adaptive quadrature of sin(t)/t") {
  for (double x : {0.3, 3.0, 4.0, 7.5, 31.0}) {
    const auto r = integrate_adaptive([](double t) { return sinc(t); }, 0.0, x, 1e-14, 1e-13);
    CAPTURE(x);
    CHECK(sine_integral(x) == doctest::Approx(r.value).epsilon(1e-12));
  }
}

TEST_CASE("sinc handles the removable singularity") {
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinc(1e-10) == doctest::Approx(1.0));
  CHECK(sinc(std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  for (int order : {2, 5, 16, 64, 200}) {
    const QuadratureRule r = gauss_legendre(order, -1.0, 3.0);
    const int degree = 2 * order - 1;
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += r.weights[i] * std::pow(r.nodes[i], std::min(degree, 9));
    const int k = std::min(degree, 9);
    const double exact = (std::pow(3.0, k + 1) - std::pow(-1.0, k + 1)) / (k + 1);
    CAPTURE(order);
    CHECK(s == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("order-doubling integrators converge or report their error") {
  const auto r1 = integrate_gl_1d([](double x) { return std::complex<double>(std::exp(x), std::sin(x)); }, 0.0, 1.0,
                                  1e-12);
  CHECK(r1.value.real() == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  CHECK(r1.value.imag() == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-12));

  const auto r2 = integrate_gl_2d(
      [](double x, double y) {
        Eigen::VectorXcd v(2);
        v << x * x * y * y, 1e-9 * std::cos(x + y);
        return v;
      },
      -1.0, 1.0, 1e-10);
  CHECK(r2.value[0].real() == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(r2.value[1].real() == doctest::Approx(1e-9 * 4.0 * std::sin(1.0) * std::sin(1.0)).epsilon(1e-8));

  CHECK_THROWS_AS(integrate_gl_1d([](double x) { return std::complex<double>(std::sin(1.0 / (x + 1e-9))); }, 0.0,
                                  1.0, 1e-12, 16, 64),
                  QuadratureError);
}

TEST_CASE("adaptive Gauss-Kronrod handles a peaked integrand") {
  const auto r = integrate_adaptive([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, 1e-12, 1e-12);
  CHECK(r.value == doctest::Approx(2.0 / 1e-2 * std::atan(1.0 / 1e-2)).epsilon(1e-10));
}
