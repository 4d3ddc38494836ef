#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <utility>

namespace homdip {

/// Sine integral Si(x) = int_0^x sin(t)/t dt.
double sine_integral(double x);

/// sin(x)/x with the removable singularity filled in.
double sinc(double x);

/// Gauss-Legendre nodes and weights on [a, b].
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
QuadratureRule gauss_legendre(int order, double a = -1.0, double b = 1.0);

/// Result of a numerical integral with its error estimate.
template <typename T>
struct Integral {
  T value;
  double error;
  int evaluations;
};

/// Tensor Gauss-Legendre on [a,b], doubling the order until two successive
/// estimates agree to rel_tol (relative to `scale` when scale > 0).
/// Throws QuadratureError when max_order is reached first.
Integral<std::complex<double>> integrate_gl_1d(const std::function<std::complex<double>(double)>& f,
                                               double a, double b, double rel_tol, int start_order = 16,
                                               int max_order = 1024);

/// Vector-valued variant with the per-component rule of integrate_gl_2d.
Integral<Eigen::VectorXcd> integrate_gl_1d(const std::function<Eigen::VectorXcd(double)>& f, double a, double b,
                                           double rel_tol, int start_order = 16, int max_order = 1024);

/// Same on [a,b]^2 with a vector-valued integrand. Every component must meet
/// rel_tol against its own magnitude, up to a roundoff allowance of 1e-14
/// times the largest component.
Integral<Eigen::VectorXcd> integrate_gl_2d(const std::function<Eigen::VectorXcd(double, double)>& f,
                                           double a, double b, double rel_tol, int start_order = 16,
                                           int max_order = 512);

/// Adaptive Gauss-Kronrod (7/15) on [a,b] for real integrands.
Integral<double> integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, int max_intervals = 2000);

}  // namespace homdip
