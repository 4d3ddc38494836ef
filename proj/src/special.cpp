#include "homdip/special.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <string>

#include "homdip/error.hpp"

namespace homdip {

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

namespace {

// E1(i x) by modified Lentz evaluation of the continued fraction
// E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...))), good for |z| > 2.
std::complex<double> expint_e1_imag(double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const std::complex<double> z(0.0, x);
  std::complex<double> b = z + 1.0;
  std::complex<double> c = 1.0 / tiny;
  std::complex<double> d = 1.0 / b;
  std::complex<double> h = d;
  for (int i = 1; i < 100000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const std::complex<double> del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h * std::exp(-z);
}

}  // namespace

double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x == 0.0) return 0.0;
  if (x <= 4.0) {
    // sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
    double term = x;  // x^(2k+1)/(2k+1)!
    double sum = x;
    const double x2 = x * x;
    for (int k = 1; k < 60; ++k) {
      term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
      const double add = term / (2.0 * k + 1.0);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::numbers::pi / 2.0 + expint_e1_imag(x).imag();
}

namespace {

QuadratureRule reference_legendre(int order) {
  QuadratureRule rule{Eigen::VectorXd(order), Eigen::VectorXd(order)};
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      dp = order * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    // Recompute the derivative at the converged root.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 0; j < order; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
    }
    dp = order * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[order - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

const QuadratureRule& cached_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, reference_legendre(order)).first;
  return it->second;
}

}  // namespace

QuadratureRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
  QuadratureRule rule = cached_legendre(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  rule.nodes = (rule.nodes.array() * half + mid).matrix();
  rule.weights *= half;
  return rule;
}

Integral<std::complex<double>> integrate_gl_1d(const std::function<std::complex<double>(double)>& f,
                                               double a, double b, double rel_tol, int start_order,
                                               int max_order) {
  auto eval = [&](int order) {
    const QuadratureRule rule = gauss_legendre(order, a, b);
    std::complex<double> sum = 0.0;
    for (int i = 0; i < order; ++i) sum += rule.weights[i] * f(rule.nodes[i]);
    return sum;
  };
  int evaluations = start_order;
  double err = 0.0;
  std::complex<double> previous = eval(start_order);
  for (int order = 2 * start_order; order <= max_order; order *= 2) {
    const std::complex<double> current = eval(order);
    evaluations += order;
    err = std::abs(current - previous);
    if (err <= rel_tol * std::abs(current) || err < 1e-300) return {current, err, evaluations};
    previous = current;
  }
  throw QuadratureError("integrate_gl_1d did not converge by order " + std::to_string(max_order), err);
}

namespace {

// Every component within rel_tol of itself, plus a roundoff allowance of
// 1e-14 times the largest component.
bool components_converged(const Eigen::VectorXcd& current, const Eigen::VectorXcd& previous, double rel_tol,
                          double& max_err) {
  const Eigen::ArrayXd diff = (current - previous).cwiseAbs().array();
  const double roundoff = 1e-14 * current.cwiseAbs().maxCoeff() + 1e-300;
  max_err = diff.maxCoeff();
  return (diff <= rel_tol * current.cwiseAbs().array() + roundoff).all();
}

}  // namespace

Integral<Eigen::VectorXcd> integrate_gl_1d(const std::function<Eigen::VectorXcd(double)>& f, double a, double b,
                                           double rel_tol, int start_order, int max_order) {
  auto eval = [&](int order) {
    const QuadratureRule rule = gauss_legendre(order, a, b);
    Eigen::VectorXcd sum = f(rule.nodes[0]) * rule.weights[0];
    for (int i = 1; i < order; ++i) sum += f(rule.nodes[i]) * rule.weights[i];
    return sum;
  };
  int evaluations = start_order;
  Eigen::VectorXcd previous = eval(start_order);
  double err = 0.0;
  for (int order = 2 * start_order; order <= max_order; order *= 2) {
    Eigen::VectorXcd current = eval(order);
    evaluations += order;
    if (components_converged(current, previous, rel_tol, err)) return {current, err, evaluations};
    previous = std::move(current);
  }
  throw QuadratureError("integrate_gl_1d did not converge by order " + std::to_string(max_order), err);
}

Integral<Eigen::VectorXcd> integrate_gl_2d(const std::function<Eigen::VectorXcd(double, double)>& f,
                                           double a, double b, double rel_tol, int start_order,
                                           int max_order) {
  auto eval = [&](int order) {
    const QuadratureRule rule = gauss_legendre(order, a, b);
    Eigen::VectorXcd sum;
    for (int i = 0; i < order; ++i) {
      for (int j = 0; j < order; ++j) {
        Eigen::VectorXcd v = f(rule.nodes[i], rule.nodes[j]) * (rule.weights[i] * rule.weights[j]);
        if (sum.size() == 0)
          sum = std::move(v);
        else
          sum += v;
      }
    }
    return sum;
  };
  int evaluations = start_order * start_order;
  Eigen::VectorXcd previous = eval(start_order);
  double last_err = 0.0;
  for (int order = 2 * start_order; order <= max_order; order *= 2) {
    Eigen::VectorXcd current = eval(order);
    evaluations += order * order;
    if (components_converged(current, previous, rel_tol, last_err)) return {current, last_err, evaluations};
    previous = std::move(current);
  }
  throw QuadratureError("integrate_gl_2d did not converge by order " + std::to_string(max_order), last_err);
}

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

Integral<double> integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, int max_intervals) {
  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  heap.push(first);
  double total = first.value;
  double total_err = first.error;
  int evaluations = 15;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (static_cast<int>(heap.size()) >= max_intervals)
      throw QuadratureError("integrate_adaptive exceeded interval budget", total_err);
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gk15(f, worst.a, mid);
    const Segment right = gk15(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, evaluations};
}

}  // namespace homdip
