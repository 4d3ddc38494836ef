#include "homdip/gaussian_moments.hpp"

#include <cmath>
#include <numbers>

#include "homdip/error.hpp"
#include "homdip/special.hpp"

namespace homdip {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};
constexpr double kMaxCondition = 1e12;

template <int P>
using ParticleMatrix = Eigen::Matrix<cd, P, P>;
template <int P>
using FullMatrix = Eigen::Matrix<cd, 2 * P, 2 * P>;
template <int P>
using FullVector = Eigen::Matrix<cd, 2 * P, 1>;

template <int P>
FullMatrix<P> expand(const ParticleMatrix<P>& qp) {
  FullMatrix<P> q = FullMatrix<P>::Zero();
  for (int a = 0; a < P; ++a)
    for (int b = 0; b < P; ++b) {
      q(2 * a, 2 * b) = qp(a, b);
      q(2 * a + 1, 2 * b + 1) = qp(a, b);
    }
  return q;
}

template <int P>
struct Moments {
  FullMatrix<P> sigma;
  FullVector<P> mean;
  cd normalisation;
};

template <int P>
Moments<P> moments(const ParticleMatrix<P>& qp, const FullVector<P>& b) {
  const FullMatrix<P> q = expand<P>(qp);
  const Eigen::PartialPivLU<FullMatrix<P>> lu(q);
  const double rcond = lu.rcond();
  if (!(rcond * kMaxCondition >= 1.0))
    throw QuadratureError("Gaussian moment matrix is ill-conditioned (cond ~ " + std::to_string(1.0 / rcond) + ")",
                          1.0 / rcond);
  Moments<P> m;
  m.sigma = lu.inverse();
  m.mean = m.sigma * b;
  const cd det_p = Eigen::PartialPivLU<ParticleMatrix<P>>(qp).determinant();
  const cd exponent = 0.5 * (b.transpose() * m.mean)(0, 0);
  m.normalisation = std::pow(2.0 * std::numbers::pi, P) / det_p * std::exp(exponent);
  return m;
}

template <int P>
cd wick2(const Moments<P>& g, const FullVector<P>& l1, const FullVector<P>& l2) {
  const cd m1 = l1.transpose() * g.mean;
  const cd m2 = l2.transpose() * g.mean;
  const cd s12 = l1.transpose() * g.sigma * l2;
  return m1 * m2 + s12;
}

template <int P>
cd wick4(const Moments<P>& g, const std::array<FullVector<P>, 4>& l) {
  std::array<cd, 4> m;
  for (int a = 0; a < 4; ++a) m[a] = l[a].transpose() * g.mean;
  auto s = [&](int a, int b) -> cd { return l[a].transpose() * g.sigma * l[b]; };
  const cd s01 = s(0, 1), s02 = s(0, 2), s03 = s(0, 3), s12 = s(1, 2), s13 = s(1, 3), s23 = s(2, 3);
  return m[0] * m[1] * m[2] * m[3] + s01 * m[2] * m[3] + s02 * m[1] * m[3] + s03 * m[1] * m[2] +
         s12 * m[0] * m[3] + s13 * m[0] * m[2] + s23 * m[0] * m[1] + s01 * s23 + s02 * s13 + s03 * s12;
}

// Linear form x_coeff * x_k + y_coeff * y_k.
template <int P>
FullVector<P> form(int k, cd x_coeff, cd y_coeff) {
  FullVector<P> v = FullVector<P>::Zero();
  v[2 * k] = x_coeff;
  v[2 * k + 1] = y_coeff;
  return v;
}

// Unit-norm |ell| = 1, p = 0 mode constant with w0^2 = alpha (lengths in w_p).
double mode_constant(double alpha) { return 2.0 / (std::sqrt(std::numbers::pi) * alpha); }

// Chirp coefficient of the relative coordinate at auxiliary node xi.
cd relative_coupling(PhaseMatching pm, double beta, double xi, bool conjugate) {
  if (pm == PhaseMatching::gaussian) return 1.0 / beta;
  return (conjugate ? -kI : kI) / (xi * beta);
}

}  // namespace

Matrix8c assemble_q8(const Matrix4c& particle) { return expand<4>(particle); }

GaussianMoments gaussian_moments(const Matrix4c& particle, const Vector8c& linear) {
  const Moments<4> m = moments<4>(particle, linear);
  return {m.sigma, m.mean, m.normalisation};
}

std::complex<double> wick(const GaussianMoments& g, const Vector8c& l1, const Vector8c& l2) {
  return wick2<4>(Moments<4>{g.sigma, g.mean, g.normalisation}, l1, l2);
}

std::complex<double> wick(const GaussianMoments& g, const Vector8c& l1, const Vector8c& l2, const Vector8c& l3,
                          const Vector8c& l4) {
  return wick4<4>(Moments<4>{g.sigma, g.mean, g.normalisation}, {l1, l2, l3, l4});
}

ScreenAmplitudes tilt_amplitudes(double alpha, double beta, PhaseMatching pm, const Eigen::Vector2d& k_a,
                                 const Eigen::Vector2d& k_b, int ell, double rel_tol) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("tilt_amplitudes: alpha and beta must be positive");
  if (std::abs(ell) != 1) throw DomainError("tilt_amplitudes: only |ell| = 1 is available in closed form");

  FullVector<2> b;
  b << kI * k_a.x(), kI * k_a.y(), kI * k_b.x(), kI * k_b.y();
  // u*_1(r1) u*_{-1}(r2) ~ (x1 - i y1)(x2 + i y2) and the exchanged pair.
  const FullVector<2> p1 = form<2>(0, 1.0, -kI), p2 = form<2>(1, 1.0, kI);
  const FullVector<2> q1 = form<2>(0, 1.0, kI), q2 = form<2>(1, 1.0, -kI);
  const FullVector<2> x1 = form<2>(0, 1.0, 0.0), y1 = form<2>(0, 0.0, 1.0);
  const FullVector<2> x2 = form<2>(1, 1.0, 0.0), y2 = form<2>(1, 0.0, 1.0);

  auto at = [&](double xi) {
    ParticleMatrix<2> qp;
    const cd c = relative_coupling(pm, beta, xi, false);
    const double d = 2.0 / alpha;
    qp << d + 0.5 + c, 0.5 - c, 0.5 - c, d + 0.5 + c;
    const Moments<2> g = moments<2>(qp, b);
    Eigen::VectorXcd v(3);
    v << g.normalisation * wick2<2>(g, p1, p2), g.normalisation * wick2<2>(g, q1, q2),
        g.normalisation * 2.0 * kI * (wick2<2>(g, x1, y2) - wick2<2>(g, y1, x2));
    return v;
  };

  Eigen::VectorXcd v;
  if (pm == PhaseMatching::gaussian) {
    v = at(0.0);
  } else {
    // F = (i/2) int_{-1}^{1} dxi / xi exp(-i |r1 - r2|^2 / (2 xi beta)) exp(-|r1 + r2|^2 / 4).
    const std::function<Eigen::VectorXcd(double)> f = [&](double xi) -> Eigen::VectorXcd {
      return at(xi) * (0.5 * kI / xi);
    };
    v = integrate_gl_1d(f, -1.0, 1.0, rel_tol, 32, 2048).value;
  }
  const double n2 = mode_constant(alpha) * mode_constant(alpha);
  ScreenAmplitudes out{n2 * v[0], n2 * v[1], n2 * v[2]};
  if (ell == -1) out = {out.m2, out.m1, -out.diff};
  return out;
}

DipLevels quadrature_levels(double alpha, double beta, double zeta, PhaseMatching pm, double rel_tol) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("quadrature_levels: alpha and beta must be positive");
  if (!(zeta >= 0.0)) throw DomainError("quadrature_levels: zeta must be >= 0");

  // Particles r1, r2 carry F, r3, r4 carry F*; |ell| = 1 detection on both.
  const std::array<FullVector<4>, 4> plateau_forms = {form<4>(0, 1.0, -kI), form<4>(1, 1.0, kI),
                                                      form<4>(2, 1.0, kI), form<4>(3, 1.0, -kI)};
  const std::array<FullVector<4>, 4> fill_a = {form<4>(0, 1.0, 0.0), form<4>(1, 0.0, 1.0), plateau_forms[2],
                                               plateau_forms[3]};
  const std::array<FullVector<4>, 4> fill_b = {form<4>(0, 0.0, 1.0), form<4>(1, 1.0, 0.0), plateau_forms[2],
                                               plateau_forms[3]};
  const double d = 2.0 / alpha;

  auto at = [&](double xi, double xi_c) {
    const cd c = relative_coupling(pm, beta, xi, false);
    const cd cc = relative_coupling(pm, beta, xi_c, true);
    Matrix4c qp = Matrix4c::Identity() * d;
    // w (e_a - e_b)(e_a - e_b)^T and w (e_a + e_b)(e_a + e_b)^T.
    auto add = [&](int a, int b, cd w) {
      qp(a, a) += w;
      qp(b, b) += w;
      qp(a, b) -= w;
      qp(b, a) -= w;
    };
    auto add_sum = [&](int a, int b, cd w) {
      qp(a, a) += w;
      qp(b, b) += w;
      qp(a, b) += w;
      qp(b, a) += w;
    };
    add_sum(0, 1, 0.5);
    add_sum(2, 3, 0.5);
    add(0, 1, c);
    add(2, 3, cc);
    add(0, 2, zeta);
    add(1, 3, zeta);
    const Moments<4> g = moments<4>(qp, FullVector<4>::Zero());
    Eigen::VectorXcd v(2);
    v << g.normalisation * wick4<4>(g, plateau_forms),
        g.normalisation * 2.0 * kI * (wick4<4>(g, fill_a) - wick4<4>(g, fill_b));
    return v;
  };

  const double n = mode_constant(alpha);
  const double scale = 2.0 * std::pow(n, 4);
  if (pm == PhaseMatching::gaussian) {
    const Eigen::VectorXcd v = at(0.0, 0.0) * scale;
    return {v[0].real(), v[1].real(), 0.0, 0.0};
  }
  // (i/2)(-i/2) = 1/4 from the two auxiliary representations.
  const auto r = integrate_gl_2d(
      [&](double xi, double xi_c) -> Eigen::VectorXcd { return at(xi, xi_c) * (0.25 / (xi * xi_c)); }, -1.0, 1.0,
      rel_tol, 32, 1024);
  const Eigen::VectorXcd v = r.value * scale;
  return {v[0].real(), v[1].real(), r.error * scale, r.error * scale};
}

}  // namespace homdip
