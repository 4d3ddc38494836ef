#include "homdip/turbulence.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "homdip/error.hpp"

namespace homdip {

std::string to_string(ScreenModel m) { return m == ScreenModel::kolmogorov ? "kolmogorov" : "quadratic"; }

ScreenModel screen_model_from_string(const std::string& s) {
  if (s == "kolmogorov") return ScreenModel::kolmogorov;
  if (s == "quadratic") return ScreenModel::quadratic;
  throw ConfigError("unknown screen model '" + s + "' (expected kolmogorov or quadratic)");
}

double TurbulenceParams::r0() const {
  return strength_w > 0.0 ? w_p / strength_w : std::numeric_limits<double>::infinity();
}

void TurbulenceParams::validate() const {
  if (!(strength_w >= 0.0) || !std::isfinite(strength_w)) throw DomainError("strength_w must be >= 0");
  if (!(w_p > 0.0)) throw DomainError("pump waist w_p must be positive");
}

PhaseScreen PhaseScreen::zero(const Grid2D& g, ScreenModel model) {
  PhaseScreen s{g, RealArray<double>::Zero(g.n_samples(), g.n_samples()), 0, model, Eigen::Vector2d::Zero()};
  return s;
}

PhaseScreen PhaseScreen::from_tilt(const Grid2D& g, const Eigen::Vector2d& tilt) {
  PhaseScreen s = zero(g, ScreenModel::quadratic);
  for (int i = 0; i < g.n_samples(); ++i)
    for (int j = 0; j < g.n_samples(); ++j) s.theta(i, j) = tilt.x() * g.coord(j) + tilt.y() * g.coord(i);
  s.tilt = tilt;
  return s;
}

double PhaseScreen::phase_at(double x, double y) const {
  if (tilt) return tilt->x() * x + tilt->y() * y;
  const int n = grid.n_samples();
  const double d = grid.spacing();
  // Fractional index such that coord(j) = x.
  const double fx = x / d + n / 2 - 0.5;
  const double fy = y / d + n / 2 - 0.5;
  const int j0 = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 2);
  const int i0 = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 2);
  const double tx = fx - j0;
  const double ty = fy - i0;
  return (1 - ty) * ((1 - tx) * theta(i0, j0) + tx * theta(i0, j0 + 1)) +
         ty * ((1 - tx) * theta(i0 + 1, j0) + tx * theta(i0 + 1, j0 + 1));
}

double fried_parameter(double cn2, double path_length, double wavelength) {
  if (!(cn2 > 0.0) || !(path_length > 0.0) || !(wavelength > 0.0))
    throw DomainError("fried_parameter: all inputs must be positive");
  return 0.185 * std::pow(wavelength * wavelength / (cn2 * path_length), 3.0 / 5.0);
}

double strength_w(double w_p, double r0) {
  if (!(r0 > 0.0)) throw DomainError("strength_w: r0 must be positive");
  return w_p / r0;
}

double zeta(double strength_w) {
  if (!(strength_w >= 0.0)) throw DomainError("zeta: strength_w must be >= 0");
  return 6.88 * std::pow(strength_w, 5.0 / 3.0);
}

double quadratic_structure_fn(double separation, const TurbulenceParams& params) {
  params.validate();
  const double ratio = separation / params.w_p;
  return zeta(params.strength_w) * ratio * ratio;
}

namespace {

// Kolmogorov phase power spectrum in cycles/m: 0.023 r0^{-5/3} f^{-11/3}.
double kolmogorov_psd(double f, double r0) { return 0.023 * std::pow(r0, -5.0 / 3.0) * std::pow(f, -11.0 / 3.0); }

constexpr int kSubharmonicLevels = 3;
constexpr int kWeightedCells = 4;

// Mean of f^{-11/3} over the unit cell centred on (i, j), relative to its
// centre value. Sampling the spectrum at cell centres badly underweights the
// cells next to the origin, which carry most of the large-scale power.
double cell_weight(int i, int j) {
  if (std::max(std::abs(i), std::abs(j)) > kWeightedCells || (i == 0 && j == 0)) return 1.0;
  static const auto table = [] {
    constexpr int span = 2 * kWeightedCells + 1;
    constexpr int sub = 32;
    std::array<double, span * span> t{};
    for (int a = -kWeightedCells; a <= kWeightedCells; ++a)
      for (int b = -kWeightedCells; b <= kWeightedCells; ++b) {
        if (a == 0 && b == 0) continue;
        double sum = 0.0;
        for (int u = 0; u < sub; ++u)
          for (int v = 0; v < sub; ++v)
            sum += std::pow(std::hypot(a + (u + 0.5) / sub - 0.5, b + (v + 0.5) / sub - 0.5), -11.0 / 3.0);
        t[(a + kWeightedCells) * span + b + kWeightedCells] = sum / (sub * sub) / std::pow(std::hypot(a, b), -11.0 / 3.0);
      }
    return t;
  }();
  return table[(i + kWeightedCells) * (2 * kWeightedCells + 1) + j + kWeightedCells];
}

void fft2_inverse_unscaled(ComplexArray<double>& a) {
  Eigen::FFT<double> fft;
  const Eigen::Index n = a.rows();
  Eigen::VectorXcd in(n), out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    in = a.row(i).transpose();
    fft.inv(out, in);
    a.row(i) = out.transpose() * static_cast<double>(n);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    in = a.col(j);
    fft.inv(out, in);
    a.col(j) = out * static_cast<double>(n);
  }
}

RealArray<double> kolmogorov_theta(double r0, const Grid2D& grid, std::mt19937_64& rng) {
  const int n = grid.n_samples();
  const double length = grid.extent();
  const double df = 1.0 / length;
  std::normal_distribution<double> normal(0.0, 1.0);

  ComplexArray<double> spectrum(n, n);
  for (int i = 0; i < n; ++i) {
    const int ky = i < n / 2 ? i : i - n;
    for (int j = 0; j < n; ++j) {
      const int kx = j < n / 2 ? j : j - n;
      const double re = normal(rng);
      const double im = normal(rng);
      const double f = df * std::hypot(kx, ky);
      const double amp = (kx == 0 && ky == 0) ? 0.0 : std::sqrt(kolmogorov_psd(f, r0) * cell_weight(kx, ky)) * df;
      spectrum(i, j) = std::complex<double>(re, im) * amp;
    }
  }
  fft2_inverse_unscaled(spectrum);
  RealArray<double> theta = spectrum.real();

  // Subharmonic augmentation of the lowest frequencies.
  RealArray<double> low = RealArray<double>::Zero(n, n);
  for (int level = 1; level <= kSubharmonicLevels; ++level) {
    const double dfp = df / std::pow(3.0, level);
    for (int my = -1; my <= 1; ++my) {
      for (int mx = -1; mx <= 1; ++mx) {
        const double re = normal(rng);
        const double im = normal(rng);
        if (mx == 0 && my == 0) continue;
        const double fx = mx * dfp, fy = my * dfp;
        const std::complex<double> c =
            std::complex<double>(re, im) * (std::sqrt(kolmogorov_psd(std::hypot(fx, fy), r0) * cell_weight(mx, my)) * dfp);
        Eigen::ArrayXcd ex(n), ey(n);
        for (int j = 0; j < n; ++j) {
          ex[j] = std::polar(1.0, 2.0 * std::numbers::pi * fx * grid.coord(j));
          ey[j] = std::polar(1.0, 2.0 * std::numbers::pi * fy * grid.coord(j));
        }
        for (int i = 0; i < n; ++i) low.row(i) += (c * ey[i] * ex.transpose()).real();
      }
    }
  }
  theta += low - low.mean();
  theta -= theta.mean();  // piston
  return theta;
}

}  // namespace

PhaseScreen make_screen(const TurbulenceParams& params, const Grid2D& grid, std::uint64_t seed,
                        std::vector<std::string>* warnings) {
  params.validate();
  PhaseScreen screen = PhaseScreen::zero(grid, params.model);
  screen.seed = seed;
  if (params.strength_w == 0.0) return screen;

  const double r0 = params.r0();
  if (warnings && grid.extent() < 4.0 * r0)
    warnings->push_back("make_screen: grid extent " + std::to_string(grid.extent()) + " m spans fewer than 4 r0 (r0=" +
                        std::to_string(r0) + " m)");

  std::mt19937_64 rng(seed);
  if (params.model == ScreenModel::quadratic) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = std::sqrt(zeta(params.strength_w)) / params.w_p;
    const double ax = sigma * normal(rng);
    const double ay = sigma * normal(rng);
    screen = PhaseScreen::from_tilt(grid, {ax, ay});
    screen.seed = seed;
    return screen;
  }
  screen.theta = kolmogorov_theta(r0, grid, rng);
  screen.tilt.reset();
  return screen;
}

std::vector<StructureEstimate> estimate_structure_fn(const std::vector<PhaseScreen>& screens,
                                                     const std::vector<double>& separations) {
  if (screens.size() < 2) throw ConfigError("estimate_structure_fn: need at least 2 screens");
  if (separations.empty()) throw ConfigError("estimate_structure_fn: no separations given");
  const Grid2D& grid = screens.front().grid;
  for (const auto& s : screens) require_same_grid(grid, s.grid, "estimate_structure_fn");

  const int n = grid.n_samples();
  std::vector<StructureEstimate> out;
  for (double sep : separations) {
    const int k = static_cast<int>(std::lround(std::abs(sep) / grid.spacing()));
    if (k >= n) throw ConfigError("estimate_structure_fn: separation exceeds the grid");
    std::vector<double> per_screen;
    per_screen.reserve(screens.size());
    for (const auto& s : screens) {
      if (k == 0) {
        per_screen.push_back(0.0);
        continue;
      }
      const auto& t = s.theta;
      const double dx = (t.rightCols(n - k) - t.leftCols(n - k)).square().mean();
      const double dy = (t.bottomRows(n - k) - t.topRows(n - k)).square().mean();
      per_screen.push_back(0.5 * (dx + dy));
    }
    const double count = static_cast<double>(per_screen.size());
    double mean = 0.0;
    for (double v : per_screen) mean += v;
    mean /= count;
    double var = 0.0;
    for (double v : per_screen) var += (v - mean) * (v - mean);
    var /= (count - 1.0);
    out.push_back({k * grid.spacing(), mean, std::sqrt(var / count)});
  }
  return out;
}

void write_pscr(const std::string& path, const PhaseScreen& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  detail::write_header(os, "PSCR", s.grid);
  for (Eigen::Index i = 0; i < s.theta.size(); ++i) detail::put_le<double>(os, s.theta.data()[i]);
}

PhaseScreen read_pscr(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  PhaseScreen s = PhaseScreen::zero(detail::read_header(is, "PSCR"), ScreenModel::kolmogorov);
  s.tilt.reset();
  for (Eigen::Index i = 0; i < s.theta.size(); ++i) s.theta.data()[i] = detail::get_le<double>(is);
  return s;
}

}  // namespace homdip
