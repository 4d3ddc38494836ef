#include "homdip/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homdip/error.hpp"
#include "homdip/parallel.hpp"

namespace homdip {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::no_turbulence: return "no_turbulence";
    case Scenario::one_sided: return "one_sided";
    case Scenario::two_sided: return "two_sided";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "no_turbulence") return Scenario::no_turbulence;
  if (s == "one_sided") return Scenario::one_sided;
  if (s == "two_sided") return Scenario::two_sided;
  throw ConfigError("unknown scenario '" + s + "' (expected no_turbulence, one_sided or two_sided)");
}

Grid2D ScanConfig::screen_grid() const { return grid ? *grid : Grid2D::default_for(spdc.detection_waist, spdc.w_p); }

void ScanConfig::validate() const {
  if (n_realizations < 1) throw ConfigError("n_realizations must be >= 1");
  if (!(spectral_width > 0.0)) throw ConfigError("spectral_width must be positive");
  if (dz.empty()) throw ConfigError("dz grid is empty");
  if (!std::is_sorted(dz.begin(), dz.end()) || std::adjacent_find(dz.begin(), dz.end()) != dz.end())
    throw ConfigError("dz grid must be strictly increasing");
  if (ell == 0) throw ConfigError("ell must be non-zero");
  turbulence.validate();
  spdc.validate();
}

namespace {

double mean_of(std::span<const double> v) { return reduce_sum(v) / static_cast<double>(v.size()); }

double stderr_of(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  return std::sqrt(reduce_sum(sq) / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

EnsembleResult ensemble_dip(const ScanConfig& config) {
  const CoincidenceEngine engine(config.spdc);
  return ensemble_dip(config, engine);
}

EnsembleResult ensemble_dip(const ScanConfig& config, const CoincidenceEngine& engine) {
  config.validate();
  const bool turbulent = config.scenario != Scenario::no_turbulence && config.turbulence.strength_w > 0.0;
  const std::size_t n = turbulent ? static_cast<std::size_t>(config.n_realizations) : 1;
  const Grid2D grid = config.screen_grid();
  TurbulenceParams tp = config.turbulence;
  tp.w_p = config.spdc.w_p;

  std::vector<double> both(n), fill(n);
  parallel_for(n, config.workers, [&](std::size_t i) {
    ScreenAmplitudes amps;
    if (!turbulent) {
      amps = engine.amplitudes(nullptr, nullptr, config.ell);
    } else {
      const PhaseScreen a = make_screen(tp, grid, derive_seed(config.master_seed, 2 * i));
      if (config.scenario == Scenario::one_sided) {
        amps = engine.amplitudes(&a, nullptr, config.ell);
      } else {
        const PhaseScreen b = make_screen(tp, grid, derive_seed(config.master_seed, 2 * i + 1));
        amps = engine.amplitudes(&a, &b, config.ell);
      }
    }
    both[i] = std::norm(amps.m1) + std::norm(amps.m2);
    fill[i] = std::norm(amps.diff);
  });

  EnsembleResult out;
  out.n_realizations = config.n_realizations;
  const std::size_t m = config.dz.size();
  std::vector<double> per(n);
  std::vector<double> s(m);
  for (std::size_t k = 0; k < m; ++k) {
    s[k] = spectral_factor({config.spectral_width, config.dz[k]});
    for (std::size_t i = 0; i < n; ++i) per[i] = (1.0 - s[k]) * both[i] + s[k] * fill[i];
    const double mean = mean_of(per);
    out.curve.dz.push_back(config.dz[k]);
    out.curve.p.push_back(mean);
    out.curve.stderr_.push_back(stderr_of(per, mean));
  }
  out.visibility = visibility(out.curve, config.spectral_width);

  // Delta-method error of V = (C_out - C_in)/(C_out + C_in) from the
  // per-realisation (C_out, C_in) pairs.
  const auto plateau = plateau_indices(config.dz, config.spectral_width);
  std::size_t centre = 0;
  for (std::size_t k = 1; k < m; ++k)
    if (std::abs(config.dz[k]) < std::abs(config.dz[centre])) centre = k;
  double s_out = 0.0;
  for (auto k : plateau) s_out += s[k];
  s_out /= static_cast<double>(plateau.size());
  std::vector<double> c_out(n), c_in(n);
  for (std::size_t i = 0; i < n; ++i) {
    c_out[i] = (1.0 - s_out) * both[i] + s_out * fill[i];
    c_in[i] = (1.0 - s[centre]) * both[i] + s[centre] * fill[i];
  }
  if (n > 1) {
    const double mo = mean_of(c_out), mi = mean_of(c_in);
    const double denom = (mo + mi) * (mo + mi);
    const double g_out = 2.0 * mi / denom, g_in = -2.0 * mo / denom;
    for (std::size_t i = 0; i < n; ++i) per[i] = g_out * (c_out[i] - mo) + g_in * (c_in[i] - mi);
    out.vis_stderr = stderr_of(per, 0.0);
  }
  return out;
}

double quadrature_P(double alpha, double beta, double zeta, const SpectralParams& sp, PhaseMatching pm) {
  const DipLevels levels = quadrature_levels(alpha, beta, zeta, pm);
  const double s = spectral_factor(sp);
  return levels.plateau * (1.0 - s) + levels.fill * s;
}

FormDecomposition decompose_form(double p_at_dz0, double p_plateau) {
  if (!(p_plateau > 0.0)) throw DomainError("decompose_form: plateau must be positive");
  return {p_plateau, p_at_dz0, 0.0};
}

FormDecomposition decompose_form(const DipCurve& curve, double spectral_width) {
  const auto m = static_cast<Eigen::Index>(curve.dz.size());
  if (m < 2 || curve.p.size() != curve.dz.size()) throw DomainError("decompose_form: need at least two dz points");
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double s = spectral_factor({spectral_width, curve.dz[k]});
    a(k, 0) = 1.0 - s;
    a(k, 1) = s;
    y[k] = curve.p[k];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
  if (!(c[0] > 0.0)) throw DomainError("decompose_form: fitted baseline is not positive");
  return {c[0], c[1], (a * c - y).cwiseAbs().maxCoeff() / c[0]};
}

ExponentFit scaling_exponent(const std::vector<ScalingPoint>& points) {
  constexpr double kGuard = 1e3 * std::numeric_limits<double>::epsilon();
  std::vector<ScalingPoint> kept;
  for (const auto& p : points) {
    if (!(p.parameter > 0.0)) throw DomainError("scaling_exponent: parameters must be positive");
    if (p.plateau > 0.0 && p.fill >= 0.0 && p.fill < kGuard * p.plateau) continue;
    if (!(p.fill > 0.0)) throw DomainError("scaling_exponent: non-positive fill level (outside the small-fill regime)");
    kept.push_back(p);
  }
  if (kept.size() < 5) throw DomainError("scaling_exponent: fewer than five usable points");
  const auto [lo, hi] = std::minmax_element(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.parameter < b.parameter;
  });
  if (hi->parameter < 10.0 * lo->parameter * (1.0 - 1e-9))
    throw DomainError("scaling_exponent: points must span a decade in the parameter");

  const auto n = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(kept[i].parameter);
    y[i] = std::log(kept[i].fill);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
  const double rss = (a * c - y).squaredNorm();
  const Eigen::Matrix2d cov = (a.transpose() * a).inverse() * (rss / static_cast<double>(n - 2));
  return {c[1], std::sqrt(std::max(0.0, cov(1, 1))), static_cast<int>(n)};
}

}  // namespace homdip
