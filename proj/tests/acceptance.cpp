// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion was evaluated, whatever the verdicts,
// and 2 when a criterion could not be evaluated. Pass --strict to also exit 1
// on any FAIL; any other arguments select criteria by id (A1 ... A8).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "homdip/averaging.hpp"
#include "homdip/gaussian_moments.hpp"
#include "homdip/hom.hpp"
#include "homdip/parallel.hpp"
#include "homdip/runner.hpp"
#include "homdip/turbulence.hpp"
#include "oracles.hpp"

using namespace homdip;
namespace fs = std::filesystem;

namespace {

constexpr double kAlpha = 4.19;
constexpr double kBeta = 0.173;
constexpr double kRoundoff = 1e-12;

struct Verdict {
  bool passed;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

SpdcParams paper_spdc(PhaseMatching pm = PhaseMatching::sinc) {
  SpdcParams p;
  p.phase_matching = pm;
  return p;
}

double paper_w() { return spectral_width_from_filter(10e-9, 710e-9); }

std::vector<double> dz_points(int n) {
  std::vector<double> dz;
  for (int k = 0; k < n; ++k) dz.push_back(-1e-4 + 2e-4 * k / (n - 1));
  dz[n / 2] = 0.0;
  return dz;
}

ScanConfig scan(Scenario scenario, ScreenModel model, double w, int n, std::uint64_t seed) {
  ScanConfig c;
  c.scenario = scenario;
  c.spdc = paper_spdc();
  c.turbulence = {w, c.spdc.w_p, model};
  c.spectral_width = paper_w();
  c.dz = dz_points(41);
  c.n_realizations = n;
  c.master_seed = seed;
  return c;
}

Verdict one_sided_robustness(const CoincidenceEngine& engine) {
  const SpdcParams p = engine.params();
  const Grid2D g = Grid2D::default_for(p.detection_waist, p.w_p);
  std::vector<LGIndex> modes;
  for (int ell : {1, -1, 2, -2}) modes.push_back({ell, 0, p.detection_waist});
  double worst_diag = 0.0;
  for (auto model : {ScreenModel::kolmogorov, ScreenModel::quadratic})
    for (double w : {0.4, 1.0, 2.0})
      for (std::uint64_t i = 0; i < 200; ++i) {
        const PhaseScreen s = make_screen({w, p.w_p, model}, g, derive_seed(11, i));
        const Eigen::MatrixXcd t = turbulence_modal_matrix(s, modes, g);
        worst_diag = std::max({worst_diag, std::abs(t(0, 0) - t(1, 1)), std::abs(t(2, 2) - t(3, 3))});
      }

  bool ok = worst_diag < 1e-10;
  std::string detail = "max|T[l,l]-T[-l,-l]|=" + fmt(worst_diag) + " (<1e-10)";
  for (auto model : {ScreenModel::kolmogorov, ScreenModel::quadratic}) {
    const EnsembleResult base = ensemble_dip(scan(Scenario::one_sided, model, 0.0, 200, 12), engine);
    ok = ok && base.visibility > 0.999;
    double worst = 0.0;
    for (double w : {0.4, 1.0, 2.0}) {
      const EnsembleResult r = ensemble_dip(scan(Scenario::one_sided, model, w, 200, 12), engine);
      const double dv = std::abs(r.visibility - base.visibility);
      ok = ok && dv <= 3.0 * std::hypot(r.vis_stderr, base.vis_stderr) + kRoundoff;
      worst = std::max(worst, dv);
    }
    detail += "; " + to_string(model) + " V(0)=" + fmt(base.visibility, 12) + " max|dV|=" + fmt(worst);
  }
  return {ok, detail};
}

Verdict perfect_dip(const CoincidenceEngine& engine) {
  const ScanConfig c = scan(Scenario::no_turbulence, ScreenModel::quadratic, 0.0, 1, 0);
  const EnsembleResult r = ensemble_dip(c, engine);
  // Reference level from the Gaussian-moment route, which shares no code with
  // the polar or tilt amplitudes.
  const DipLevels levels = quadrature_levels(engine.params().alpha(), engine.params().beta(), 0.0, PhaseMatching::sinc);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.dz.size(); ++k) {
    const double model = levels.plateau * (1.0 - spectral_factor({c.spectral_width, c.dz[k]}));
    worst = std::max(worst, std::abs(r.curve.p[k] - model) / levels.plateau);
  }
  const FormDecomposition f = decompose_form(r.curve, c.spectral_width);
  return {worst < 0.01 && f.fit_residual < 0.01,
          "max |P - P_plateau (1 - sinc)| / P_plateau=" + fmt(worst) + ", free fit residual=" + fmt(f.fit_residual) +
              ", fill/baseline=" + fmt(f.fill_level / f.baseline_level) + " over 41 points (<0.01)"};
}

ExponentFit fit_levels(const std::vector<double>& xs, const std::function<DipLevels(double)>& levels) {
  std::vector<ScalingPoint> pts;
  for (double x : xs) {
    const DipLevels l = levels(x);
    pts.push_back({x, l.fill / l.plateau, 1.0});
  }
  return scaling_exponent(pts);
}

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
  return v;
}

Verdict beta_exponent() {
  const auto betas = geometric(0.02, 0.2, 8);
  bool ok = true;
  std::string detail;
  for (auto [pm, expected] : {std::pair{PhaseMatching::sinc, 4.0}, std::pair{PhaseMatching::gaussian, 2.0}}) {
    const ExponentFit at_w1 = fit_levels(betas, [&](double b) { return quadrature_levels(kAlpha, b, zeta(1.0), pm); });
    const ExponentFit weak = fit_levels(betas, [&](double b) { return quadrature_levels(kAlpha, b, 1e-2, pm); });
    ok = ok && std::abs(at_w1.exponent - expected) <= 0.3;
    detail += (detail.empty() ? "" : "; ") + to_string(pm) + " exponent=" + fmt(at_w1.exponent) + " (expect " +
              fmt(expected) + "+-0.3), zeta=1e-2 diagnostic=" + fmt(weak.exponent);
  }
  return {ok, detail};
}

Verdict zeta_exponent() {
  const ExponentFit fit =
      fit_levels(geometric(0.01, 0.1, 7), [](double z) { return quadrature_levels(kAlpha, kBeta, z, PhaseMatching::sinc); });
  return {std::abs(fit.exponent - 2.0) <= 0.2,
          "exponent over zeta in [0.01, 0.1]=" + fmt(fit.exponent) + " +- " + fmt(fit.stderr_) + " (expect 2+-0.2)"};
}

Verdict oracle_equivalence(const CoincidenceEngine& engine) {
  bool ok = true;
  std::string detail;
  for (double w : {0.5, 1.0}) {
    const ScanConfig c = scan(Scenario::two_sided, ScreenModel::quadratic, w, 2000, 5);
    const EnsembleResult r = ensemble_dip(c, engine);
    double worst = 0.0;
    for (std::size_t k = 0; k < c.dz.size(); ++k) {
      const double q = quadrature_P(engine.params().alpha(), engine.params().beta(), zeta(w), {c.spectral_width, c.dz[k]},
                                    PhaseMatching::sinc);
      worst = std::max(worst, std::abs(r.curve.p[k] - q) / (r.curve.stderr_[k] + kRoundoff * q));
    }
    ok = ok && worst <= 3.0;
    detail += "W=" + fmt(w) + " max|MC-quad|/stderr=" + fmt(worst) + "; ";
  }
  const double z = zeta(0.7), s = 0.5;
  const DipLevels l = quadrature_levels(kAlpha, kBeta, z, PhaseMatching::sinc);
  const double q = l.plateau * (1.0 - s) + l.fill * s;
  const oracle::McEstimate mc = oracle::ensemble_probability_mc(kAlpha, kBeta, z, s, 4000000, 123);
  const double rel = std::abs(mc.mean - q) / q;
  ok = ok && rel < 0.05;
  detail += "8-D MC at W=0.7, s=0.5: rel diff=" + fmt(rel) + " (MC rel stderr " + fmt(mc.stderr_ / q) + ", <0.05)";
  return {ok, detail};
}

Verdict two_sided_trend(const CoincidenceEngine& engine) {
  bool ok = true;
  std::string detail;
  for (auto [model, n] : {std::pair{ScreenModel::quadratic, 2000}, std::pair{ScreenModel::kolmogorov, 100}}) {
    double previous = 0.0;
    bool monotone = true;
    detail += (detail.empty() ? "" : "; ") + to_string(model) + " V=";
    for (double w : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const EnsembleResult r = ensemble_dip(scan(Scenario::two_sided, model, w, n, 21), engine);
      if (w > 0.0 && r.visibility > previous) monotone = false;
      previous = r.visibility;
      detail += fmt(r.visibility) + (w < 2.0 ? "," : "");
    }
    ok = ok && monotone && previous > 0.9;
    detail += monotone ? " monotone" : " NOT monotone";
  }
  return {ok, detail + " (expect monotone and V(2)>0.9)"};
}

Verdict structure_function() {
  const SpdcParams p = paper_spdc();
  const Grid2D g = Grid2D::default_for(p.detection_waist, p.w_p);
  const double w = 1.0;
  const TurbulenceParams kol{w, p.w_p, ScreenModel::kolmogorov};
  std::vector<PhaseScreen> screens;
  for (std::uint64_t i = 0; i < 200; ++i) screens.push_back(make_screen(kol, g, derive_seed(31, i)));
  std::vector<double> seps;
  for (int k = 4; k <= g.n_samples() / 4; k *= 2) seps.push_back(k * g.spacing());
  double worst_kol = 0.0;
  for (const auto& e : estimate_structure_fn(screens, seps)) {
    const double theory = 6.88 * std::pow(e.separation / kol.r0(), 5.0 / 3.0);
    worst_kol = std::max(worst_kol, std::abs(e.value - theory) / theory);
  }

  const TurbulenceParams quad{w, p.w_p, ScreenModel::quadratic};
  screens.clear();
  for (std::uint64_t i = 0; i < 4000; ++i) screens.push_back(make_screen(quad, g, derive_seed(32, i)));
  double worst_quad = 0.0, worst_se = 0.0;
  for (const auto& e : estimate_structure_fn(screens, seps)) {
    const double theory = quadratic_structure_fn(e.separation, quad);
    worst_quad = std::max(worst_quad, std::abs(e.value - theory) / theory);
    worst_se = std::max(worst_se, e.stderr_ / theory);
  }
  return {worst_kol < 0.15 && worst_quad < 0.05,
          "Kolmogorov max rel dev on [4dx, extent/4]=" + fmt(worst_kol) + " (<0.15); quadratic max rel dev=" +
              fmt(worst_quad) + " (<0.05, rel stderr " + fmt(worst_se) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "homdip_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({
  "master_seed": 99,
  "spdc": { "detection_waist_m": 1.2057e-4 },
  "spectral": { "filter_bandwidth_m": 1e-8, "center_wavelength_m": 7.1e-7 },
  "dz": { "min_m": -1e-4, "max_m": 1e-4, "points": 41 },
  "ensembles": [
    { "scenario": "two_sided", "model": "quadratic", "strength_w": [0, 1, 2], "n_realizations": 64 },
    { "scenario": "two_sided", "model": "kolmogorov", "strength_w": [1], "n_realizations": 16 }
  ],
  "exponents": [
    { "swept_param": "zeta", "values": [0.01, 0.0178, 0.0316, 0.0562, 0.1], "beta": 0.173 }
  ]
})";
  ::setenv("HOMDIP_DETERMINISTIC", "1", 1);
  std::vector<std::string> reference;
  bool ok = true;
  std::string detail = "workers 1/4/16:";
  for (int workers : {1, 4, 16}) {
    const fs::path out = dir / std::to_string(workers);
    const std::string cmd = std::string(HOMDIP_CLI) + " run " + cfg.string() + " --workers " +
                            std::to_string(workers) + " --out " + out.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) throw std::runtime_error("homdip run failed: " + cmd);
    std::vector<std::string> files;
    for (const char* f : {"dip_curve.csv", "visibility.csv", "exponents.csv"}) files.push_back(slurp(out / f));
    if (reference.empty()) reference = files;
    const bool same = files == reference;
    ok = ok && same;
    detail += " " + std::string(same ? "identical" : "DIFFERENT");
  }
  ::unsetenv("HOMDIP_DETERMINISTIC");
  fs::remove_all(dir);
  return {ok, detail + " (3 CSVs each)"};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--strict")
      strict = true;
    else
      selected.emplace_back(argv[i]);
  }
  const CoincidenceEngine engine(paper_spdc());
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"A1 one-sided robustness", [&] { return one_sided_robustness(engine); }},
      {"A2 perfect-dip shape", [&] { return perfect_dip(engine); }},
      {"A3 beta exponent", beta_exponent},
      {"A4 zeta exponent", zeta_exponent},
      {"A5 oracle equivalence", [&] { return oracle_equivalence(engine); }},
      {"A6 two-sided trend", [&] { return two_sided_trend(engine); }},
      {"A7 structure-function fidelity", structure_function},
      {"A8 determinism", determinism},
  };
  int run = 0, failed = 0, errored = 0;
  for (const auto& [name, fn] : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), name.substr(0, name.find(' '))) == selected.end())
      continue;
    ++run;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Verdict v = fn();
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("%s %s: %s [%.1fs]\n", v.passed ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
      if (!v.passed) ++failed;
    } catch (const std::exception& e) {
      std::printf("ERROR %s: %s\n", name.c_str(), e.what());
      ++errored;
    }
    std::fflush(stdout);
  }
  std::printf("%d criteria: %d passed, %d failed, %d errored\n", run, run - failed - errored, failed, errored);
  if (errored) return 2;
  return strict && failed ? 1 : 0;
}
