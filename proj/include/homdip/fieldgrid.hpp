#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "homdip/error.hpp"

namespace homdip {

/// Square, origin-centred sampling of the transverse plane.
///
/// Samples sit at cell centres, x_j = (j - n/2 + 0.5) * spacing, so no sample
/// lands on the optical axis. Row index is y, column index is x.
class Grid2D {
 public:
  Grid2D(int n_samples, double extent) : n_(n_samples), extent_(extent) {
    if (n_samples < 16 || !std::has_single_bit(static_cast<unsigned>(n_samples)))
      throw GridError("grid n_samples must be a power of two >= 16, got " + std::to_string(n_samples));
    if (!(extent > 0.0) || !std::isfinite(extent))
      throw GridError("grid extent must be positive and finite");
  }

  int n_samples() const noexcept { return n_; }
  double extent() const noexcept { return extent_; }
  double spacing() const noexcept { return extent_ / n_; }
  double cell_area() const noexcept { return spacing() * spacing(); }
  double coord(int j) const noexcept { return (j - n_ / 2 + 0.5) * spacing(); }

  /// Default grid resolving both the detection mode and the pump.
  static Grid2D default_for(double w0, double w_p, int n_samples = 256) {
    return Grid2D(n_samples, 16.0 * std::max(w0, w_p));
  }

  friend bool operator==(const Grid2D& a, const Grid2D& b) {
    return a.n_ == b.n_ && a.extent_ == b.extent_;
  }

 private:
  int n_;
  double extent_;
};

template <typename Scalar>
using ComplexArray = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Complex amplitude sampled on a Grid2D.
template <typename Scalar = double>
struct ComplexFieldT {
  Grid2D grid;
  ComplexArray<Scalar> values;

  explicit ComplexFieldT(const Grid2D& g)
      : grid(g), values(ComplexArray<Scalar>::Zero(g.n_samples(), g.n_samples())) {}
  ComplexFieldT(const Grid2D& g, ComplexArray<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.rows() != g.n_samples() || values.cols() != g.n_samples())
      throw GridError("field shape does not match grid");
  }

  /// Sum |f|^2 dA.
  Scalar norm_squared() const { return values.abs2().sum() * static_cast<Scalar>(grid.cell_area()); }
};

using ComplexField = ComplexFieldT<double>;

/// Laguerre-Gauss mode label.
struct LGIndex {
  int ell = 0;
  int p = 0;
  double w0 = 1.0;
};

inline void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw GridError(std::string(what) + ": operands live on different grids");
}

/// Analytic normalisation of the LG profile, 1/||u|| over the infinite plane.
inline double lg_norm_constant(int abs_ell, int p, double w0) {
  return std::sqrt(2.0 * std::tgamma(p + 1.0) / (std::numbers::pi * std::tgamma(p + abs_ell + 1.0))) / w0;
}

/// Radial part of the normalised LG mode (no azimuthal phase).
inline double lg_radial(int abs_ell, int p, double w0, double r) {
  const double t = 2.0 * r * r / (w0 * w0);
  return lg_norm_constant(abs_ell, p, w0) * std::pow(std::sqrt(t), abs_ell) *
         std::assoc_laguerre(static_cast<unsigned>(p), static_cast<unsigned>(abs_ell), t) *
         std::exp(-r * r / (w0 * w0));
}

/// Samples a Laguerre-Gauss mode and renormalises it to unit norm on the grid.
template <typename Scalar = double>
ComplexFieldT<Scalar> lg_mode(const LGIndex& index, const Grid2D& grid) {
  if (!(index.w0 > 0.0)) throw DomainError("lg_mode: w0 must be positive");
  if (index.p < 0) throw DomainError("lg_mode: radial index p must be non-negative");
  const int abs_ell = std::abs(index.ell);
  if (index.w0 < 4.0 * grid.spacing())
    throw GridError("grid-underresolved: w0 >= 4*spacing violated (w0=" + std::to_string(index.w0) +
                    ", spacing=" + std::to_string(grid.spacing()) + ")");
  const double min_extent = 6.0 * index.w0 * std::sqrt(abs_ell + 2.0 * index.p + 1.0);
  if (grid.extent() < min_extent)
    throw GridError("grid-underresolved: extent >= 6*w0*sqrt(|l|+2p+1) violated (extent=" +
                    std::to_string(grid.extent()) + ", required=" + std::to_string(min_extent) + ")");

  const int n = grid.n_samples();
  ComplexFieldT<Scalar> field(grid);
  for (int i = 0; i < n; ++i) {
    const double y = grid.coord(i);
    for (int j = 0; j < n; ++j) {
      const double x = grid.coord(j);
      const double r = std::hypot(x, y);
      const double radial = lg_radial(abs_ell, index.p, index.w0, r);
      const double phi = std::atan2(y, x);
      field.values(i, j) = std::polar<Scalar>(static_cast<Scalar>(radial), static_cast<Scalar>(index.ell * phi));
    }
  }
  field.values /= std::sqrt(field.norm_squared());
  return field;
}

/// Discrete inner product sum conj(a) b dA.
template <typename Scalar>
std::complex<Scalar> overlap(const ComplexFieldT<Scalar>& a, const ComplexFieldT<Scalar>& b) {
  require_same_grid(a.grid, b.grid, "overlap");
  return (a.values.conjugate() * b.values).sum() * static_cast<Scalar>(a.grid.cell_area());
}

/// Pointwise multiplication by exp(i theta).
template <typename Scalar, typename Derived>
ComplexFieldT<Scalar> apply_phase(const ComplexFieldT<Scalar>& f, const Grid2D& screen_grid,
                                  const Eigen::ArrayBase<Derived>& theta) {
  require_same_grid(f.grid, screen_grid, "apply_phase");
  ComplexFieldT<Scalar> out(f.grid);
  out.values = f.values * theta.unaryExpr([](Scalar t) { return std::polar<Scalar>(1, t); });
  return out;
}

// Little-endian binary export: 4-byte magic, u32 n, f64 extent, then samples.
namespace detail {

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated binary field file");
  return v;
}

inline void write_header(std::ostream& os, const char (&magic)[5], const Grid2D& g) {
  os.write(magic, 4);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n_samples()));
  put_le<double>(os, g.extent());
}

inline Grid2D read_header(std::istream& is, const char (&magic)[5]) {
  char m[4];
  is.read(m, 4);
  if (!is || std::memcmp(m, magic, 4) != 0) throw ConfigError(std::string("bad magic, expected ") + magic);
  const auto n = get_le<std::uint32_t>(is);
  const auto extent = get_le<double>(is);
  return Grid2D(static_cast<int>(n), extent);
}

}  // namespace detail

/// Writes a field in the CFLD layout: (re, im) float64 pairs, row-major.
inline void write_cfld(const std::string& path, const ComplexField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  detail::write_header(os, "CFLD", f.grid);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    detail::put_le<double>(os, f.values.data()[i].real());
    detail::put_le<double>(os, f.values.data()[i].imag());
  }
}

inline ComplexField read_cfld(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  ComplexField f(detail::read_header(is, "CFLD"));
  for (Eigen::Index i = 0; i < f.values.size(); ++i) {
    const double re = detail::get_le<double>(is);
    const double im = detail::get_le<double>(is);
    f.values.data()[i] = {re, im};
  }
  return f;
}

}  // namespace homdip
