#pragma once

#include <cmath>
#include <cstdint>

#include "relnet/network.hpp"

namespace relnet {

struct OutOfDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Equivolume half-open cube partition of [-a + shift, a + shift)^d with
/// M^d (level 1) or M^{2d} (level 2) cubes.
class CubePartition {
 public:
  CubePartition(double a, int M, int d, int level, Vec shift = {})
      : a_(a), M_(M), d_(d), level_(level), shift_(std::move(shift)) {
    if (a < 1.0) throw ConstructionError("CubePartition: a >= 1 required");
    if (M < 2) throw ConstructionError("CubePartition: M >= 2 required");
    if (d < 1) throw ConstructionError("CubePartition: d >= 1 required");
    if (level != 1 && level != 2) throw ConstructionError("CubePartition: level is 1 or 2");
    if (shift_.empty()) shift_.assign(d_, 0.0);
    if (shift_.size() != static_cast<std::size_t>(d_))
      throw DimensionError("CubePartition: shift dimension mismatch");
  }

  double a() const { return a_; }
  int M() const { return M_; }
  int d() const { return d_; }
  int level() const { return level_; }
  const Vec &shift() const { return shift_; }

  /// Cubes per axis (M or M^2) and total count (M^d or M^{2d}).
  std::int64_t per_axis() const {
    return level_ == 1 ? M_ : static_cast<std::int64_t>(M_) * M_;
  }
  std::int64_t cube_count() const {
    std::int64_t c = 1;
    for (int i = 0; i < d_; ++i) c *= per_axis();
    return c;
  }
  double side() const { return 2.0 * a_ / double(per_axis()); }

  /// Index of the unique half-open cube containing x; throws when x is
  /// outside [-a + shift, a + shift)^d. Flat index is axis-0 fastest.
  std::int64_t locate_cube(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(d_))
      throw DimensionError("locate_cube: dimension mismatch");
    const double s = side();
    std::int64_t flat = 0, mul = 1;
    for (int i = 0; i < d_; ++i) {
      const double lo = -a_ + shift_[i];
      const double t = (x[i] - lo) / s;
      const auto k = static_cast<std::int64_t>(std::floor(t));
      if (k < 0 || k >= per_axis() || x[i] < lo || x[i] >= lo + 2.0 * a_)
        throw OutOfDomainError("locate_cube: coordinate " + std::to_string(i) +
                               " outside the covered region");
      flat += mul * k;
      mul *= per_axis();
    }
    return flat;
  }

  bool contains(std::span<const double> x) const {
    for (int i = 0; i < d_; ++i) {
      const double lo = -a_ + shift_[i];
      if (x[i] < lo || x[i] >= lo + 2.0 * a_) return false;
    }
    return true;
  }

  /// "Bottom left" corner of cube k (flat index, axis-0 fastest).
  Vec cube_left(std::int64_t k) const {
    Vec left(d_, 0.0);
    const double s = side();
    for (int i = 0; i < d_; ++i) {
      left[i] = -a_ + shift_[i] + double(k % per_axis()) * s;
      k /= per_axis();
    }
    return left;
  }

  Vec cube_center(std::int64_t k) const {
    Vec c = cube_left(k);
    for (double &v : c) v += side() / 2.0;
    return c;
  }

 private:
  double a_;
  int M_, d_, level_;
  Vec shift_;
};

/// True iff every coordinate satisfies left + delta <= x < left + side - delta.
inline bool inner_cube_contains(std::span<const double> left, double side,
                                double delta, std::span<const double> x) {
  if (delta < 0.0 || 2.0 * delta >= side)
    throw ConstructionError("inner_cube_contains: need 0 <= 2 delta < side");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(left[i] + delta <= x[i] && x[i] < left[i] + side - delta)) return false;
  return true;
}

/// Wide sub-cube offsets v_k: (C~_{k,i})_left = (C_{i,1})_left + v_k, with
/// entries in {0, 2a/M^2, .., (M-1) 2a/M^2}; lexicographic with axis 0
/// fastest, v_1 = 0. Count M^d.
inline std::vector<Vec> subcube_offsets_wide(int M, double a, int d) {
  const double step = 2.0 * a / (double(M) * M);
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= M;
  std::vector<Vec> out;
  out.reserve(total);
  for (std::int64_t t = 0; t < total; ++t) {
    Vec v(d, 0.0);
    std::int64_t r = t;
    for (int i = 0; i < d; ++i) {
      v[i] = double(r % M) * step;
      r /= M;
    }
    out.push_back(std::move(v));
  }
  return out;
}

namespace detail {
/// Boustrophedon (snake) enumeration of {0..M-1}^d: consecutive cells differ
/// in exactly one coordinate by +-1.
inline std::vector<std::vector<int>> snake_cells(int M, int d) {
  std::vector<std::vector<int>> cells;
  std::vector<int> cur(d, 0);
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= M;
  std::vector<int> dir(d, 1);
  // odometer with direction flip: axis 0 runs fastest, reversing each sweep
  std::vector<int> idx(d, 0);
  for (std::int64_t t = 0; t < total; ++t) {
    std::vector<int> cell(d);
    for (int i = 0; i < d; ++i) cell[i] = dir[i] == 1 ? idx[i] : M - 1 - idx[i];
    cells.push_back(std::move(cell));
    int i = 0;
    while (i < d) {
      if (++idx[i] < M) break;
      idx[i] = 0;
      dir[i] = -dir[i];
      ++i;
    }
  }
  return cells;
}
}  // namespace detail

/// Snake-order corners of the M^d sub-cubes (first corner = 0 offset).
inline std::vector<Vec> subcube_corners_deep(int M, double a, int d) {
  const double step = 2.0 * a / (double(M) * M);
  std::vector<Vec> out;
  for (const auto &cell : detail::snake_cells(M, d)) {
    Vec v(d, 0.0);
    for (int i = 0; i < d; ++i) v[i] = double(cell[i]) * step;
    out.push_back(std::move(v));
  }
  return out;
}

/// Deep step vectors ~v_k (k = 2..M^d): exactly one nonzero entry of
/// magnitude 2a/M^2; prefix sums reproduce the wide offsets as a set.
inline std::vector<Vec> subcube_offsets_deep(int M, double a, int d) {
  const std::vector<Vec> corners = subcube_corners_deep(M, a, d);
  std::vector<Vec> steps;
  for (std::size_t k = 1; k < corners.size(); ++k) {
    Vec v(d, 0.0);
    for (int i = 0; i < d; ++i) v[i] = corners[k][i] - corners[k - 1][i];
    steps.push_back(std::move(v));
  }
  return steps;
}

/// Tensor B-spline weight of the P2 cube containing x: maximal 1 at the cube
/// center, 0 on the cube faces.
inline double bspline_weight(const CubePartition &p2, std::span<const double> x) {
  if (p2.level() != 2) throw ConstructionError("bspline_weight: level-2 partition required");
  const Vec left = p2.cube_left(p2.locate_cube(x));
  const double a = p2.a();
  const double M2 = double(p2.M()) * p2.M();
  double w = 1.0;
  for (int j = 0; j < p2.d(); ++j) {
    const double h = 1.0 - (M2 / a) * std::abs(left[j] + a / M2 - x[j]);
    w *= std::max(h, 0.0);
  }
  return w;
}

/// The 2^d partitions with coordinate subsets shifted by a/M^2; v = 0 is the
/// base partition (bit i of v set => coordinate i shifted). Every member
/// covers [-a/2, a/2]^d.
inline std::vector<CubePartition> shifted_partitions(double a, int M, int d, int level) {
  const double sh = a / (double(M) * M);
  std::vector<CubePartition> out;
  for (std::uint32_t v = 0; v < (1u << d); ++v) {
    Vec shift(d, 0.0);
    for (int i = 0; i < d; ++i)
      if (v & (1u << i)) shift[i] = sh;
    out.emplace_back(a, M, d, level, std::move(shift));
  }
  return out;
}

}  // namespace relnet
