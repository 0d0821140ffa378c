#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "relnet/network.hpp"
#include "relnet/partition.hpp"

namespace relnet {

/// Uniform grid with n points per axis over [lo, hi]^d (d <= 3 at desk scale).
inline std::vector<Vec> uniform_grid(double lo, double hi, int n, int d) {
  std::vector<Vec> pts;
  if (d == 1) {
    for (int i = 0; i <= n; ++i) pts.push_back({lo + (hi - lo) * i / n});
  } else if (d == 2) {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        pts.push_back({lo + (hi - lo) * i / n, lo + (hi - lo) * j / n});
  } else if (d == 3) {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        for (int k = 0; k <= n; ++k)
          pts.push_back({lo + (hi - lo) * i / n, lo + (hi - lo) * j / n,
                         lo + (hi - lo) * k / n});
  } else {
    throw DimensionError("uniform_grid: d <= 3 supported");
  }
  return pts;
}

inline std::vector<Vec> random_points(double lo, double hi, int n, int d,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec> pts(n, Vec(d, 0.0));
  for (auto &p : pts)
    for (auto &v : p) v = u(rng);
  return pts;
}

/// Keeps the points whose P2 cube contains them with margin >= delta on every
/// face (the inner-cube test set of the approximation lemmas).
inline std::vector<Vec> filter_inner(const std::vector<Vec> &pts,
                                     const CubePartition &p2, double delta) {
  std::vector<Vec> out;
  for (const auto &x : pts) {
    if (!p2.contains(x)) continue;
    Vec left = p2.cube_left(p2.locate_cube(x));
    if (inner_cube_contains(left, p2.side(), delta, x)) out.push_back(x);
  }
  return out;
}

/// Max |net(x) - ref(x)| over the points, evaluated on two threads.
inline double sup_error(const FeedForwardNetwork &net,
                        const std::function<double(std::span<const double>)> &ref,
                        const std::vector<Vec> &pts) {
  auto worker = [&](std::size_t lo, std::size_t hi, double *out) {
    double worst = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      worst = std::max(worst, std::abs(net.evaluate(pts[i]) - ref(pts[i])));
    *out = worst;
  };
  if (pts.size() < 256) {
    double w = 0.0;
    worker(0, pts.size(), &w);
    return w;
  }
  double w1 = 0.0, w2 = 0.0;
  std::thread t(worker, 0, pts.size() / 2, &w1);
  worker(pts.size() / 2, pts.size(), &w2);
  t.join();
  return std::max(w1, w2);
}

/// Least-squares slope of log(err) against log(param).
inline double loglog_slope(std::span<const double> param, std::span<const double> err) {
  const std::size_t n = param.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(param[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace relnet
