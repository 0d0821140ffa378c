#pragma once

#include <algorithm>
#include <cmath>

#include "relnet/partition.hpp"
#include "relnet/smooth.hpp"

namespace relnet {

/// Lemma-1 Taylor-remainder constants c32(q, d) as configuration; the default
/// is a Lagrange-remainder style bound d^q (q+1)/q!.
struct RecursionConstants {
  std::function<double(int, int)> c32 = [](int q, int d) {
    double fac = 1.0;
    for (int k = 2; k <= q; ++k) fac *= k;
    return std::pow(double(d), q) * double(q + 1) / fac;
  };

  double c46(const SmoothFunction &f) const {
    double m = 0.0;
    for (int k = 0; k <= f.q; ++k) m = std::max(m, c32(k, f.dim));
    return f.holder_C * std::pow(double(f.dim), f.p) * m;
  }
};

/// Exact evaluation of the wide two-step recursion phi_{1,3}; equals the
/// piecewise Taylor polynomial around the P2 corner of x.
inline double wide_recursion(const SmoothFunction &f, double a, int M,
                             std::span<const double> x, const Vec &shift = {}) {
  const int d = f.dim;
  CubePartition p1(a, M, d, 1, shift.empty() ? Vec(d, 0.0) : shift);
  const auto offsets = subcube_offsets_wide(M, a, d);
  const auto lset = multiindices_up_to(d, f.q);

  // step 1: coarse corner, derivatives at every sub-cube corner
  const std::int64_t i = p1.locate_cube(x);
  const Vec phi21 = p1.cube_left(i);
  std::vector<Vec> phi31(lset.size(), Vec(offsets.size(), 0.0));
  for (std::size_t li = 0; li < lset.size(); ++li)
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      Vec corner(phi21);
      for (int t = 0; t < d; ++t) corner[t] += offsets[j][t];
      phi31[li][j] = f.derivative(lset[li], corner);
    }

  // step 2: A^{(j)} membership selects the sub-cube
  const double sub = 2.0 * a / (double(M) * M);
  std::ptrdiff_t jstar = -1;
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    bool in = true;
    for (int t = 0; t < d && in; ++t) {
      const double lo = phi21[t] + offsets[j][t];
      in = lo <= x[t] && x[t] < lo + sub;
    }
    if (in) {
      jstar = static_cast<std::ptrdiff_t>(j);
      break;
    }
  }
  if (jstar < 0) throw OutOfDomainError("wide_recursion: no sub-cube matched");
  Vec phi22(phi21);
  for (int t = 0; t < d; ++t) phi22[t] += offsets[jstar][t];

  double phi13 = 0.0;
  Vec h(d);
  for (int t = 0; t < d; ++t) h[t] = x[t] - phi22[t];
  for (std::size_t li = 0; li < lset.size(); ++li)
    phi13 += phi31[li][jstar] / lset[li].factorial() * lset[li].power(h);
  return phi13;
}

struct BInfeasibleError : ConstructionError {
  using ConstructionError::ConstructionError;
};

/// Integer corrections b_{k,i}^{(l)} along the snake walk of one coarse cube,
/// plus the packed reals b_i^{(l)} in base 4 + 2 ceil(e^d).
struct BCoefficients {
  int d = 1, q = 0, Md = 1;
  int ceil_ed = 3;
  double base = 10.0;
  double c46 = 1.0;
  double a = 1.0;
  int M = 2;
  double p = 1.0;
  // digits[l][k], k = 0..Md-2, holds b_{k+1,i}^{(l)}
  std::vector<std::vector<int>> digits;
  std::vector<double> packed;

  double unit(int l_order) const {
    return c46 * std::pow(2.0 * a / (double(M) * M), p - double(l_order));
  }
};

inline int ceil_exp_d(int d) { return static_cast<int>(std::ceil(std::exp(double(d)))); }

/// sum_k (b_k + ceil(e^d) + 2) base^-k via Horner from the last digit.
inline double pack_b_digits(std::span<const int> digits, int ceil_ed) {
  const double base = 4.0 + 2.0 * ceil_ed;
  double v = 0.0;
  for (std::size_t k = digits.size(); k-- > 0;)
    v = (v + double(digits[k] + ceil_ed + 2)) / base;
  return v;
}

/// Digit recovery by repeated scaled floor; the half-margin nudge keeps the
/// floor exact when the remaining tail is zero (last digit).
inline std::vector<int> unpack_b_digits(double packed, std::size_t count, int ceil_ed) {
  const double base = 4.0 + 2.0 * ceil_ed;
  std::vector<int> out;
  double val = packed;
  for (std::size_t j = 1; j <= count; ++j) {
    const double eps = 0.5 * std::pow(base, -double(count - j));
    const double z = base * val;
    const double digit = std::floor(z + eps);
    out.push_back(static_cast<int>(digit) - ceil_ed - 2);
    val = z - digit;
  }
  return out;
}

/// Runs the successive Taylor-update chain along the snake order of coarse
/// cube i of p1, choosing each integer b so the derivative estimate stays
/// within c46 (2a/M^2)^{p-|l|} of the true derivative.
inline BCoefficients compute_b_coefficients(const SmoothFunction &f,
                                            const CubePartition &p1,
                                            std::int64_t coarse_index, double c46) {
  if (p1.level() != 1)
    throw ConstructionError("compute_b_coefficients: level-1 partition required");
  const int d = f.dim;
  const double a = p1.a();
  const int M = p1.M();
  BCoefficients bc;
  bc.d = d;
  bc.q = f.q;
  bc.ceil_ed = ceil_exp_d(d);
  bc.base = 4.0 + 2.0 * bc.ceil_ed;
  bc.c46 = c46;
  bc.a = a;
  bc.M = M;
  bc.p = f.p;
  const auto corners_rel = subcube_corners_deep(M, a, d);
  bc.Md = static_cast<int>(corners_rel.size());
  const auto lset = multiindices_up_to(d, f.q);
  const Vec base_corner = p1.cube_left(coarse_index);
  auto abs_corner = [&](int k) {
    Vec c(base_corner);
    for (int t = 0; t < d; ++t) c[t] += corners_rel[k][t];
    return c;
  };
  // position of l + s in the canonical order
  auto pos_of = [&](const MultiIndex &m) {
    for (std::size_t t = 0; t < lset.size(); ++t)
      if (lset[t] == m) return t;
    throw ConstructionError("compute_b_coefficients: index lookup failed");
  };

  std::vector<double> est(lset.size());
  const Vec c0 = abs_corner(0);
  for (std::size_t li = 0; li < lset.size(); ++li) est[li] = f.derivative(lset[li], c0);
  bc.digits.assign(lset.size(), {});
  const int bmax = bc.ceil_ed + 1;
  for (int k = 1; k < bc.Md; ++k) {
    Vec step(d);
    for (int t = 0; t < d; ++t) step[t] = corners_rel[k][t] - corners_rel[k - 1][t];
    const Vec ck = abs_corner(k);
    std::vector<double> next(lset.size());
    for (std::size_t li = 0; li < lset.size(); ++li) {
      const MultiIndex &l = lset[li];
      double pred = 0.0;
      for (std::size_t si = 0; si < lset.size(); ++si) {
        const MultiIndex &sidx = lset[si];
        if (l.order() + sidx.order() > f.q) continue;
        pred += est[pos_of(l + sidx)] / sidx.factorial() * sidx.power(step);
      }
      const double u = bc.unit(l.order());
      const double truth = f.derivative(l, ck);
      int b = static_cast<int>(std::llround((truth - pred) / u));
      b = std::clamp(b, -bmax, bmax);
      const double estimate = pred + b * u;
      if (std::abs(estimate - truth) > u * (1.0 + 1e-9))
        throw BInfeasibleError("compute_b_coefficients: no admissible b at cube " +
                               std::to_string(coarse_index) + ", k = " +
                               std::to_string(k) + ", |l| = " + std::to_string(l.order()));
      bc.digits[li].push_back(b);
      next[li] = estimate;
    }
    est = std::move(next);
  }
  bc.packed.resize(lset.size());
  for (std::size_t li = 0; li < lset.size(); ++li)
    bc.packed[li] = pack_b_digits(bc.digits[li], bc.ceil_ed);
  return bc;
}

inline BCoefficients compute_b_coefficients(const SmoothFunction &f, double a, int M,
                                            std::int64_t coarse_index, double c46) {
  return compute_b_coefficients(f, CubePartition(a, M, f.dim, 1), coarse_index, c46);
}

inline std::vector<BCoefficients> compute_all_b_coefficients(const SmoothFunction &f,
                                                             double a, int M, double c46,
                                                             const Vec &shift = {}) {
  CubePartition p1(a, M, f.dim, 1, shift.empty() ? Vec(f.dim, 0.0) : shift);
  std::vector<BCoefficients> out;
  for (std::int64_t i = 0; i < p1.cube_count(); ++i)
    out.push_back(compute_b_coefficients(f, p1, i, c46));
  return out;
}

struct DeepRecursionTrace {
  std::vector<std::vector<int>> decoded_digits;  // [step][l]
};

/// Exact evaluation of the 2 M^d + 1 stage recursion phi_{1, 2M^d+1}:
/// coarse-cube accumulation, snake walk with floor-based digit decoding,
/// gated collection, final Taylor assembly.
inline double deep_recursion(const SmoothFunction &f, double a, int M,
                             std::span<const double> x,
                             std::span<const BCoefficients> bcoeffs,
                             const Vec &shift = {},
                             DeepRecursionTrace *trace = nullptr) {
  const int d = f.dim;
  CubePartition p1(a, M, d, 1, shift.empty() ? Vec(d, 0.0) : shift);
  const auto lset = multiindices_up_to(d, f.q);
  const auto corners_rel = subcube_corners_deep(M, a, d);
  const int Md = static_cast<int>(corners_rel.size());
  const int ceil_ed = ceil_exp_d(d);
  const double base = 4.0 + 2.0 * ceil_ed;
  auto pos_of = [&](const MultiIndex &m) {
    for (std::size_t t = 0; t < lset.size(); ++t)
      if (lset[t] == m) return t;
    throw ConstructionError("deep_recursion: index lookup failed");
  };

  // stage A: coarse accumulation
  const std::int64_t i = p1.locate_cube(x);
  Vec phi2 = p1.cube_left(i);
  const BCoefficients &bc = bcoeffs[static_cast<std::size_t>(i)];
  std::vector<double> phi3(lset.size());
  for (std::size_t li = 0; li < lset.size(); ++li) phi3[li] = f.derivative(lset[li], phi2);
  std::vector<double> phi4(bc.packed);

  // stage B: snake walk with gated collection
  const double sub = 2.0 * a / (double(M) * M);
  Vec phi5(d, 0.0);
  std::vector<double> phi6(lset.size(), 0.0);
  for (int j = 1; j <= Md; ++j) {
    bool in = true;
    for (int t = 0; t < d && in; ++t) in = phi2[t] <= x[t] && x[t] < phi2[t] + sub;
    if (in) {
      phi5 = phi2;
      phi6 = phi3;
    }
    if (j == Md) break;
    Vec step(d);
    for (int t = 0; t < d; ++t) step[t] = corners_rel[j][t] - corners_rel[j - 1][t];
    std::vector<double> next3(lset.size());
    std::vector<int> decoded(lset.size());
    for (std::size_t li = 0; li < lset.size(); ++li) {
      const MultiIndex &l = lset[li];
      double pred = 0.0;
      for (std::size_t si = 0; si < lset.size(); ++si) {
        const MultiIndex &sidx = lset[si];
        if (l.order() + sidx.order() > f.q) continue;
        pred += phi3[pos_of(l + sidx)] / sidx.factorial() * sidx.power(step);
      }
      const double eps = 0.5 * std::pow(base, -double(Md - 1 - j));
      const double z = base * phi4[li];
      const double digit = std::floor(z + eps);
      decoded[li] = static_cast<int>(digit) - ceil_ed - 2;
      next3[li] = pred + (digit - ceil_ed - 2) * bc.unit(l.order());
      phi4[li] = z - digit;
    }
    if (trace) trace->decoded_digits.push_back(decoded);
    phi3 = std::move(next3);
    for (int t = 0; t < d; ++t) phi2[t] += step[t];
  }

  double hatT = 0.0;
  Vec h(d);
  for (int t = 0; t < d; ++t) h[t] = x[t] - phi5[t];
  for (std::size_t li = 0; li < lset.size(); ++li)
    hatT += phi6[li] / lset[li].factorial() * lset[li].power(h);
  return hatT;
}

}  // namespace relnet
