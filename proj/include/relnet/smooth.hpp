#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "relnet/multiindex.hpp"
#include "relnet/network.hpp"

namespace relnet {

/// A (p,C)-smooth target: evaluator, partial-derivative oracle up to order
/// q = floor-part of p, and analytic norm envelopes.
struct SmoothFunction {
  std::string name;
  int dim = 1;
  double p = 1.0;  // q + s, s in (0,1]
  int q = 0;
  double holder_C = 1.0;
  double lipschitz = 1.0;  // C_Lip >= 1 on the relevant range
  std::function<double(std::span<const double>)> value;
  // derivative oracle, defined for all |l|_1 <= q (order 0 = value)
  std::function<double(const MultiIndex &, std::span<const double>)> derivative;
  // upper bound for ||f||_{C^q([-a,a]^d)}
  std::function<double(double)> cq_norm;
  // upper bound for sup_{[-a,a]^d} |f|; falls back to cq_norm when unset
  std::function<double(double)> sup_norm;

  double s() const { return p - q; }
  double sup_bound(double a) const { return sup_norm ? sup_norm(a) : cq_norm(a); }

  double operator()(std::span<const double> x) const { return value(x); }
};

/// Taylor polynomial of total degree q around x0.
inline double taylor_poly(const SmoothFunction &f, int q, std::span<const double> x0,
                          std::span<const double> x) {
  double acc = 0.0;
  Vec h(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) h[i] = x[i] - x0[i];
  for (const MultiIndex &j : multiindices_up_to(x.size(), q))
    acc += f.derivative(j, x0) * j.power(h) / j.factorial();
  return acc;
}

/// Central finite differences with step h = eps^{1/3} max(1, |x_i|), used
/// when no analytic derivatives are supplied; peels one derivative per
/// recursion level.
inline SmoothFunction with_finite_difference_derivatives(SmoothFunction f) {
  auto value = f.value;
  f.derivative = [value](const MultiIndex &l, std::span<const double> x) -> double {
    std::function<double(MultiIndex, Vec)> rec = [&](MultiIndex m, Vec pt) -> double {
      int axis = -1;
      for (std::size_t i = 0; i < m.j.size(); ++i)
        if (m.j[i] > 0) {
          axis = static_cast<int>(i);
          break;
        }
      if (axis < 0) return value(pt);
      const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                       std::max(1.0, std::abs(pt[axis]));
      MultiIndex m2 = m;
      m2.j[axis] -= 1;
      Vec lo = pt, hi = pt;
      lo[axis] -= h;
      hi[axis] += h;
      return (rec(m2, hi) - rec(m2, lo)) / (2.0 * h);
    };
    return rec(l, Vec(x.begin(), x.end()));
  };
  return f;
}

// ---- catalog of analytic targets with closed-form derivatives ----

inline SmoothFunction make_constant(int d, double c) {
  SmoothFunction f;
  f.name = "constant";
  f.dim = d;
  f.p = 2.0;
  f.q = 1;
  f.holder_C = 1e-6;
  f.lipschitz = 1.0;
  f.value = [c](std::span<const double>) { return c; };
  f.derivative = [c](const MultiIndex &l, std::span<const double>) {
    return l.order() == 0 ? c : 0.0;
  };
  f.cq_norm = [c](double) { return std::max(std::abs(c), 1e-12); };
  f.sup_norm = f.cq_norm;
  return f;
}

inline SmoothFunction make_linear(int d, Vec w, double b) {
  SmoothFunction f;
  f.name = "linear";
  f.dim = d;
  f.p = 2.0;
  f.q = 1;
  f.holder_C = 1e-6;
  double wn = 0.0, w1 = 0.0;
  for (double v : w) {
    wn += v * v;
    w1 = std::max(w1, std::abs(v));
  }
  f.lipschitz = std::max(1.0, std::sqrt(wn));
  f.value = [w, b](std::span<const double> x) {
    double s = b;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
    return s;
  };
  f.derivative = [w, b, f_value = f.value](const MultiIndex &l, std::span<const double> x) {
    if (l.order() == 0) return f_value(x);
    if (l.order() > 1) return 0.0;
    for (std::size_t i = 0; i < l.j.size(); ++i)
      if (l.j[i] == 1) return w[i];
    return 0.0;
  };
  f.cq_norm = [w, b, w1](double a) {
    double vb = std::abs(b);
    for (double v : w) vb += std::abs(v) * a;
    return std::max(vb, w1);
  };
  return f;
}

/// amp * prod_j sin(freq x_j + phase); derivatives of any order.
inline SmoothFunction make_sinprod(int d, double amp = 1.0, double freq = 1.0,
                                   double phase = 0.0, int q = 1, double s = 1.0) {
  SmoothFunction f;
  f.name = "sinprod";
  f.dim = d;
  f.q = q;
  f.p = q + s;
  f.holder_C = std::abs(amp) * std::pow(std::abs(freq), q + 1) * std::sqrt(double(d)) *
               std::pow(double(d), q);
  f.lipschitz = std::max(1.0, std::abs(amp) * std::abs(freq) * std::sqrt(double(d)));
  f.value = [amp, freq, phase](std::span<const double> x) {
    double v = amp;
    for (double xi : x) v *= std::sin(freq * xi + phase);
    return v;
  };
  f.derivative = [amp, freq, phase](const MultiIndex &l, std::span<const double> x) {
    double v = amp;
    for (std::size_t i = 0; i < x.size(); ++i)
      v *= std::pow(freq, l.j[i]) * std::sin(freq * x[i] + phase + l.j[i] * 1.5707963267948966);
    return v;
  };
  f.cq_norm = [amp, freq, q](double) {
    return std::abs(amp) * std::pow(std::max(1.0, std::abs(freq)), q);
  };
  f.sup_norm = [amp](double) { return std::abs(amp); };
  return f;
}

/// amp * sum_j exp(rate x_j).
inline SmoothFunction make_expsum(int d, double amp = 1.0, double rate = 0.5,
                                  int q = 1, double s = 1.0) {
  SmoothFunction f;
  f.name = "expsum";
  f.dim = d;
  f.q = q;
  f.p = q + s;
  f.value = [amp, rate](std::span<const double> x) {
    double v = 0.0;
    for (double xi : x) v += std::exp(rate * xi);
    return amp * v;
  };
  f.derivative = [amp, rate](const MultiIndex &l, std::span<const double> x) {
    if (l.order() == 0) {
      double v = 0.0;
      for (double xi : x) v += std::exp(rate * xi);
      return amp * v;
    }
    int axis = -1;
    for (std::size_t i = 0; i < l.j.size(); ++i)
      if (l.j[i] > 0) {
        if (axis >= 0) return 0.0;  // mixed derivative of a sum of univariates
        axis = static_cast<int>(i);
      }
    return amp * std::pow(rate, l.j[axis]) * std::exp(rate * x[axis]);
  };
  f.holder_C = std::abs(amp) * std::pow(std::abs(rate), q + 1) * std::exp(std::abs(rate) * 4.0);
  f.lipschitz = std::max(1.0, std::abs(amp * rate) * std::exp(std::abs(rate) * 2.0) *
                                  std::sqrt(double(d)));
  f.cq_norm = [amp, rate, d, q](double a) {
    return std::abs(amp) * std::max(double(d), std::pow(std::abs(rate), q)) *
           std::exp(std::abs(rate) * a);
  };
  return f;
}

/// Exactly (p, C)-smooth kink on R: amp * sign(u) |u|^p around u = x - t.
/// For p in (1, 2]: q = 1, f' = amp p |u|^{p-1} is Hoelder-(p-1).
/// For p in (0, 1]: q = 0.
inline SmoothFunction make_kink(double p, double t = 0.31, double amp = 1.0) {
  SmoothFunction f;
  f.name = "kink";
  f.dim = 1;
  f.q = p > 1.0 ? 1 : 0;
  f.p = p;
  f.holder_C = std::max(1.0, std::abs(amp) * p * std::max(1.0, p - 1.0));
  f.value = [p, t, amp](std::span<const double> x) {
    const double u = x[0] - t;
    return amp * (u >= 0 ? std::pow(u, p) : -std::pow(-u, p));
  };
  f.derivative = [p, t, amp, fq = f.q](const MultiIndex &l, std::span<const double> x) {
    const double u = x[0] - t;
    if (l.order() == 0) return amp * (u >= 0 ? std::pow(u, p) : -std::pow(-u, p));
    if (l.order() == 1 && fq >= 1) return amp * p * std::pow(std::abs(u), p - 1.0);
    return 0.0;
  };
  f.cq_norm = [p, t, amp, fq = f.q](double a) {
    const double r = a + std::abs(t);
    double v = std::abs(amp) * std::pow(r, p);
    if (fq >= 1) v = std::max(v, std::abs(amp) * p * std::pow(r, p - 1.0));
    return std::max(v, 1e-12);
  };
  f.sup_norm = [p, t, amp](double a) {
    return std::max(std::abs(amp) * std::pow(a + std::abs(t), p), 1e-12);
  };
  f.lipschitz = std::max(1.0, std::abs(amp) * p * std::pow(1.5, p - 1.0));
  return f;
}

/// Fixed polynomial of total degree <= deg with the given graded-lex
/// coefficients; exact Taylor expansions of matching order.
inline SmoothFunction make_polynomial(int d, int deg, Vec coeffs, int q, double s = 1.0) {
  auto monos = multiindices_up_to(d, deg);
  if (coeffs.size() != monos.size())
    throw DimensionError("make_polynomial: coefficient count mismatch");
  SmoothFunction f;
  f.name = "polynomial";
  f.dim = d;
  f.q = q;
  f.p = q + s;
  f.value = [monos, coeffs](std::span<const double> x) {
    double v = 0.0;
    for (std::size_t i = 0; i < monos.size(); ++i)
      if (coeffs[i] != 0.0) v += coeffs[i] * monos[i].power(x);
    return v;
  };
  f.derivative = [monos, coeffs, d](const MultiIndex &l, std::span<const double> x) {
    double v = 0.0;
    for (std::size_t i = 0; i < monos.size(); ++i) {
      if (coeffs[i] == 0.0) continue;
      double term = coeffs[i];
      bool dead = false;
      for (int k = 0; k < d && !dead; ++k) {
        int e = monos[i].j[k];
        int dk = l.j[k];
        if (dk > e) {
          dead = true;
          break;
        }
        for (int r = 0; r < dk; ++r) term *= double(e - r);
        for (int r = 0; r < e - dk; ++r) term *= x[k];
      }
      if (!dead) v += term;
    }
    return v;
  };
  double cmax = 0.0;
  for (double c : coeffs) cmax = std::max(cmax, std::abs(c));
  f.holder_C = std::max(1.0, cmax * monos.size() * std::pow(2.0, deg) * deg);
  f.lipschitz = std::max(1.0, cmax * monos.size() * deg * std::pow(2.0, deg));
  f.cq_norm = [monos, coeffs, q](double a) {
    // max over derivative orders k <= q of sum_i |c_i| deg_i!/(deg_i-k)! a^{deg_i-k}
    double best = 0.0;
    for (int k = 0; k <= q; ++k) {
      double v = 0.0;
      for (std::size_t i = 0; i < monos.size(); ++i) {
        const int deg_i = monos[i].order();
        if (deg_i < k) continue;
        double fac = 1.0;
        for (int t = 0; t < k; ++t) fac *= double(deg_i - t);
        v += std::abs(coeffs[i]) * fac * std::pow(std::max(a, 1.0), deg_i - k);
      }
      best = std::max(best, v);
    }
    return std::max(best, 1e-12);
  };
  f.sup_norm = [monos, coeffs](double a) {
    double v = 0.0;
    for (std::size_t i = 0; i < monos.size(); ++i)
      v += std::abs(coeffs[i]) * std::pow(std::max(a, 1.0), monos[i].order());
    return std::max(v, 1e-12);
  };
  return f;
}

}  // namespace relnet
