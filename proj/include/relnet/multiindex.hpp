#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace relnet {

/// d-dimensional multi-index j = (j^(1),..,j^(d)) with the usual |j|, j!, x^j.
struct MultiIndex {
  std::vector<int> j;

  std::size_t dim() const { return j.size(); }

  int order() const {
    int s = 0;
    for (int v : j) s += v;
    return s;
  }

  double factorial() const {
    double f = 1.0;
    for (int v : j)
      for (int k = 2; k <= v; ++k) f *= k;
    return f;
  }

  double power(std::span<const double> x) const {
    double p = 1.0;
    for (std::size_t i = 0; i < j.size(); ++i)
      for (int k = 0; k < j[i]; ++k) p *= x[i];
    return p;
  }

  bool operator==(const MultiIndex &o) const = default;
};

inline MultiIndex operator+(const MultiIndex &a, const MultiIndex &b) {
  MultiIndex r = a;
  for (std::size_t i = 0; i < r.j.size(); ++i) r.j[i] += b.j[i];
  return r;
}

namespace detail {
inline void compositions_of(int deg, std::size_t d, std::size_t pos,
                            std::vector<int> &cur,
                            std::vector<MultiIndex> &out) {
  if (pos + 1 == d) {
    cur[pos] = deg;
    out.push_back(MultiIndex{cur});
    return;
  }
  for (int v = deg; v >= 0; --v) {
    cur[pos] = v;
    compositions_of(deg - v, d, pos + 1, cur, out);
  }
}
}  // namespace detail

/// All multi-indices with |j|_1 <= q in graded lexicographic order.
/// This is the one canonical order used everywhere (Taylor sums, f_p
/// coefficient slots, b-coefficient tables).
inline std::vector<MultiIndex> multiindices_up_to(std::size_t d, int q) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(d, 0);
  for (int deg = 0; deg <= q; ++deg) detail::compositions_of(deg, d, 0, cur, out);
  return out;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace relnet
