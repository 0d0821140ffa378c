#pragma once

#include <cmath>
#include <optional>

#include "relnet/assembly.hpp"
#include "relnet/multiindex.hpp"
#include "relnet/network.hpp"

namespace relnet {

/// f_id^t on R^dim: depth t, width 2*dim, computes the identity exactly
/// via sigma(z) - sigma(-z). t = 0 is the passthrough network.
inline FeedForwardNetwork build_identity(std::size_t t, std::size_t dim) {
  if (dim < 1) throw DimensionError("build_identity: dim >= 1 required");
  FeedForwardNetwork n = FeedForwardNetwork::passthrough(dim);
  return pad_depth(n, t);
}

namespace detail {

/// Tooth block g(z) = 2 sigma(z) - 4 sigma(z - 1/2) + 2 sigma(z - 1),
/// one hidden layer of 3 neurons.
inline FeedForwardNetwork tooth_net() {
  FeedForwardNetwork n;
  n.set_input_dim(1);
  Matrix w(3, 1);
  w.set(0, 0, 1.0);
  w.set(1, 0, 1.0);
  w.set(2, 0, 1.0);
  Vec b{0.0, -0.5, -1.0};
  n.push_layer(std::move(w), std::move(b));
  Matrix ow(1, 3);
  ow.set(0, 0, 2.0);
  ow.set(0, 1, -4.0);
  ow.set(0, 2, 2.0);
  n.set_output(std::move(ow), Vec{0.0});
  return n;
}

}  // namespace detail

/// f_sq in F(R, 9): |f_sq(x) - x^2| <= a^2 4^-R on [-a, a].
/// Realizes 4a^2 S_R(f_tran(x)) - 2a x - a^2 with S_R(t) = t - sum g_s(t)/4^s;
/// the linear terms cancel in the output map, leaving a^2 + 4a^2 s_R where
/// s_R accumulates the tooth chain.
inline FeedForwardNetwork build_square(int R, double a) {
  if (R < 1) throw ConstructionError("build_square: R >= 1 required");
  if (a < 1.0) throw ConstructionError("build_square: a >= 1 required");
  StageChain chain(1);
  // stage outputs: (t_i, s_i), t_i = g_i(f_tran(x)), s_i = -sum_{s<=i} t_s/4^s
  {
    Matrix A(2, 1);
    A.set(0, 0, 1.0 / (2.0 * a));  // t_0 = x/(2a) + 1/2
    chain.append_affine(std::move(A), Vec{0.5, 0.0});
  }
  const FeedForwardNetwork id1 = build_identity(1, 1);
  const FeedForwardNetwork g = detail::tooth_net();
  for (int i = 1; i <= R; ++i) {
    FeedForwardNetwork stage = stack({g, id1});
    // outputs (g(t_{i-1}), s_{i-1}) -> (t_i, s_{i-1} - t_i / 4^i)
    Matrix A(2, 2);
    A.set(0, 0, 1.0);
    A.set(1, 0, -std::pow(2.0, -2.0 * i));
    A.set(1, 1, 1.0);
    chain.append(compose(FeedForwardNetwork::affine(std::move(A), Vec(2, 0.0)), stage));
  }
  Matrix out(1, 2);
  out.set(0, 1, 4.0 * a * a);
  FeedForwardNetwork n = chain.finish(std::move(out), Vec{a * a});
  return pad_to_width(n, 9);
}

namespace detail {

/// Scale-normalized product block in F(R, 18): computes x y for |x| <= sx,
/// |y| <= sy via xy = (sx sy / 4) [(x/sx + y/sy)^2 - (x/sx - y/sy)^2] with
/// the two squares at radius 2. Error <= 2 sx sy 4^-R; out-of-range inputs
/// saturate the inner interpolant, clamping the output.
inline FeedForwardNetwork build_mult_scaled(int R, double sx, double sy) {
  if (R < 1) throw ConstructionError("build_mult_scaled: R >= 1 required");
  if (sx <= 0.0 || sy <= 0.0)
    throw ConstructionError("build_mult_scaled: positive scales required");
  FeedForwardNetwork sq = build_square(R, 2.0);
  FeedForwardNetwork pair = stack({sq, sq});
  Matrix sel(2, 2);
  sel.set(0, 0, 1.0 / sx);
  sel.set(0, 1, 1.0 / sy);
  sel.set(1, 0, 1.0 / sx);
  sel.set(1, 1, -1.0 / sy);
  FeedForwardNetwork pre = FeedForwardNetwork::affine(std::move(sel), Vec(2, 0.0));
  FeedForwardNetwork n = compose(pair, pre);
  Matrix out(1, 2);
  out.set(0, 0, sx * sy / 4.0);
  out.set(0, 1, -sx * sy / 4.0);
  FeedForwardNetwork post = FeedForwardNetwork::affine(std::move(out), Vec{0.0});
  return pad_to_width(compose(post, n), 18);
}

}  // namespace detail

/// f_mult in F(R, 18): |f_mult(x,y) - xy| <= 2 a^2 4^-R on [-a, a]^2.
inline FeedForwardNetwork build_mult(int R, double a) {
  if (R < 1) throw ConstructionError("build_mult: R >= 1 required");
  if (a < 1.0) throw ConstructionError("build_mult: a >= 1 required");
  return detail::build_mult_scaled(R, a, a);
}

namespace detail {

struct TreeLeaf {
  std::optional<std::size_t> input;  // nullopt => constant 1
  double bound = 1.0;                // sup of |value|
};

/// Binary product tree over 2^q leaves. Each internal node is an f_mult
/// whose radius is propagated from its children's value bounds (tight
/// interval propagation; every stated bound only tightens).
/// Returns a network from the leaf inputs (input_dim = n_inputs).
inline FeedForwardNetwork build_mult_tree(int R, std::size_t n_inputs,
                                          std::span<const TreeLeaf> leaves,
                                          double *value_bound_out = nullptr,
                                          double *error_bound_out = nullptr) {
  if (leaves.size() < 2 || (leaves.size() & (leaves.size() - 1)) != 0)
    throw ConstructionError("build_mult_tree: leaf count must be a power of two >= 2");
  StageChain chain(n_inputs);
  // selector: inputs -> leaf values (constants as biases)
  {
    Matrix A(leaves.size(), n_inputs);
    Vec b(leaves.size(), 0.0);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (leaves[i].input)
        A.set(i, *leaves[i].input, 1.0);
      else
        b[i] = 1.0;
    }
    chain.append_affine(std::move(A), std::move(b));
  }
  std::vector<double> vb;  // value bound per current slot
  std::vector<double> eb;  // error bound per current slot
  for (const auto &l : leaves) {
    vb.push_back(l.bound);
    eb.push_back(0.0);
  }
  while (vb.size() > 1) {
    std::vector<FeedForwardNetwork> blocks;
    std::vector<double> nvb, neb;
    for (std::size_t k = 0; k < vb.size(); k += 2) {
      const double sx = std::max(vb[k], 1e-6), sy = std::max(vb[k + 1], 1e-6);
      blocks.push_back(build_mult_scaled(R, sx, sy));
      const double mult_err = 2.0 * sx * sy * std::pow(4.0, -R);
      nvb.push_back(vb[k] * vb[k + 1] + mult_err);
      neb.push_back(eb[k] * vb[k + 1] + vb[k] * eb[k + 1] + eb[k] * eb[k + 1] +
                    mult_err);
    }
    chain.append(stack(std::span<const FeedForwardNetwork>(blocks)));
    vb = std::move(nvb);
    eb = std::move(neb);
  }
  if (value_bound_out) *value_bound_out = vb[0];
  if (error_bound_out) *error_bound_out = eb[0];
  return chain.finish(Matrix::identity(1), Vec{0.0});
}

}  // namespace detail

/// Minimal admissible R of the f_mult,d lemma: R >= log_4(2 * 4^{2d} a^{2d}).
inline int mult_d_min_R(int d, double a) {
  return static_cast<int>(
      std::ceil(std::log(2.0 * std::pow(4.0, 2.0 * d) * std::pow(a, 2.0 * d)) /
                std::log(4.0)));
}

/// f_mult,d in F(R ceil(log2 d), 18 d): binary tree of f_mult blocks over the
/// inputs padded with constants 1; error <= 4^{4d+1} a^{4d} d 4^{-R} on
/// [-a,a]^d. For d = 1 the (x, 1) pair is built, giving F(R, 18).
inline FeedForwardNetwork build_mult_d(int R, double a, int d,
                                       double *value_bound_out = nullptr,
                                       double *error_bound_out = nullptr) {
  if (d < 1) throw DimensionError("build_mult_d: d >= 1 required");
  if (a < 1.0) throw ConstructionError("build_mult_d: a >= 1 required");
  const int min_R = mult_d_min_R(d, a);
  if (R < min_R)
    throw ConstructionError("build_mult_d: R = " + std::to_string(R) +
                            " below minimal admissible R = " + std::to_string(min_R));
  const int q = std::max(1, static_cast<int>(std::ceil(std::log2(double(d)))));
  const std::size_t slots = std::size_t{1} << q;
  std::vector<detail::TreeLeaf> leaves(slots);
  for (std::size_t i = 0; i < slots; ++i) {
    if (i < static_cast<std::size_t>(d)) leaves[i] = {i, a};
    else leaves[i] = {std::nullopt, 1.0};
  }
  FeedForwardNetwork n = detail::build_mult_tree(R, d, leaves, value_bound_out,
                                                 error_bound_out);
  return pad_to_width(n, 18 * static_cast<std::size_t>(d));
}

/// Minimal admissible R of the f_p lemma (le3eq1).
inline int poly_min_R(int N, double a) {
  return static_cast<int>(std::ceil(
      std::log(2.0 * std::pow(4.0, 2.0 * (N + 1)) * std::pow(a, 2.0 * (N + 1))) /
      std::log(4.0)));
}

struct PolyBuild {
  FeedForwardNetwork net;
  ArchClaim claim;
  double error_bound = 0.0;  // conservative computable bound (tight radii)
  double value_bound = 0.0;
};

/// f_p(x, y_1..y_m): computes sum_i r_i y_i m_i(x) over the binom(d+N, d)
/// monomials m_i of total degree <= N (graded lex order, matching
/// multiindices_up_to). Inputs: x in [-a,a]^d then y_1..y_m in [-y_bound,
/// y_bound] (y_bound defaults to a). Zero-coefficient blocks are omitted;
/// width padded to 18 (N'+1) binom(d+N', d) with N' = max(N, 1).
inline PolyBuild build_poly(int R, double a, int N, int d,
                            std::span<const double> coeffs,
                            std::span<const std::vector<int>> monomials,
                            double y_bound = -1.0, bool enforce_min_R = true) {
  if (N < 0 || d < 1) throw DimensionError("build_poly: need N >= 0, d >= 1");
  if (a < 1.0) throw ConstructionError("build_poly: a >= 1 required");
  if (enforce_min_R && R < poly_min_R(N, a))
    throw ConstructionError("build_poly: R below minimal admissible R = " +
                            std::to_string(poly_min_R(N, a)));
  if (R < 1) throw ConstructionError("build_poly: R >= 1 required");
  if (coeffs.size() != monomials.size())
    throw DimensionError("build_poly: coefficient count " +
                         std::to_string(coeffs.size()) + " != monomial count " +
                         std::to_string(monomials.size()));
  if (y_bound <= 0.0) y_bound = a;
  const int N_eff = std::max(N, 1);
  const std::size_t m = coeffs.size();
  const std::size_t in_dim = static_cast<std::size_t>(d) + m;
  const int qslots = static_cast<int>(std::ceil(std::log2(double(N_eff + 1))));
  const std::size_t slots = std::size_t{1} << std::max(qslots, 1);
  const std::size_t tree_depth =
      static_cast<std::size_t>(R) * static_cast<std::size_t>(std::max(qslots, 1));

  std::vector<FeedForwardNetwork> blocks;
  std::vector<double> weights;
  double err = 0.0, val = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (coeffs[i] == 0.0) continue;
    std::vector<detail::TreeLeaf> leaves(slots, detail::TreeLeaf{std::nullopt, 1.0});
    leaves[0] = {static_cast<std::size_t>(d) + i, y_bound};
    std::size_t pos = 1;
    for (int k = 0; k < d; ++k)
      for (int rep = 0; rep < monomials[i][k]; ++rep)
        leaves[pos++] = {static_cast<std::size_t>(k), a};
    double vb = 0.0, ebound = 0.0;
    blocks.push_back(detail::build_mult_tree(R, in_dim, leaves, &vb, &ebound));
    weights.push_back(coeffs[i]);
    err += std::abs(coeffs[i]) * ebound;
    val += std::abs(coeffs[i]) * vb;
  }

  PolyBuild out;
  out.claim = {tree_depth,
               18 * static_cast<std::size_t>(N_eff + 1) *
                   static_cast<std::size_t>(binomial(d + N_eff, d))};
  out.error_bound = err;
  out.value_bound = val;
  // the net stays at its natural width; callers pad to the claim when the
  // lemma-exact F(L, r) shape is wanted
  if (blocks.empty()) {
    FeedForwardNetwork zero = FeedForwardNetwork::affine(Matrix(1, in_dim), Vec{0.0});
    out.net = pad_depth(zero, tree_depth);
    return out;
  }
  out.net = linear_combination(std::span<const FeedForwardNetwork>(blocks), weights);
  return out;
}

/// f_ind,[a,b) in F(2, 2d): exactly 1_{[a,b)}(x) for x in K_{1/R}, in [0,1]
/// everywhere. Corners are constants.
inline FeedForwardNetwork build_indicator(double R, std::span<const double> a_vec,
                                          std::span<const double> b_vec) {
  const std::size_t d = a_vec.size();
  if (d == 0 || b_vec.size() != d)
    throw DimensionError("build_indicator: corner dimension mismatch");
  for (std::size_t i = 0; i < d; ++i)
    if (b_vec[i] - a_vec[i] < 2.0 / R)
      throw ConstructionError(
          "build_indicator: side length below 2/R in coordinate " + std::to_string(i));
  FeedForwardNetwork n;
  n.set_input_dim(d);
  Matrix w1(2 * d, d);
  Vec b1(2 * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    w1.set(2 * i, i, -1.0);
    b1[2 * i] = a_vec[i] + 1.0 / R;  // sigma(a_i + 1/R - x_i)
    w1.set(2 * i + 1, i, 1.0);
    b1[2 * i + 1] = -b_vec[i] + 1.0 / R;  // sigma(x_i - b_i + 1/R)
  }
  n.push_layer(std::move(w1), std::move(b1));
  Matrix w2(1, 2 * d);
  for (std::size_t j = 0; j < 2 * d; ++j) w2.set(0, j, -R);
  n.push_layer(std::move(w2), Vec{1.0});
  Matrix ow(1, 1);
  ow.set(0, 0, 1.0);
  n.set_output(std::move(ow), Vec{0.0});
  return pad_to_width(n, 2 * d);
}

/// f_test(x, a, b, s) in F(2, 2(2d+2)): s * 1_{[a,b)}(x) exactly for
/// x in K_{1/R}; within |s| of it everywhere. All four groups are runtime
/// inputs, layout (x_1..x_d, a_1..a_d, b_1..b_d, s).
inline FeedForwardNetwork build_test(double R, int d) {
  if (d < 1) throw DimensionError("build_test: d >= 1 required");
  const std::size_t D = static_cast<std::size_t>(d);
  FeedForwardNetwork n;
  n.set_input_dim(3 * D + 1);
  Matrix w1(2 * D + 2, 3 * D + 1);
  Vec b1(2 * D + 2, 0.0);
  for (std::size_t i = 0; i < D; ++i) {
    w1.set(2 * i, i, -1.0);  // sigma(a_i + 1/R - x_i)
    w1.set(2 * i, D + i, 1.0);
    b1[2 * i] = 1.0 / R;
    w1.set(2 * i + 1, i, 1.0);  // sigma(x_i - b_i + 1/R)
    w1.set(2 * i + 1, 2 * D + i, -1.0);
    b1[2 * i + 1] = 1.0 / R;
  }
  w1.set(2 * D, 3 * D, 1.0);       // sigma(s)
  w1.set(2 * D + 1, 3 * D, -1.0);  // sigma(-s)
  n.push_layer(std::move(w1), std::move(b1));
  Matrix w2(2, 2 * D + 2);
  for (std::size_t j = 0; j < 2 * D; ++j) {
    w2.set(0, j, -R * R);
    w2.set(1, j, -R * R);
  }
  w2.set(0, 2 * D, 1.0);  // sigma(f_id(s) - R^2 sum)
  w2.set(0, 2 * D + 1, -1.0);
  w2.set(1, 2 * D, -1.0);  // sigma(-f_id(s) - R^2 sum)
  w2.set(1, 2 * D + 1, 1.0);
  n.push_layer(std::move(w2), Vec(2, 0.0));
  Matrix ow(1, 2);
  ow.set(0, 0, 1.0);
  ow.set(0, 1, -1.0);
  n.set_output(std::move(ow), Vec{0.0});
  return pad_to_width(n, 2 * (2 * D + 2));
}

/// f_trunc in F(1, 2B): floor(z) for z in [0, B+1) with min_j |z-j| >= 1/R,
/// range [0, B] for all real z.
inline FeedForwardNetwork build_trunc(double R, int B) {
  if (R <= 0.0 || B < 1) throw ConstructionError("build_trunc: need R > 0, B >= 1");
  FeedForwardNetwork n;
  n.set_input_dim(1);
  Matrix w1(2 * B, 1);
  Vec b1(2 * B, 0.0);
  for (int j = 1; j <= B; ++j) {
    w1.set(2 * (j - 1), 0, 1.0);
    b1[2 * (j - 1)] = -double(j);  // sigma(z - j)
    w1.set(2 * (j - 1) + 1, 0, 1.0);
    b1[2 * (j - 1) + 1] = -double(j) - 1.0 / R;  // sigma(z - j - 1/R)
  }
  n.push_layer(std::move(w1), std::move(b1));
  Matrix ow(1, 2 * B);
  for (int j = 0; j < B; ++j) {
    ow.set(0, 2 * j, R);
    ow.set(0, 2 * j + 1, -R);
  }
  n.set_output(std::move(ow), Vec{0.0});
  return n;
}

}  // namespace relnet
