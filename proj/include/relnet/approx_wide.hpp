#pragma once

#include <cmath>

#include "relnet/partition.hpp"
#include "relnet/primitives.hpp"
#include "relnet/smooth.hpp"
#include "relnet/taylor_oracle.hpp"

namespace relnet {

/// Configuration of the Theorem-2a two-scale wide construction. The public
/// radius is the user's; the build doubles it internally so the shifted
/// partitions cover [-a_user, a_user]^d.
struct WideBuildConfig {
  SmoothFunction target;
  double a_user = 1.0;
  int M = 2;
  double B_M = 0.0;  // indicator sharpness; 0 = ceil(M^{2p+2})
  int B_Mp = 0;      // f_p depth parameter; 0 = ceil(log4 M^{2p})
  RecursionConstants constants;

  double a() const { return 2.0 * a_user; }
  double indicator_R() const {
    return B_M > 0.0 ? B_M : std::ceil(std::pow(double(M), 2.0 * target.p + 2.0));
  }
  int poly_R() const {
    return B_Mp > 0 ? B_Mp
                    : static_cast<int>(std::ceil(2.0 * target.p * std::log(double(M)) /
                                                 std::log(4.0)));
  }

  /// Admissibility of Theorem 2 / Lemma le5, reported as notes at desk scale.
  std::vector<std::string> admissibility_notes() const {
    std::vector<std::string> notes;
    const double aa = a();
    const double norm = target.cq_norm(aa);
    const double lhs = std::pow(double(M), 2.0 * target.p);
    const double rhs = std::pow(std::max(2.0 * aa, norm), 4.0 * (target.q + 1));
    if (lhs < rhs)
      notes.push_back("admissibility: M^{2p} = " + std::to_string(lhs) +
                      " below (max{2a,||f||})^{4(q+1)} = " + std::to_string(rhs));
    if (double(M) < std::pow(4.0, 4.0 * target.dim + 1.0) * target.dim)
      notes.push_back("admissibility: M below 4^{4d+1} d of the weight-net lemma");
    return notes;
  }
};

namespace detail {

struct TwoScaleStageA {
  StageChain chain;            // depth 2, outputs: x (d), ind values (M^d)
  std::vector<Vec> corners;    // coarse cube corners (C_{i,1})_left
  TwoScaleStageA(std::size_t d) : chain(d) {}
};

/// Stage A of every two-scale builder: f_id^2(x) plus the M^d coarse-cube
/// indicator networks, all reading the shared input. Optionally a second
/// family of indicators on the delta-shrunk cubes (check nets).
inline TwoScaleStageA two_scale_stage_a(const CubePartition &p1, double R_ind,
                                        bool with_shrunk, double delta) {
  const int d = p1.d();
  TwoScaleStageA st(d);
  std::vector<FeedForwardNetwork> blocks;
  blocks.push_back(build_identity(2, d));
  for (std::int64_t i = 0; i < p1.cube_count(); ++i) {
    Vec left = p1.cube_left(i);
    Vec right(left);
    for (double &v : right) v += p1.side();
    blocks.push_back(build_indicator(R_ind, left, right));
    st.corners.push_back(std::move(left));
  }
  if (with_shrunk) {
    for (std::int64_t i = 0; i < p1.cube_count(); ++i) {
      Vec left = p1.cube_left(i);
      Vec right(left);
      for (double &v : right) v += p1.side();
      for (int t = 0; t < d; ++t) {
        left[t] += delta;
        right[t] -= delta;
      }
      blocks.push_back(build_indicator(R_ind, left, right));
    }
  }
  st.chain.append(parallelize(std::span<const FeedForwardNetwork>(blocks)));
  return st;
}

}  // namespace detail

/// Lemma-le5 network f_net,P2: two-scale corner detection, f_test gating of
/// the derivative taps, final f_p Taylor assembly. Exact on the 1/M^{2p+2}
/// inner cubes up to the f_p error.
inline BuiltNetwork build_fnet_P2(const WideBuildConfig &cfg, const Vec &shift = {}) {
  const SmoothFunction &f = cfg.target;
  const int d = f.dim, q = f.q;
  const double a = cfg.a();
  const int M = cfg.M;
  const double R_ind = cfg.indicator_R();
  const int R_poly = cfg.poly_R();
  CubePartition p1(a, M, d, 1, shift.empty() ? Vec(d, 0.0) : shift);
  const auto offsets = subcube_offsets_wide(M, a, d);
  const auto lset = multiindices_up_to(d, q);
  const std::size_t Md = offsets.size();
  const std::size_t nb = lset.size();  // binom(d+q, d)
  const double sub = 2.0 * a / (double(M) * M);

  BuiltNetwork out;
  for (auto &n : cfg.admissibility_notes()) out.notes.push_back(n);

  // ---- stage A: x and coarse indicators (layers 1..2)
  detail::TwoScaleStageA stA = detail::two_scale_stage_a(p1, R_ind, false, 0.0);
  StageChain &chain = stA.chain;

  // taps over stage-A outputs: 0..d-1 = x, d..d+Md-1 = ind_i
  // phi21^(t) = sum_i corner_i^(t) ind_i ; phi31^(l,j) = sum_i d^l f(corner_i + v_j) ind_i
  // ---- stage B: f_test gating (layers 3..4)
  {
    std::vector<FeedForwardNetwork> blocks;
    std::vector<detail::AffineRow> rows;
    auto push_x = [&](std::vector<detail::AffineRow> &rs) {
      for (int t = 0; t < d; ++t) {
        detail::AffineRow r;
        r.terms.push_back({static_cast<std::size_t>(t), 1.0});
        rs.push_back(std::move(r));
      }
    };
    auto corner_tap = [&](int t) {
      detail::AffineRow r;
      for (std::size_t i = 0; i < Md; ++i)
        r.terms.push_back({d + i, stA.corners[i][t]});
      return r;
    };
    // block 0: id^2 of x
    blocks.push_back(build_identity(2, d));
    push_x(rows);
    double max_s = 0.0;
    // blocks for phi22 components: f_test(x, phi21+v_j, +sub, phi21^(i)+v_j^(i))
    for (std::size_t j = 0; j < Md; ++j) {
      for (int comp = 0; comp < d; ++comp) {
        blocks.push_back(build_test(R_ind, d));
        push_x(rows);
        for (int t = 0; t < d; ++t) {
          detail::AffineRow r = corner_tap(t);
          r.bias += offsets[j][t];
          rows.push_back(std::move(r));
        }
        for (int t = 0; t < d; ++t) {
          detail::AffineRow r = corner_tap(t);
          r.bias += offsets[j][t] + sub;
          rows.push_back(std::move(r));
        }
        detail::AffineRow s = corner_tap(comp);
        s.bias += offsets[j][comp];
        rows.push_back(std::move(s));
        max_s = std::max(max_s, a);
      }
    }
    // blocks for phi32^(l): s = phi31^(l, j)
    for (std::size_t li = 0; li < nb; ++li) {
      for (std::size_t j = 0; j < Md; ++j) {
        blocks.push_back(build_test(R_ind, d));
        push_x(rows);
        for (int t = 0; t < d; ++t) {
          detail::AffineRow r = corner_tap(t);
          r.bias += offsets[j][t];
          rows.push_back(std::move(r));
        }
        for (int t = 0; t < d; ++t) {
          detail::AffineRow r = corner_tap(t);
          r.bias += offsets[j][t] + sub;
          rows.push_back(std::move(r));
        }
        detail::AffineRow s;
        for (std::size_t i = 0; i < Md; ++i) {
          Vec corner(stA.corners[i]);
          for (int t = 0; t < d; ++t) corner[t] += offsets[j][t];
          const double dv = f.derivative(lset[li], corner);
          s.terms.push_back({d + i, dv});
          max_s = std::max(max_s, std::abs(dv));
        }
        rows.push_back(std::move(s));
      }
    }
    if (max_s > R_ind)
      out.notes.push_back("f_test |s| <= R violated: max |s| = " + std::to_string(max_s) +
                          " > B_M = " + std::to_string(R_ind));
    FeedForwardNetwork sel = detail::selector_from_rows(chain.outputs(), rows);
    chain.append(compose(stack(std::span<const FeedForwardNetwork>(blocks)), sel));
  }

  // stage-B outputs: 0..d-1 = x, then d*Md phi22 test values, then nb*Md
  // phi32 test values. phi22^(t) = sum_j test(t, j), phi32^(l) = sum_j test(l, j).
  // ---- stage C: f_p on (z = x - phi22, y = phi32)
  const double norm = f.cq_norm(a);
  {
    std::vector<detail::AffineRow> rows;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.terms.push_back({static_cast<std::size_t>(t), 1.0});
      for (std::size_t j = 0; j < Md; ++j)
        r.terms.push_back({d + j * d + t, -1.0});
      rows.push_back(std::move(r));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      for (std::size_t j = 0; j < Md; ++j)
        r.terms.push_back({d + d * Md + li * Md + j, 1.0});
      rows.push_back(std::move(r));
    }
    FeedForwardNetwork sel = detail::selector_from_rows(chain.outputs(), rows);
    std::vector<std::vector<int>> monos;
    Vec coeffs;
    for (const auto &l : lset) {
      monos.push_back(l.j);
      coeffs.push_back(1.0 / l.factorial());
    }
    PolyBuild fp = build_poly(R_poly, std::max(2.0 * a, 1.0), q, d, coeffs, monos,
                              std::max(norm, 1.0), /*enforce_min_R=*/false);
    if (R_poly < poly_min_R(std::max(q, 1), std::max(2.0 * a, norm)))
      out.notes.push_back("f_p R below the le3 minimal R (desk-scale regime)");
    chain.append(compose(fp.net, sel));
    out.error_bound = fp.error_bound;
    // |T| on good cubes plus the f_p gadget error
    double t_bound = 0.0;
    for (const auto &l : lset)
      t_bound += norm * std::pow(sub * d, l.order()) / l.factorial();
    out.inner_value_bound = t_bound + fp.error_bound;
  }

  const std::size_t L_claim =
      4 + static_cast<std::size_t>(cfg.poly_R()) *
              static_cast<std::size_t>(std::ceil(std::log2(std::max(q + 1, 2))));
  const std::size_t r_claim =
      std::max((nb + d) * Md * 2 * (2 + 2 * d) + 2 * d,
               std::size_t{18} * (q + 1) * nb);
  FeedForwardNetwork net = chain.finish(Matrix::identity(1), Vec{0.0});
  out.net = pad_to_width(net, r_claim);
  out.claim = {L_claim, r_claim};
  out.value_bound = 2.0 * std::exp(2.0 * a * d) * std::max(norm, 1.0);
  if (out.net.depth() != L_claim)
    throw ConstructionError("build_fnet_P2: depth " + std::to_string(out.net.depth()) +
                            " != lemma depth " + std::to_string(L_claim));
  return out;
}

/// Lemma-le8 network f_w,P2: corner machinery, hinge hat factors, product
/// tree; approximates the tensor B-spline weight.
inline BuiltNetwork build_weight_net(const WideBuildConfig &cfg, const Vec &shift = {}) {
  const SmoothFunction &f = cfg.target;
  const int d = f.dim;
  const double a = cfg.a();
  const int M = cfg.M;
  const double R_ind = cfg.indicator_R();
  const int R_mult = cfg.poly_R();
  CubePartition p1(a, M, d, 1, shift.empty() ? Vec(d, 0.0) : shift);
  const auto offsets = subcube_offsets_wide(M, a, d);
  const std::size_t Md = offsets.size();
  const double sub = 2.0 * a / (double(M) * M);

  BuiltNetwork out;
  if (double(M) < std::pow(4.0, 4.0 * d + 1.0) * d)
    out.notes.push_back("weight net: M below 4^{4d+1} d (bound regime only)");

  detail::TwoScaleStageA stA = detail::two_scale_stage_a(p1, R_ind, false, 0.0);
  StageChain &chain = stA.chain;

  // stage B: phi22 gates only
  {
    std::vector<FeedForwardNetwork> blocks;
    std::vector<detail::AffineRow> rows;
    blocks.push_back(build_identity(2, d));
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.terms.push_back({static_cast<std::size_t>(t), 1.0});
      rows.push_back(std::move(r));
    }
    auto corner_tap = [&](int t) {
      detail::AffineRow r;
      for (std::size_t i = 0; i < Md; ++i) r.terms.push_back({d + i, stA.corners[i][t]});
      return r;
    };
    for (std::size_t j = 0; j < Md; ++j)
      for (int comp = 0; comp < d; ++comp) {
        blocks.push_back(build_test(R_ind, d));
        for (int t = 0; t < d; ++t) {
          detail::AffineRow r;
          r.terms.push_back({static_cast<std::size_t>(t), 1.0});
          rows.push_back(std::move(r));
        }
        for (int t = 0; t < d; ++t) {
          detail::AffineRow r = corner_tap(t);
          r.bias += offsets[j][t];
          rows.push_back(std::move(r));
        }
        for (int t = 0; t < d; ++t) {
          detail::AffineRow r = corner_tap(t);
          r.bias += offsets[j][t] + sub;
          rows.push_back(std::move(r));
        }
        detail::AffineRow s = corner_tap(comp);
        s.bias += offsets[j][comp];
        rows.push_back(std::move(s));
      }
    FeedForwardNetwork sel = detail::selector_from_rows(chain.outputs(), rows);
    chain.append(compose(stack(std::span<const FeedForwardNetwork>(blocks)), sel));
  }

  // stage C: hinge triplets (one layer, 3d neurons)
  {
    // u_t = x_t - phi22^(t)
    std::vector<detail::AffineRow> urows;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.terms.push_back({static_cast<std::size_t>(t), 1.0});
      for (std::size_t j = 0; j < Md; ++j) r.terms.push_back({d + j * d + t, -1.0});
      urows.push_back(std::move(r));
    }
    FeedForwardNetwork usel = detail::selector_from_rows(chain.outputs(), urows);
    FeedForwardNetwork hinge;
    hinge.set_input_dim(d);
    Matrix w(3 * d, d);
    Vec b(3 * d, 0.0);
    const double slope = double(M) * M / a;
    for (int t = 0; t < d; ++t) {
      w.set(3 * t, t, slope);
      w.set(3 * t + 1, t, slope);
      b[3 * t + 1] = -slope * (a / (double(M) * M));
      w.set(3 * t + 2, t, slope);
      b[3 * t + 2] = -slope * (2.0 * a / (double(M) * M));
    }
    hinge.push_layer(std::move(w), std::move(b));
    Matrix ow(d, 3 * d);
    for (int t = 0; t < d; ++t) {
      ow.set(t, 3 * t, 1.0);
      ow.set(t, 3 * t + 1, -2.0);
      ow.set(t, 3 * t + 2, 1.0);
    }
    hinge.set_output(std::move(ow), Vec(d, 0.0));
    chain.append(compose(hinge, usel));
  }

  // stage D: product of the d hat factors
  FeedForwardNetwork net;
  if (d == 1) {
    net = chain.finish(Matrix::identity(1), Vec{0.0});
  } else {
    const int qd = static_cast<int>(std::ceil(std::log2(double(d))));
    const std::size_t slots = std::size_t{1} << qd;
    std::vector<detail::TreeLeaf> leaves(slots, detail::TreeLeaf{std::nullopt, 1.0});
    for (int t = 0; t < d; ++t) leaves[t] = {static_cast<std::size_t>(t), 1.0};
    FeedForwardNetwork tree = detail::build_mult_tree(R_mult, d, leaves);
    chain.append(tree);
    net = chain.finish(Matrix::identity(1), Vec{0.0});
  }

  const std::size_t L_claim =
      5 + static_cast<std::size_t>(cfg.poly_R()) *
              static_cast<std::size_t>(d == 1 ? 0 : std::ceil(std::log2(double(d))));
  const std::size_t r_claim =
      std::max(std::size_t{18} * d, 2 * d + d * Md * 2 * (2 + 2 * d));
  out.net = pad_to_width(net, r_claim);
  out.claim = {L_claim, r_claim};
  out.value_bound = 2.0;
  if (out.net.depth() != L_claim)
    throw ConstructionError("build_weight_net: depth " + std::to_string(out.net.depth()) +
                            " != lemma depth " + std::to_string(L_claim));
  return out;
}

/// Lemma-le9 network f_check,P2: two-scale boundary detector, exact outside
/// the (1..2)/M^{2p+2} ring, in [0,1] everywhere.
inline BuiltNetwork build_check_net(const WideBuildConfig &cfg, const Vec &shift = {}) {
  const SmoothFunction &f = cfg.target;
  const int d = f.dim;
  const double a = cfg.a();
  const int M = cfg.M;
  const double R_ind = cfg.indicator_R();
  const double delta = std::pow(double(M), -(2.0 * f.p + 2.0));
  CubePartition p1(a, M, d, 1, shift.empty() ? Vec(d, 0.0) : shift);
  const auto offsets = subcube_offsets_wide(M, a, d);
  const std::size_t Md = offsets.size();
  const double sub = 2.0 * a / (double(M) * M);

  BuiltNetwork out;
  detail::TwoScaleStageA stA = detail::two_scale_stage_a(p1, R_ind, true, delta);
  StageChain &chain = stA.chain;
  // outputs: x (d), full inds (Md), shrunk inds (Md)
  // f1_hat = 1 - sum_k shrunk_k

  // stage B: carry f1_hat, f_test gates on shrunk sub-cubes
  {
    std::vector<FeedForwardNetwork> blocks;
    std::vector<detail::AffineRow> rows;
    blocks.push_back(build_identity(2, 1));  // carry f1_hat
    {
      detail::AffineRow r;
      r.bias = 1.0;
      for (std::size_t i = 0; i < Md; ++i) r.terms.push_back({d + Md + i, -1.0});
      rows.push_back(std::move(r));
    }
    auto corner_tap = [&](int t) {
      detail::AffineRow r;
      for (std::size_t i = 0; i < Md; ++i) r.terms.push_back({d + i, stA.corners[i][t]});
      return r;
    };
    for (std::size_t j = 0; j < Md; ++j) {
      blocks.push_back(build_test(R_ind, d));
      for (int t = 0; t < d; ++t) {
        detail::AffineRow r;
        r.terms.push_back({static_cast<std::size_t>(t), 1.0});
        rows.push_back(std::move(r));
      }
      for (int t = 0; t < d; ++t) {
        detail::AffineRow r = corner_tap(t);
        r.bias += offsets[j][t] + delta;
        rows.push_back(std::move(r));
      }
      for (int t = 0; t < d; ++t) {
        detail::AffineRow r = corner_tap(t);
        r.bias += offsets[j][t] + sub - delta;
        rows.push_back(std::move(r));
      }
      detail::AffineRow s;
      s.bias = 1.0;
      rows.push_back(std::move(s));
    }
    FeedForwardNetwork sel = detail::selector_from_rows(chain.outputs(), rows);
    chain.append(compose(stack(std::span<const FeedForwardNetwork>(blocks)), sel));
  }

  // stage C: 1 - sigma(sum_j test_j - f1_hat)
  {
    FeedForwardNetwork top;
    top.set_input_dim(1 + Md);
    Matrix w(1, 1 + Md);
    w.set(0, 0, -1.0);
    for (std::size_t j = 0; j < Md; ++j) w.set(0, 1 + j, 1.0);
    top.push_layer(std::move(w), Vec{0.0});
    Matrix ow(1, 1);
    ow.set(0, 0, -1.0);
    top.set_output(std::move(ow), Vec{1.0});
    chain.append(top);
  }

  const std::size_t r_claim = 2 * d + (4 * d * d + 4 * d) * Md;
  out.net = pad_to_width(chain.finish(Matrix::identity(1), Vec{0.0}), r_claim);
  out.claim = {5, r_claim};
  out.value_bound = 1.0;
  if (out.net.depth() != 5)
    throw ConstructionError("build_check_net: depth != 5");
  return out;
}

/// Lemma-le10 masked product: gates f_net,P2 to zero near sub-cube faces,
/// multiplies by the weight net. Sup error vs w * f on all of [-a, a)^d.
inline BuiltNetwork build_masked_net(const WideBuildConfig &cfg, const Vec &shift = {}) {
  const SmoothFunction &f = cfg.target;
  const int d = f.dim, q = f.q;
  const double a = cfg.a();
  const int B_Mp = cfg.poly_R();

  BuiltNetwork fnet = build_fnet_P2(cfg, shift);
  BuiltNetwork check = build_check_net(cfg, shift);
  BuiltNetwork weight = build_weight_net(cfg, shift);

  BuiltNetwork out;
  out.notes = fnet.notes;
  for (auto &n : check.notes) out.notes.push_back(n);
  for (auto &n : weight.notes) out.notes.push_back(n);

  const double B_true = fnet.value_bound;
  // the lemma pins only the total depth; the gate sits right after the
  // members and the remaining budget deepens the final product
  const std::size_t L_total =
      5 + static_cast<std::size_t>(B_Mp) *
              (static_cast<std::size_t>(std::ceil(std::log2(std::max(q, d) + 1))) + 1);
  const std::size_t pre_depth =
      std::max({fnet.net.depth(), check.net.depth(), weight.net.depth()});
  if (L_total < pre_depth + 2)
    throw ConstructionError("build_masked_net: no depth budget for the gate");
  const int R_mult = static_cast<int>(L_total - pre_depth - 1);

  FeedForwardNetwork pre = parallelize(
      {pad_depth(fnet.net, pre_depth), pad_depth(check.net, pre_depth),
       pad_depth(weight.net, pre_depth)});
  // gate layer: sigma(fnet - B_true check), sigma(-fnet - B_true check); carry w
  FeedForwardNetwork gatestage;
  {
    FeedForwardNetwork gate;
    gate.set_input_dim(2);
    Matrix w(2, 2);
    w.set(0, 0, 1.0);
    w.set(0, 1, -B_true);
    w.set(1, 0, -1.0);
    w.set(1, 1, -B_true);
    gate.push_layer(std::move(w), Vec(2, 0.0));
    Matrix ow(1, 2);
    ow.set(0, 0, 1.0);
    ow.set(0, 1, -1.0);
    gate.set_output(std::move(ow), Vec{0.0});
    gatestage = stack({gate, build_identity(1, 1)});
  }
  StageChain chain(pre.input_dim());
  chain.append(pre);
  chain.append(gatestage);  // inputs (fnet, check, w) -> (gated, w)

  // data-driven product scales: the weight branch stays in [0, ~1], the gated
  // branch within the inner value bound; wild gated values saturate the inner
  // interpolant, clamping the product to ~0
  const double s_w = d == 1 ? 1.25 : 1.75;
  const double s_v = 1.05 * std::max(fnet.inner_value_bound, 1.0);
  // chain outputs are (gated, w) in that order
  FeedForwardNetwork mult = detail::build_mult_scaled(R_mult, s_v, s_w);
  chain.append(mult);

  out.net = chain.finish(Matrix::identity(1), Vec{0.0});
  const std::size_t L_claim = L_total;
  const auto lset_size = multiindices_up_to(d, q).size();
  std::size_t Md = 1;
  for (int t = 0; t < d; ++t) Md *= static_cast<std::size_t>(cfg.M);
  const std::size_t r_bound = 64 * lset_size * d * d * (q + 1) * Md;
  out.claim = {L_claim, r_bound};
  out.value_bound = B_true;
  if (out.net.depth() != L_claim)
    throw ConstructionError("build_masked_net: depth " + std::to_string(out.net.depth()) +
                            " != " + std::to_string(L_claim));
  if (out.net.max_width() > r_bound)
    out.notes.push_back("masked width " + std::to_string(out.net.max_width()) +
                        " exceeds the le10 bound " + std::to_string(r_bound));
  return out;
}

/// Theorem 2a: sum of the 2^d masked networks over the shifted partitions;
/// approximates f in sup norm on [-a_user, a_user]^d.
inline BuiltNetwork build_wide_approximator(const WideBuildConfig &cfg) {
  const int d = cfg.target.dim;
  const auto partitions = shifted_partitions(cfg.a(), cfg.M, d, 2);
  std::vector<FeedForwardNetwork> members;
  BuiltNetwork out;
  for (const auto &p : partitions) {
    BuiltNetwork m = build_masked_net(cfg, p.shift());
    for (auto &n : m.notes) out.notes.push_back(n);
    out.value_bound += m.value_bound;
    members.push_back(std::move(m.net));
  }
  Vec ones(members.size(), 1.0);
  out.net = linear_combination(std::span<const FeedForwardNetwork>(members), ones);

  const int q = cfg.target.q;
  const std::size_t L_claim =
      5 + static_cast<std::size_t>(cfg.poly_R()) *
              (static_cast<std::size_t>(std::ceil(std::log2(std::max(q, d) + 1))) + 1);
  std::size_t Md = 1;
  for (int t = 0; t < d; ++t) Md *= static_cast<std::size_t>(cfg.M);
  const std::size_t r_bound = (std::size_t{1} << d) * 64 *
                              multiindices_up_to(d, q).size() * d * d * (q + 1) * Md;
  out.claim = {L_claim, r_bound};
  if (out.net.depth() != L_claim)
    throw ConstructionError("build_wide_approximator: depth mismatch");
  if (out.net.max_width() > r_bound)
    out.notes.push_back("wide width exceeds the Theorem 2a bound");
  return out;
}

}  // namespace relnet
