#pragma once

#include <cmath>

#include "relnet/approx_wide.hpp"
#include "relnet/taylor_oracle.hpp"

namespace relnet {

/// Configuration of the Theorem-2b deep construction. Hard cap M^d <= 40:
/// beyond that the e^{M^d} value envelopes leave the meaningful binary64
/// range long before the paper's formal overflow.
struct DeepBuildConfig {
  SmoothFunction target;
  double a_user = 1.0;
  int M = 2;
  double B_M = 0.0;
  int B_Mp = 0;  // deep f_p depth parameter; 0 = lemma formula
  RecursionConstants constants;

  double a() const { return 2.0 * a_user; }
  std::int64_t Md() const {
    std::int64_t v = 1;
    for (int t = 0; t < target.dim; ++t) v *= M;
    return v;
  }
  double indicator_R() const {
    return B_M > 0.0 ? B_M : std::ceil(std::pow(double(M), 2.0 * target.p + 2.0));
  }
  /// ceil(log4(M^{2p + 4d(q+1)} e^{4(q+1)(M^d - 1)}))
  int poly_R_deep() const {
    if (B_Mp > 0) return B_Mp;
    const double lg = (2.0 * target.p + 4.0 * target.dim * (target.q + 1)) *
                          std::log(double(M)) +
                      4.0 * (target.q + 1) * double(Md() - 1);
    return static_cast<int>(std::ceil(lg / std::log(4.0)));
  }
  int poly_R_wide() const {
    return static_cast<int>(
        std::ceil(2.0 * target.p * std::log(double(M)) / std::log(4.0)));
  }

  void validate() const {
    if (Md() > 40)
      throw ConstructionError("deep build: M^d = " + std::to_string(Md()) +
                              " exceeds the desk-scale cap 40");
    if (M < 2) throw ConstructionError("deep build: M >= 2 required");
  }

  std::vector<std::string> admissibility_notes() const {
    std::vector<std::string> notes;
    const double aa = a();
    const double lhs = std::pow(double(M), 2.0 * target.p);
    const double rhs = std::pow(2.0, 4.0 * (target.q + 1) + 1) *
                       std::pow(std::max(aa, target.cq_norm(aa)), 4.0 * (target.q + 1));
    if (lhs < rhs)
      notes.push_back("deep admissibility: M^{2p} below the supple13 threshold");
    const double s = target.p - target.q;
    if (double(M) * M < std::pow(constants.c46(target), 1.0 / s) * 2.0 * aa)
      notes.push_back("deep admissibility: M^2 below c46^{1/(p-q)} 2a");
    return notes;
  }
};

namespace detail {

/// Per-step value growth G = e^{2ad/M^2} and the wild-walk envelope
/// ||f|| G^{Md-1} + (4 + 2 ceil(e^d)) (Md-1) G^{Md-2}; the paper's bound is
/// the G <= e special case. The gate bound takes the larger of the two.
inline double deep_walk_envelope(double norm, double a, int d, int M, std::int64_t Md) {
  const double G = std::exp(2.0 * a * d / (double(M) * M));
  const double B = 4.0 + 2.0 * ceil_exp_d(d);
  const double tight =
      norm * std::pow(G, double(Md - 1)) + B * double(Md - 1) * std::pow(G, double(Md - 2));
  const double paper =
      norm * std::exp(double(Md - 1)) + B * double(Md - 1) * std::exp(double(Md - 2));
  return std::max(tight, paper);
}

/// f_ind gadget split over two raw stages: stage 1 emits the 2d hinge
/// neurons and exposes their weighted sum; stage 2 applies the outer sigma.
/// Returns the tap index of (1 - R * sum of hinges) in stage-1 taps.
inline std::size_t emit_ind_hinges(RawStage &s1, std::span<const double> corner,
                                   std::span<const double> upper, double R,
                                   const std::vector<std::size_t> &x_inputs) {
  const int d = static_cast<int>(corner.size());
  const std::size_t h0 = s1.neurons.size();
  for (int t = 0; t < d; ++t) {
    AffineRow lo;  // sigma(a_t + 1/R - x_t)
    lo.add(x_inputs[t], -1.0);
    lo.bias = corner[t] + 1.0 / R;
    s1.neurons.push_back(std::move(lo));
    AffineRow hi;  // sigma(x_t - b_t + 1/R)
    hi.add(x_inputs[t], 1.0);
    hi.bias = -upper[t] + 1.0 / R;
    s1.neurons.push_back(std::move(hi));
  }
  AffineRow arg;
  arg.bias = 1.0;
  for (int k = 0; k < 2 * d; ++k) arg.add(h0 + k, -R);
  s1.taps.push_back(std::move(arg));
  return s1.taps.size() - 1;
}

/// f_test gadget stage-1 half against the moving window [lo_tap, lo_tap+side)
/// with runtime s. Exposes two taps: f_id(s) and the hinge sum.
struct GateTaps {
  std::size_t s_tap = 0;
  std::size_t hinge_sum_tap = 0;
};

inline GateTaps emit_test_hinges(RawStage &s1, const std::vector<std::size_t> &x_in,
                                 const std::vector<std::size_t> &lo_in, double side,
                                 double margin_lo, double margin_hi, double R,
                                 const AffineRow &s_row) {
  const int d = static_cast<int>(x_in.size());
  const std::size_t h0 = s1.neurons.size();
  for (int t = 0; t < d; ++t) {
    AffineRow lo;  // sigma(lo_t + margin_lo + 1/R - x_t)
    lo.add(lo_in[t], 1.0);
    lo.add(x_in[t], -1.0);
    lo.bias = margin_lo + 1.0 / R;
    s1.neurons.push_back(std::move(lo));
    AffineRow hi;  // sigma(x_t - lo_t - side + margin_hi + 1/R)
    hi.add(x_in[t], 1.0);
    hi.add(lo_in[t], -1.0);
    hi.bias = -side + margin_hi + 1.0 / R;
    s1.neurons.push_back(std::move(hi));
  }
  const std::size_t sp = s1.neurons.size();
  AffineRow spr = s_row;
  s1.neurons.push_back(spr);
  AffineRow snr;
  snr.bias = -s_row.bias;
  for (auto [i, c] : s_row.terms) snr.add(i, -c);
  s1.neurons.push_back(std::move(snr));
  GateTaps g;
  {
    AffineRow st;
    st.add(sp, 1.0);
    st.add(sp + 1, -1.0);
    s1.taps.push_back(std::move(st));
    g.s_tap = s1.taps.size() - 1;
  }
  {
    AffineRow hs;
    for (int k = 0; k < 2 * d; ++k) hs.add(h0 + k, 1.0);
    s1.taps.push_back(std::move(hs));
    g.hinge_sum_tap = s1.taps.size() - 1;
  }
  return g;
}

/// f_test stage-2 half; returns the tap of the gated value.
inline std::size_t emit_test_output(RawStage &s2, const GateTaps &g, double R) {
  AffineRow pos;
  pos.add(g.s_tap, 1.0);
  pos.add(g.hinge_sum_tap, -R * R);
  const std::size_t p = s2.neurons.size();
  s2.neurons.push_back(std::move(pos));
  AffineRow neg;
  neg.add(g.s_tap, -1.0);
  neg.add(g.hinge_sum_tap, -R * R);
  s2.neurons.push_back(std::move(neg));
  AffineRow tap;
  tap.add(p, 1.0);
  tap.add(p + 1, -1.0);
  s2.taps.push_back(std::move(tap));
  return s2.taps.size() - 1;
}

}  // namespace detail

/// Lemma-supple13 network f_net,deep,P2: sequential coarse accumulation,
/// snake walk with floor-based digit decoding, gated collection, final f_p.
/// Probe taps: "digit_j_l" for the decoded digit at walk step j, multi-index
/// slot l; "phi5_t" / "phi6_l" after the walk.
inline BuiltNetwork build_fnet_deep_P2(const DeepBuildConfig &cfg, const Vec &shift = {},
                                       std::span<const BCoefficients> bcs_in = {}) {
  cfg.validate();
  const SmoothFunction &f = cfg.target;
  const int d = f.dim, q = f.q;
  const double a = cfg.a();
  const int M = cfg.M;
  const double R_ind = cfg.indicator_R();
  CubePartition p1(a, M, d, 1, shift.empty() ? Vec(d, 0.0) : shift);
  const auto corners_rel = subcube_corners_deep(M, a, d);
  const auto lset = multiindices_up_to(d, q);
  const std::size_t nb = lset.size();
  const int Md = static_cast<int>(corners_rel.size());
  const int ced = ceil_exp_d(d);
  const double base = 4.0 + 2.0 * ced;
  const int trunc_B = 4 + 2 * ced;
  const double sub = 2.0 * a / (double(M) * M);
  const double c46 = cfg.constants.c46(f);

  BuiltNetwork out;
  for (auto &n : cfg.admissibility_notes()) out.notes.push_back(n);

  std::vector<BCoefficients> bcs_own;
  if (bcs_in.empty()) {
    for (std::int64_t i = 0; i < p1.cube_count(); ++i)
      bcs_own.push_back(compute_b_coefficients(f, p1, i, c46));
    bcs_in = bcs_own;
  }

  auto pos_of = [&](const MultiIndex &m) {
    for (std::size_t t = 0; t < lset.size(); ++t)
      if (lset[t] == m) return t;
    throw ConstructionError("deep build: index lookup failed");
  };

  StageChain chain(d);
  // running tap layout: 0..d-1 x, d..2d-1 phi2, 2d..2d+nb-1 phi3,
  // 2d+nb..2d+2nb-1 phi4, then (after stage A) 2d+2nb..3d+2nb-1 phi5,
  // 3d+2nb..3d+3nb-1 phi6
  {
    std::vector<detail::AffineRow> rows;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      rows.push_back(std::move(r));
    }
    for (std::size_t k = 0; k < static_cast<std::size_t>(d) + 2 * nb; ++k)
      rows.push_back({});
    chain.append(detail::selector_from_rows(d, rows));
  }

  // ---- stage A: one coarse cube per 2-layer step
  for (std::int64_t j = 0; j < p1.cube_count(); ++j) {
    const Vec corner = p1.cube_left(j);
    Vec upper(corner);
    for (double &v : upper) v += p1.side();
    const BCoefficients &bc = bcs_in[static_cast<std::size_t>(j)];

    detail::RawStage s1;
    std::vector<std::size_t> xt, p2t, p3t, p4t, xin;
    for (int t = 0; t < d; ++t) xin.push_back(t);
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      xt.push_back(s1.carry(r));
    }
    const std::size_t ind_arg = detail::emit_ind_hinges(s1, corner, upper, R_ind, xin);
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(d + t, 1.0);
      p2t.push_back(s1.carry(r));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      r.add(2 * d + li, 1.0);
      p3t.push_back(s1.carry(r));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      r.add(2 * d + nb + li, 1.0);
      p4t.push_back(s1.carry(r));
    }
    FeedForwardNetwork l1 = s1.build(chain.outputs());

    detail::RawStage s2;
    const std::size_t ind_neuron = s2.neurons.size();
    {
      detail::AffineRow r;
      r.add(ind_arg, 1.0);
      s2.neurons.push_back(std::move(r));
    }
    // taps: x, phi2 + corner*ind, phi3 + df*ind, phi4 + packed*ind
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(xt[t], 1.0);
      s2.carry(r);
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p2t[t], 1.0);
      const std::size_t ct = s2.carry(r);
      s2.taps[ct].add(ind_neuron, corner[t]);
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      r.add(p3t[li], 1.0);
      const std::size_t ct = s2.carry(r);
      s2.taps[ct].add(ind_neuron, f.derivative(lset[li], corner));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      r.add(p4t[li], 1.0);
      const std::size_t ct = s2.carry(r);
      s2.taps[ct].add(ind_neuron, bc.packed[li]);
    }
    chain.append(compose(s2.build(l1.output_dim()), l1));
  }

  // extend the layout with phi5, phi6 zeros
  {
    std::vector<detail::AffineRow> rows;
    for (std::size_t k = 0; k < 2 * static_cast<std::size_t>(d) + 2 * nb; ++k) {
      detail::AffineRow r;
      r.add(k, 1.0);
      rows.push_back(std::move(r));
    }
    for (std::size_t k = 0; k < static_cast<std::size_t>(d) + nb; ++k) rows.push_back({});
    chain.append(detail::selector_from_rows(chain.outputs(), rows));
  }

  const double umax =
      std::max(std::pow(sub, f.p - f.q), std::pow(sub, f.p)) * c46;
  const double inner_y_bound = f.cq_norm(a) + umax;

  // ---- stage B: snake walk, 2 layers per step
  for (int j = 1; j <= Md; ++j) {
    const bool advance = j < Md;
    Vec step(d, 0.0);
    if (advance)
      for (int t = 0; t < d; ++t) step[t] = corners_rel[j][t] - corners_rel[j - 1][t];

    detail::RawStage s1;
    std::vector<std::size_t> xin, p2in;
    for (int t = 0; t < d; ++t) xin.push_back(t);
    for (int t = 0; t < d; ++t) p2in.push_back(d + t);
    std::vector<std::size_t> xt, p2t, p5t, p6t, predt, p4st, trunct;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      xt.push_back(s1.carry(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(d + t, 1.0);
      if (advance) r.bias = step[t];  // advance melts into the carry
      p2t.push_back(s1.carry(r));
    }
    // gates for phi5 (s = phi2^(k)) and phi6 (s = phi3^(l)); the tested
    // window is the PRE-advance cube [phi2, phi2 + sub)
    std::vector<detail::GateTaps> gates5(d), gates6(nb);
    for (int k = 0; k < d; ++k) {
      detail::AffineRow s;
      s.add(d + k, 1.0);
      gates5[k] = detail::emit_test_hinges(s1, xin, p2in, sub, 0.0, 0.0, R_ind, s);
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow s;
      s.add(2 * d + li, 1.0);
      gates6[li] = detail::emit_test_hinges(s1, xin, p2in, sub, 0.0, 0.0, R_ind, s);
    }
    for (int k = 0; k < d; ++k) {
      detail::AffineRow r;
      r.add(2 * d + 2 * nb + k, 1.0);
      p5t.push_back(s1.carry(r));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      r.add(2 * d + 2 * nb + d + li, 1.0);
      p6t.push_back(s1.carry(r));
    }
    struct DigitProbe {
      std::size_t li;
      int step;
      detail::AffineRow row;
      ProbeTap probe;
    };
    std::vector<DigitProbe> digit_probe_rows;
    if (advance) {
      const double eps = 0.5 * std::pow(base, -double(Md - 1 - j));
      const double slope_R = 2.0 * std::pow(base, double(Md - 1 - j));
      for (std::size_t li = 0; li < nb; ++li) {
        const MultiIndex &l = lset[li];
        detail::AffineRow pred;
        for (std::size_t si = 0; si < lset.size(); ++si) {
          const MultiIndex &sidx = lset[si];
          if (l.order() + sidx.order() > q) continue;
          pred.add(2 * d + pos_of(l + sidx), sidx.power(step) / sidx.factorial());
        }
        predt.push_back(s1.carry(pred));
        detail::AffineRow p4s;
        p4s.add(2 * d + nb + li, base);
        p4st.push_back(s1.carry(p4s));
        const std::size_t t0 = s1.neurons.size();
        for (int m = 1; m <= trunc_B; ++m) {
          detail::AffineRow n1;
          n1.add(2 * d + nb + li, base);
          n1.bias = eps - double(m);
          s1.neurons.push_back(std::move(n1));
          detail::AffineRow n2;
          n2.add(2 * d + nb + li, base);
          n2.bias = eps - double(m) - 1.0 / slope_R;
          s1.neurons.push_back(std::move(n2));
        }
        detail::AffineRow tr;
        for (int m = 0; m < trunc_B; ++m) {
          tr.add(t0 + 2 * m, slope_R);
          tr.add(t0 + 2 * m + 1, -slope_R);
        }
        s1.taps.push_back(tr);
        trunct.push_back(s1.taps.size() - 1);
        // decoded digit probe: trunc value - (ced + 2) over the s1 layer
        ProbeTap probe;
        probe.layer = chain.depth() + 1;
        probe.b = -double(ced + 2);
        digit_probe_rows.push_back({li, j, std::move(tr), std::move(probe)});
      }
    } else {
      for (std::size_t li = 0; li < nb; ++li) {
        detail::AffineRow r;
        r.add(2 * d + li, 1.0);
        predt.push_back(s1.carry(r));
        detail::AffineRow r4;
        r4.add(2 * d + nb + li, 1.0);
        p4st.push_back(s1.carry(r4));
      }
    }
    FeedForwardNetwork l1 = s1.build(chain.outputs());
    for (auto &dp : digit_probe_rows) {
      dp.probe.w.assign(s1.neurons.size(), 0.0);
      for (auto [idx, c] : dp.row.terms) dp.probe.w[idx] += c;
      out.taps["digit_" + std::to_string(dp.step) + "_" + std::to_string(dp.li)] =
          dp.probe;
    }

    detail::RawStage s2;
    std::vector<std::size_t> xt2, p2t2, p3t2, p4t2, p5t2, p6t2, g5(d), g6(nb);
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(xt[t], 1.0);
      xt2.push_back(s2.carry(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p2t[t], 1.0);
      p2t2.push_back(s2.carry(r));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      if (advance) {
        const double unit = c46 * std::pow(sub, f.p - double(lset[li].order()));
        detail::AffineRow r;
        r.add(predt[li], 1.0);
        r.add(trunct[li], unit);
        r.bias = -(ced + 2) * unit;
        p3t2.push_back(s2.carry(r));
        detail::AffineRow r4;
        r4.add(p4st[li], 1.0);
        r4.add(trunct[li], -1.0);
        p4t2.push_back(s2.carry(r4));
      } else {
        detail::AffineRow r;
        r.add(predt[li], 1.0);
        p3t2.push_back(s2.carry(r));
        detail::AffineRow r4;
        r4.add(p4st[li], 1.0);
        p4t2.push_back(s2.carry(r4));
      }
    }
    for (int k = 0; k < d; ++k) g5[k] = detail::emit_test_output(s2, gates5[k], R_ind);
    for (std::size_t li = 0; li < nb; ++li)
      g6[li] = detail::emit_test_output(s2, gates6[li], R_ind);
    for (int k = 0; k < d; ++k) {
      detail::AffineRow r;
      r.add(p5t[k], 1.0);
      p5t2.push_back(s2.carry(r));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      r.add(p6t[li], 1.0);
      p6t2.push_back(s2.carry(r));
    }
    FeedForwardNetwork l2 = s2.build(l1.output_dim());
    chain.append(compose(l2, l1));

    // fold back to the canonical layout; phi5/phi6 accumulate the gates
    std::vector<detail::AffineRow> fold;
    auto one = [&](std::size_t idx) {
      detail::AffineRow r;
      r.add(idx, 1.0);
      fold.push_back(std::move(r));
    };
    for (int t = 0; t < d; ++t) one(xt2[t]);
    for (int t = 0; t < d; ++t) one(p2t2[t]);
    for (std::size_t li = 0; li < nb; ++li) one(p3t2[li]);
    for (std::size_t li = 0; li < nb; ++li) one(p4t2[li]);
    for (int k = 0; k < d; ++k) {
      detail::AffineRow r;
      r.add(p5t2[k], 1.0);
      r.add(g5[k], 1.0);
      fold.push_back(std::move(r));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      r.add(p6t2[li], 1.0);
      r.add(g6[li], 1.0);
      fold.push_back(std::move(r));
    }
    chain.append(detail::selector_from_rows(l2.output_dim(), fold));
    for (std::size_t li = 0; li < nb; ++li)
      out.taps["phi4_" + std::to_string(j) + "_" + std::to_string(li)] =
          chain.tap(2 * d + nb + li);
    for (std::size_t li = 0; li < nb; ++li)
      out.taps["phi3_" + std::to_string(j) + "_" + std::to_string(li)] =
          chain.tap(2 * d + li);
  }
  // phi5/phi6 probes
  for (int t = 0; t < d; ++t)
    out.taps["phi5_" + std::to_string(t)] = chain.tap(2 * d + 2 * nb + t);
  for (std::size_t li = 0; li < nb; ++li)
    out.taps["phi6_" + std::to_string(li)] = chain.tap(2 * d + 2 * nb + d + li);

  // ---- stage C: f_p on (z = x - phi5, y = phi6)
  const int R_poly = cfg.poly_R_deep();
  double fp_error = 0.0;
  {
    std::vector<detail::AffineRow> rows;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      r.add(2 * d + 2 * nb + t, -1.0);
      rows.push_back(std::move(r));
    }
    for (std::size_t li = 0; li < nb; ++li) {
      detail::AffineRow r;
      r.add(2 * d + 2 * nb + d + li, 1.0);
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
                              std::max(inner_y_bound, 1.0), /*enforce_min_R=*/false);
    fp_error = fp.error_bound;
    chain.append(compose(fp.net, sel));
  }

  const std::size_t L_claim =
      4 * static_cast<std::size_t>(Md) +
      static_cast<std::size_t>(R_poly) *
          static_cast<std::size_t>(std::ceil(std::log2(std::max(q + 1, 2))));
  const std::size_t r_claim = std::max<std::size_t>(
      10 * d + 4 * d * d + 2 * nb * (2 * (4 + 2 * ced) + 5 + 2 * d),
      18 * (q + 1) * nb);
  out.net = pad_to_width(chain.finish(Matrix::identity(1), Vec{0.0}), r_claim);
  out.claim = {L_claim, r_claim};
  out.error_bound = fp_error;
  {
    double t_bound = 0.0;
    for (const auto &l : lset)
      t_bound += inner_y_bound * std::pow(sub * d, l.order()) / l.factorial();
    out.inner_value_bound = t_bound + fp_error;
  }
  out.value_bound =
      1.0 + 2.0 * detail::deep_walk_envelope(f.cq_norm(a), a, d, M, Md) *
                std::exp(2.0 * a * d);
  if (out.net.depth() != L_claim)
    throw ConstructionError("build_fnet_deep_P2: depth " +
                            std::to_string(out.net.depth()) + " != lemma depth " +
                            std::to_string(L_claim));
  return out;
}

/// Lemma-supple14 deep weight network: 4M^d layers of corner walk, one hinge
/// layer, product tree.
inline BuiltNetwork build_weight_net_deep(const DeepBuildConfig &cfg,
                                          const Vec &shift = {}) {
  cfg.validate();
  const SmoothFunction &f = cfg.target;
  const int d = f.dim;
  const double a = cfg.a();
  const int M = cfg.M;
  const double R_ind = cfg.indicator_R();
  CubePartition p1(a, M, d, 1, shift.empty() ? Vec(d, 0.0) : shift);
  const auto corners_rel = subcube_corners_deep(M, a, d);
  const int Md = static_cast<int>(corners_rel.size());
  const double sub = 2.0 * a / (double(M) * M);

  BuiltNetwork out;
  if (double(M) < std::pow(4.0, 4.0 * d + 1.0) * d)
    out.notes.push_back("deep weight net: M below 4^{4d+1} d (bound regime only)");

  StageChain chain(d);
  // taps: x (d), phi2 (d), phi5 (d)
  {
    std::vector<detail::AffineRow> rows;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      rows.push_back(std::move(r));
    }
    for (int k = 0; k < 2 * d; ++k) rows.push_back({});
    chain.append(detail::selector_from_rows(d, rows));
  }
  // stage A
  for (std::int64_t jj = 0; jj < p1.cube_count(); ++jj) {
    const Vec corner = p1.cube_left(jj);
    Vec upper(corner);
    for (double &v : upper) v += p1.side();
    detail::RawStage s1;
    std::vector<std::size_t> xin;
    for (int t = 0; t < d; ++t) xin.push_back(t);
    std::vector<std::size_t> xt, p2t, p5t;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      xt.push_back(s1.carry(r));
    }
    const std::size_t ind_arg = detail::emit_ind_hinges(s1, corner, upper, R_ind, xin);
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(d + t, 1.0);
      p2t.push_back(s1.carry(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(2 * d + t, 1.0);
      p5t.push_back(s1.carry(r));
    }
    FeedForwardNetwork l1 = s1.build(chain.outputs());
    detail::RawStage s2;
    const std::size_t ind_neuron = s2.neurons.size();
    {
      detail::AffineRow r;
      r.add(ind_arg, 1.0);
      s2.neurons.push_back(std::move(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(xt[t], 1.0);
      s2.carry(r);
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p2t[t], 1.0);
      const std::size_t ct = s2.carry(r);
      s2.taps[ct].add(ind_neuron, corner[t]);
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p5t[t], 1.0);
      s2.carry(r);
    }
    chain.append(compose(s2.build(l1.output_dim()), l1));
  }
  // stage B: gather phi5 along the walk
  for (int j = 1; j <= Md; ++j) {
    const bool advance = j < Md;
    Vec step(d, 0.0);
    if (advance)
      for (int t = 0; t < d; ++t) step[t] = corners_rel[j][t] - corners_rel[j - 1][t];
    detail::RawStage s1;
    std::vector<std::size_t> xin, p2in;
    for (int t = 0; t < d; ++t) xin.push_back(t);
    for (int t = 0; t < d; ++t) p2in.push_back(d + t);
    std::vector<std::size_t> xt, p2t, p5t;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      xt.push_back(s1.carry(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(d + t, 1.0);
      if (advance) r.bias = step[t];
      p2t.push_back(s1.carry(r));
    }
    std::vector<detail::GateTaps> gates(d);
    for (int k = 0; k < d; ++k) {
      detail::AffineRow s;
      s.add(d + k, 1.0);
      gates[k] = detail::emit_test_hinges(s1, xin, p2in, sub, 0.0, 0.0, R_ind, s);
    }
    for (int k = 0; k < d; ++k) {
      detail::AffineRow r;
      r.add(2 * d + k, 1.0);
      p5t.push_back(s1.carry(r));
    }
    FeedForwardNetwork l1 = s1.build(chain.outputs());
    detail::RawStage s2;
    std::vector<std::size_t> xt2, p2t2, p5t2, g5(d);
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(xt[t], 1.0);
      xt2.push_back(s2.carry(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p2t[t], 1.0);
      p2t2.push_back(s2.carry(r));
    }
    for (int k = 0; k < d; ++k) g5[k] = detail::emit_test_output(s2, gates[k], R_ind);
    for (int k = 0; k < d; ++k) {
      detail::AffineRow r;
      r.add(p5t[k], 1.0);
      p5t2.push_back(s2.carry(r));
    }
    FeedForwardNetwork l2 = s2.build(l1.output_dim());
    chain.append(compose(l2, l1));
    std::vector<detail::AffineRow> fold;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(xt2[t], 1.0);
      fold.push_back(std::move(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p2t2[t], 1.0);
      fold.push_back(std::move(r));
    }
    for (int k = 0; k < d; ++k) {
      detail::AffineRow r;
      r.add(p5t2[k], 1.0);
      r.add(g5[k], 1.0);
      fold.push_back(std::move(r));
    }
    chain.append(detail::selector_from_rows(l2.output_dim(), fold));
  }
  // hinge layer
  {
    detail::RawStage hl;
    const double slope = double(M) * M / a;
    for (int t = 0; t < d; ++t) {
      const std::size_t h0 = hl.neurons.size();
      for (int k = 0; k < 3; ++k) {
        detail::AffineRow r;
        r.add(t, slope);
        r.add(2 * d + t, -slope);
        r.bias = -double(k) * (a / (double(M) * M)) * slope;
        hl.neurons.push_back(std::move(r));
      }
      detail::AffineRow tap;
      tap.add(h0, 1.0);
      tap.add(h0 + 1, -2.0);
      tap.add(h0 + 2, 1.0);
      hl.taps.push_back(std::move(tap));
    }
    chain.append(hl.build(chain.outputs()));
  }
  FeedForwardNetwork net;
  const int R_mult = cfg.poly_R_wide();
  if (d == 1) {
    net = chain.finish(Matrix::identity(1), Vec{0.0});
  } else {
    const int qd = static_cast<int>(std::ceil(std::log2(double(d))));
    const std::size_t slots = std::size_t{1} << qd;
    std::vector<detail::TreeLeaf> leaves(slots, detail::TreeLeaf{std::nullopt, 1.0});
    for (int t = 0; t < d; ++t) leaves[t] = {static_cast<std::size_t>(t), 1.0};
    chain.append(detail::build_mult_tree(R_mult, d, leaves));
    net = chain.finish(Matrix::identity(1), Vec{0.0});
  }
  const std::size_t L_claim =
      4 * static_cast<std::size_t>(Md) + 1 +
      static_cast<std::size_t>(R_mult) *
          static_cast<std::size_t>(d == 1 ? 0 : std::ceil(std::log2(double(d))));
  const std::size_t r_claim = std::max<std::size_t>(18 * d, 4 * d * d + 10 * d);
  out.net = pad_to_width(net, r_claim);
  out.claim = {L_claim, r_claim};
  out.value_bound = 2.0;
  if (out.net.depth() != L_claim)
    throw ConstructionError("build_weight_net_deep: depth mismatch");
  return out;
}

/// Lemma-supple16 deep check network in F(5 M^d, 2d^2 + 6d + 2).
inline BuiltNetwork build_check_net_deep(const DeepBuildConfig &cfg,
                                         const Vec &shift = {}) {
  cfg.validate();
  const SmoothFunction &f = cfg.target;
  const int d = f.dim;
  const double a = cfg.a();
  const int M = cfg.M;
  const double R_ind = cfg.indicator_R();
  const double delta = std::pow(double(M), -(2.0 * f.p + 2.0));
  CubePartition p1(a, M, d, 1, shift.empty() ? Vec(d, 0.0) : shift);
  const auto corners_rel = subcube_corners_deep(M, a, d);
  const int Md = static_cast<int>(corners_rel.size());
  const double sub = 2.0 * a / (double(M) * M);

  BuiltNetwork out;
  StageChain chain(d);
  // taps: x (d), phi2 (d), f1hat (1)
  {
    std::vector<detail::AffineRow> rows;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      rows.push_back(std::move(r));
    }
    for (int k = 0; k < d; ++k) rows.push_back({});
    detail::AffineRow one;
    one.bias = 1.0;
    rows.push_back(std::move(one));
    chain.append(detail::selector_from_rows(d, rows));
  }
  // stage A: phi2 accumulation + f1hat -= shrunk-cube indicator
  for (std::int64_t jj = 0; jj < p1.cube_count(); ++jj) {
    const Vec corner = p1.cube_left(jj);
    Vec upper(corner);
    for (double &v : upper) v += p1.side();
    Vec s_corner(corner), s_upper(upper);
    for (int t = 0; t < d; ++t) {
      s_corner[t] += delta;
      s_upper[t] -= delta;
    }
    detail::RawStage s1;
    std::vector<std::size_t> xin;
    for (int t = 0; t < d; ++t) xin.push_back(t);
    std::vector<std::size_t> xt, p2t;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      xt.push_back(s1.carry(r));
    }
    const std::size_t full_arg = detail::emit_ind_hinges(s1, corner, upper, R_ind, xin);
    const std::size_t shr_arg =
        detail::emit_ind_hinges(s1, s_corner, s_upper, R_ind, xin);
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(d + t, 1.0);
      p2t.push_back(s1.carry(r));
    }
    std::size_t f1t;
    {
      detail::AffineRow r;
      r.add(2 * d, 1.0);
      f1t = s1.carry(r);
    }
    FeedForwardNetwork l1 = s1.build(chain.outputs());
    detail::RawStage s2;
    const std::size_t nfull = s2.neurons.size();
    {
      detail::AffineRow r;
      r.add(full_arg, 1.0);
      s2.neurons.push_back(std::move(r));
      detail::AffineRow r2;
      r2.add(shr_arg, 1.0);
      s2.neurons.push_back(std::move(r2));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(xt[t], 1.0);
      s2.carry(r);
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p2t[t], 1.0);
      const std::size_t ct = s2.carry(r);
      s2.taps[ct].add(nfull, corner[t]);
    }
    {
      detail::AffineRow r;
      r.add(f1t, 1.0);
      const std::size_t ct = s2.carry(r);
      s2.taps[ct].add(nfull + 1, -1.0);
    }
    chain.append(compose(s2.build(l1.output_dim()), l1));
  }
  // stage B: one 2-layer f_test step per snake cell, carrying the single
  // accumulator v = 1 + f1 - sum of fired tests; the final layer computes
  // 1 - sigma(1 - v) = 1 - sigma(sum tests - f1). (The supplement's displayed
  // per-step recursion is sign-garbled; this realizes the lemma's stated
  // values.) Identity padding brings the depth to exactly 5 M^d.
  {
    std::vector<detail::AffineRow> rows;
    for (int t = 0; t < 2 * d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      rows.push_back(std::move(r));
    }
    detail::AffineRow v0;  // v = 1 + f1
    v0.bias = 1.0;
    v0.add(2 * d, 1.0);
    rows.push_back(std::move(v0));
    chain.append(detail::selector_from_rows(chain.outputs(), rows));
  }
  for (int j = 1; j <= Md; ++j) {
    const bool advance = j < Md;
    Vec step(d, 0.0);
    if (advance)
      for (int t = 0; t < d; ++t) step[t] = corners_rel[j][t] - corners_rel[j - 1][t];
    detail::RawStage s1;
    std::vector<std::size_t> xt, p2t;
    std::size_t vt;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(t, 1.0);
      xt.push_back(s1.carry(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(d + t, 1.0);
      if (advance) r.bias = step[t];
      p2t.push_back(s1.carry(r));
    }
    // hinges of the delta-shrunk moving window [phi2 + delta, phi2 + sub - delta)
    const std::size_t h0 = s1.neurons.size();
    for (int t = 0; t < d; ++t) {
      detail::AffineRow lo;
      lo.add(d + t, 1.0);
      lo.add(t, -1.0);
      lo.bias = delta + 1.0 / R_ind;
      s1.neurons.push_back(std::move(lo));
      detail::AffineRow hi;
      hi.add(t, 1.0);
      hi.add(d + t, -1.0);
      hi.bias = -sub + delta + 1.0 / R_ind;
      s1.neurons.push_back(std::move(hi));
    }
    {
      detail::AffineRow hs;
      for (int k = 0; k < 2 * d; ++k) hs.add(h0 + k, 1.0);
      s1.taps.push_back(std::move(hs));
    }
    const std::size_t hsum = s1.taps.size() - 1;
    {
      detail::AffineRow r;
      r.add(2 * d, 1.0);
      vt = s1.carry(r);
    }
    FeedForwardNetwork l1 = s1.build(chain.outputs());
    detail::RawStage s2;
    std::vector<std::size_t> xt2, p2t2;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(xt[t], 1.0);
      xt2.push_back(s2.carry(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p2t[t], 1.0);
      p2t2.push_back(s2.carry(r));
    }
    const std::size_t test_neuron = s2.neurons.size();
    {
      detail::AffineRow r;  // sigma(1 - R^2 sum hinges): f_test with s = 1
      r.bias = 1.0;
      r.add(hsum, -R_ind * R_ind);
      s2.neurons.push_back(std::move(r));
    }
    std::size_t vt2;
    {
      detail::AffineRow r;
      r.add(vt, 1.0);
      vt2 = s2.carry(r);
      s2.taps[vt2].add(test_neuron, -1.0);  // v -= test
    }
    FeedForwardNetwork l2 = s2.build(l1.output_dim());
    chain.append(compose(l2, l1));
    std::vector<detail::AffineRow> fold;
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(xt2[t], 1.0);
      fold.push_back(std::move(r));
    }
    for (int t = 0; t < d; ++t) {
      detail::AffineRow r;
      r.add(p2t2[t], 1.0);
      fold.push_back(std::move(r));
    }
    {
      detail::AffineRow r;
      r.add(vt2, 1.0);
      fold.push_back(std::move(r));
    }
    chain.append(detail::selector_from_rows(l2.output_dim(), fold));
  }
  // combine layer: 1 - sigma(1 - v)
  {
    detail::RawStage sc;
    const std::size_t n0 = sc.neurons.size();
    detail::AffineRow r;
    r.bias = 1.0;
    r.add(2 * d, -1.0);
    sc.neurons.push_back(std::move(r));
    detail::AffineRow tap;
    tap.bias = 1.0;
    tap.add(n0, -1.0);
    sc.taps.push_back(std::move(tap));
    chain.append(sc.build(chain.outputs()));
  }

  const std::size_t r_claim = 2 * d * d + 6 * d + 2;
  FeedForwardNetwork net = chain.finish(Matrix::identity(1), Vec{0.0});
  net = pad_depth(net, 5 * static_cast<std::size_t>(Md));
  out.net = pad_to_width(net, r_claim);
  out.claim = {5 * static_cast<std::size_t>(Md), r_claim};
  out.value_bound = 1.0;
  if (out.net.depth() != 5 * static_cast<std::size_t>(Md))
    throw ConstructionError("build_check_net_deep: depth mismatch");
  return out;
}

/// Lemma-supple15 deep masked product.
inline BuiltNetwork build_masked_net_deep(const DeepBuildConfig &cfg,
                                          const Vec &shift = {},
                                          std::span<const BCoefficients> bcs = {}) {
  const SmoothFunction &f = cfg.target;
  const int d = f.dim, q = f.q;
  const int Md = static_cast<int>(cfg.Md());

  BuiltNetwork fnet = build_fnet_deep_P2(cfg, shift, bcs);
  BuiltNetwork check = build_check_net_deep(cfg, shift);
  BuiltNetwork weight = build_weight_net_deep(cfg, shift);

  BuiltNetwork out;
  out.notes = fnet.notes;
  for (auto &n : check.notes) out.notes.push_back(n);
  for (auto &n : weight.notes) out.notes.push_back(n);

  const double B_true = fnet.value_bound;
  const double R_ind = cfg.indicator_R();
  if (B_true > R_ind)
    out.notes.push_back("deep gate bound " + std::to_string(B_true) +
                        " exceeds B_M = " + std::to_string(R_ind) +
                        " (f_test |s| contract)");

  // the lemma pins only the total depth; the gate sits right after the
  // members and the remaining budget deepens the final product
  const int B_Mp_deep = cfg.poly_R_deep();
  const std::size_t L_total =
      5 * static_cast<std::size_t>(Md) +
      static_cast<std::size_t>(B_Mp_deep) *
          static_cast<std::size_t>(std::ceil(std::log2(std::max(q, d) + 1))) +
      static_cast<std::size_t>(cfg.poly_R_wide());
  const std::size_t pre_depth =
      std::max({fnet.net.depth(), check.net.depth(), weight.net.depth()});
  if (L_total < pre_depth + 2)
    throw ConstructionError("build_masked_net_deep: no depth budget for the gate");
  const int R_mult = static_cast<int>(L_total - pre_depth - 1);
  FeedForwardNetwork pre = parallelize(
      {pad_depth(fnet.net, pre_depth), pad_depth(check.net, pre_depth),
       pad_depth(weight.net, pre_depth)});
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
  chain.append(gatestage);
  const double s_w = d == 1 ? 1.25 : 1.75;
  const double s_v = 1.05 * std::max(fnet.inner_value_bound, 1.0);
  chain.append(detail::build_mult_scaled(R_mult, s_v, s_w));
  out.net = chain.finish(Matrix::identity(1), Vec{0.0});

  const std::size_t L_claim = L_total;
  const std::size_t nb = multiindices_up_to(d, q).size();
  const int ced = ceil_exp_d(d);
  const std::size_t r_bound =
      std::max<std::size_t>(
          10 * d + 4 * d * d + 2 * nb * (2 * (4 + 2 * ced) + 5 + 2 * d),
          18 * (q + 1) * nb) +
      6 * d * d + 20 * d + 2;
  out.claim = {L_claim, r_bound};
  out.value_bound = B_true;
  out.inner_value_bound = fnet.inner_value_bound;
  if (out.net.depth() != L_claim)
    throw ConstructionError("build_masked_net_deep: depth mismatch");
  if (out.net.max_width() > r_bound)
    out.notes.push_back("deep masked width " + std::to_string(out.net.max_width()) +
                        " exceeds the supple15 bound " + std::to_string(r_bound));
  return out;
}

/// Theorem 2b: the 2^d-shift sum of deep masked networks.
inline BuiltNetwork build_deep_approximator(const DeepBuildConfig &cfg) {
  cfg.validate();
  const int d = cfg.target.dim;
  const auto partitions = shifted_partitions(cfg.a(), cfg.M, d, 2);
  std::vector<FeedForwardNetwork> members;
  BuiltNetwork out;
  for (const auto &p : partitions) {
    BuiltNetwork m = build_masked_net_deep(cfg, p.shift());
    for (auto &n : m.notes) out.notes.push_back(n);
    out.value_bound += m.value_bound;
    members.push_back(std::move(m.net));
  }
  Vec ones(members.size(), 1.0);
  out.net = linear_combination(std::span<const FeedForwardNetwork>(members), ones);

  const int q = cfg.target.q;
  const std::size_t L_claim =
      5 * static_cast<std::size_t>(cfg.Md()) +
      static_cast<std::size_t>(cfg.poly_R_deep()) *
          static_cast<std::size_t>(std::ceil(std::log2(std::max(q, d) + 1))) +
      static_cast<std::size_t>(cfg.poly_R_wide());
  const int ced = ceil_exp_d(d);
  const std::size_t r_bound =
      132 * (std::size_t{1} << d) * static_cast<std::size_t>(ced) *
      multiindices_up_to(d, q).size() *
      static_cast<std::size_t>(std::max(q + 1, d * d));
  out.claim = {L_claim, r_bound};
  if (out.net.depth() != L_claim)
    throw ConstructionError("build_deep_approximator: depth mismatch");
  if (out.net.max_width() > r_bound)
    out.notes.push_back("deep width exceeds the Theorem 2b bound");
  return out;
}

}  // namespace relnet
