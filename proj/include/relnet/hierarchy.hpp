#pragma once

#include <cmath>

#include "relnet/approx_deep.hpp"
#include "relnet/approx_wide.hpp"

namespace relnet {

/// One component function g_j^{(i)} of a hierarchical composition model.
struct HcmNode {
  SmoothFunction g;   // arity = g.dim
  int M = 2;          // grid resolution M_{j,i} for the approximators
  std::vector<int> select;  // level 1 only: pi indices into the input vector
};

/// Tree of (p, K)-smooth component functions: levels[0] is level 1 (reads
/// selected input coordinates); each higher level consumes the previous
/// level's outputs in contiguous arity blocks.
struct HierarchicalCompositionModel {
  int input_dim = 1;
  double domain_radius = 1.0;  // model domain [-a, a]^d
  std::vector<std::vector<HcmNode>> levels;

  int level_count() const { return static_cast<int>(levels.size()); }

  void validate() const {
    if (levels.empty()) throw ConstructionError("hcm: at least one level required");
    if (levels.back().size() != 1)
      throw ConstructionError("hcm: the top level must hold exactly one node");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      std::size_t consumed = 0;
      for (const auto &n : levels[i]) {
        if (i == 0) {
          if (n.select.size() != static_cast<std::size_t>(n.g.dim))
            throw ConstructionError("hcm: level-1 selector arity mismatch");
          for (int idx : n.select)
            if (idx < 0 || idx >= input_dim)
              throw ConstructionError("hcm: selector index out of range");
        } else {
          consumed += static_cast<std::size_t>(n.g.dim);
        }
      }
      if (i > 0 && consumed != levels[i - 1].size())
        throw ConstructionError(
            "hcm: level " + std::to_string(i + 1) + " consumes " +
            std::to_string(consumed) + " inputs, previous level provides " +
            std::to_string(levels[i - 1].size()));
    }
  }

  /// ~N_i counts per level and flat indices N_j^{(i)} (1-based flat order).
  std::vector<std::size_t> level_counts() const {
    std::vector<std::size_t> c;
    for (const auto &lvl : levels) c.push_back(lvl.size());
    return c;
  }

  double max_p() const {
    double p = 0.0;
    for (const auto &lvl : levels)
      for (const auto &n : lvl) p = std::max(p, n.g.p);
    return p;
  }
  int max_arity() const {
    int k = 0;
    for (const auto &lvl : levels)
      for (const auto &n : lvl) k = std::max(k, n.g.dim);
    return k;
  }
  double lipschitz() const {
    double c = 1.0;
    for (const auto &lvl : levels)
      for (const auto &n : lvl) c = std::max(c, n.g.lipschitz);
    return c;
  }
  double g_max() const {
    double m = 1.0;
    for (const auto &lvl : levels)
      for (const auto &n : lvl)
        m = std::max(m, n.g.sup_bound(2.0 * std::max(domain_radius, 1.0)));
    return m;
  }
};

/// Recursive bottom-up evaluation of the model.
inline double evaluate_model(const HierarchicalCompositionModel &model,
                             std::span<const double> x) {
  Vec cur(x.begin(), x.end());
  for (std::size_t i = 0; i < model.levels.size(); ++i) {
    Vec next;
    std::size_t off = 0;
    for (const auto &n : model.levels[i]) {
      Vec args;
      if (i == 0) {
        for (int idx : n.select) args.push_back(cur[idx]);
      } else {
        for (int t = 0; t < n.g.dim; ++t) args.push_back(cur[off + t]);
        off += static_cast<std::size_t>(n.g.dim);
      }
      next.push_back(n.g.value(args));
    }
    cur = std::move(next);
  }
  return cur[0];
}

/// Node radius per the proofs' [-2 max{g_max, a}, 2 max{g_max, a}] convention.
inline double node_radius(const HierarchicalCompositionModel &model) {
  return 2.0 * std::max(model.g_max(), std::max(model.domain_radius, 1.0));
}

struct HierarchyBuild {
  FeedForwardNetwork net;
  ArchClaim claim;
  std::vector<std::string> notes;
  std::vector<std::size_t> node_depths;
  std::map<std::string, ProbeTap> taps;
};

/// Theorem 3a: level-by-level parallel composition of wide approximators,
/// every node padded to the common member depth L_0; depth is exactly l L_0.
inline HierarchyBuild build_t1(const HierarchicalCompositionModel &model) {
  model.validate();
  const double a_node = node_radius(model);
  const int l = model.level_count();

  // L_0 from the global maxima, as in the Theorem 3a proof
  double maxlog = 0.0;
  for (const auto &lvl : model.levels)
    for (const auto &n : lvl)
      maxlog = std::max(maxlog, 2.0 * n.g.p * std::log(double(n.M)));
  const int B_global = static_cast<int>(std::ceil(maxlog / std::log(4.0)));
  const int Kmax = model.max_arity();
  const double pmax = model.max_p();
  const std::size_t L0 =
      5 + static_cast<std::size_t>(B_global) *
              (static_cast<std::size_t>(
                   std::ceil(std::log2(std::max(double(Kmax), pmax) + 1.0))) +
               1);

  HierarchyBuild out;
  FeedForwardNetwork current = FeedForwardNetwork::passthrough(model.input_dim);
  std::size_t width_bound = 0;
  for (int i = 0; i < l; ++i) {
    std::vector<FeedForwardNetwork> members;
    std::size_t level_width = 0;
    std::size_t in_off = 0;
    for (const auto &node : model.levels[i]) {
      WideBuildConfig cfg;
      cfg.target = node.g;
      cfg.a_user = a_node;
      cfg.M = node.M;
      BuiltNetwork b = build_wide_approximator(cfg);
      for (auto &nt : b.notes) out.notes.push_back(nt);
      out.node_depths.push_back(b.net.depth());
      FeedForwardNetwork padded = pad_depth(b.net, L0);
      // wire the node inputs: level 1 reads pi-selected coordinates,
      // higher levels read contiguous slices of the previous outputs
      std::vector<std::size_t> idx;
      if (i == 0) {
        for (int s : node.select) idx.push_back(static_cast<std::size_t>(s));
      } else {
        for (int t = 0; t < node.g.dim; ++t) idx.push_back(in_off + t);
        in_off += static_cast<std::size_t>(node.g.dim);
      }
      members.push_back(
          compose(padded, select_inputs(current.output_dim(), idx)));
      level_width += padded.max_width();
    }
    width_bound = std::max(width_bound, level_width);
    current = compose(parallelize(std::span<const FeedForwardNetwork>(members)),
                      current);
  }
  out.net = std::move(current);
  out.claim = {static_cast<std::size_t>(l) * L0, width_bound};
  if (out.net.depth() != static_cast<std::size_t>(l) * L0)
    throw ConstructionError("build_t1: depth != l * L0");
  return out;
}

/// Theorem 3b: sequential deep approximators with identity rails carrying the
/// input (2d neurons) and every already computed node value (2 each).
/// Probe taps: "rail_x_t" and "rail_h_m" after each stage.
inline HierarchyBuild build_t2(const HierarchicalCompositionModel &model) {
  model.validate();
  const double a_node = node_radius(model);
  const int d = model.input_dim;
  const int l = model.level_count();

  HierarchyBuild out;
  StageChain chain(d);
  // running outputs: x (d), then one rail per computed node value
  chain.append(FeedForwardNetwork::passthrough(d));
  std::size_t computed = 0;
  std::size_t width_bound = 0;
  std::map<std::string, ProbeTap> taps;
  std::size_t flat = 0;
  for (int i = 0; i < l; ++i) {
    std::size_t in_off = 0;
    for (const auto &node : model.levels[i]) {
      DeepBuildConfig cfg;
      cfg.target = node.g;
      cfg.a_user = a_node;
      cfg.M = node.M;
      BuiltNetwork b = build_deep_approximator(cfg);
      for (auto &nt : b.notes) out.notes.push_back(nt);
      out.node_depths.push_back(b.net.depth());
      // stage: [deep net on selected inputs] parallel [id rails for x and
      // all previously computed values]
      std::vector<std::size_t> idx;
      if (i == 0) {
        for (int s : node.select) idx.push_back(static_cast<std::size_t>(s));
      } else {
        for (int t = 0; t < node.g.dim; ++t) idx.push_back(d + in_off + t);
        in_off += static_cast<std::size_t>(node.g.dim);
      }
      FeedForwardNetwork member =
          compose(b.net, select_inputs(chain.outputs(), idx));
      FeedForwardNetwork rails = build_identity(1, d + computed);
      rails = pad_depth(rails, member.depth());
      // rails read outputs 0..d+computed-1
      std::vector<std::size_t> rail_idx;
      for (std::size_t t = 0; t < d + computed; ++t) rail_idx.push_back(t);
      FeedForwardNetwork rails_sel =
          compose(rails, select_inputs(chain.outputs(), rail_idx));
      chain.append(parallelize({rails_sel, member}));
      ++computed;
      ++flat;
      for (int t = 0; t < d; ++t)
        taps["rail_x_" + std::to_string(flat) + "_" + std::to_string(t)] =
            chain.tap(t);
      width_bound = std::max(width_bound,
                             b.net.max_width() + 2 * (d + computed - 1) + 2);
    }
  }
  // output: the last computed value
  Matrix sel(1, chain.outputs());
  sel.set(0, chain.outputs() - 1, 1.0);
  out.net = chain.finish(std::move(sel), Vec{0.0});
  out.claim = {out.net.depth(), width_bound};
  out.taps = std::move(taps);
  return out;
}

}  // namespace relnet
