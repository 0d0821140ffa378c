#pragma once

#include <map>
#include <string>

#include "relnet/network.hpp"

namespace relnet {

/// Architecture claim L, r: the F(L, r) class a construction lemma places a
/// network in. Built layers never exceed r; pad_to_width realizes r exactly.
struct ArchClaim {
  std::size_t depth = 0;
  std::size_t width = 0;
};

struct BuiltNetwork {
  FeedForwardNetwork net;
  ArchClaim claim;
  std::map<std::string, ProbeTap> taps;
  std::vector<std::string> notes;
  double value_bound = 0.0;        // sup of |output| the builder guarantees, where stated
  double error_bound = 0.0;        // computable conservative gadget error, where stated
  double inner_value_bound = 0.0;  // bound of |output| away from cube boundaries
};

/// Pads all members to the maximal depth, then parallelizes.
inline FeedForwardNetwork parallel_padded(std::span<const FeedForwardNetwork> nets) {
  std::size_t L = 0;
  for (const auto &n : nets) L = std::max(L, n.depth());
  std::vector<FeedForwardNetwork> padded;
  padded.reserve(nets.size());
  for (const auto &n : nets) padded.push_back(pad_depth(n, L));
  return parallelize(padded);
}

/// Builds a network as a chain of stages. Each appended stage is a network
/// consuming the previous stage's output vector; affine selectors melt in
/// without adding depth. Taps record affine functionals of intermediate
/// stage outputs for instrumented evaluation.
class StageChain {
 public:
  explicit StageChain(std::size_t input_dim)
      : net_(FeedForwardNetwork::passthrough(input_dim)) {}

  std::size_t depth() const { return net_.depth(); }
  std::size_t outputs() const { return net_.output_dim(); }

  void append(const FeedForwardNetwork &stage) { net_ = compose(stage, net_); }

  void append_affine(Matrix A, Vec b) {
    append(FeedForwardNetwork::affine(std::move(A), std::move(b)));
  }

  /// Probe for current stage output `index` (valid only if depth() >= 1).
  ProbeTap tap(std::size_t index) const {
    ProbeTap t;
    t.layer = net_.depth();
    const Matrix &ow = net_.output_weights();
    t.w.assign(ow.cols, 0.0);
    for (std::size_t j = 0; j < ow.cols; ++j) t.w[j] = ow.at(index, j);
    t.b = net_.output_bias()[index];
    return t;
  }

  /// Finishes with a replaced output affine map over current stage outputs.
  FeedForwardNetwork finish(Matrix A, Vec b) const {
    FeedForwardNetwork f = FeedForwardNetwork::affine(std::move(A), std::move(b));
    return compose(f, net_);
  }

  const FeedForwardNetwork &current() const { return net_; }

 private:
  FeedForwardNetwork net_;
};

namespace detail {

/// Sparse affine row over the current stage outputs.
struct AffineRow {
  std::vector<std::pair<std::size_t, double>> terms;
  double bias = 0.0;

  void add(std::size_t idx, double c) { terms.push_back({idx, c}); }
};

inline FeedForwardNetwork selector_from_rows(std::size_t in_dim,
                                             std::span<const AffineRow> rows) {
  Matrix A(rows.size(), in_dim);
  Vec b(rows.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (auto [idx, c] : rows[r].terms) A.add(r, idx, c);
    b[r] = rows[r].bias;
  }
  return FeedForwardNetwork::affine(std::move(A), std::move(b));
}

/// One explicit hidden layer: neuron pre-activations as rows over the stage
/// inputs, stage outputs as rows over the new neurons.
struct RawStage {
  std::vector<AffineRow> neurons;
  std::vector<AffineRow> taps;

  /// sigma(v), sigma(-v) pair carrying an affine value; returns the tap index
  /// after commit.
  std::size_t carry(const AffineRow &v) {
    AffineRow neg;
    neg.bias = -v.bias;
    for (auto [i, c] : v.terms) neg.add(i, -c);
    const std::size_t n0 = neurons.size();
    neurons.push_back(v);
    neurons.push_back(std::move(neg));
    AffineRow tap;
    tap.add(n0, 1.0);
    tap.add(n0 + 1, -1.0);
    taps.push_back(std::move(tap));
    return taps.size() - 1;
  }

  FeedForwardNetwork build(std::size_t in_dim) const {
    Matrix A(neurons.size(), in_dim);
    Vec b(neurons.size(), 0.0);
    for (std::size_t r = 0; r < neurons.size(); ++r) {
      for (auto [idx, c] : neurons[r].terms) A.add(r, idx, c);
      b[r] = neurons[r].bias;
    }
    FeedForwardNetwork n;
    n.set_input_dim(in_dim);
    n.push_layer(std::move(A), std::move(b));
    Matrix ow(taps.size(), neurons.size());
    Vec ob(taps.size(), 0.0);
    for (std::size_t r = 0; r < taps.size(); ++r) {
      for (auto [idx, c] : taps[r].terms) ow.add(r, idx, c);
      ob[r] = taps[r].bias;
    }
    n.set_output(std::move(ow), std::move(ob));
    return n;
  }
};

}  // namespace detail

/// Selector matrix: output i = input at indices[i]. Melts into stages.
inline FeedForwardNetwork select_inputs(std::size_t in_dim,
                                        std::span<const std::size_t> indices) {
  Matrix A(indices.size(), in_dim);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= in_dim) throw DimensionError("select_inputs: index out of range");
    A.set(i, indices[i], 1.0);
  }
  return FeedForwardNetwork::affine(std::move(A), Vec(indices.size(), 0.0));
}

}  // namespace relnet
