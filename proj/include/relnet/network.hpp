#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace relnet {

using Vec = std::vector<double>;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Row-sparse matrix, rows = outputs, cols = inputs. The construction
/// lemmata produce mostly block-diagonal layers, so entries are stored per
/// row; the logical (dense) shape still defines the parameter count.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> entries;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r) {}

  void set(std::size_t i, std::size_t j, double v) {
    for (auto &e : entries[i])
      if (e.first == j) {
        e.second = v;
        return;
      }
    if (v != 0.0) entries[i].push_back({static_cast<std::uint32_t>(j), v});
  }
  void add(std::size_t i, std::size_t j, double v) {
    for (auto &e : entries[i])
      if (e.first == j) {
        e.second += v;
        return;
      }
    if (v != 0.0) entries[i].push_back({static_cast<std::uint32_t>(j), v});
  }
  double at(std::size_t i, std::size_t j) const {
    for (const auto &e : entries[i])
      if (e.first == j) return e.second;
    return 0.0;
  }
  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (const auto &row : entries) n += row.size();
    return n;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
  }

  // this * other
  Matrix mul(const Matrix &o) const {
    Matrix r(rows, o.cols);
    Vec buf(o.cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      std::fill(buf.begin(), buf.end(), 0.0);
      for (const auto &[k, v] : entries[i])
        for (const auto &[j, w] : o.entries[k]) buf[j] += v * w;
      for (std::size_t j = 0; j < o.cols; ++j)
        if (buf[j] != 0.0) r.entries[i].push_back({static_cast<std::uint32_t>(j), buf[j]});
    }
    return r;
  }

  Vec apply(std::span<const double> x, const Vec &bias) const {
    Vec y(bias);
    for (std::size_t i = 0; i < rows; ++i) {
      double s = y[i];
      for (const auto &[j, v] : entries[i]) s += v * x[j];
      y[i] = s;
    }
    return y;
  }
};

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

/// Fully connected ReLU network: L hidden layers, affine output map.
/// L = 0 means a plain affine map (used as identity/selector blocks that
/// melt into neighbouring networks without adding depth).
class FeedForwardNetwork {
 public:
  FeedForwardNetwork() = default;

  /// Passthrough network: zero hidden layers, output = x.
  static FeedForwardNetwork passthrough(std::size_t dim) {
    FeedForwardNetwork n;
    n.input_dim_ = dim;
    n.out_w_ = Matrix::identity(dim);
    n.out_b_.assign(dim, 0.0);
    return n;
  }

  /// Affine network: zero hidden layers, output = A x + b.
  static FeedForwardNetwork affine(Matrix A, Vec b) {
    if (A.rows != b.size()) throw DimensionError("affine: rows != bias size");
    FeedForwardNetwork n;
    n.input_dim_ = A.cols;
    n.out_w_ = std::move(A);
    n.out_b_ = std::move(b);
    return n;
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return out_b_.size(); }
  std::size_t depth() const { return weights_.size(); }

  std::size_t layer_width(std::size_t s) const { return biases_[s].size(); }
  std::size_t max_width() const {
    std::size_t w = 0;
    for (const auto &b : biases_) w = std::max(w, b.size());
    return w;
  }
  bool constant_width(std::size_t r) const {
    for (const auto &b : biases_)
      if (b.size() != r) return false;
    return true;
  }

  const Matrix &layer_weights(std::size_t s) const { return weights_[s]; }
  const Vec &layer_bias(std::size_t s) const { return biases_[s]; }
  const Matrix &output_weights() const { return out_w_; }
  const Vec &output_bias() const { return out_b_; }
  Matrix &layer_weights(std::size_t s) { return weights_[s]; }
  Vec &layer_bias(std::size_t s) { return biases_[s]; }
  Matrix &output_weights() { return out_w_; }
  Vec &output_bias() { return out_b_; }

  void push_layer(Matrix w, Vec b) {
    const std::size_t prev = depth() == 0 ? input_dim_ : layer_width(depth() - 1);
    if (w.cols != prev || w.rows != b.size())
      throw DimensionError("push_layer: shape mismatch");
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  }

  void set_output(Matrix w, Vec b) {
    const std::size_t prev = depth() == 0 ? input_dim_ : layer_width(depth() - 1);
    if (w.cols != prev || w.rows != b.size())
      throw DimensionError("set_output: shape mismatch");
    out_w_ = std::move(w);
    out_b_ = std::move(b);
  }

  void set_input_dim(std::size_t d) { input_dim_ = d; }

  Vec evaluate_vector(std::span<const double> x) const {
    if (x.size() != input_dim_)
      throw DimensionError("evaluate: input has length " +
                           std::to_string(x.size()) + ", expected " +
                           std::to_string(input_dim_));
    Vec cur(x.begin(), x.end());
    for (std::size_t s = 0; s < weights_.size(); ++s) {
      Vec nxt = weights_[s].apply(cur, biases_[s]);
      for (double &v : nxt) v = relu(v);
      cur = std::move(nxt);
    }
    return out_w_.apply(cur, out_b_);
  }

  double evaluate(std::span<const double> x) const {
    if (output_dim() != 1)
      throw DimensionError("evaluate: network has vector output");
    return evaluate_vector(x)[0];
  }
  double evaluate(double x) const {
    const double xs[1] = {x};
    return evaluate(std::span<const double>(xs, 1));
  }
  double evaluate(double x, double y) const {
    const double xs[2] = {x, y};
    return evaluate(std::span<const double>(xs, 2));
  }

  /// Number of weight and bias entries of the stored (dense) shape.
  std::size_t stored_entries() const {
    std::size_t n = out_w_.rows * out_w_.cols + out_b_.size();
    for (std::size_t s = 0; s < weights_.size(); ++s)
      n += weights_[s].rows * weights_[s].cols + biases_[s].size();
    return n;
  }

 private:
  std::size_t input_dim_ = 0;
  std::vector<Matrix> weights_;
  std::vector<Vec> biases_;
  Matrix out_w_;
  Vec out_b_;
};

/// Number of weights of a single-output network of class F(L,r) on R^d.
inline std::size_t count_parameters(std::size_t d, std::size_t L, std::size_t r) {
  if (L < 1 || r < 1) throw DimensionError("count_parameters: need L,r >= 1");
  return (d + 1) * r + (L - 1) * (r + 1) * r + (r + 1);
}

/// Melting composition f(g(x)): g's output affine map is multiplied into
/// f's first layer, adding no layer. depth = depth(f) + depth(g).
inline FeedForwardNetwork compose(const FeedForwardNetwork &f,
                                  const FeedForwardNetwork &g) {
  if (f.input_dim() != g.output_dim())
    throw DimensionError("compose: g outputs " + std::to_string(g.output_dim()) +
                         ", f expects " + std::to_string(f.input_dim()));
  FeedForwardNetwork r;
  r.set_input_dim(g.input_dim());
  for (std::size_t s = 0; s < g.depth(); ++s)
    r.push_layer(g.layer_weights(s), g.layer_bias(s));

  if (f.depth() == 0) {
    // f is affine: A_f (V_g h + c_g) + b_f
    Matrix w = f.output_weights().mul(g.output_weights());
    Vec b = f.output_bias();
    Vec fold = f.output_weights().apply(g.output_bias(), Vec(f.output_dim(), 0.0));
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += fold[i];
    r.set_output(std::move(w), std::move(b));
    return r;
  }

  // melt: first layer of f premultiplied by g's output affine map
  Matrix w0 = f.layer_weights(0).mul(g.output_weights());
  Vec b0 = f.layer_bias(0);
  Vec fold = f.layer_weights(0).apply(g.output_bias(), Vec(f.layer_bias(0).size(), 0.0));
  for (std::size_t i = 0; i < b0.size(); ++i) b0[i] += fold[i];
  r.push_layer(std::move(w0), std::move(b0));
  for (std::size_t s = 1; s < f.depth(); ++s)
    r.push_layer(f.layer_weights(s), f.layer_bias(s));
  r.set_output(f.output_weights(), f.output_bias());
  return r;
}

/// Networks of equal depth reading the same input, computed side by side;
/// outputs are concatenated. Hidden weights are block diagonal, the input
/// fans out to every member's first layer.
inline FeedForwardNetwork parallelize(std::span<const FeedForwardNetwork> nets) {
  if (nets.empty()) throw DimensionError("parallelize: no members");
  const std::size_t L = nets[0].depth();
  const std::size_t d = nets[0].input_dim();
  for (const auto &n : nets) {
    if (n.depth() != L) throw DimensionError("parallelize: depth mismatch");
    if (n.input_dim() != d) throw DimensionError("parallelize: input dim mismatch");
  }
  FeedForwardNetwork r;
  r.set_input_dim(d);
  for (std::size_t s = 0; s < L; ++s) {
    std::size_t rows = 0;
    const std::size_t cols = s == 0 ? d : r.layer_width(s - 1);
    for (const auto &n : nets) rows += n.layer_width(s);
    Matrix w(rows, cols);
    Vec b(rows, 0.0);
    std::size_t ro = 0, co = 0;
    for (const auto &n : nets) {
      const Matrix &nw = n.layer_weights(s);
      for (std::size_t i = 0; i < nw.rows; ++i) {
        for (std::size_t j = 0; j < nw.cols; ++j)
          w.set(ro + i, (s == 0 ? 0 : co) + j, nw.at(i, j));
        b[ro + i] = n.layer_bias(s)[i];
      }
      ro += nw.rows;
      if (s > 0) co += n.layer_width(s - 1);
    }
    r.push_layer(std::move(w), std::move(b));
  }
  // concatenated outputs
  std::size_t orows = 0;
  for (const auto &n : nets) orows += n.output_dim();
  const std::size_t ocols = L == 0 ? d : r.layer_width(L - 1);
  Matrix ow(orows, ocols);
  Vec ob(orows, 0.0);
  std::size_t ro = 0, co = 0;
  for (const auto &n : nets) {
    const Matrix &nw = n.output_weights();
    for (std::size_t i = 0; i < nw.rows; ++i) {
      for (std::size_t j = 0; j < nw.cols; ++j)
        ow.set(ro + i, (L == 0 ? 0 : co) + j, nw.at(i, j));
      ob[ro + i] = n.output_bias()[i];
    }
    ro += nw.rows;
    if (L > 0) co += n.layer_width(L - 1);
  }
  r.set_output(std::move(ow), std::move(ob));
  return r;
}

inline FeedForwardNetwork parallelize(std::initializer_list<FeedForwardNetwork> nets) {
  std::vector<FeedForwardNetwork> v(nets);
  return parallelize(std::span<const FeedForwardNetwork>(v));
}

/// Equal-depth members reading disjoint consecutive slices of the input
/// vector; outputs concatenated. Block-diagonal at every layer.
inline FeedForwardNetwork stack(std::span<const FeedForwardNetwork> nets) {
  if (nets.empty()) throw DimensionError("stack: no members");
  const std::size_t L = nets[0].depth();
  std::size_t d = 0;
  for (const auto &n : nets) {
    if (n.depth() != L) throw DimensionError("stack: depth mismatch");
    d += n.input_dim();
  }
  FeedForwardNetwork r;
  r.set_input_dim(d);
  for (std::size_t s = 0; s < L; ++s) {
    std::size_t rows = 0;
    std::size_t cols = 0;
    for (const auto &n : nets) {
      rows += n.layer_width(s);
      cols += s == 0 ? n.input_dim() : n.layer_width(s - 1);
    }
    Matrix w(rows, cols);
    Vec b(rows, 0.0);
    std::size_t ro = 0, co = 0;
    for (const auto &n : nets) {
      const Matrix &nw = n.layer_weights(s);
      for (std::size_t i = 0; i < nw.rows; ++i) {
        for (std::size_t j = 0; j < nw.cols; ++j) w.set(ro + i, co + j, nw.at(i, j));
        b[ro + i] = n.layer_bias(s)[i];
      }
      ro += nw.rows;
      co += s == 0 ? n.input_dim() : n.layer_width(s - 1);
    }
    r.push_layer(std::move(w), std::move(b));
  }
  std::size_t orows = 0, ocols = 0;
  for (const auto &n : nets) {
    orows += n.output_dim();
    ocols += L == 0 ? n.input_dim() : n.layer_width(L - 1);
  }
  Matrix ow(orows, ocols);
  Vec ob(orows, 0.0);
  std::size_t ro = 0, co = 0;
  for (const auto &n : nets) {
    const Matrix &nw = n.output_weights();
    for (std::size_t i = 0; i < nw.rows; ++i) {
      for (std::size_t j = 0; j < nw.cols; ++j) ow.set(ro + i, co + j, nw.at(i, j));
      ob[ro + i] = n.output_bias()[i];
    }
    ro += nw.rows;
    co += L == 0 ? n.input_dim() : n.layer_width(L - 1);
  }
  r.set_output(std::move(ow), std::move(ob));
  return r;
}

inline FeedForwardNetwork stack(std::initializer_list<FeedForwardNetwork> nets) {
  std::vector<FeedForwardNetwork> v(nets);
  return stack(std::span<const FeedForwardNetwork>(v));
}

/// f_id blocks appended until depth = target_L; evaluation unchanged.
/// Appended layers have 2 neurons per carried output scalar.
inline FeedForwardNetwork pad_depth(const FeedForwardNetwork &net, std::size_t target_L) {
  if (target_L < net.depth())
    throw DimensionError("pad_depth: target depth below current depth");
  FeedForwardNetwork r = net;
  const std::size_t m = net.output_dim();
  for (std::size_t t = net.depth(); t < target_L; ++t) {
    const Matrix &ow = r.output_weights();
    const Vec &ob = r.output_bias();
    Matrix w(2 * m, ow.cols);
    Vec b(2 * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < ow.cols; ++j) {
        w.set(2 * i, j, ow.at(i, j));
        w.set(2 * i + 1, j, -ow.at(i, j));
      }
      b[2 * i] = ob[i];
      b[2 * i + 1] = -ob[i];
    }
    r.push_layer(std::move(w), std::move(b));
    Matrix now(m, 2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      now.set(i, 2 * i, 1.0);
      now.set(i, 2 * i + 1, -1.0);
    }
    r.set_output(std::move(now), Vec(m, 0.0));
  }
  return r;
}

/// Sum_i c_i * net_i(x) + bias for equal-depth single/multi-output members;
/// members with unequal depth are padded first by the caller.
inline FeedForwardNetwork linear_combination(std::span<const FeedForwardNetwork> nets,
                                             std::span<const double> coeffs,
                                             double bias = 0.0) {
  if (nets.size() != coeffs.size())
    throw DimensionError("linear_combination: size mismatch");
  for (const auto &n : nets)
    if (n.output_dim() != 1)
      throw DimensionError("linear_combination: members must be scalar");
  FeedForwardNetwork par = parallelize(nets);
  Matrix ow(1, par.output_weights().cols);
  Vec ob(1, bias);
  std::size_t ro = 0;
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const Matrix &nw = nets[k].output_weights();
    std::size_t co = 0;
    for (std::size_t t = 0; t < k; ++t)
      co += nets[t].depth() == 0 ? 0 : nets[t].layer_width(nets[t].depth() - 1);
    for (std::size_t j = 0; j < nw.cols; ++j)
      ow.add(0, (par.depth() == 0 ? j : co + j), coeffs[k] * nw.at(0, j));
    ob[0] += coeffs[k] * nets[k].output_bias()[0];
    ro += 1;
  }
  par.set_output(std::move(ow), std::move(ob));
  return par;
}

/// Pads every hidden layer with zero-weight neurons up to constant width r.
inline FeedForwardNetwork pad_to_width(const FeedForwardNetwork &net, std::size_t r) {
  FeedForwardNetwork out;
  out.set_input_dim(net.input_dim());
  for (std::size_t s = 0; s < net.depth(); ++s) {
    const Matrix &w = net.layer_weights(s);
    if (w.rows > r)
      throw ConstructionError("pad_to_width: layer " + std::to_string(s) +
                              " has width " + std::to_string(w.rows) +
                              " > target " + std::to_string(r));
    const std::size_t cols = s == 0 ? net.input_dim() : r;
    Matrix nw(r, cols);
    Vec nb(r, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
      for (std::size_t j = 0; j < w.cols; ++j) nw.set(i, j, w.at(i, j));
      nb[i] = net.layer_bias(s)[i];
    }
    out.push_layer(std::move(nw), std::move(nb));
  }
  Matrix ow(net.output_dim(), net.depth() == 0 ? net.input_dim() : r);
  for (std::size_t i = 0; i < net.output_weights().rows; ++i)
    for (std::size_t j = 0; j < net.output_weights().cols; ++j)
      ow.set(i, j, net.output_weights().at(i, j));
  out.set_output(std::move(ow), net.output_bias());
  return out;
}

/// Named probe: affine functional of the post-activation values of hidden
/// layer `layer` (1-based; evaluation-mode only, never part of the weights).
struct ProbeTap {
  std::size_t layer = 0;
  Vec w;
  double b = 0.0;
};

inline Vec evaluate_with_probes(const FeedForwardNetwork &net,
                                std::span<const double> x,
                                std::span<const ProbeTap> taps,
                                Vec *output = nullptr) {
  Vec cur(x.begin(), x.end());
  Vec vals(taps.size(), 0.0);
  for (std::size_t s = 0; s < net.depth(); ++s) {
    Vec nxt = net.layer_weights(s).apply(cur, net.layer_bias(s));
    for (double &v : nxt) v = relu(v);
    cur = std::move(nxt);
    for (std::size_t t = 0; t < taps.size(); ++t) {
      if (taps[t].layer != s + 1) continue;
      double acc = taps[t].b;
      for (std::size_t j = 0; j < taps[t].w.size(); ++j) acc += taps[t].w[j] * cur[j];
      vals[t] = acc;
    }
  }
  if (output) *output = net.output_weights().apply(cur, net.output_bias());
  return vals;
}

}  // namespace relnet
