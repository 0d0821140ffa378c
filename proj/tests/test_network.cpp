#include <gtest/gtest.h>

#include <random>

#include "relnet/network.hpp"
#include "relnet/primitives.hpp"
#include "relnet/serialize.hpp"

using namespace relnet;

namespace {

FeedForwardNetwork random_net(std::size_t d, std::vector<std::size_t> widths,
                              std::size_t out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeedForwardNetwork n;
  n.set_input_dim(d);
  std::size_t prev = d;
  for (std::size_t w : widths) {
    Matrix m(w, prev);
    Vec b(w);
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = 0; j < prev; ++j) m.set(i, j, u(rng));
    for (double &v : b) v = u(rng);
    n.push_layer(std::move(m), std::move(b));
    prev = w;
  }
  Matrix ow(out, prev);
  Vec ob(out);
  for (std::size_t i = 0; i < out; ++i)
    for (std::size_t j = 0; j < prev; ++j) ow.set(i, j, u(rng));
  for (double &v : ob) v = u(rng);
  n.set_output(std::move(ow), std::move(ob));
  return n;
}

// Straight-loop recomputation of the Eq.-style recursion, independent of the
// Matrix::apply path.
double reference_forward(const FeedForwardNetwork &n, std::span<const double> x) {
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t s = 0; s < n.depth(); ++s) {
    std::vector<double> nxt(n.layer_width(s), 0.0);
    for (std::size_t i = 0; i < nxt.size(); ++i) {
      double acc = n.layer_bias(s)[i];
      for (std::size_t j = 0; j < cur.size(); ++j)
        acc += n.layer_weights(s).at(i, j) * cur[j];
      nxt[i] = acc > 0 ? acc : 0.0;
    }
    cur = std::move(nxt);
  }
  double out = n.output_bias()[0];
  for (std::size_t j = 0; j < cur.size(); ++j)
    out += n.output_weights().at(0, j) * cur[j];
  return out;
}

}  // namespace

TEST(Evaluate, SingleNeuronRelu) {
  FeedForwardNetwork n;
  n.set_input_dim(1);
  Matrix w(1, 1);
  w.set(0, 0, 1.0);
  n.push_layer(std::move(w), Vec{0.0});
  Matrix ow(1, 1);
  ow.set(0, 0, 1.0);
  n.set_output(std::move(ow), Vec{0.0});
  EXPECT_DOUBLE_EQ(n.evaluate(3.0), 3.0);
  EXPECT_DOUBLE_EQ(n.evaluate(-2.0), 0.0);
}

TEST(Evaluate, IdentityOnNegative) {
  FeedForwardNetwork id = build_identity(1, 1);
  EXPECT_DOUBLE_EQ(id.evaluate(-2.5), -2.5);
}

TEST(Evaluate, MatchesStraightLoop) {
  FeedForwardNetwork n = random_net(3, {7, 5}, 1, 42);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    double x[3] = {u(rng), u(rng), u(rng)};
    double a = n.evaluate(std::span<const double>(x, 3));
    double b = reference_forward(n, std::span<const double>(x, 3));
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(b)));
  }
}

TEST(Evaluate, DimensionMismatchRejected) {
  FeedForwardNetwork id = build_identity(1, 2);
  double x[1] = {0.0};
  EXPECT_THROW(id.evaluate_vector(std::span<const double>(x, 1)), DimensionError);
}

TEST(Compose, MeltedWeightsMatchFigure) {
  // f(x) = beta_f sigma(alpha_f x), g(x) = beta_g sigma(alpha_g x)
  auto one_neuron = [](double alpha, double beta) {
    FeedForwardNetwork n;
    n.set_input_dim(1);
    Matrix w(1, 1);
    w.set(0, 0, alpha);
    n.push_layer(std::move(w), Vec{0.0});
    Matrix ow(1, 1);
    ow.set(0, 0, beta);
    n.set_output(std::move(ow), Vec{0.0});
    return n;
  };
  FeedForwardNetwork f = one_neuron(2.0, 3.0);
  FeedForwardNetwork g = one_neuron(1.0, 4.0);
  FeedForwardNetwork fg = compose(f, g);
  ASSERT_EQ(fg.depth(), 2u);
  EXPECT_DOUBLE_EQ(fg.layer_weights(0).at(0, 0), 1.0);   // alpha_g
  EXPECT_DOUBLE_EQ(fg.layer_weights(1).at(0, 0), 8.0);   // beta_g * alpha_f
  EXPECT_DOUBLE_EQ(fg.output_weights().at(0, 0), 3.0);   // beta_f
  for (double x : {-1.0, 0.3, 2.0})
    EXPECT_DOUBLE_EQ(fg.evaluate(x), f.evaluate(g.evaluate(x)));
}

TEST(Compose, IdentityLeavesFunctionUnchanged) {
  FeedForwardNetwork g = random_net(1, {4, 4}, 1, 5);
  FeedForwardNetwork c = compose(build_identity(1, 1), g);
  for (int i = 0; i <= 100; ++i) {
    double x = -2.0 + 4.0 * i / 100.0;
    EXPECT_NEAR(c.evaluate(x), g.evaluate(x), 1e-12 * std::max(1.0, std::abs(g.evaluate(x))));
  }
  EXPECT_EQ(c.depth(), g.depth() + 1);
}

TEST(Compose, SquareAfterIdentity) {
  FeedForwardNetwork sq = build_square(4, 2.0);
  FeedForwardNetwork c = compose(sq, build_identity(3, 1));
  EXPECT_NEAR(c.evaluate(0.7), sq.evaluate(0.7), 1e-12);
  EXPECT_EQ(c.depth(), sq.depth() + 3);
}

TEST(Compose, ArityMismatchRejected) {
  FeedForwardNetwork f = build_identity(1, 2);
  FeedForwardNetwork g = build_identity(1, 1);
  EXPECT_THROW(compose(f, g), DimensionError);
}

TEST(Compose, DepthAndWidthLaw) {
  FeedForwardNetwork f = random_net(1, {5, 5}, 1, 1);
  FeedForwardNetwork g = random_net(1, {3, 3, 3}, 1, 2);
  FeedForwardNetwork c = compose(f, g);
  EXPECT_EQ(c.depth(), f.depth() + g.depth());
  EXPECT_EQ(c.max_width(), std::max(f.max_width(), g.max_width()));
}

TEST(Parallelize, TwoIdentities) {
  FeedForwardNetwork id = build_identity(1, 1);
  FeedForwardNetwork p = parallelize({id, id});
  double x[1] = {1.0};
  Vec y = p.evaluate_vector(std::span<const double>(x, 1));
  ASSERT_EQ(y.size(), 2u);
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_DOUBLE_EQ(y[1], 1.0);
}

TEST(Parallelize, WidthsAdd) {
  FeedForwardNetwork a = random_net(2, {5, 5}, 1, 3);
  FeedForwardNetwork b = random_net(2, {3, 3}, 1, 4);
  FeedForwardNetwork p = parallelize({a, b});
  EXPECT_EQ(p.depth(), 2u);
  EXPECT_TRUE(p.constant_width(8));
}

TEST(Parallelize, MemberwiseEquivalence) {
  std::vector<FeedForwardNetwork> members;
  for (int k = 0; k < 4; ++k) members.push_back(random_net(2, {6, 6}, 1, 100 + k));
  FeedForwardNetwork p = parallelize(std::span<const FeedForwardNetwork>(members));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    double x[2] = {u(rng), u(rng)};
    Vec y = p.evaluate_vector(std::span<const double>(x, 2));
    for (int k = 0; k < 4; ++k) {
      double ref = members[k].evaluate(std::span<const double>(x, 2));
      EXPECT_NEAR(y[k], ref, 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(Parallelize, DepthMismatchRejected) {
  FeedForwardNetwork a = build_identity(1, 1);
  FeedForwardNetwork b = build_identity(2, 1);
  EXPECT_THROW(parallelize({a, b}), DimensionError);
}

TEST(PadDepth, PreservesValuesAndSetsDepth) {
  FeedForwardNetwork id = build_identity(1, 1);
  FeedForwardNetwork p = pad_depth(id, 5);
  EXPECT_EQ(p.depth(), 5u);
  for (int i = 0; i <= 50; ++i) {
    double x = -1.0 + 2.0 * i / 50.0;
    EXPECT_DOUBLE_EQ(p.evaluate(x), x);
  }
  FeedForwardNetwork sq = build_square(3, 1.0);
  FeedForwardNetwork sp = pad_depth(sq, 7);
  EXPECT_EQ(sp.depth(), 7u);
  for (int i = 0; i <= 50; ++i) {
    double x = -1.0 + 2.0 * i / 50.0;
    EXPECT_NEAR(sp.evaluate(x), sq.evaluate(x), 1e-12);
  }
  EXPECT_EQ(pad_depth(random_net(1, {3}, 1, 11), 9).depth(), 9u);
  EXPECT_THROW(pad_depth(sq, 1), DimensionError);
}

TEST(CountParameters, Formula) {
  EXPECT_EQ(count_parameters(1, 1, 1), 4u);
  EXPECT_EQ(count_parameters(4, 2, 5), 61u);
}

TEST(CountParameters, MatchesStoredEntries) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> ud(1, 5), uL(1, 4), ur(1, 8);
  for (int t = 0; t < 20; ++t) {
    std::size_t d = ud(rng), L = uL(rng), r = ur(rng);
    FeedForwardNetwork n = random_net(d, std::vector<std::size_t>(L, r), 1, 1000 + t);
    EXPECT_EQ(n.stored_entries(), count_parameters(d, L, r));
  }
}

TEST(Serialize, RoundTripIdentity) {
  FeedForwardNetwork id = build_identity(1, 1);
  FeedForwardNetwork r = deserialize(serialize(id));
  EXPECT_EQ(serialize(r), serialize(id));
}

TEST(Serialize, RoundTripSquareBitExact) {
  FeedForwardNetwork sq = build_square(6, 2.0);
  FeedForwardNetwork r = deserialize(serialize(sq));
  for (int i = 0; i <= 1000; ++i) {
    double x = -2.0 + 4.0 * i / 1000.0;
    double a = sq.evaluate(x), b = r.evaluate(x);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0) << "x = " << x;
  }
}

TEST(Serialize, RandomWeightsBitExact) {
  FeedForwardNetwork n = random_net(3, {9, 4}, 2, 77);
  FeedForwardNetwork r = deserialize(serialize(n));
  for (std::size_t s = 0; s < n.depth(); ++s) {
    for (std::size_t i = 0; i < n.layer_weights(s).rows; ++i)
      for (std::size_t j = 0; j < n.layer_weights(s).cols; ++j)
        EXPECT_EQ(n.layer_weights(s).at(i, j), r.layer_weights(s).at(i, j));
    EXPECT_EQ(n.layer_bias(s), r.layer_bias(s));
  }
  for (std::size_t i = 0; i < n.output_weights().rows; ++i)
    for (std::size_t j = 0; j < n.output_weights().cols; ++j)
      EXPECT_EQ(n.output_weights().at(i, j), r.output_weights().at(i, j));
}

TEST(Serialize, MismatchedWidthsRejected) {
  FeedForwardNetwork id = build_identity(1, 1);
  std::string doc = serialize(id);
  // corrupt: claim width 3 while layer matrices stay 2-wide
  auto pos = doc.find("\"widths\":[2]");
  ASSERT_NE(pos, std::string::npos);
  doc.replace(pos, 12, "\"widths\":[3]");
  EXPECT_THROW(deserialize(doc), ParseError);
  EXPECT_THROW(deserialize("{\"version\":1"), ParseError);
  EXPECT_THROW(deserialize("{\"version\":2}"), ParseError);
}

TEST(Probes, TapReadsIntermediateValue) {
  // tap on the identity chain must reproduce the input
  FeedForwardNetwork id3 = build_identity(3, 1);
  ProbeTap tap;
  tap.layer = 2;
  tap.w = {1.0, -1.0};
  tap.b = 0.0;
  for (double x : {-1.5, 0.0, 2.25}) {
    double xv[1] = {x};
    Vec vals = evaluate_with_probes(id3, std::span<const double>(xv, 1),
                                    std::span<const ProbeTap>(&tap, 1));
    EXPECT_DOUBLE_EQ(vals[0], x);
  }
}

TEST(LinearCombination, SumsMembers) {
  FeedForwardNetwork a = build_square(3, 1.0);
  FeedForwardNetwork b = build_square(3, 1.0);
  std::vector<FeedForwardNetwork> mem{a, b};
  double c[2] = {1.0, -1.0};
  FeedForwardNetwork s = linear_combination(std::span<const FeedForwardNetwork>(mem),
                                            std::span<const double>(c, 2), 0.25);
  EXPECT_NEAR(s.evaluate(0.5), 0.25, 1e-13);
}
