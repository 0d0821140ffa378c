#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "relnet/primitives.hpp"

using namespace relnet;

namespace {

// Independent oracle for the tooth function and the interpolant S_R.
double tooth(double x) { return x <= 0.5 ? 2.0 * x : 2.0 * (1.0 - x); }

double tooth_iter(int s, double x) {
  for (int i = 0; i < s; ++i) x = tooth(x);
  return x;
}

double S_R(int R, double x) {
  double v = x;
  for (int s = 1; s <= R; ++s) v -= tooth_iter(s, x) / std::pow(2.0, 2.0 * s);
  return v;
}

double sq_oracle(int R, double a, double x) {
  return 4.0 * a * a * S_R(R, x / (2.0 * a) + 0.5) - 2.0 * a * x - a * a;
}

}  // namespace

TEST(Square, OracleAgreesWithNetwork) {
  for (int R : {1, 2, 5}) {
    for (double a : {1.0, 3.0}) {
      FeedForwardNetwork sq = build_square(R, a);
      for (int i = 0; i <= 200; ++i) {
        double x = -a + 2.0 * a * i / 200.0;
        EXPECT_NEAR(sq.evaluate(x), sq_oracle(R, a, x), 1e-11 * a * a);
      }
    }
  }
}

TEST(Square, ZeroIsExact) {
  for (int R : {1, 4, 9}) {
    for (double a : {1.0, 2.0, 5.0}) EXPECT_EQ(build_square(R, a).evaluate(0.0), 0.0);
  }
}

TEST(Square, InterpolationNodeExact) {
  // f_tran(x) = k/2^R gives f_sq(x) = x^2 exactly
  FeedForwardNetwork sq = build_square(2, 1.0);
  EXPECT_DOUBLE_EQ(sq.evaluate(-0.5), 0.25);
  FeedForwardNetwork sq4 = build_square(4, 2.0);
  // f_tran(x) = x/4 + 1/2 = 5/16 at x = -0.75
  EXPECT_DOUBLE_EQ(sq4.evaluate(-0.75), 0.5625);
}

TEST(Square, SupBoundOnGrid) {
  for (int R = 1; R <= 10; ++R) {
    for (double a : {1.0, 2.0, 5.0}) {
      FeedForwardNetwork sq = build_square(R, a);
      const double bound = a * a * std::pow(4.0, -R);
      double worst = 0.0;
      const int n = 20000;
      for (int i = 0; i <= n; ++i) {
        double x = -a + 2.0 * a * i / n;
        worst = std::max(worst, std::abs(sq.evaluate(x) - x * x));
      }
      EXPECT_LE(worst, bound * (1.0 + 1e-9)) << "R=" << R << " a=" << a;
    }
  }
}

TEST(Square, RefinementIdentity) {
  // S_{R-1}(x) - S_R(x) = g_R(x) / 2^{2R}
  for (int R : {2, 3, 6}) {
    for (int i = 0; i <= 500; ++i) {
      double x = double(i) / 500.0;
      EXPECT_NEAR(S_R(R - 1, x) - S_R(R, x), tooth_iter(R, x) / std::pow(2.0, 2.0 * R), 1e-12);
    }
  }
}

TEST(Square, Architecture) {
  for (int R : {1, 3, 7}) {
    FeedForwardNetwork sq = build_square(R, 2.0);
    EXPECT_EQ(sq.depth(), static_cast<std::size_t>(R));
    EXPECT_TRUE(sq.constant_width(9));
  }
}

TEST(Mult, ZeroExactAndBound) {
  FeedForwardNetwork m = build_mult(6, 1.0);
  EXPECT_EQ(m.evaluate(0.0, 0.0), 0.0);
  const double bound = 2.0 * std::pow(4.0, -8);
  FeedForwardNetwork m8 = build_mult(8, 1.0);
  double worst = 0.0;
  const int n = 300;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      double x = -1.0 + 2.0 * i / n, y = -1.0 + 2.0 * j / n;
      worst = std::max(worst, std::abs(m8.evaluate(x, y) - x * y));
    }
  EXPECT_LE(worst, bound * (1.0 + 1e-9));
}

TEST(Mult, BoundAcrossRadii) {
  for (int R : {1, 4, 7}) {
    for (double a : {1.0, 2.0}) {
      FeedForwardNetwork m = build_mult(R, a);
      const double bound = 2.0 * a * a * std::pow(4.0, -R);
      double worst = 0.0;
      const int n = 150;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          double x = -a + 2.0 * a * i / n, y = -a + 2.0 * a * j / n;
          worst = std::max(worst, std::abs(m.evaluate(x, y) - x * y));
        }
      EXPECT_LE(worst, bound * (1.0 + 1e-9)) << "R=" << R << " a=" << a;
    }
  }
}

TEST(Mult, SymmetricBitwiseOnDyadicGrid) {
  FeedForwardNetwork m = build_mult(5, 2.0);
  for (int i = -16; i <= 16; ++i)
    for (int j = -16; j <= 16; ++j) {
      double x = i / 8.0, y = j / 8.0;
      double u = m.evaluate(x, y), v = m.evaluate(y, x);
      EXPECT_EQ(u, v) << x << "," << y;
    }
}

TEST(Mult, Architecture) {
  FeedForwardNetwork m = build_mult(5, 1.0);
  EXPECT_EQ(m.depth(), 5u);
  EXPECT_TRUE(m.constant_width(18));
}

TEST(MultD, DegenerateD1) {
  FeedForwardNetwork m = build_mult_d(8, 1.0, 1);
  EXPECT_EQ(m.depth(), 8u);
  EXPECT_TRUE(m.constant_width(18));
  const double bound = 2.0 * std::pow(4.0, -8);  // f_mult(x, 1) at radius 1
  for (int i = 0; i <= 500; ++i) {
    double x = -1.0 + 2.0 * i / 500.0;
    double xv[1] = {x};
    EXPECT_NEAR(m.evaluate(std::span<const double>(xv, 1)), x, bound * (1 + 1e-9));
  }
}

TEST(MultD, D2IsExactlyFMult) {
  FeedForwardNetwork md = build_mult_d(10, 1.0, 2);
  const double bound_paper = std::pow(4.0, 9) * 2.0 * std::pow(4.0, -10);
  const double bound_mult = 2.0 * std::pow(4.0, -10);
  double worst = 0.0;
  const int n = 250;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      double x[2] = {-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n};
      worst = std::max(worst, std::abs(md.evaluate(std::span<const double>(x, 2)) - x[0] * x[1]));
    }
  EXPECT_LE(worst, bound_mult * (1.0 + 1e-9));
  EXPECT_LE(worst, bound_paper);
}

TEST(MultD, BoundD3AndAllOnes) {
  const int R = mult_d_min_R(3, 1.0);
  FeedForwardNetwork md = build_mult_d(R, 1.0, 3);
  EXPECT_EQ(md.depth(), static_cast<std::size_t>(R) * 2);
  EXPECT_TRUE(md.constant_width(54));
  const double bound = std::pow(4.0, 13) * 3.0 * std::pow(4.0, -R);
  double worst = 0.0;
  const int n = 40;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k) {
        double x[3] = {-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n, -1.0 + 2.0 * k / n};
        worst = std::max(worst,
                         std::abs(md.evaluate(std::span<const double>(x, 3)) -
                                  x[0] * x[1] * x[2]));
      }
  EXPECT_LE(worst, bound);
  double ones[3] = {1.0, 1.0, 1.0};
  EXPECT_NEAR(md.evaluate(std::span<const double>(ones, 3)), 1.0, bound);
}

TEST(MultD, PreconditionNamesMinimalR) {
  try {
    build_mult_d(2, 1.0, 3);
    FAIL() << "expected ConstructionError";
  } catch (const ConstructionError &e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(mult_d_min_R(3, 1.0))),
              std::string::npos);
  }
}

TEST(Poly, ZeroCoefficientsGiveZeroNetwork) {
  std::vector<std::vector<int>> mono;
  for (const auto &mi : multiindices_up_to(1, 1)) mono.push_back(mi.j);
  std::vector<double> coeffs(mono.size(), 0.0);
  PolyBuild p = build_poly(6, 1.0, 1, 1, coeffs, mono);
  for (int i = 0; i <= 20; ++i) {
    double x[3] = {-1.0 + 0.1 * i, 0.5, -0.5};
    EXPECT_EQ(p.net.evaluate(std::span<const double>(x, 3)), 0.0);
  }
  EXPECT_EQ(p.net.depth(), p.claim.depth);
  EXPECT_TRUE(pad_to_width(p.net, p.claim.width).constant_width(p.claim.width));
}

TEST(Poly, LinearPolynomial) {
  // p(x, y1, y2) = y1 + y2 x on [-1,1]^3 (d=1, N=1)
  std::vector<std::vector<int>> mono;
  for (const auto &mi : multiindices_up_to(1, 1)) mono.push_back(mi.j);
  ASSERT_EQ(mono.size(), 2u);
  std::vector<double> coeffs{1.0, 1.0};
  const int R = poly_min_R(1, 1.0);
  PolyBuild p = build_poly(R, 1.0, 1, 1, coeffs, mono);
  double worst = 0.0;
  const int n = 20;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k) {
        double x = -1.0 + 2.0 * i / n, y1 = -1.0 + 2.0 * j / n, y2 = -1.0 + 2.0 * k / n;
        double in[3] = {x, y1, y2};
        double got = p.net.evaluate(std::span<const double>(in, 3));
        worst = std::max(worst, std::abs(got - (y1 + y2 * x)));
      }
  EXPECT_LE(worst, p.error_bound * (1.0 + 1e-9));
  // conservative spec-level bound: sum_i |r_i| 4 * 4^{4(N+1)} a^{4(N+1)} (N+1) 4^-R
  const double spec_bound = 2.0 * 4.0 * std::pow(4.0, 8) * 2.0 * std::pow(4.0, -R);
  EXPECT_LE(worst, spec_bound);
}

TEST(Poly, MonomialCountAndRejection) {
  EXPECT_EQ(multiindices_up_to(2, 2).size(), 6u);
  EXPECT_EQ(binomial(2 + 2, 2), 6u);
  std::vector<std::vector<int>> mono;
  for (const auto &mi : multiindices_up_to(2, 2)) mono.push_back(mi.j);
  std::vector<double> coeffs(5, 1.0);  // wrong count
  EXPECT_THROW(build_poly(9, 1.0, 2, 2, coeffs, mono), DimensionError);
}

TEST(Indicator, ExactInsideOutsideBoundedInMargin) {
  const double R = 10.0;
  std::vector<double> a{0.0, -1.0}, b{1.0, 1.0};
  FeedForwardNetwork ind = build_indicator(R, a, b);
  EXPECT_EQ(ind.depth(), 2u);
  EXPECT_TRUE(ind.constant_width(4));
  double deep[2] = {0.5, 0.0};
  EXPECT_EQ(ind.evaluate(std::span<const double>(deep, 2)), 1.0);
  double outside[2] = {-0.5, 0.0};
  EXPECT_EQ(ind.evaluate(std::span<const double>(outside, 2)), 0.0);
  // x^(1) = a^(1) lies in the margin; the gadget returns 0 there
  double at_face[2] = {0.0, 0.0};
  EXPECT_EQ(ind.evaluate(std::span<const double>(at_face, 2)), 0.0);
  double below_face[2] = {-0.2, 0.0};
  EXPECT_EQ(ind.evaluate(std::span<const double>(below_face, 2)), 0.0);
  double margin[2] = {0.55 / R, 0.0};
  double v = ind.evaluate(std::span<const double>(margin, 2));
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 1.0);
  std::vector<double> tight_b{0.1, 1.0};
  EXPECT_THROW(build_indicator(R, a, tight_b), ConstructionError);
}

TEST(TestGate, GatesRuntimeValue) {
  const double R = 50.0;
  FeedForwardNetwork t = build_test(R, 2);
  EXPECT_EQ(t.depth(), 2u);
  EXPECT_TRUE(t.constant_width(12));
  // inputs: x(2), a(2), b(2), s
  double in1[7] = {0.5, 0.5, 0.0, 0.0, 1.0, 1.0, 7.0};
  EXPECT_EQ(t.evaluate(std::span<const double>(in1, 7)), 7.0);
  double in2[7] = {-0.5, 0.5, 0.0, 0.0, 1.0, 1.0, 13.0};
  EXPECT_EQ(t.evaluate(std::span<const double>(in2, 7)), 0.0);
  double in3[7] = {0.5, 0.5, 0.0, 0.0, 1.0, 1.0, -7.0};
  EXPECT_EQ(t.evaluate(std::span<const double>(in3, 7)), -7.0);
  for (double s : {0.0, 3.0, -3.0}) {
    double in4[7] = {0.5, 1.0 - 0.4 / R, 0.0, 0.0, 1.0, 1.0, s};
    double v = t.evaluate(std::span<const double>(in4, 7));
    EXPECT_LE(std::abs(v - s * 1.0), std::abs(s) + 1e-12);
  }
  double in5[7] = {0.2, 0.2, 0.0, 0.0, 1.0, 1.0, 0.0};
  EXPECT_EQ(t.evaluate(std::span<const double>(in5, 7)), 0.0);
}

TEST(Trunc, FloorOutsideMargins) {
  FeedForwardNetwork tr = build_trunc(10.0, 4);
  EXPECT_EQ(tr.depth(), 1u);
  EXPECT_TRUE(tr.constant_width(8));
  // 1/R is not representable for R = 10, so exactness holds to one ulp
  EXPECT_NEAR(tr.evaluate(2.5), 2.0, 1e-12);
  EXPECT_NEAR(tr.evaluate(0.3), 0.0, 1e-12);
  EXPECT_NEAR(tr.evaluate(4.9), 4.0, 1e-12);
  // inside the forbidden margin: only the range contract holds
  double v = tr.evaluate(2.0 + 0.05);
  EXPECT_GE(v, 1.0 - 1e-12);
  EXPECT_LE(v, 3.0 + 1e-12);
  // range [0, B] for all real z
  EXPECT_NEAR(tr.evaluate(-3.0), 0.0, 1e-12);
  EXPECT_NEAR(tr.evaluate(99.0), 4.0, 1e-12);
  // dyadic slope makes the floor bit-exact
  FeedForwardNetwork tr8 = build_trunc(8.0, 6);
  for (int j = 0; j <= 6; ++j)
    for (double frac : {0.25, 0.5, 0.75}) {
      double z = j + frac;
      if (z >= 7.0) continue;
      EXPECT_EQ(tr8.evaluate(z), double(j)) << z;
    }
}

TEST(Identity, ArchitectureAndExactness) {
  FeedForwardNetwork id0 = build_identity(0, 1);
  EXPECT_EQ(id0.depth(), 0u);
  EXPECT_DOUBLE_EQ(id0.evaluate(0.7), 0.7);
  FeedForwardNetwork id32 = build_identity(3, 2);
  EXPECT_EQ(id32.depth(), 3u);
  EXPECT_TRUE(id32.constant_width(4));
  double x[2] = {-1.0, 4.0};
  Vec y = id32.evaluate_vector(std::span<const double>(x, 2));
  EXPECT_DOUBLE_EQ(y[0], -1.0);
  EXPECT_DOUBLE_EQ(y[1], 4.0);
}
