#include <gtest/gtest.h>

#include <cmath>

#include "relnet/approx_deep.hpp"
#include "relnet/measure.hpp"

using namespace relnet;

namespace {

DeepBuildConfig deep_config(SmoothFunction f, double a_user, int M) {
  DeepBuildConfig cfg;
  cfg.target = std::move(f);
  cfg.a_user = a_user;
  cfg.M = M;
  return cfg;
}

}  // namespace

TEST(DeepFnet, PolynomialExactOnInnerCubes) {
  // polynomial of degree <= q: the correction chain is exact, so the network
  // matches the target up to the f_p gadget error on inner cubes
  DeepBuildConfig cfg = deep_config(make_polynomial(1, 1, Vec{0.3, 0.8}, 1), 1.0, 2);
  BuiltNetwork b = build_fnet_deep_P2(cfg);
  CubePartition p2(cfg.a(), cfg.M, 1, 2);
  const double delta = 2.0 * std::pow(double(cfg.M), -(2.0 * cfg.target.p + 2.0));
  auto pts = filter_inner(uniform_grid(-cfg.a(), cfg.a() - 1e-9, 600, 1), p2, delta);
  ASSERT_GT(pts.size(), 100u);
  double worst = sup_error(b.net, cfg.target.value, pts);
  EXPECT_LE(worst, b.error_bound * (1.0 + 1e-6) + 1e-12);
}

TEST(DeepFnet, MatchesOracleOnInnerCubes) {
  SmoothFunction f = make_kink(1.0, 0.17, 1.0);
  DeepBuildConfig cfg = deep_config(f, 1.0, 3);
  RecursionConstants rc;
  const double c46 = rc.c46(f);
  auto bcs = compute_all_b_coefficients(f, cfg.a(), cfg.M, c46);
  BuiltNetwork b = build_fnet_deep_P2(cfg, {}, bcs);
  CubePartition p2(cfg.a(), cfg.M, 1, 2);
  const double delta = 2.0 * std::pow(double(cfg.M), -(2.0 * f.p + 2.0));
  auto pts = filter_inner(uniform_grid(-cfg.a(), cfg.a() - 1e-9, 800, 1), p2, delta);
  double worst = 0.0;
  for (const auto &x : pts) {
    double want = deep_recursion(f, cfg.a(), cfg.M, x, bcs);
    worst = std::max(worst, std::abs(b.net.evaluate(x) - want));
  }
  EXPECT_LE(worst, b.error_bound * (1.0 + 1e-6) + 1e-10);
}

TEST(DeepFnet, DigitProbesMatchStoredB) {
  for (int M : {2, 3}) {
    SmoothFunction f = make_kink(1.0, 0.13, 1.0);
    DeepBuildConfig cfg = deep_config(f, 1.0, M);
    RecursionConstants rc;
    auto bcs = compute_all_b_coefficients(f, cfg.a(), cfg.M, rc.c46(f));
    BuiltNetwork b = build_fnet_deep_P2(cfg, {}, bcs);
    CubePartition p1(cfg.a(), cfg.M, 1, 1);
    CubePartition p2(cfg.a(), cfg.M, 1, 2);
    const double delta = 2.0 * std::pow(double(cfg.M), -(2.0 * f.p + 2.0));
    auto pts = filter_inner(uniform_grid(-cfg.a(), cfg.a() - 1e-9, 150, 1), p2, delta);
    std::vector<ProbeTap> taps;
    std::vector<std::pair<int, std::size_t>> keys;
    for (int j = 1; j < M; ++j) {
      taps.push_back(b.taps.at("digit_" + std::to_string(j) + "_0"));
      keys.push_back({j, 0});
    }
    for (const auto &x : pts) {
      auto i = p1.locate_cube(x);
      Vec vals = evaluate_with_probes(b.net, x, taps);
      for (std::size_t t = 0; t < keys.size(); ++t) {
        const int k = keys[t].first;
        EXPECT_NEAR(vals[t], double(bcs[i].digits[0][k - 1]), 1e-6)
            << "M=" << M << " x=" << x[0] << " step=" << k;
      }
    }
  }
}

TEST(DeepFnet, ArchitectureMatchesLemma) {
  // (d, q, M) = (1, 1, 2), p = 2
  DeepBuildConfig cfg = deep_config(make_kink(2.0, 0.2, 1.0), 1.0, 2);
  BuiltNetwork b = build_fnet_deep_P2(cfg);
  const int Md = 2, ced = 3;
  const int B_Mp = cfg.poly_R_deep();
  // ceil(log4(M^{2p+4d(q+1)} e^{4(q+1)(Md-1)})) for M=2,p=2,q=1,d=1
  const int expect_B =
      static_cast<int>(std::ceil(((4.0 + 8.0) * std::log(2.0) + 8.0) / std::log(4.0)));
  EXPECT_EQ(B_Mp, expect_B);
  const std::size_t L = 4 * Md + B_Mp * 1;
  const std::size_t r = std::max<std::size_t>(
      10 + 4 + 2 * 2 * (2 * (4 + 2 * ced) + 5 + 2), 18 * 2 * 2);
  EXPECT_EQ(b.net.depth(), L);
  EXPECT_TRUE(b.net.constant_width(r));
  EXPECT_EQ(b.claim.depth, L);
  EXPECT_EQ(b.claim.width, r);
}

TEST(DeepWeight, CenterBoundAndWideAgreement) {
  SmoothFunction f = make_kink(1.0, 0.2, 1.0);
  DeepBuildConfig cfg = deep_config(f, 1.0, 3);
  BuiltNetwork w = build_weight_net_deep(cfg);
  EXPECT_EQ(w.net.depth(), 4u * 3 + 1);  // d = 1: no product tree
  EXPECT_TRUE(w.net.constant_width(std::max<std::size_t>(18, 14)));
  CubePartition p2(cfg.a(), cfg.M, 1, 2);
  Vec center = p2.cube_center(4);
  EXPECT_NEAR(w.net.evaluate(center), 1.0, 1e-9);
  for (const auto &x : uniform_grid(-cfg.a(), cfg.a() - 1e-9, 2000, 1))
    EXPECT_LE(std::abs(w.net.evaluate(x)), 2.0);
  // agreement with the wide weight net on inner cubes
  WideBuildConfig wcfg;
  wcfg.target = f;
  wcfg.a_user = 1.0;
  wcfg.M = 3;
  BuiltNetwork ww = build_weight_net(wcfg);
  const double delta = std::pow(3.0, -(2.0 * f.p + 2.0));
  auto pts = filter_inner(uniform_grid(-cfg.a(), cfg.a() - 1e-9, 2000, 1), p2, delta);
  const double budget = 2.0 * std::pow(4.0, 4.0 + 1.0) * std::pow(3.0, -2.0 * f.p);
  for (const auto &x : pts)
    EXPECT_LE(std::abs(w.net.evaluate(x) - ww.net.evaluate(x)), budget);
}

TEST(DeepCheck, FaceInteriorRing) {
  SmoothFunction f = make_kink(1.5, 0.2, 1.0);
  DeepBuildConfig cfg = deep_config(f, 1.0, 2);
  BuiltNetwork c = build_check_net_deep(cfg);
  EXPECT_EQ(c.net.depth(), 5u * 2);
  EXPECT_TRUE(c.net.constant_width(2 + 6 + 2));
  CubePartition p2(cfg.a(), cfg.M, 1, 2);
  for (std::int64_t k = 1; k < p2.cube_count(); ++k)
    EXPECT_EQ(c.net.evaluate(p2.cube_left(k)), 1.0) << k;
  for (std::int64_t k = 0; k < p2.cube_count(); ++k)
    EXPECT_EQ(c.net.evaluate(p2.cube_center(k)), 0.0) << k;
  const double delta = std::pow(double(cfg.M), -(2.0 * f.p + 2.0));
  Vec ring = p2.cube_left(1);
  ring[0] += 1.5 * delta;
  const double v = c.net.evaluate(ring);
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 1.0);
}

TEST(DeepMasked, BoundaryZeroAndConstZero) {
  DeepBuildConfig cfg = deep_config(make_constant(1, 0.0), 1.0, 2);
  BuiltNetwork m = build_masked_net_deep(cfg);
  for (const auto &x : uniform_grid(-cfg.a(), cfg.a() - 1e-9, 1500, 1))
    EXPECT_LE(std::abs(m.net.evaluate(x)), 1e-6);
}

TEST(DeepMasked, SlopeAgainstWeightedTarget) {
  std::vector<double> Ms, errs;
  for (int M : {2, 3, 4}) {
    DeepBuildConfig cfg = deep_config(make_kink(1.0, 0.2, 1.0), 1.0, M);
    BuiltNetwork m = build_masked_net_deep(cfg);
    CubePartition p2(cfg.a(), cfg.M, 1, 2);
    auto pts = uniform_grid(-cfg.a(), cfg.a() - 1e-9, 3000, 1);
    double worst = 0.0;
    for (const auto &x : pts) {
      const double want = bspline_weight(p2, x) * cfg.target.value(x);
      worst = std::max(worst, std::abs(m.net.evaluate(x) - want));
    }
    Ms.push_back(M);
    errs.push_back(worst);
  }
  const double slope = loglog_slope(Ms, errs);
  EXPECT_LE(slope, -2.0 + 0.6);
}

TEST(DeepApproximator, WidthIndependentOfM) {
  SmoothFunction f = make_kink(1.0, 0.2, 1.0);
  DeepBuildConfig c2 = deep_config(f, 1.0, 2), c3 = deep_config(f, 1.0, 3);
  BuiltNetwork b2 = build_deep_approximator(c2);
  BuiltNetwork b3 = build_deep_approximator(c3);
  EXPECT_EQ(b2.net.max_width(), b3.net.max_width());
  EXPECT_LE(b2.net.max_width(), b2.claim.width);
}

TEST(DeepApproximator, DepthAffineInMd) {
  // depth(M) = 5 M^d + B_Mp(M) log-terms; with fixed B_Mp the M^d part is
  // exactly linear
  SmoothFunction f = make_kink(1.0, 0.2, 1.0);
  std::vector<std::size_t> depths;
  for (int M : {2, 3, 4}) {
    DeepBuildConfig cfg = deep_config(f, 1.0, M);
    cfg.B_Mp = 20;
    BuiltNetwork b = build_deep_approximator(cfg);
    depths.push_back(b.net.depth() - cfg.poly_R_wide());
  }
  EXPECT_EQ(depths[1] - depths[0], 5u);
  EXPECT_EQ(depths[2] - depths[1], 5u);
}

TEST(DeepApproximator, ConstantTargetShape) {
  DeepBuildConfig cfg = deep_config(make_constant(1, 1.4), 1.0, 2);
  BuiltNetwork b = build_deep_approximator(cfg);
  auto pts = uniform_grid(-1.0, 1.0, 1200, 1);
  double worst = sup_error(b.net, [](std::span<const double>) { return 1.4; }, pts);
  EXPECT_LE(worst, 8.0 * 1.4 * 1.4 * 2.0 * std::pow(2.0, -2.0 * cfg.target.p));
}

TEST(DeepApproximator, SlopeP1) {
  std::vector<double> Ms, errs;
  for (int M : {2, 3, 4, 5}) {
    DeepBuildConfig cfg = deep_config(make_kink(1.0, 0.31, 1.0), 1.0, M);
    BuiltNetwork b = build_deep_approximator(cfg);
    auto pts = uniform_grid(-1.0, 1.0, 1500, 1);
    double err = sup_error(b.net, cfg.target.value, pts);
    Ms.push_back(M);
    errs.push_back(err);
  }
  const double slope = loglog_slope(Ms, errs);
  EXPECT_GE(slope, -2.35);
  EXPECT_LE(slope, -1.65);
}

TEST(WideDeepAgreement, SharedEnvelope) {
  SmoothFunction f = make_kink(1.5, 0.2, 1.0);
  for (int M : {2, 3}) {
    WideBuildConfig wcfg;
    wcfg.target = f;
    wcfg.a_user = 1.0;
    wcfg.M = M;
    DeepBuildConfig dcfg = deep_config(f, 1.0, M);
    BuiltNetwork w = build_wide_approximator(wcfg);
    BuiltNetwork dd = build_deep_approximator(dcfg);
    auto pts = uniform_grid(-1.0, 1.0, 800, 1);
    double we = sup_error(w.net, f.value, pts);
    double de = sup_error(dd.net, f.value, pts);
    double gap = 0.0;
    for (const auto &x : pts)
      gap = std::max(gap, std::abs(w.net.evaluate(x) - dd.net.evaluate(x)));
    EXPECT_LE(gap, (we + de) * (1.0 + 1e-9));
  }
}
