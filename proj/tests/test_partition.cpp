#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "relnet/partition.hpp"

using namespace relnet;

TEST(Locate, HalfOpenRule) {
  CubePartition p(1.0, 2, 1, 1);  // cubes [-1,0) and [0,1)
  double xm1[1] = {-1.0};
  EXPECT_EQ(p.locate_cube(std::span<const double>(xm1, 1)), 0);
  EXPECT_DOUBLE_EQ(p.cube_left(0)[0], -1.0);
  double x0[1] = {0.0};
  EXPECT_EQ(p.locate_cube(std::span<const double>(x0, 1)), 1);
  EXPECT_DOUBLE_EQ(p.cube_left(1)[0], 0.0);
  double x1[1] = {1.0};
  EXPECT_THROW(p.locate_cube(std::span<const double>(x1, 1)), OutOfDomainError);
}

TEST(Locate, BruteForceScanAgrees) {
  for (int level : {1, 2}) {
    CubePartition p(2.0, 3, 2, level);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 300; ++t) {
      double x[2] = {u(rng), u(rng)};
      auto k = p.locate_cube(std::span<const double>(x, 2));
      int hits = 0;
      std::int64_t found = -1;
      for (std::int64_t c = 0; c < p.cube_count(); ++c) {
        Vec left = p.cube_left(c);
        bool in = true;
        for (int i = 0; i < 2; ++i)
          in = in && left[i] <= x[i] && x[i] < left[i] + p.side();
        if (in) {
          ++hits;
          found = c;
        }
      }
      EXPECT_EQ(hits, 1);
      EXPECT_EQ(found, k);
    }
  }
}

TEST(OffsetsWide, EnumerationAndCount) {
  auto v = subcube_offsets_wide(2, 1.0, 1);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(v[0][0], 0.0);
  EXPECT_DOUBLE_EQ(v[1][0], 0.5);
  auto v32 = subcube_offsets_wide(3, 2.0, 2);
  EXPECT_EQ(v32.size(), 9u);
  for (const auto &off : v32)
    for (double e : off) {
      EXPECT_GE(e, 0.0);
      EXPECT_LE(e, 2.0 * 2.0 * 2.0 / 9.0 + 1e-15);
    }
  EXPECT_DOUBLE_EQ(v32[0][0], 0.0);
  EXPECT_DOUBLE_EQ(v32[0][1], 0.0);
}

TEST(OffsetsDeep, SnakeStepStructure) {
  auto s = subcube_offsets_deep(2, 1.0, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0][0], 0.5);
  for (int M : {2, 3}) {
    for (int d : {1, 2, 3}) {
      auto steps = subcube_offsets_deep(M, 1.0, d);
      const double mag = 2.0 / (double(M) * M);
      std::int64_t total = 1;
      for (int i = 0; i < d; ++i) total *= M;
      ASSERT_EQ(steps.size(), static_cast<std::size_t>(total - 1));
      for (const auto &st : steps) {
        int nonzero = 0;
        for (double e : st)
          if (e != 0.0) {
            ++nonzero;
            EXPECT_NEAR(std::abs(e), mag, 1e-15);
          }
        EXPECT_EQ(nonzero, 1);
      }
    }
  }
}

TEST(OffsetsDeep, PrefixSumsMatchWideSet) {
  for (int M : {2, 3, 4}) {
    for (int d : {1, 2}) {
      auto corners = subcube_corners_deep(M, 1.0, d);
      auto wide = subcube_offsets_wide(M, 1.0, d);
      auto key = [](const Vec &v) {
        std::string k;
        for (double e : v) k += std::to_string(std::llround(e * 1e12)) + ",";
        return k;
      };
      std::set<std::string> sc, sw;
      for (const auto &c : corners) sc.insert(key(c));
      for (const auto &w : wide) sw.insert(key(w));
      EXPECT_EQ(sc, sw);
    }
  }
}

TEST(OffsetsConsistency, SubcubeCornersExhaustive) {
  // (C~_{k,i})_left = (C_{i,1})_left + v_k equals a geometric P2 corner
  for (int M : {2, 3, 4}) {
    for (int d : {1, 2}) {
      CubePartition p1(1.0, M, d, 1), p2(1.0, M, d, 2);
      auto offs = subcube_offsets_wide(M, 1.0, d);
      for (std::int64_t i = 0; i < p1.cube_count(); ++i) {
        Vec base = p1.cube_left(i);
        for (const auto &v : offs) {
          Vec corner(base);
          for (int t = 0; t < d; ++t) corner[t] += v[t];
          Vec probe(corner);
          for (int t = 0; t < d; ++t) probe[t] += p2.side() / 2.0;
          Vec left = p2.cube_left(p2.locate_cube(probe));
          for (int t = 0; t < d; ++t) EXPECT_NEAR(left[t], corner[t], 1e-12);
        }
      }
    }
  }
}

TEST(InnerCube, MembershipAgainstInequalities) {
  CubePartition p(1.0, 2, 2, 2);
  const double side = p.side();
  Vec left = p.cube_left(0);
  Vec center = p.cube_center(0);
  EXPECT_TRUE(inner_cube_contains(left, side, 0.05, center));
  Vec face(left);
  EXPECT_FALSE(inner_cube_contains(left, side, 0.05, face));
  EXPECT_THROW(inner_cube_contains(left, side, side, center), ConstructionError);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(left[0], left[0] + side);
  const double delta = 0.1 * side;
  for (int t = 0; t < 500; ++t) {
    double x[2] = {u(rng), u(rng)};
    bool expect = true;
    for (int i = 0; i < 2; ++i)
      expect = expect && left[i] + delta <= x[i] && x[i] < left[i] + side - delta;
    EXPECT_EQ(inner_cube_contains(left, side, delta, std::span<const double>(x, 2)), expect);
  }
}

TEST(BSpline, CenterFacesAndRange) {
  CubePartition p2(1.0, 2, 2, 2);
  Vec c = p2.cube_center(5);
  EXPECT_DOUBLE_EQ(bspline_weight(p2, c), 1.0);
  Vec face = p2.cube_left(5);
  face[0] += p2.side() / 2.0;  // on an x1 = const face
  EXPECT_DOUBLE_EQ(bspline_weight(p2, face), 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    double x[2] = {u(rng), u(rng)};
    double w = bspline_weight(p2, std::span<const double>(x, 2));
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0);
  }
}

TEST(BSpline, PartitionOfUnityOnHalfDomain) {
  for (int d : {1, 2}) {
    for (int M : {2, 3}) {
      auto parts = shifted_partitions(1.0, M, d, 2);
      ASSERT_EQ(parts.size(), std::size_t{1} << d);
      const int n = d == 1 ? 2000 : 60;
      std::vector<double> x(d, 0.0);
      auto check = [&](std::span<const double> pt) {
        double s = 0.0;
        for (const auto &p : parts) s += bspline_weight(p, pt);
        EXPECT_NEAR(s, 1.0, 1e-12);
      };
      if (d == 1) {
        for (int i = 0; i <= n; ++i) {
          x[0] = -0.5 + double(i) / n;
          check(x);
        }
      } else {
        for (int i = 0; i <= n; ++i)
          for (int j = 0; j <= n; ++j) {
            x[0] = -0.5 + double(i) / n;
            x[1] = -0.5 + double(j) / n;
            check(x);
          }
      }
    }
  }
}

TEST(ShiftedPartitions, CoverageAndBase) {
  auto parts = shifted_partitions(1.0, 2, 2, 2);
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_DOUBLE_EQ(parts[0].shift()[0], 0.0);
  EXPECT_DOUBLE_EQ(parts[0].shift()[1], 0.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 2000; ++t) {
    double x[2] = {u(rng), u(rng)};
    for (const auto &p : parts) EXPECT_NO_THROW(p.locate_cube(std::span<const double>(x, 2)));
  }
}

TEST(Tiling, ExactlyOneCube) {
  CubePartition p(1.0, 3, 2, 2);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    double x[2] = {u(rng), u(rng)};
    int hits = 0;
    for (std::int64_t c = 0; c < p.cube_count(); ++c) {
      Vec left = p.cube_left(c);
      bool in = true;
      for (int i = 0; i < 2; ++i) in = in && left[i] <= x[i] && x[i] < left[i] + p.side();
      if (in) ++hits;
    }
    EXPECT_EQ(hits, 1);
  }
}
