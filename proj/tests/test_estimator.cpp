#include <gtest/gtest.h>

#include <cmath>

#include "relnet/catalog.hpp"
#include "relnet/estimator.hpp"
#include "relnet/primitives.hpp"

using namespace relnet;

TEST(ChooseArchitecture, FormulaExamples) {
  std::vector<std::pair<double, int>> P{{1.0, 1}};
  auto [L, r] = choose_architecture(std::exp(1.0), P, 'a');
  EXPECT_EQ(L, 1u);
  EXPECT_EQ(r, 2u);  // ceil(e^{1/6})
  // rule b width is n-independent
  auto [Lb1, rb1] = choose_architecture(100.0, P, 'b');
  auto [Lb2, rb2] = choose_architecture(10000.0, P, 'b');
  EXPECT_EQ(rb1, rb2);
  EXPECT_GT(Lb2, Lb1);
  // exponent max over P
  std::vector<std::pair<double, int>> P2{{1.0, 1}, {2.0, 4}};
  auto [L2, r2] = choose_architecture(4096.0, P2, 'a');
  EXPECT_EQ(r2, static_cast<std::size_t>(std::ceil(std::pow(4096.0, 0.25))));
  EXPECT_THROW(choose_architecture(10.0, {}, 'a'), DimensionError);
}

TEST(Fit, TeacherStudentExactRepresentation) {
  // teacher: constructed square net in F(2, 9); student gets the same shape
  FeedForwardNetwork teacher = build_square(2, 1.0);
  Dataset data = generate_dataset(
      [&teacher](std::span<const double> x) { return teacher.evaluate(x); }, 1, 256,
      1.0, 0.0, 11);
  TrainingConfig cfg;
  cfg.L = 2;
  cfg.r = 9;
  cfg.steps = 12000;
  cfg.batch = 64;
  cfg.lr = 0.05;
  cfg.momentum = 0.9;
  cfg.seed = 3;
  FitResult f = fit(data, cfg);
  EXPECT_LE(f.final_risk, 1e-4);
  EXPECT_LE(f.final_risk, f.initial_risk);
}

TEST(Fit, ConstantTarget) {
  Dataset data = generate_dataset([](std::span<const double>) { return 0.7; }, 2, 200,
                                  1.0, 0.0, 5);
  TrainingConfig cfg;
  cfg.L = 1;
  cfg.r = 4;
  cfg.steps = 4000;
  cfg.lr = 0.05;
  cfg.seed = 1;
  FitResult f = fit(data, cfg);
  for (const auto &x : data.X) EXPECT_NEAR(f.net.evaluate(x), 0.7, 1e-3);
}

TEST(Fit, SeedDeterminism) {
  Dataset data = generate_dataset(
      [](std::span<const double> x) { return std::sin(x[0] + x[1]); }, 2, 128, 1.0,
      0.05, 21);
  TrainingConfig cfg;
  cfg.L = 2;
  cfg.r = 6;
  cfg.steps = 500;
  cfg.seed = 17;
  FitResult a = fit(data, cfg);
  FitResult b = fit(data, cfg);
  EXPECT_EQ(serialize(a.net), serialize(b.net));
  EXPECT_EQ(a.final_risk, b.final_risk);
}

TEST(Truncate, ClampAndIdempotence) {
  FeedForwardNetwork lin = FeedForwardNetwork::affine(Matrix::identity(1), Vec{0.0});
  TruncatedPredictor p = truncate_estimator(lin, 1.5);
  double x1[1] = {3.0};
  EXPECT_DOUBLE_EQ(p(std::span<const double>(x1, 1)), 1.5);
  double x2[1] = {-3.0};
  EXPECT_DOUBLE_EQ(p(std::span<const double>(x2, 1)), -1.5);
  double x3[1] = {0.4};
  EXPECT_DOUBLE_EQ(p(std::span<const double>(x3, 1)), 0.4);
  // idempotence on a grid
  for (int i = 0; i <= 100; ++i) {
    double x[1] = {-4.0 + 8.0 * i / 100.0};
    const double once = p(std::span<const double>(x, 1));
    EXPECT_DOUBLE_EQ(std::clamp(once, -1.5, 1.5), once);
  }
}

TEST(SplitSelect, TeacherBeatsTiny) {
  // candidate 0: width-1 net, candidate 1: adequate net. noiseless data.
  Dataset data = generate_dataset(
      [](std::span<const double> x) { return std::sin(2.0 * x[0]); }, 1, 400, 1.0, 0.0,
      31);
  TrainingConfig tiny;
  tiny.L = 1;
  tiny.r = 1;
  tiny.steps = 1500;
  tiny.seed = 2;
  TrainingConfig good;
  good.L = 2;
  good.r = 12;
  good.steps = 4000;
  good.lr = 0.03;
  good.seed = 2;
  std::vector<TrainingConfig> cands{tiny, good};
  SelectionResult sel = split_sample_select(data, cands);
  EXPECT_EQ(sel.best_index, 1u);
  // single candidate returned unconditionally
  std::vector<TrainingConfig> one{tiny};
  EXPECT_EQ(split_sample_select(data, one).best_index, 0u);
  // deterministic given seed
  SelectionResult again = split_sample_select(data, cands);
  EXPECT_EQ(sel.test_risks, again.test_risks);
}

TEST(MeasureL2, KnownOffsets) {
  auto m = [](std::span<const double> x) { return x[0] * 0.5; };
  L2Estimate zero = measure_l2(m, m, 1, 1.0, 20000, 3);
  EXPECT_NEAR(zero.mean, 0.0, 1e-12);
  auto off = [](std::span<const double> x) { return x[0] * 0.5 + 1.0; };
  L2Estimate one = measure_l2(off, m, 1, 1.0, 20000, 3);
  EXPECT_NEAR(one.mean, 1.0, 3.0 * one.se + 1e-3);
  // quadrature agreement in d = 1: integral of (x/2)^2 over U[-1,1] = 1/12
  auto zerof = [](std::span<const double>) { return 0.0; };
  L2Estimate q = measure_l2(zerof, m, 1, 1.0, 40000, 5);
  EXPECT_NEAR(q.mean, 1.0 / 12.0, 3.0 * q.se);
}

TEST(Experiment, CsvDeterminismAndSmoke) {
  ExperimentSpec spec;
  HierarchicalCompositionModel model = fig2_model(2, 2, 2);
  spec.target = [model](std::span<const double> x) { return evaluate_model(model, x); };
  spec.d = 2;
  spec.n_list = {64};
  spec.rules = {'a'};
  spec.replications = 2;
  spec.epochs = 10;
  spec.n_mc = 2000;
  auto rows1 = run_experiment(spec);
  auto rows2 = run_experiment(spec);
  EXPECT_EQ(experiment_csv(rows1), experiment_csv(rows2));
  ASSERT_EQ(rows1.size(), 2u);
  for (const auto &r : rows1) {
    EXPECT_TRUE(std::isfinite(r.l2_mc));
    EXPECT_EQ(r.W, count_parameters(2, r.L, r.r));
  }
}
