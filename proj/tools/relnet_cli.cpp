// relnet: build, evaluate and measure the explicit ReLU network
// constructions, and run the least-squares regression experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "relnet/approx_deep.hpp"
#include "relnet/approx_wide.hpp"
#include "relnet/catalog.hpp"
#include "relnet/estimator.hpp"
#include "relnet/measure.hpp"
#include "relnet/primitives.hpp"
#include "relnet/serialize.hpp"

using namespace relnet;

namespace {

void write_atomic(const std::string &path, const std::string &content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + tmp);
    os << content;
  }
  std::filesystem::rename(tmp, path);
}

void print_summary(const FeedForwardNetwork &net) {
  std::printf("L=%zu r=%zu W=%zu input_dim=%zu\n", net.depth(), net.max_width(),
              net.stored_entries(), net.input_dim());
}

std::vector<double> parse_list(const std::string &csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

SmoothFunction pick_target(const std::string &name, int d, double p) {
  if (name == "square") return make_polynomial(1, 2, Vec{0.0, 0.0, 1.0}, 2);
  return catalog_function(name, d, p);
}

int cmd_build(const std::string &what, int t, int R, double a, int B, int M, int d,
              int N, const std::string &coeffs_csv, const std::string &target_name,
              double p, const std::string &corner_a, const std::string &corner_b,
              const std::string &model_path, const std::string &out_path) {
  FeedForwardNetwork net;
  std::vector<std::string> notes;
  if (what == "identity") {
    net = build_identity(t, d);
  } else if (what == "square") {
    net = build_square(R, a);
  } else if (what == "mult") {
    net = build_mult(R, a);
  } else if (what == "multd") {
    net = build_mult_d(R, a, d);
  } else if (what == "poly") {
    std::vector<std::vector<int>> monos;
    for (const auto &mi : multiindices_up_to(d, N)) monos.push_back(mi.j);
    Vec coeffs = coeffs_csv.empty() ? Vec(monos.size(), 1.0) : parse_list(coeffs_csv);
    PolyBuild pb = build_poly(R, a, N, d, coeffs, monos);
    net = pad_to_width(pb.net, pb.claim.width);
  } else if (what == "indicator") {
    Vec ca = parse_list(corner_a), cb = parse_list(corner_b);
    net = build_indicator(double(R), ca, cb);
  } else if (what == "test") {
    net = build_test(double(R), d);
  } else if (what == "trunc") {
    net = build_trunc(double(R), B);
  } else if (what == "wide") {
    WideBuildConfig cfg;
    cfg.target = pick_target(target_name, d, p);
    cfg.a_user = a;
    cfg.M = M;
    BuiltNetwork bn = build_wide_approximator(cfg);
    net = std::move(bn.net);
    notes = std::move(bn.notes);
  } else if (what == "deep") {
    DeepBuildConfig cfg;
    cfg.target = pick_target(target_name, d, p);
    cfg.a_user = a;
    cfg.M = M;
    BuiltNetwork bn = build_deep_approximator(cfg);
    net = std::move(bn.net);
    notes = std::move(bn.notes);
  } else if (what == "t1" || what == "t2") {
    HierarchicalCompositionModel model =
        model_path.empty() ? fig2_model(std::max(d, 2), M, M) : load_model(model_path);
    HierarchyBuild h = what == "t1" ? build_t1(model) : build_t2(model);
    net = std::move(h.net);
    notes = std::move(h.notes);
  } else {
    std::fprintf(stderr, "unknown build target '%s'\n", what.c_str());
    return 2;
  }
  for (const auto &nn : notes) std::fprintf(stderr, "note: %s\n", nn.c_str());
  if (!out_path.empty()) write_atomic(out_path, serialize(net) + "\n");
  print_summary(net);
  return 0;
}

int cmd_superr(const std::string &net_path, const std::string &target_name, int d,
               double p, double a, int grid_n, double inner_margin, int M,
               const std::string &m_list, const std::string &csv_out) {
  SmoothFunction target = pick_target(target_name, d, p);
  if (!m_list.empty()) {
    std::vector<double> Ms = parse_list(m_list);
    std::vector<double> errs;
    std::string csv = "M,sup_error,l2_error\n";
    for (double Mv : Ms) {
      WideBuildConfig cfg;
      cfg.target = target;
      cfg.a_user = a;
      cfg.M = static_cast<int>(Mv);
      BuiltNetwork bn = build_wide_approximator(cfg);
      auto pts = uniform_grid(-a, a, grid_n, d);
      double sup = 0.0, l2 = 0.0;
      for (const auto &x : pts) {
        const double e = std::abs(bn.net.evaluate(x) - target.value(x));
        sup = std::max(sup, e);
        l2 += e * e;
      }
      l2 = std::sqrt(l2 / double(pts.size()));
      char buf[128];
      std::snprintf(buf, sizeof buf, "%g,%.17g,%.17g\n", Mv, sup, l2);
      csv += buf;
      errs.push_back(sup);
      std::printf("M=%-3g sup=%.6g l2=%.6g\n", Mv, sup, l2);
    }
    std::printf("slope=%.4f\n", loglog_slope(Ms, errs));
    if (!csv_out.empty()) write_atomic(csv_out, csv);
    return 0;
  }
  FeedForwardNetwork net = load_network(net_path);
  if (net.input_dim() != static_cast<std::size_t>(d)) {
    std::fprintf(stderr, "network input dim %zu != --d %d\n", net.input_dim(), d);
    return 3;
  }
  auto pts = uniform_grid(-a, a - 1e-12, grid_n, d);
  if (inner_margin > 0.0) {
    CubePartition p2(a, M, d, 2);
    pts = filter_inner(pts, p2, inner_margin);
  }
  double sup = 0.0, l2 = 0.0;
  for (const auto &x : pts) {
    const double e = std::abs(net.evaluate(x) - target.value(x));
    sup = std::max(sup, e);
    l2 += e * e;
  }
  l2 = std::sqrt(l2 / double(std::max<std::size_t>(pts.size(), 1)));
  std::printf("points=%zu sup_error=%.17g l2_error=%.17g\n", pts.size(), sup, l2);
  if (!csv_out.empty()) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "points,sup_error,l2_error\n%zu,%.17g,%.17g\n",
                  pts.size(), sup, l2);
    write_atomic(csv_out, buf);
  }
  return 0;
}

int cmd_fit(const std::string &target_name, int d, double p, std::size_t n,
            double noise, std::size_t L, std::size_t r, int steps, double lr,
            std::uint64_t seed, const std::string &net_out) {
  SmoothFunction target = pick_target(target_name, d, p);
  Dataset data = generate_dataset(target.value, target.dim, n, 1.0, noise, seed);
  TrainingConfig cfg;
  cfg.L = L;
  cfg.r = r;
  cfg.steps = steps;
  cfg.lr = lr;
  cfg.seed = seed;
  FitResult f = fit(data, cfg);
  std::printf("train_risk=%.17g initial_risk=%.17g steps=%d L=%zu r=%zu W=%zu\n",
              f.final_risk, f.initial_risk, f.steps, L, r,
              count_parameters(target.dim, L, r));
  if (!net_out.empty()) write_atomic(net_out, serialize(f.net) + "\n");
  return 0;
}

int cmd_experiment(const std::string &spec_path, const std::string &target_name,
                   const std::string &n_list, const std::string &rules, int reps,
                   double noise, std::uint64_t seed, const std::string &csv_out) {
  ExperimentSpec spec;
  HierarchicalCompositionModel model = fig2_model(2, 2, 2);
  spec.target = [model](std::span<const double> x) { return evaluate_model(model, x); };
  spec.P = {{2.0, 2}, {2.0, 3}};
  if (!spec_path.empty()) {
    std::ifstream is(spec_path);
    if (!is) throw std::runtime_error("cannot open " + spec_path);
    nlohmann::json j = nlohmann::json::parse(is);
    if (j.contains("target") && j["target"] != "fig2") {
      SmoothFunction f = pick_target(j["target"].get<std::string>(), j.value("d", 2),
                                     j.value("p", 2.0));
      spec.target = f.value;
      spec.d = f.dim;
    }
    if (j.contains("d")) spec.d = j["d"].get<int>();
    if (j.contains("P")) {
      spec.P.clear();
      for (const auto &pk : j["P"])
        spec.P.push_back({pk[0].get<double>(), pk[1].get<int>()});
    }
    if (j.contains("n_list")) {
      spec.n_list.clear();
      for (const auto &v : j["n_list"]) spec.n_list.push_back(v.get<std::size_t>());
    }
    if (j.contains("rules")) {
      spec.rules.clear();
      for (const auto &v : j["rules"]) spec.rules.push_back(v.get<std::string>()[0]);
    }
    spec.replications = j.value("replications", spec.replications);
    spec.noise_sigma = j.value("noise", spec.noise_sigma);
    spec.radius = j.value("radius", spec.radius);
    spec.seed = j.value("seed", spec.seed);
    spec.epochs = j.value("epochs", spec.epochs);
    spec.batch = j.value("batch", spec.batch);
    spec.lr = j.value("lr", spec.lr);
    spec.momentum = j.value("momentum", spec.momentum);
    spec.n_mc = j.value("n_mc", spec.n_mc);
  } else {
    if (target_name != "fig2") {
      SmoothFunction f = pick_target(target_name, 2, 2.0);
      spec.target = f.value;
      spec.d = f.dim;
    }
    if (!n_list.empty()) {
      spec.n_list.clear();
      for (double v : parse_list(n_list))
        spec.n_list.push_back(static_cast<std::size_t>(v));
    }
    if (!rules.empty()) {
      spec.rules.clear();
      for (char c : rules)
        if (c == 'a' || c == 'b') spec.rules.push_back(c);
    }
    spec.replications = reps;
    spec.noise_sigma = noise;
    spec.seed = seed;
  }
  auto rows = run_experiment(spec);
  const std::string csv = experiment_csv(rows);
  if (!csv_out.empty())
    write_atomic(csv_out, csv);
  else
    std::fputs(csv.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"explicit ReLU network constructions and regression experiments"};
  app.require_subcommand(1);

  std::string what, target_name = "kink", out_path, net_path, corner_a, corner_b;
  std::string model_path, m_list, csv_out, spec_path, n_list_s, rules_s = "ab";
  int t = 1, R = 4, B = 4, M = 2, d = 1, N = 1, grid_n = 1000, steps = 4000, reps = 10;
  double a = 1.0, p = 1.0, inner_margin = 0.0, noise = 0.1, lr = 0.02;
  std::size_t n = 400, L = 2, r = 8;
  std::uint64_t seed = 1;
  std::string coeffs;

  auto *bld = app.add_subcommand("build", "construct a network and write it to a file");
  bld->add_option("what", what,
                  "identity|square|mult|multd|poly|indicator|test|trunc|wide|deep|t1|t2")
      ->required();
  bld->add_option("--t", t, "identity depth");
  bld->add_option("--R", R, "depth/accuracy parameter");
  bld->add_option("--B", B, "floor range bound");
  bld->add_option("--a", a, "domain radius");
  bld->add_option("--M", M, "grid resolution");
  bld->add_option("--d", d, "input dimension");
  bld->add_option("--N", N, "polynomial degree");
  bld->add_option("--coeffs", coeffs, "comma-separated polynomial coefficients");
  bld->add_option("--corner-a", corner_a, "indicator left corner (comma-separated)");
  bld->add_option("--corner-b", corner_b, "indicator right corner (comma-separated)");
  bld->add_option("--target", target_name, "catalog target name");
  bld->add_option("--p", p, "target smoothness p");
  bld->add_option("--model", model_path, "hierarchical model JSON file (t1/t2)");
  bld->add_option("-o,--out", out_path, "output network file");

  auto *sup = app.add_subcommand("superr", "sup/L2 error of a network against a target");
  sup->add_option("--net", net_path, "network file");
  sup->add_option("--target", target_name, "catalog target name")->required();
  sup->add_option("--d", d, "input dimension");
  sup->add_option("--p", p, "target smoothness p");
  sup->add_option("--a", a, "grid radius");
  sup->add_option("--grid-n", grid_n, "grid points per axis");
  sup->add_option("--inner-margin", inner_margin, "restrict to inner cubes (margin)");
  sup->add_option("--M", M, "partition resolution for --inner-margin");
  sup->add_option("--M-list", m_list, "slope table over these M values (builds wide nets)");
  sup->add_option("--out", csv_out, "CSV output path");

  auto *ft = app.add_subcommand("fit", "train a fully connected network on generated data");
  ft->add_option("--target", target_name, "catalog target name");
  ft->add_option("--d", d, "input dimension");
  ft->add_option("--p", p, "target smoothness p");
  ft->add_option("--n", n, "sample size");
  ft->add_option("--noise", noise, "noise standard deviation");
  ft->add_option("--L", L, "hidden layers");
  ft->add_option("--r", r, "neurons per layer");
  ft->add_option("--steps", steps, "gradient steps");
  ft->add_option("--lr", lr, "learning rate");
  ft->add_option("--seed", seed, "seed");
  ft->add_option("-o,--out", out_path, "trained network output file");

  auto *ex = app.add_subcommand("experiment", "run the regression experiment grid");
  ex->add_option("--spec", spec_path, "experiment spec JSON file");
  ex->add_option("--target", target_name, "catalog target (default fig2 model)");
  ex->add_option("--n-list", n_list_s, "comma-separated sample sizes");
  ex->add_option("--rule", rules_s, "rules to run: a, b or ab");
  ex->add_option("--replications", reps, "replications per cell");
  ex->add_option("--noise", noise, "noise standard deviation");
  ex->add_option("--seed", seed, "base seed");
  ex->add_option("--out", csv_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bld->parsed())
      return cmd_build(what, t, R, a, B, M, d, N, coeffs, target_name, p, corner_a,
                       corner_b, model_path, out_path);
    if (sup->parsed())
      return cmd_superr(net_path, target_name, d, p, a, grid_n, inner_margin, M,
                        m_list, csv_out);
    if (ft->parsed()) return cmd_fit(target_name, d, p, n, noise, L, r, steps, lr, seed, out_path);
    if (ex->parsed())
      return cmd_experiment(spec_path, target_name, n_list_s, rules_s, reps, noise,
                            seed, csv_out);
  } catch (const TrainingError &e) {
    std::fprintf(stderr, "training failure: %s\n", e.what());
    return 4;
  } catch (const ParseError &e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
