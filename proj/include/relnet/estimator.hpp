#pragma once

#include <algorithm>
#include <cmath>
#include <atomic>
#include <functional>
#include <random>
#include <thread>

#include "relnet/network.hpp"

namespace relnet {

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::vector<Vec> X;
  Vec y;

  std::size_t size() const { return y.size(); }
};

/// i.i.d. sample: X uniform on [-radius, radius]^d, Y = m(X) + gaussian noise.
inline Dataset generate_dataset(const std::function<double(std::span<const double>)> &m,
                                int d, std::size_t n, double radius,
                                double noise_sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-radius, radius);
  std::normal_distribution<double> un(0.0, 1.0);
  Dataset out;
  out.X.assign(n, Vec(d, 0.0));
  out.y.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto &v : out.X[i]) v = ux(rng);
    out.y[i] = m(out.X[i]) + noise_sigma * un(rng);
  }
  return out;
}

struct ArchitectureConstants {
  double c3 = 1.0;   // truncation beta = c3 log n
  double c4 = 1.0;   // rule a depth
  double c5 = 1.0;   // rule a width
  double c7 = 1.0;   // rule b depth
  double c8 = 10.0;  // rule b width
};

/// Theorem-1 architecture rules over the constraint set P of (p, K) pairs.
/// Rule a: L = ceil(c4 log n), r = ceil(c5 max n^{K/(2(2p+K))}).
/// Rule b: L = ceil(c7 max n^{K/(2(2p+K))} log n), r = ceil(c8).
inline std::pair<std::size_t, std::size_t> choose_architecture(
    double n, std::span<const std::pair<double, int>> P, char rule,
    const ArchitectureConstants &c = {}) {
  if (P.empty()) throw DimensionError("choose_architecture: empty constraint set");
  double expo = 0.0;
  for (auto [p, K] : P)
    expo = std::max(expo, double(K) / (2.0 * (2.0 * p + double(K))));
  const double rate = std::pow(n, expo);
  if (rule == 'a') {
    return {static_cast<std::size_t>(std::ceil(c.c4 * std::log(n))),
            static_cast<std::size_t>(std::ceil(c.c5 * rate))};
  }
  if (rule == 'b') {
    return {static_cast<std::size_t>(std::ceil(c.c7 * rate * std::log(n))),
            static_cast<std::size_t>(std::ceil(c.c8))};
  }
  throw DimensionError("choose_architecture: rule must be 'a' or 'b'");
}

struct TrainingConfig {
  std::size_t L = 2, r = 8;
  int steps = 4000;
  int batch = 64;
  double lr = 0.02;
  double momentum = 0.9;
  double init_scale = 1.0;
  std::uint64_t seed = 1;
};

namespace detail {

/// Dense trainer-side network state: the constructions trade in sparse
/// networks, gradient descent wants flat dense arrays.
struct DenseNet {
  std::size_t d = 1;
  std::vector<std::size_t> widths;  // L entries
  std::vector<Vec> w;               // per layer, row-major (rows x prev)
  std::vector<Vec> b;
  Vec ow;  // 1 x r_L
  double ob = 0.0;

  static DenseNet init(std::size_t d, std::size_t L, std::size_t r, double scale,
                       std::mt19937_64 &rng) {
    DenseNet n;
    n.d = d;
    n.widths.assign(L, r);
    std::normal_distribution<double> g(0.0, 1.0);
    std::size_t prev = d;
    for (std::size_t s = 0; s < L; ++s) {
      const double sd = scale * std::sqrt(2.0 / double(prev));
      n.w.push_back(Vec(r * prev));
      n.b.push_back(Vec(r, 0.0));
      for (auto &v : n.w.back()) v = sd * g(rng);
      prev = r;
    }
    const double sd = scale * std::sqrt(1.0 / double(prev));
    n.ow.assign(prev, 0.0);
    for (auto &v : n.ow) v = sd * g(rng);
    n.ob = 0.0;
    return n;
  }

  double forward(std::span<const double> x, std::vector<Vec> &acts) const {
    acts.assign(widths.size(), {});
    Vec cur(x.begin(), x.end());
    std::size_t prev = d;
    for (std::size_t s = 0; s < widths.size(); ++s) {
      Vec nxt(widths[s], 0.0);
      for (std::size_t i = 0; i < widths[s]; ++i) {
        double acc = b[s][i];
        const double *row = w[s].data() + i * prev;
        for (std::size_t j = 0; j < prev; ++j) acc += row[j] * cur[j];
        nxt[i] = acc > 0.0 ? acc : 0.0;
      }
      acts[s] = nxt;
      cur = std::move(nxt);
      prev = widths[s];
    }
    double out = ob;
    for (std::size_t j = 0; j < prev; ++j) out += ow[j] * cur[j];
    return out;
  }

  FeedForwardNetwork to_network() const {
    FeedForwardNetwork net;
    net.set_input_dim(d);
    std::size_t prev = d;
    for (std::size_t s = 0; s < widths.size(); ++s) {
      Matrix m(widths[s], prev);
      for (std::size_t i = 0; i < widths[s]; ++i)
        for (std::size_t j = 0; j < prev; ++j) m.set(i, j, w[s][i * prev + j]);
      net.push_layer(std::move(m), b[s]);
      prev = widths[s];
    }
    Matrix o(1, prev);
    for (std::size_t j = 0; j < prev; ++j) o.set(0, j, ow[j]);
    net.set_output(std::move(o), Vec{ob});
    return net;
  }
};

}  // namespace detail

inline double empirical_risk(const FeedForwardNetwork &net, const Dataset &data) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = net.evaluate(data.X[i]) - data.y[i];
    s += e * e;
  }
  return s / double(data.size());
}

struct FitResult {
  FeedForwardNetwork net;
  double initial_risk = 0.0;
  double final_risk = 0.0;
  int steps = 0;
};

/// Approximate empirical-L2-risk minimizer: seeded mini-batch gradient
/// descent with momentum over F(L, r). Deterministic given the seed.
inline FitResult fit(const Dataset &data, const TrainingConfig &cfg) {
  if (data.size() == 0) throw TrainingError("fit: empty dataset");
  const std::size_t d = data.X[0].size();
  std::mt19937_64 rng(cfg.seed);
  detail::DenseNet net = detail::DenseNet::init(d, cfg.L, cfg.r, cfg.init_scale, rng);

  std::vector<Vec> vw(cfg.L), vb(cfg.L);
  std::size_t prev = d;
  for (std::size_t s = 0; s < cfg.L; ++s) {
    vw[s].assign(cfg.r * prev, 0.0);
    vb[s].assign(cfg.r, 0.0);
    prev = cfg.r;
  }
  Vec vow(prev, 0.0);
  double vob = 0.0;

  std::vector<Vec> acts;
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto full_risk = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double e = net.forward(data.X[i], acts) - data.y[i];
      s += e * e;
    }
    return s / double(data.size());
  };

  FitResult out;
  out.initial_risk = full_risk();
  double best_risk = out.initial_risk;
  detail::DenseNet best = net;

  std::size_t cursor = data.size();
  std::vector<Vec> gw(cfg.L), gb(cfg.L);
  Vec gow;
  for (int step = 0; step < cfg.steps; ++step) {
    // deterministic reshuffled mini-batches
    const std::size_t batch = std::min<std::size_t>(cfg.batch, data.size());
    prev = d;
    for (std::size_t s = 0; s < cfg.L; ++s) {
      gw[s].assign(cfg.r * prev, 0.0);
      gb[s].assign(cfg.r, 0.0);
      prev = cfg.r;
    }
    gow.assign(prev, 0.0);
    double gob = 0.0;

    for (std::size_t bi = 0; bi < batch; ++bi) {
      if (cursor >= data.size()) {
        for (std::size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1], order[rng() % i]);
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      const double pred = net.forward(data.X[idx], acts);
      const double g0 = 2.0 * (pred - data.y[idx]) / double(batch);
      // backprop
      const Vec &last = cfg.L > 0 ? acts[cfg.L - 1] : Vec();
      Vec delta(last.size(), 0.0);
      for (std::size_t j = 0; j < last.size(); ++j) {
        gow[j] += g0 * last[j];
        delta[j] = g0 * net.ow[j] * (last[j] > 0.0 ? 1.0 : 0.0);
      }
      gob += g0;
      for (std::size_t s = cfg.L; s-- > 0;) {
        const Vec &below = s == 0 ? data.X[idx] : acts[s - 1];
        const std::size_t pw = below.size();
        Vec ndelta(pw, 0.0);
        for (std::size_t i = 0; i < net.widths[s]; ++i) {
          const double di = delta[i];
          if (di == 0.0) continue;
          gb[s][i] += di;
          double *grow = gw[s].data() + i * pw;
          const double *wrow = net.w[s].data() + i * pw;
          for (std::size_t j = 0; j < pw; ++j) {
            grow[j] += di * below[j];
            ndelta[j] += di * wrow[j];
          }
        }
        if (s > 0)
          for (std::size_t j = 0; j < pw; ++j)
            ndelta[j] *= acts[s - 1][j] > 0.0 ? 1.0 : 0.0;
        delta = std::move(ndelta);
      }
    }

    for (std::size_t s = 0; s < cfg.L; ++s) {
      for (std::size_t k = 0; k < gw[s].size(); ++k) {
        vw[s][k] = cfg.momentum * vw[s][k] - cfg.lr * gw[s][k];
        net.w[s][k] += vw[s][k];
      }
      for (std::size_t k = 0; k < gb[s].size(); ++k) {
        vb[s][k] = cfg.momentum * vb[s][k] - cfg.lr * gb[s][k];
        net.b[s][k] += vb[s][k];
      }
    }
    for (std::size_t k = 0; k < gow.size(); ++k) {
      vow[k] = cfg.momentum * vow[k] - cfg.lr * gow[k];
      net.ow[k] += vow[k];
    }
    vob = cfg.momentum * vob - cfg.lr * gob;
    net.ob += vob;

    if ((step + 1) % 200 == 0 || step + 1 == cfg.steps) {
      const double risk = full_risk();
      if (!std::isfinite(risk))
        throw TrainingError("fit: risk diverged at step " + std::to_string(step + 1) +
                            " (L=" + std::to_string(cfg.L) + ", r=" + std::to_string(cfg.r) +
                            ", lr=" + std::to_string(cfg.lr) + ")");
      if (risk < best_risk) {
        best_risk = risk;
        best = net;
      }
    }
  }
  out.net = best.to_network();
  out.final_risk = best_risk;
  out.steps = cfg.steps;
  if (!std::isfinite(out.final_risk)) throw TrainingError("fit: non-finite final risk");
  return out;
}

/// Truncation operator T_beta: clamps predictions to [-beta, beta].
struct TruncatedPredictor {
  FeedForwardNetwork net;
  double beta = 1.0;

  double operator()(std::span<const double> x) const {
    return std::clamp(net.evaluate(x), -beta, beta);
  }
};

inline TruncatedPredictor truncate_estimator(FeedForwardNetwork net, double beta) {
  if (beta <= 0.0) throw TrainingError("truncate_estimator: beta > 0 required");
  return TruncatedPredictor{std::move(net), beta};
}

struct SelectionResult {
  std::size_t best_index = 0;
  FitResult fit;
  Vec test_risks;
};

/// Splitting of the sample: train every candidate on the first ~n/2 points,
/// pick the least empirical risk on the held-out half (ties: fewer
/// parameters, then lower index).
inline SelectionResult split_sample_select(const Dataset &data,
                                           std::span<const TrainingConfig> candidates) {
  if (candidates.empty()) throw TrainingError("split_sample_select: no candidates");
  if (data.size() < 4) throw TrainingError("split_sample_select: n >= 4 required");
  const std::size_t nl = data.size() / 2;
  Dataset train, test;
  train.X.assign(data.X.begin(), data.X.begin() + nl);
  train.y.assign(data.y.begin(), data.y.begin() + nl);
  test.X.assign(data.X.begin() + nl, data.X.end());
  test.y.assign(data.y.begin() + nl, data.y.end());

  SelectionResult out;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_params = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    FitResult f = fit(train, candidates[k]);
    const double risk = empirical_risk(f.net, test);
    out.test_risks.push_back(risk);
    const std::size_t params =
        count_parameters(data.X[0].size(), candidates[k].L, candidates[k].r);
    const bool better =
        risk < best || (risk == best && params < best_params);
    if (k == 0 || better) {
      best = risk;
      best_params = params;
      out.best_index = k;
      out.fit = std::move(f);
    }
  }
  return out;
}

struct L2Estimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Monte Carlo estimate of the L2 error integral against the X distribution.
inline L2Estimate measure_l2(const std::function<double(std::span<const double>)> &predictor,
                             const std::function<double(std::span<const double>)> &m,
                             int d, double radius, std::size_t n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw TrainingError("measure_l2: n_mc >= 1 required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-radius, radius);
  double s = 0.0, s2 = 0.0;
  Vec x(d, 0.0);
  for (std::size_t i = 0; i < n_mc; ++i) {
    for (auto &v : x) v = ux(rng);
    const double e = predictor(x) - m(x);
    const double sq = e * e;
    s += sq;
    s2 += sq * sq;
  }
  L2Estimate out;
  out.mean = s / double(n_mc);
  const double var = std::max(0.0, s2 / double(n_mc) - out.mean * out.mean);
  out.se = std::sqrt(var / double(n_mc));
  return out;
}

struct ExperimentSpec {
  std::function<double(std::span<const double>)> target;
  int d = 2;
  double radius = 1.0;
  double noise_sigma = 0.1;
  std::vector<std::pair<double, int>> P{{2.0, 2}};
  std::vector<std::size_t> n_list{200, 800, 3200};
  std::vector<char> rules{'a', 'b'};
  int replications = 10;
  std::uint64_t seed = 1;
  int epochs = 60;
  int batch = 64;
  double lr = 0.02;
  double momentum = 0.9;
  std::size_t n_mc = 20000;
  ArchitectureConstants consts;
};

struct ExperimentRow {
  std::size_t n = 0;
  char rule = 'a';
  std::size_t L = 0, r = 0, W = 0;
  std::uint64_t seed = 0;
  double train_risk = 0.0;
  double test_risk = 0.0;
  double l2_mc = 0.0;
  double se = 0.0;
};

inline ExperimentRow run_replication(const ExperimentSpec &spec, std::size_t n,
                                     char rule, int rep) {
  ExperimentRow row;
  row.n = n;
  row.rule = rule;
  auto [L, r] = choose_architecture(double(n), spec.P, rule, spec.consts);
  row.L = L;
  row.r = r;
  row.W = count_parameters(spec.d, L, r);
  row.seed = spec.seed + 7919 * static_cast<std::uint64_t>(rep);
  Dataset data = generate_dataset(spec.target, spec.d, n, spec.radius,
                                  spec.noise_sigma, row.seed);
  TrainingConfig cfg;
  cfg.L = L;
  cfg.r = r;
  cfg.batch = spec.batch;
  cfg.lr = spec.lr;
  cfg.momentum = spec.momentum;
  cfg.steps = std::max(1, spec.epochs * static_cast<int>((n + spec.batch - 1) / spec.batch));
  cfg.seed = row.seed ^ 0x9e3779b97f4a7c15ull;
  FitResult f = fit(data, cfg);
  row.train_risk = f.final_risk;
  Dataset heldout = generate_dataset(spec.target, spec.d, std::min<std::size_t>(n, 1000),
                                     spec.radius, spec.noise_sigma, row.seed + 1);
  row.test_risk = empirical_risk(f.net, heldout);
  const double beta = spec.consts.c3 * std::log(double(n));
  TruncatedPredictor pred = truncate_estimator(std::move(f.net), beta);
  L2Estimate l2 = measure_l2([&pred](std::span<const double> x) { return pred(x); },
                             spec.target, spec.d, spec.radius, spec.n_mc, row.seed + 2);
  row.l2_mc = l2.mean;
  row.se = l2.se;
  return row;
}

/// Runs the grid; replications run on two threads, rows ordered
/// deterministically by (n, rule, replication).
inline std::vector<ExperimentRow> run_experiment(const ExperimentSpec &spec) {
  struct Job {
    std::size_t n;
    char rule;
    int rep;
  };
  std::vector<Job> jobs;
  for (std::size_t n : spec.n_list)
    for (char rule : spec.rules)
      for (int rep = 0; rep < spec.replications; ++rep) jobs.push_back({n, rule, rep});
  std::vector<ExperimentRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) break;
      rows[k] = run_replication(spec, jobs[k].n, jobs[k].rule, jobs[k].rep);
    }
  };
  std::thread t(worker);
  worker();
  t.join();
  return rows;
}

inline std::string experiment_csv(std::span<const ExperimentRow> rows) {
  std::string out = "n,rule,L,r,W,seed,train_risk,test_risk,l2_mc,se\n";
  char buf[256];
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%c,%zu,%zu,%zu,%llu,%.17g,%.17g,%.17g,%.17g\n",
                  r.n, r.rule, r.L, r.r, r.W,
                  static_cast<unsigned long long>(r.seed), r.train_risk, r.test_risk,
                  r.l2_mc, r.se);
    out += buf;
  }
  return out;
}

}  // namespace relnet
