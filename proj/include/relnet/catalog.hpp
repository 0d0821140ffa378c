#pragma once

#include <fstream>

#include <json.hpp>

#include "relnet/hierarchy.hpp"
#include "relnet/serialize.hpp"

namespace relnet {

inline HierarchicalCompositionModel fig2_model(int d, int M_small, int M_big);

/// Named analytic targets with closed-form derivatives, selectable from the
/// CLI and the model files. Smoothness parameters may be overridden so one
/// shape serves several (p, C) grades.
inline SmoothFunction catalog_function(const std::string &name, int d, double p,
                                       const nlohmann::json &params = {}) {
  auto get = [&](const char *key, double dflt) {
    return params.contains(key) ? params[key].get<double>() : dflt;
  };
  const int q = p > 1.0 ? static_cast<int>(p) - (p == std::floor(p) ? 1 : 0) : 0;
  const double s = p - q;
  if (name == "constant") return make_constant(d, get("value", 1.0));
  if (name == "linear") {
    Vec w(d, get("slope", 1.0));
    if (params.contains("weights")) {
      w.clear();
      for (const auto &v : params["weights"]) w.push_back(v.get<double>());
    }
    return make_linear(d, std::move(w), get("offset", 0.0));
  }
  if (name == "sinprod")
    return make_sinprod(d, get("amp", 1.0), get("freq", 1.0), get("phase", 0.0), q, s);
  if (name == "expsum")
    return make_expsum(d, get("amp", 1.0), get("rate", 0.5), q, s);
  if (name == "kink")
    return make_kink(p, get("t", 0.31), get("amp", 1.0));
  if (name == "polynomial" || name == "poly") {
    const int deg = static_cast<int>(get("degree", q));
    Vec coeffs;
    if (params.contains("coeffs"))
      for (const auto &v : params["coeffs"]) coeffs.push_back(v.get<double>());
    else
      coeffs.assign(multiindices_up_to(d, deg).size(), 0.5);
    return make_polynomial(d, deg, std::move(coeffs), q, s);
  }
  if (name == "fig2") {
    // the two-level composite used throughout the desk-scale experiments
    HierarchicalCompositionModel m = fig2_model(d, 2, 2);
    SmoothFunction f;
    f.name = "fig2";
    f.dim = d;
    f.q = 1;
    f.p = 2.0;
    f.holder_C = 4.0;
    f.lipschitz = 4.0;
    f.value = [m](std::span<const double> x) { return evaluate_model(m, x); };
    f.cq_norm = [](double) { return 4.0; };
    f.sup_norm = [](double) { return 2.0; };
    f = with_finite_difference_derivatives(std::move(f));
    return f;
  }
  throw ConstructionError("catalog: unknown target '" + name + "'");
}

/// The Fig.-2-shaped hierarchical composition model: level-1 arities
/// (2, 3, 2) feeding a ternary top node, coordinates selected cyclically.
/// Components are bounded with gentle constants so the Lipschitz-induction
/// envelopes stay inside the member domains at desk-scale M; the arity-3
/// nodes are degree-1 polynomials, whose correction chains are exact.
inline HierarchicalCompositionModel fig2_model(int d = 2, int M_small = 2,
                                               int M_big = 2) {
  HierarchicalCompositionModel m;
  m.input_dim = d;
  m.domain_radius = 1.0;
  auto pick = [&](std::initializer_list<int> raw) {
    std::vector<int> out;
    for (int v : raw) out.push_back(v % d);
    return out;
  };
  std::vector<HcmNode> level1;
  {
    HcmNode n;
    n.g = make_sinprod(2, 0.4, 0.5, 0.3, 1, 1.0);
    n.M = M_small;
    n.select = pick({0, 1});
    level1.push_back(std::move(n));
  }
  {
    HcmNode n;
    n.g = make_polynomial(3, 1, Vec{0.1, 0.2, -0.15, 0.15}, 1);
    n.M = M_big;
    n.select = pick({2, 3, 4});
    level1.push_back(std::move(n));
  }
  {
    HcmNode n;
    n.g = make_sinprod(2, 0.4, 0.6, 1.1, 1, 1.0);
    n.M = M_small;
    n.select = pick({5, 6});
    level1.push_back(std::move(n));
  }
  std::vector<HcmNode> top;
  {
    HcmNode n;
    n.g = make_polynomial(3, 1, Vec{0.1, 0.25, -0.15, 0.2}, 1);
    n.M = M_big;
    top.push_back(std::move(n));
  }
  m.levels = {std::move(level1), std::move(top)};
  m.validate();
  return m;
}

/// Model description document:
/// {"version":1,"input_dim":d,"domain_radius":a,"levels":[[{"fn":..,"p":..,
///  "arity":..,"M":..,"select":[..],"params":{..}},..],..]}
inline HierarchicalCompositionModel parse_model(const nlohmann::json &j) {
  if (!j.contains("version") || j["version"] != 1)
    throw ParseError("model: version missing or unsupported");
  HierarchicalCompositionModel m;
  if (!j.contains("input_dim") || !j["input_dim"].is_number_unsigned())
    throw ParseError("model: input_dim missing");
  m.input_dim = j["input_dim"].get<int>();
  m.domain_radius = j.contains("domain_radius") ? j["domain_radius"].get<double>() : 1.0;
  if (!j.contains("levels") || !j["levels"].is_array() || j["levels"].empty())
    throw ParseError("model: levels missing or empty");
  for (std::size_t i = 0; i < j["levels"].size(); ++i) {
    std::vector<HcmNode> lvl;
    const auto &jl = j["levels"][i];
    if (!jl.is_array() || jl.empty())
      throw ParseError("model: levels[" + std::to_string(i) + "] must be a nonempty array");
    for (std::size_t k = 0; k < jl.size(); ++k) {
      const auto &jn = jl[k];
      const std::string path = "levels[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      if (!jn.contains("fn")) throw ParseError(path + ".fn missing");
      const int arity = jn.contains("arity") ? jn["arity"].get<int>() : 1;
      const double p = jn.contains("p") ? jn["p"].get<double>() : 1.0;
      HcmNode n;
      n.g = catalog_function(jn["fn"].get<std::string>(), arity, p,
                             jn.contains("params") ? jn["params"] : nlohmann::json{});
      n.M = jn.contains("M") ? jn["M"].get<int>() : 2;
      if (i == 0) {
        if (!jn.contains("select")) throw ParseError(path + ".select missing on level 1");
        for (const auto &v : jn["select"]) n.select.push_back(v.get<int>());
      }
      lvl.push_back(std::move(n));
    }
    m.levels.push_back(std::move(lvl));
  }
  m.validate();
  return m;
}

inline HierarchicalCompositionModel load_model(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  return parse_model(j);
}

}  // namespace relnet
