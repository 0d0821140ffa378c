#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "relnet/network.hpp"

namespace relnet {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string fmt17(double v) {
  if (v == 0.0 && std::signbit(v)) return "-0.0";  // "-0" parses as integer zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

inline void write_matrix(std::ostream &os, const Matrix &m) {
  os << "[";
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (i) os << ",";
    os << "[";
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) os << ",";
      os << fmt17(m.at(i, j));
    }
    os << "]";
  }
  os << "]";
}

inline void write_vec(std::ostream &os, const Vec &v) {
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << fmt17(v[i]);
  }
  os << "]";
}
}  // namespace detail

/// Network interchange document, numbers with 17 significant digits.
inline std::string serialize(const FeedForwardNetwork &net) {
  std::ostringstream os;
  os << "{\"version\":1,\"input_dim\":" << net.input_dim() << ",\"widths\":[";
  for (std::size_t s = 0; s < net.depth(); ++s) {
    if (s) os << ",";
    os << net.layer_width(s);
  }
  os << "],\"layers\":[";
  for (std::size_t s = 0; s < net.depth(); ++s) {
    if (s) os << ",";
    os << "{\"weights\":";
    detail::write_matrix(os, net.layer_weights(s));
    os << ",\"bias\":";
    detail::write_vec(os, net.layer_bias(s));
    os << "}";
  }
  os << "],\"output\":{\"weights\":";
  detail::write_matrix(os, net.output_weights());
  os << ",\"bias\":";
  detail::write_vec(os, net.output_bias());
  os << "}}";
  return os.str();
}

namespace detail {
inline Matrix parse_matrix(const nlohmann::json &j, std::size_t rows,
                           std::size_t cols, const std::string &path) {
  if (!j.is_array() || j.size() != rows)
    throw ParseError(path + ": expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto &row = j[i];
    if (!row.is_array() || row.size() != cols)
      throw ParseError(path + "[" + std::to_string(i) + "]: expected " +
                       std::to_string(cols) + " columns");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number())
        throw ParseError(path + "[" + std::to_string(i) + "][" +
                         std::to_string(k) + "]: not a number");
      m.set(i, k, row[k].get<double>());
    }
  }
  return m;
}

inline Vec parse_vec(const nlohmann::json &j, std::size_t n, const std::string &path) {
  if (!j.is_array() || j.size() != n)
    throw ParseError(path + ": expected " + std::to_string(n) + " entries");
  Vec v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_number())
      throw ParseError(path + "[" + std::to_string(i) + "]: not a number");
    v[i] = j[i].get<double>();
  }
  return v;
}
}  // namespace detail

inline FeedForwardNetwork deserialize(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(std::string("document: ") + e.what());
  }
  if (!j.contains("version") || j["version"] != 1)
    throw ParseError("version: missing or unsupported");
  if (!j.contains("input_dim") || !j["input_dim"].is_number_unsigned())
    throw ParseError("input_dim: missing or not a nonnegative integer");
  const std::size_t d = j["input_dim"].get<std::size_t>();
  if (d == 0) throw ParseError("input_dim: must be positive");
  if (!j.contains("widths") || !j["widths"].is_array())
    throw ParseError("widths: missing or not an array");
  std::vector<std::size_t> widths;
  for (std::size_t s = 0; s < j["widths"].size(); ++s) {
    const auto &w = j["widths"][s];
    if (!w.is_number_unsigned() || w.get<std::size_t>() == 0)
      throw ParseError("widths[" + std::to_string(s) + "]: must be a positive integer");
    widths.push_back(w.get<std::size_t>());
  }
  if (!j.contains("layers") || !j["layers"].is_array() ||
      j["layers"].size() != widths.size())
    throw ParseError("layers: missing or length differs from widths");

  FeedForwardNetwork net;
  net.set_input_dim(d);
  std::size_t prev = d;
  for (std::size_t s = 0; s < widths.size(); ++s) {
    const std::string path = "layers[" + std::to_string(s) + "]";
    const auto &layer = j["layers"][s];
    if (!layer.contains("weights") || !layer.contains("bias"))
      throw ParseError(path + ": missing weights or bias");
    Matrix w = detail::parse_matrix(layer["weights"], widths[s], prev, path + ".weights");
    Vec b = detail::parse_vec(layer["bias"], widths[s], path + ".bias");
    net.push_layer(std::move(w), std::move(b));
    prev = widths[s];
  }
  if (!j.contains("output") || !j["output"].contains("weights") ||
      !j["output"].contains("bias"))
    throw ParseError("output: missing weights or bias");
  const auto &ob = j["output"]["bias"];
  if (!ob.is_array() || ob.empty()) throw ParseError("output.bias: expected nonempty array");
  const std::size_t m = ob.size();
  Matrix ow = detail::parse_matrix(j["output"]["weights"], m, prev, "output.weights");
  Vec obv = detail::parse_vec(ob, m, "output.bias");
  net.set_output(std::move(ow), std::move(obv));
  return net;
}

inline void save_network(const FeedForwardNetwork &net, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << serialize(net) << "\n";
}

inline FeedForwardNetwork load_network(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return deserialize(ss.str());
}

}  // namespace relnet
