#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "focalad/tape.hpp"
#include "focalad/tensor.hpp"

#include <json.hpp>

namespace focalad {

using GradMap = std::map<std::string, Tensor>;

// Shortest decimal string that parses back to the same double.
inline std::string double_to_string(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double double_from_string(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("malformed float literal: " + s);
  }
  return v;
}

// Named parameter tensors with deterministic seeded initialization.
// Registration order is part of the contract: the same seed and the same
// sequence of add() calls reproduce identical values.
class ParamSet {
 public:
  explicit ParamSet(std::uint64_t seed) : seed_(seed), rng_(seed) {}

  // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  void add(const std::string& name, std::vector<std::size_t> shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = (2.0 * next_unit() - 1.0) * bound;
    insert(name, std::move(t));
  }

  void add_zeros(const std::string& name, std::vector<std::size_t> shape) {
    insert(name, Tensor::zeros(std::move(shape)));
  }

  void insert(const std::string& name, Tensor t) {
    if (index_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    index_[name] = order_.size();
    order_.push_back(name);
    values_.push_back(std::move(t));
  }

  const Tensor& at(const std::string& name) const { return values_[find(name)]; }
  Tensor& at(const std::string& name) { return values_[find(name)]; }
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  const std::vector<std::string>& names() const { return order_; }
  std::size_t count() const { return order_.size(); }
  std::uint64_t seed() const { return seed_; }

  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const Tensor& t : values_) n += t.size();
    return n;
  }

  // Binds every parameter onto a tape as a named leaf.
  std::map<std::string, Var> bind(Tape& tape) const {
    std::map<std::string, Var> vars;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      vars[order_[i]] = tape.param(order_[i], values_[i]);
    }
    return vars;
  }

 private:
  std::size_t find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
    return it->second;
  }

  // mt19937_64 output mapped to [0,1) with an explicit 53-bit mantissa so the
  // stream does not depend on the standard library's distribution details.
  double next_unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::vector<std::string> order_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Gradients for every parameter in the set; parameters absent from the tape
// (unused in the forward pass) report zeros.
inline GradMap collect_grads(const Tape& tape, const ParamSet& params) {
  GradMap grads = tape.param_grads();
  for (const std::string& name : params.names()) {
    if (!grads.count(name)) grads[name] = Tensor::zeros(params.at(name).shape);
  }
  return grads;
}

inline constexpr int kParamSetFormatVersion = 1;

inline nlohmann::json paramset_to_json(const ParamSet& params) {
  nlohmann::json names = nlohmann::json::object();
  for (const std::string& name : params.names()) {
    const Tensor& t = params.at(name);
    nlohmann::json values = nlohmann::json::array();
    for (double v : t.data) values.push_back(double_to_string(v));
    names[name] = {{"shape", t.shape}, {"values", values}};
  }
  return {{"format_version", kParamSetFormatVersion},
          {"seed", params.seed()},
          {"params", names}};
}

inline ParamSet paramset_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") || j.at("format_version").get<int>() != kParamSetFormatVersion) {
    throw std::invalid_argument("checkpoint: unsupported format_version");
  }
  ParamSet out(j.at("seed").get<std::uint64_t>());
  const auto& names = j.at("params");
  for (auto it = names.begin(); it != names.end(); ++it) {
    std::vector<std::size_t> shape = it.value().at("shape").get<std::vector<std::size_t>>();
    std::vector<double> data;
    for (const auto& s : it.value().at("values")) data.push_back(double_from_string(s.get<std::string>()));
    out.insert(it.key(), Tensor(std::move(shape), std::move(data)));
  }
  return out;
}

}  // namespace focalad
