#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "focalad/params.hpp"
#include "focalad/tape.hpp"

namespace focalad {

using BoundParams = std::map<std::string, Var>;

inline Var bound_var(const BoundParams& bound, const std::string& name) {
  auto it = bound.find(name);
  if (it == bound.end()) throw std::invalid_argument("parameter not bound on tape: " + name);
  return it->second;
}

// Fully-connected stack. dims = {in, hidden..., out}; tanh on every layer
// except the last.
struct MlpSpec {
  std::string prefix;
  std::vector<std::size_t> dims;

  std::size_t layer_count() const { return dims.size() - 1; }
  std::string weight_name(std::size_t l) const { return prefix + "/W" + std::to_string(l); }
  std::string bias_name(std::size_t l) const { return prefix + "/b" + std::to_string(l); }
};

inline void register_mlp(ParamSet& params, const MlpSpec& spec) {
  if (spec.dims.size() < 2) throw std::invalid_argument("mlp: need at least one layer");
  for (std::size_t l = 0; l + 1 < spec.dims.size(); ++l) {
    const std::size_t in = spec.dims[l], out = spec.dims[l + 1];
    params.add(spec.weight_name(l), {out, in}, in);
    params.add(spec.bias_name(l), {out}, in);
  }
}

inline Var mlp_apply(Tape& tape, const BoundParams& bound, const MlpSpec& spec, Var x) {
  Var h = x;
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    h = tape.linear(bound_var(bound, spec.weight_name(l)), h,
                    bound_var(bound, spec.bias_name(l)), spec.prefix + " layer " + std::to_string(l));
    if (l + 1 < spec.layer_count()) h = tape.tanh(h);
  }
  return h;
}

// Multi-head cross-attention. Projections are bias-free; query dim, key dim
// and value dim may differ, the model dim must divide evenly into heads.
struct MhcaSpec {
  std::string prefix;
  std::size_t query_dim = 0;
  std::size_t key_dim = 0;
  std::size_t value_dim = 0;
  std::size_t model_dim = 0;
  std::size_t heads = 1;

  std::string wq() const { return prefix + "/Wq"; }
  std::string wk() const { return prefix + "/Wk"; }
  std::string wv() const { return prefix + "/Wv"; }
  std::string wo() const { return prefix + "/Wo"; }
};

inline void register_mhca(ParamSet& params, const MhcaSpec& spec) {
  if (spec.heads == 0 || spec.model_dim % spec.heads != 0) {
    throw std::invalid_argument("mhca: model dim must be divisible by heads");
  }
  params.add(spec.wq(), {spec.model_dim, spec.query_dim}, spec.query_dim);
  params.add(spec.wk(), {spec.model_dim, spec.key_dim}, spec.key_dim);
  params.add(spec.wv(), {spec.model_dim, spec.value_dim}, spec.value_dim);
  params.add(spec.wo(), {spec.model_dim, spec.model_dim}, spec.model_dim);
}

inline Var mhca_apply(Tape& tape, const BoundParams& bound, const MhcaSpec& spec, Var query,
                      const std::vector<Var>& keys, const std::vector<Var>& values) {
  if (keys.empty()) throw std::invalid_argument("mhca: no agents to attend over");
  if (keys.size() != values.size()) throw std::invalid_argument("mhca: key/value count mismatch");
  const std::size_t head_dim = spec.model_dim / spec.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Var q = tape.matvec(bound_var(bound, spec.wq()), query, spec.prefix + "/Wq");
  std::vector<Var> k, v;
  k.reserve(keys.size());
  v.reserve(values.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    k.push_back(tape.matvec(bound_var(bound, spec.wk()), keys[i], spec.prefix + "/Wk"));
    v.push_back(tape.matvec(bound_var(bound, spec.wv()), values[i], spec.prefix + "/Wv"));
  }

  std::vector<Var> head_contexts;
  head_contexts.reserve(spec.heads);
  for (std::size_t h = 0; h < spec.heads; ++h) {
    const std::size_t off = h * head_dim;
    Var qh = tape.slice(q, off, head_dim);
    std::vector<Var> scores;
    scores.reserve(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
      scores.push_back(tape.scale(tape.dot(qh, tape.slice(k[i], off, head_dim)), scale));
    }
    Var attn = tape.softmax(tape.concat(scores));
    std::vector<Var> vh;
    vh.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) vh.push_back(tape.slice(v[i], off, head_dim));
    head_contexts.push_back(tape.weighted_sum(attn, vh));
  }
  Var merged = spec.heads == 1 ? head_contexts[0] : tape.concat(head_contexts);
  return tape.matvec(bound_var(bound, spec.wo()), merged, spec.prefix + "/Wo");
}

}  // namespace focalad
