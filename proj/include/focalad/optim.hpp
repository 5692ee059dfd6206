#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "focalad/params.hpp"
#include "focalad/tensor.hpp"

namespace focalad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment accumulators, keyed per parameter name.
struct AdamState {
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
  std::uint64_t step = 0;
};

inline void adam_step(ParamSet& params, const GradMap& grads, AdamState& state,
                      const AdamConfig& cfg) {
  for (const std::string& name : params.names()) {
    auto git = grads.find(name);
    if (git == grads.end()) throw std::invalid_argument("adam: missing gradient for " + name);
    if (!all_finite(git->second)) throw std::invalid_argument("adam: non-finite gradient for " + name);
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (const std::string& name : params.names()) {
    Tensor& p = params.at(name);
    const Tensor& g = grads.at(name);
    if (!p.same_shape(g)) throw std::invalid_argument("adam: gradient shape mismatch for " + name);
    Tensor& m = state.m.try_emplace(name, Tensor::zeros(p.shape)).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor::zeros(p.shape)).first->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace focalad
