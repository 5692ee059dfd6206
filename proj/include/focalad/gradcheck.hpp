#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "focalad/params.hpp"

namespace focalad {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

// Compares analytic gradients against central finite differences of f,
// parameter element by parameter element. The relative error per element is
// |analytic - fd| / max(1, |analytic|).
inline GradCheckResult finite_diff_check(const std::function<double(const ParamSet&)>& f,
                                         const ParamSet& at, const GradMap& analytic,
                                         double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw std::invalid_argument("finite_diff_check: eps must be in [1e-7, 1e-3]");
  }
  ParamSet work = at;
  GradCheckResult result;
  for (const std::string& name : at.names()) {
    auto git = analytic.find(name);
    if (git == analytic.end()) {
      throw std::invalid_argument("finite_diff_check: missing analytic gradient for " + name);
    }
    Tensor& p = work.at(name);
    const Tensor& g = git->second;
    if (!p.same_shape(g)) {
      throw std::invalid_argument("finite_diff_check: gradient shape mismatch for " + name);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p.data[i];
      p.data[i] = saved + eps;
      const double fp = f(work);
      p.data[i] = saved - eps;
      const double fm = f(work);
      p.data[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw std::runtime_error("finite_diff_check: non-finite function value at " + name);
      }
      const double fd = (fp - fm) / (2.0 * eps);
      const double a = g.data[i];
      const double rel = std::abs(a - fd) / std::max(1.0, std::abs(a));
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace focalad
