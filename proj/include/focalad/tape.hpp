#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "focalad/tensor.hpp"

namespace focalad {

// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff tape. Ops append nodes in topological order; backward
// walks the reachable subgraph in reverse creation order. All accumulation
// loops run in fixed row-major order so repeated runs are bit-identical.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  void reset() {
    nodes_.clear();
    params_.clear();
  }

  std::size_t node_count() const { return nodes_.size(); }

  const Tensor& value(Var v) const { return node(v).value; }
  const Tensor& grad(Var v) const {
    const Node& n = node(v);
    if (n.grad.data.empty() && n.value.size() > 0) {
      throw std::logic_error("tape: gradient not populated; call backward first");
    }
    return n.grad;
  }

  Var constant(Tensor t) { return push(std::move(t), {}, nullptr); }

  Var constant_scalar(double v) { return constant(Tensor::scalar(v)); }

  Var constant_vector(std::vector<double> d) {
    return constant(Tensor::vector(std::move(d)));
  }

  // Named differentiable leaf. Names must be unique per tape.
  Var param(const std::string& name, const Tensor& t) {
    if (params_.count(name)) {
      throw std::invalid_argument("tape: duplicate parameter name " + name);
    }
    Var v = push(t, {}, nullptr);
    params_[name] = v.id;
    return v;
  }

  bool has_param(const std::string& name) const { return params_.count(name) > 0; }

  Var param_var(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("tape: unknown parameter " + name);
    return Var{it->second};
  }

  // Gradients of every named parameter registered on this tape.
  std::map<std::string, Tensor> param_grads() const {
    std::map<std::string, Tensor> out;
    for (const auto& [name, id] : params_) out[name] = nodes_[id].grad;
    return out;
  }

  // ---- elementwise ----

  Var add(Var a, Var b) {
    check_same_shape(a, b, "add");
    Tensor out = value(a);
    const Tensor& vb = value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += vb.data[i];
    return push(std::move(out), {a, b}, [](Tape& t, const Node& n) {
      t.accumulate(n.parents[0], n.grad.data);
      t.accumulate(n.parents[1], n.grad.data);
    });
  }

  Var sub(Var a, Var b) {
    check_same_shape(a, b, "sub");
    Tensor out = value(a);
    const Tensor& vb = value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= vb.data[i];
    return push(std::move(out), {a, b}, [](Tape& t, const Node& n) {
      t.accumulate(n.parents[0], n.grad.data);
      Node& pb = t.nodes_[n.parents[1]];
      for (std::size_t i = 0; i < n.grad.size(); ++i) pb.grad.data[i] -= n.grad.data[i];
    });
  }

  Var mul(Var a, Var b) {
    check_same_shape(a, b, "mul");
    Tensor out = value(a);
    const Tensor& vb = value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= vb.data[i];
    return push(std::move(out), {a, b}, [](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      Node& pb = t.nodes_[n.parents[1]];
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        pa.grad.data[i] += n.grad.data[i] * pb.value.data[i];
        pb.grad.data[i] += n.grad.data[i] * pa.value.data[i];
      }
    });
  }

  Var scale(Var a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v *= c;
    return push(std::move(out), {a}, [c](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad.data[i] += c * n.grad.data[i];
    });
  }

  // s * v where s is a scalar node.
  Var scale_by(Var s, Var v) {
    check_scalar(s, "scale_by");
    const double sv = value(s).data[0];
    Tensor out = value(v);
    for (double& x : out.data) x *= sv;
    return push(std::move(out), {s, v}, [](Tape& t, const Node& n) {
      Node& ps = t.nodes_[n.parents[0]];
      Node& pv = t.nodes_[n.parents[1]];
      const double sval = ps.value.data[0];
      double acc = 0.0;
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        acc += n.grad.data[i] * pv.value.data[i];
        pv.grad.data[i] += sval * n.grad.data[i];
      }
      ps.grad.data[0] += acc;
    });
  }

  Var tanh(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::tanh(v);
    return push(std::move(out), {a}, [](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        const double y = n.value.data[i];
        pa.grad.data[i] += n.grad.data[i] * (1.0 - y * y);
      }
    });
  }

  Var abs(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::abs(v);
    return push(std::move(out), {a}, [](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        const double x = pa.value.data[i];
        const double s = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        pa.grad.data[i] += n.grad.data[i] * s;
      }
    });
  }

  // ---- linear algebra ----

  // W (out x in) applied to x (in), plus bias b (out).
  Var linear(Var w, Var x, Var b, const std::string& label = "linear") {
    const Tensor& vw = value(w);
    const Tensor& vx = value(x);
    const Tensor& vb = value(b);
    if (vw.shape.size() != 2) throw std::invalid_argument(label + ": weight must be a matrix");
    const std::size_t rows = vw.shape[0], cols = vw.shape[1];
    if (vx.size() != cols) {
      throw std::invalid_argument(label + ": expected input dim " + std::to_string(cols) +
                                  ", got " + std::to_string(vx.size()));
    }
    if (vb.size() != rows) throw std::invalid_argument(label + ": bias dim mismatch");
    Tensor out = Tensor::zeros({rows});
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = vb.data[r];
      const double* wr = vw.data.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * vx.data[c];
      out.data[r] = acc;
    }
    return push(std::move(out), {w, x, b}, [rows, cols](Tape& t, const Node& n) {
      Node& pw = t.nodes_[n.parents[0]];
      Node& px = t.nodes_[n.parents[1]];
      Node& pb = t.nodes_[n.parents[2]];
      for (std::size_t r = 0; r < rows; ++r) {
        const double g = n.grad.data[r];
        pb.grad.data[r] += g;
        double* gwr = pw.grad.data.data() + r * cols;
        const double* wr = pw.value.data.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
          gwr[c] += g * px.value.data[c];
          px.grad.data[c] += g * wr[c];
        }
      }
    });
  }

  // W (out x in) applied to x (in), no bias.
  Var matvec(Var w, Var x, const std::string& label = "matvec") {
    const Tensor& vw = value(w);
    const Tensor& vx = value(x);
    if (vw.shape.size() != 2) throw std::invalid_argument(label + ": weight must be a matrix");
    const std::size_t rows = vw.shape[0], cols = vw.shape[1];
    if (vx.size() != cols) {
      throw std::invalid_argument(label + ": expected input dim " + std::to_string(cols) +
                                  ", got " + std::to_string(vx.size()));
    }
    Tensor out = Tensor::zeros({rows});
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      const double* wr = vw.data.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * vx.data[c];
      out.data[r] = acc;
    }
    return push(std::move(out), {w, x}, [rows, cols](Tape& t, const Node& n) {
      Node& pw = t.nodes_[n.parents[0]];
      Node& px = t.nodes_[n.parents[1]];
      for (std::size_t r = 0; r < rows; ++r) {
        const double g = n.grad.data[r];
        double* gwr = pw.grad.data.data() + r * cols;
        const double* wr = pw.value.data.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
          gwr[c] += g * px.value.data[c];
          px.grad.data[c] += g * wr[c];
        }
      }
    });
  }

  Var dot(Var a, Var b) {
    check_same_shape(a, b, "dot");
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) acc += va.data[i] * vb.data[i];
    return push(Tensor::scalar(acc), {a, b}, [](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      Node& pb = t.nodes_[n.parents[1]];
      const double g = n.grad.data[0];
      for (std::size_t i = 0; i < pa.value.size(); ++i) {
        pa.grad.data[i] += g * pb.value.data[i];
        pb.grad.data[i] += g * pa.value.data[i];
      }
    });
  }

  // ---- shape ops ----

  Var concat(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: empty input");
    std::vector<double> data;
    std::vector<std::size_t> offsets;
    for (Var p : parts) {
      offsets.push_back(data.size());
      const Tensor& v = value(p);
      data.insert(data.end(), v.data.begin(), v.data.end());
    }
    return push(Tensor::vector(std::move(data)), parts,
                [offsets](Tape& t, const Node& n) {
                  for (std::size_t k = 0; k < n.parents.size(); ++k) {
                    Node& p = t.nodes_[n.parents[k]];
                    const std::size_t off = offsets[k];
                    for (std::size_t i = 0; i < p.value.size(); ++i) {
                      p.grad.data[i] += n.grad.data[off + i];
                    }
                  }
                });
  }

  Var slice(Var a, std::size_t start, std::size_t len) {
    const Tensor& va = value(a);
    if (start + len > va.size()) throw std::invalid_argument("slice: out of range");
    std::vector<double> data(va.data.begin() + start, va.data.begin() + start + len);
    return push(Tensor::vector(std::move(data)), {a}, [start, len](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      for (std::size_t i = 0; i < len; ++i) pa.grad.data[start + i] += n.grad.data[i];
    });
  }

  // ---- reductions ----

  Var sum(Var a) {
    const Tensor& va = value(a);
    double acc = 0.0;
    for (double v : va.data) acc += v;
    return push(Tensor::scalar(acc), {a}, [](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      const double g = n.grad.data[0];
      for (std::size_t i = 0; i < pa.value.size(); ++i) pa.grad.data[i] += g;
    });
  }

  Var mean(Var a) {
    const Tensor& va = value(a);
    if (va.size() == 0) throw std::invalid_argument("mean: empty input");
    double acc = 0.0;
    for (double v : va.data) acc += v;
    const double inv = 1.0 / static_cast<double>(va.size());
    return push(Tensor::scalar(acc * inv), {a}, [inv](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      const double g = n.grad.data[0] * inv;
      for (std::size_t i = 0; i < pa.value.size(); ++i) pa.grad.data[i] += g;
    });
  }

  // Numerically stable softmax over a vector.
  Var softmax(Var a) {
    const Tensor& va = value(a);
    if (va.size() == 0) throw std::invalid_argument("softmax: empty input");
    double mx = va.data[0];
    for (double v : va.data) mx = std::max(mx, v);
    Tensor out = va;
    double denom = 0.0;
    for (double& v : out.data) {
      v = std::exp(v - mx);
      denom += v;
    }
    for (double& v : out.data) v /= denom;
    return push(std::move(out), {a}, [](Tape& t, const Node& n) {
      Node& pa = t.nodes_[n.parents[0]];
      double inner = 0.0;
      for (std::size_t i = 0; i < n.value.size(); ++i) inner += n.value.data[i] * n.grad.data[i];
      for (std::size_t i = 0; i < n.value.size(); ++i) {
        pa.grad.data[i] += n.value.data[i] * (n.grad.data[i] - inner);
      }
    });
  }

  // sum_i weights[i] * rows[i]; weights is a vector node of length rows.size().
  Var weighted_sum(Var weights, const std::vector<Var>& rows) {
    const Tensor& vw = value(weights);
    if (rows.empty()) throw std::invalid_argument("weighted_sum: no rows");
    if (vw.size() != rows.size()) throw std::invalid_argument("weighted_sum: weight count mismatch");
    const std::size_t dim = value(rows[0]).size();
    Tensor out = Tensor::zeros({dim});
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Tensor& r = value(rows[k]);
      if (r.size() != dim) throw std::invalid_argument("weighted_sum: row dim mismatch");
      const double w = vw.data[k];
      for (std::size_t i = 0; i < dim; ++i) out.data[i] += w * r.data[i];
    }
    std::vector<Var> parents = rows;
    parents.insert(parents.begin(), weights);
    return push(std::move(out), parents, [dim](Tape& t, const Node& n) {
      Node& pw = t.nodes_[n.parents[0]];
      for (std::size_t k = 1; k < n.parents.size(); ++k) {
        Node& pr = t.nodes_[n.parents[k]];
        const double w = pw.value.data[k - 1];
        double acc = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          acc += n.grad.data[i] * pr.value.data[i];
          pr.grad.data[i] += w * n.grad.data[i];
        }
        pw.grad.data[k - 1] += acc;
      }
    });
  }

  // Minimum over scalar nodes; ties resolve to the lowest index. The gradient
  // routes to the winner only.
  std::pair<Var, std::size_t> min_of(const std::vector<Var>& scalars) {
    if (scalars.empty()) throw std::invalid_argument("min_of: empty input");
    check_scalar(scalars[0], "min_of");
    std::size_t best = 0;
    double bv = value(scalars[0]).data[0];
    for (std::size_t i = 1; i < scalars.size(); ++i) {
      check_scalar(scalars[i], "min_of");
      const double v = value(scalars[i]).data[0];
      if (v < bv) {
        bv = v;
        best = i;
      }
    }
    Var out = push(Tensor::scalar(bv), {scalars[best]}, [](Tape& t, const Node& n) {
      t.nodes_[n.parents[0]].grad.data[0] += n.grad.data[0];
    });
    return {out, best};
  }

  // Copies the value into a fresh leaf; gradients stop here.
  Var detach(Var a) { return constant(value(a)); }

  // ---- backward ----

  void backward(Var loss) {
    if (!record_) throw std::logic_error("tape: backward on a non-recording tape");
    const Node& ln = node(loss);
    if (ln.value.size() != 1) throw std::invalid_argument("backward: loss must be scalar");

    for (Node& n : nodes_) {
      n.grad = Tensor::zeros(n.value.shape);
    }
    // Mark the subgraph feeding the loss.
    std::vector<bool> reachable(nodes_.size(), false);
    std::vector<int> stack = {loss.id};
    reachable[loss.id] = true;
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      for (int p : nodes_[id].parents) {
        if (!reachable[p]) {
          reachable[p] = true;
          stack.push_back(p);
        }
      }
    }
    nodes_[loss.id].grad.data[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
      if (!reachable[id]) continue;
      const Node& n = nodes_[id];
      if (n.backward_fn) n.backward_fn(*this, n);
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<int> parents;
    std::function<void(Tape&, const Node&)> backward_fn;
  };

  Var push(Tensor value, const std::vector<Var>& parents,
           std::function<void(Tape&, const Node&)> fn) {
    Node n;
    n.value = std::move(value);
    if (record_) {
      n.parents.reserve(parents.size());
      for (Var p : parents) n.parents.push_back(p.id);
      n.backward_fn = std::move(fn);
    }
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Node& node(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
      throw std::invalid_argument("tape: invalid node handle");
    }
    return nodes_[static_cast<std::size_t>(v.id)];
  }

  void accumulate(int id, const std::vector<double>& g) {
    Node& n = nodes_[id];
    for (std::size_t i = 0; i < g.size(); ++i) n.grad.data[i] += g[i];
  }

  void check_same_shape(Var a, Var b, const char* op) const {
    if (!value(a).same_shape(value(b))) {
      throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                  shape_str(value(a).shape) + " vs " + shape_str(value(b).shape));
    }
  }

  void check_scalar(Var a, const char* op) const {
    if (value(a).size() != 1) throw std::invalid_argument(std::string(op) + ": scalar expected");
  }

  bool record_;
  std::vector<Node> nodes_;
  std::map<std::string, int> params_;
};

}  // namespace focalad
