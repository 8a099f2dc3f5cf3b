#include "fairshift/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairshift/kernels.hpp"

namespace fairshift {

const Matrix& Var::value() const {
  if (!tape_) throw AutodiffError("Var: uninitialized handle");
  return tape_->value_of(id_);
}

const Matrix& Var::grad() const {
  if (!tape_) throw AutodiffError("Var: uninitialized handle");
  return tape_->grad_of(id_);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw AutodiffError("Var::scalar on a non-scalar node");
  return v[0];
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::check(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw AutodiffError("Var does not belong to this tape");
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    n.grad = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  return push(std::move(n));
}

template <typename Fwd, typename Deriv>
Var Tape::unary(Var a, Fwd f, Deriv df) {
  check(a);
  Node n;
  const Matrix& x = nodes_[a.id_].value;
  n.value = Matrix(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) n.value[i] = f(x[i]);
  n.requires_grad = needs(a.id_);
  n.inputs = {a.id_};
  n.backward = [df, in = a.id_](Tape& t, std::size_t self) {
    const Matrix& xv = t.nodes_[in].value;
    const Matrix& yv = t.nodes_[self].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix gi(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < xv.size(); ++i) gi[i] = g[i] * df(xv[i], yv[i]);
    t.accumulate(in, gi);
  };
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  check(a);
  check(b);
  Node n;
  n.value = kernels::matmul(nodes_[a.id_].value, nodes_[b.id_].value);
  n.requires_grad = needs(a.id_) || needs(b.id_);
  n.inputs = {a.id_, b.id_};
  n.backward = [ia = a.id_, ib = b.id_](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.needs(ia)) t.accumulate(ia, kernels::matmul_nt(g, t.nodes_[ib].value));
    if (t.needs(ib)) t.accumulate(ib, kernels::matmul_tn(t.nodes_[ia].value, g));
  };
  return push(std::move(n));
}

Var Tape::add_row_bias(Var x, Var bias) {
  check(x);
  check(bias);
  const Matrix& xv = nodes_[x.id_].value;
  const Matrix& bv = nodes_[bias.id_].value;
  if (bv.rows() != 1 || bv.cols() != xv.cols()) throw AutodiffError("add_row_bias: bias must be 1 x cols");
  Node n;
  n.value = xv;
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t c = 0; c < xv.cols(); ++c) n.value(r, c) += bv(0, c);
  n.requires_grad = needs(x.id_) || needs(bias.id_);
  n.inputs = {x.id_, bias.id_};
  n.backward = [ix = x.id_, ib = bias.id_](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.needs(ix)) t.accumulate(ix, g);
    if (t.needs(ib)) {
      Matrix gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
      t.accumulate(ib, gb);
    }
  };
  return push(std::move(n));
}

Var Tape::select_rows(Var x, std::span<const std::size_t> idx) {
  check(x);
  Node n;
  n.value = nodes_[x.id_].value.select_rows(idx);
  n.requires_grad = needs(x.id_);
  n.inputs = {x.id_};
  n.backward = [ix = x.id_, rows = std::vector<std::size_t>(idx.begin(), idx.end())](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    const Matrix& xv = t.nodes_[ix].value;
    Matrix gx(xv.rows(), xv.cols());
    for (std::size_t k = 0; k < rows.size(); ++k)
      for (std::size_t c = 0; c < xv.cols(); ++c) gx(rows[k], c) += g(k, c);
    t.accumulate(ix, gx);
  };
  return push(std::move(n));
}

namespace {
void require_same(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) throw AutodiffError(std::string(op) + ": shape mismatch");
}
}  // namespace

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  require_same(nodes_[a.id_].value, nodes_[b.id_].value, "add");
  Node n;
  n.value = nodes_[a.id_].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] += nodes_[b.id_].value[i];
  n.requires_grad = needs(a.id_) || needs(b.id_);
  n.inputs = {a.id_, b.id_};
  n.backward = [ia = a.id_, ib = b.id_](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  };
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  require_same(nodes_[a.id_].value, nodes_[b.id_].value, "sub");
  Node n;
  n.value = nodes_[a.id_].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] -= nodes_[b.id_].value[i];
  n.requires_grad = needs(a.id_) || needs(b.id_);
  n.inputs = {a.id_, b.id_};
  n.backward = [ia = a.id_, ib = b.id_](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(ia, g);
    if (t.needs(ib)) {
      Matrix neg = g;
      for (auto& v : neg.values()) v = -v;
      t.accumulate(ib, neg);
    }
  };
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  require_same(nodes_[a.id_].value, nodes_[b.id_].value, "mul");
  Node n;
  n.value = nodes_[a.id_].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= nodes_[b.id_].value[i];
  n.requires_grad = needs(a.id_) || needs(b.id_);
  n.inputs = {a.id_, b.id_};
  n.backward = [ia = a.id_, ib = b.id_](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.needs(ia)) {
      Matrix ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= t.nodes_[ib].value[i];
      t.accumulate(ia, ga);
    }
    if (t.needs(ib)) {
      Matrix gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= t.nodes_[ia].value[i];
      t.accumulate(ib, gb);
    }
  };
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var Tape::add_scalar(Var a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var Tape::relu(Var a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var Tape::sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var Tape::exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var Tape::log(Var a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var Tape::square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var Tape::reciprocal(Var a) {
  return unary(a, [](double x) { return 1.0 / x; }, [](double, double y) { return -y * y; });
}

Var Tape::clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var Tape::sum(Var a) {
  check(a);
  Node n;
  double s = 0.0;
  for (double v : nodes_[a.id_].value.values()) s += v;
  n.value = Matrix(1, 1, s);
  n.requires_grad = needs(a.id_);
  n.inputs = {a.id_};
  n.backward = [ia = a.id_](Tape& t, std::size_t self) {
    const Matrix& x = t.nodes_[ia].value;
    t.accumulate(ia, Matrix(x.rows(), x.cols(), t.nodes_[self].grad[0]));
  };
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  check(a);
  const double count = static_cast<double>(nodes_[a.id_].value.size());
  if (count == 0) throw AutodiffError("mean of an empty node");
  Node n;
  double s = 0.0;
  for (double v : nodes_[a.id_].value.values()) s += v;
  n.value = Matrix(1, 1, s / count);
  n.requires_grad = needs(a.id_);
  n.inputs = {a.id_};
  n.backward = [ia = a.id_, count](Tape& t, std::size_t self) {
    const Matrix& x = t.nodes_[ia].value;
    t.accumulate(ia, Matrix(x.rows(), x.cols(), t.nodes_[self].grad[0] / count));
  };
  return push(std::move(n));
}

Var Tape::stop_gradient(Var a) {
  check(a);
  Node n;
  n.value = nodes_[a.id_].value;
  return push(std::move(n));
}

Var Tape::binary_nll(Var probs, std::span<const int> labels) {
  check(probs);
  const Matrix& p = nodes_[probs.id_].value;
  if (p.size() != labels.size()) throw AutodiffError("binary_nll: label count mismatch");
  Node n;
  n.value = Matrix(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.size(); ++i) n.value[i] = labels[i] == 1 ? -std::log(p[i]) : -std::log1p(-p[i]);
  n.requires_grad = needs(probs.id_);
  n.inputs = {probs.id_};
  n.backward = [ip = probs.id_, y = std::vector<int>(labels.begin(), labels.end())](Tape& t, std::size_t self) {
    const Matrix& pv = t.nodes_[ip].value;
    const Matrix& g = t.nodes_[self].grad;
    Matrix gp(pv.rows(), pv.cols());
    for (std::size_t i = 0; i < pv.size(); ++i) gp[i] = g[i] * (y[i] == 1 ? -1.0 / pv[i] : 1.0 / (1.0 - pv[i]));
    t.accumulate(ip, gp);
  };
  return push(std::move(n));
}

Var Tape::binary_entropy(Var probs) {
  return unary(
      probs, [](double p) { return -p * std::log(p) - (1.0 - p) * std::log1p(-p); },
      [](double p, double) { return std::log1p(-p) - std::log(p); });
}

Var Tape::custom(std::vector<Var> inputs, Matrix value, CustomBackward backward) {
  Node n;
  n.value = std::move(value);
  for (const auto& v : inputs) {
    check(v);
    n.inputs.push_back(v.id_);
    n.requires_grad = n.requires_grad || needs(v.id_);
  }
  n.backward = [fn = std::move(backward)](Tape& t, std::size_t self) {
    const auto grads = fn(t.nodes_[self].grad);
    const auto& ins = t.nodes_[self].inputs;
    if (grads.size() != ins.size()) throw AutodiffError("custom backward returned wrong number of adjoints");
    for (std::size_t k = 0; k < ins.size(); ++k) {
      if (!grads[k].same_shape(t.nodes_[ins[k]].value)) throw AutodiffError("custom backward: adjoint shape mismatch");
      t.accumulate(ins[k], grads[k]);
    }
  };
  return push(std::move(n));
}

void Tape::backward(Var loss, double seed) {
  if (nodes_.empty()) throw AutodiffError("backward called before any forward recording");
  check(loss);
  if (nodes_[loss.id_].value.size() != 1) throw AutodiffError("backward: loss must be a 1 x 1 node");
  for (auto& n : nodes_) n.grad = Matrix();
  if (!nodes_[loss.id_].requires_grad) return;
  nodes_[loss.id_].grad = Matrix(1, 1, seed);
  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param) {
      if (n.param->grad.empty() || !n.param->grad.same_shape(n.grad)) n.param->grad = Matrix(n.grad.rows(), n.grad.cols());
      for (std::size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
    }
  }
}

}  // namespace fairshift
