#pragma once

// Matrix-level reverse-mode differentiation.
//
// A Tape records every operation of one forward pass. Each node stores its
// value and, once backward() runs, the adjoint of the scalar loss with respect
// to that value. Parameters are bound by pointer: backward() accumulates into
// Parameter::grad, so callers zero gradients between steps.

#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairshift/matrix.hpp"

namespace fairshift {

struct Parameter {
  Matrix value;
  Matrix grad;

  Parameter() = default;
  explicit Parameter(Matrix v) : value(std::move(v)), grad(value.rows(), value.cols()) {}
  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class AutodiffError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var scalar(double v) { return constant(Matrix(1, 1, v)); }
  Var param(Parameter& p);

  // Structure
  Var matmul(Var a, Var b);
  Var add_row_bias(Var x, Var bias);  // bias is 1 x cols, broadcast over rows
  Var select_rows(Var x, std::span<const std::size_t> idx);

  // Elementwise
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var reciprocal(Var a);
  Var clamp(Var a, double lo, double hi);  // zero gradient outside [lo, hi]

  // Reductions to 1 x 1
  Var sum(Var a);
  Var mean(Var a);

  // Forward value unchanged; no adjoint flows to the input.
  Var stop_gradient(Var a);

  // Rowwise binary negative log-likelihood -[y ln p + (1-y) ln(1-p)] for p in (0,1).
  Var binary_nll(Var probs, std::span<const int> labels);
  // Rowwise binary entropy -p ln p - (1-p) ln(1-p).
  Var binary_entropy(Var probs);

  // Custom node: caller supplies the value and a function mapping the output
  // adjoint to input adjoints (one per input, same shapes as the inputs).
  using CustomBackward = std::function<std::vector<Matrix>(const Matrix& out_grad)>;
  Var custom(std::vector<Var> inputs, Matrix value, CustomBackward backward);

  // Accumulates d(loss)/d(node) for every node and into bound parameters.
  // loss must be a 1 x 1 node of this tape.
  void backward(Var loss, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }
  const Matrix& value_of(std::size_t id) const { return nodes_.at(id).value; }
  const Matrix& grad_of(std::size_t id) const { return nodes_.at(id).grad; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    std::vector<std::size_t> inputs;
    // Reads grad of this node, accumulates into inputs' grads.
    std::function<void(Tape&, std::size_t self)> backward;
  };

  Var push(Node node);
  void check(Var v) const;
  void accumulate(std::size_t id, const Matrix& g);
  Node& node(std::size_t id) { return nodes_[id]; }
  bool needs(std::size_t id) const { return nodes_[id].requires_grad; }
  template <typename Fwd, typename Deriv>
  Var unary(Var a, Fwd f, Deriv df);

  std::deque<Node> nodes_;  // stable addresses for Var::value()
};

}  // namespace fairshift
