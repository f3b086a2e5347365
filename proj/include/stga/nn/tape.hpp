#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stga/types.hpp"

namespace stga::nn {

class Tape;

/// Handle to a tensor recorded on a tape. Cheap to copy; only valid for the
/// tape it came from and while that slot has not been truncated away.
struct Var {
  Tape* tape = nullptr;
  std::int32_t idx = -1;

  bool valid() const { return tape != nullptr && idx >= 0; }
};

/// Dynamically recorded computation tape for reverse-mode differentiation.
///
/// Every operation appends one tensor (value + grad of equal shape) and, when
/// any input requires gradients, a backward closure. backward() runs the
/// closures in reverse recording order, which is a valid topological order
/// because the tape is append-only. Tapes are rebuilt per sequence; graph
/// topology changes with every snapshot so nothing is cached across them.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(const Mat& value, bool requires_grad = false);
  Var leaf(const Vec& value, bool requires_grad = false);
  Var scalar(double value, bool requires_grad = false);
  Var zeros(int rows, int cols = 1);

  const Mat& value(Var v) const;
  const Mat& grad(Var v) const;
  bool requires_grad(Var v) const;

  /// Seeds the 1x1 root with gradient 1 and runs reverse accumulation.
  /// One reverse pass per tape; gradients of leaves are then read via grad().
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

  /// Drops every tensor recorded at or after `mark`. Lets rollouts reuse one
  /// tape: snapshot size(), roll forward, read results, truncate back.
  void truncate(std::size_t mark);

  /// Records an op result. `backprop` may be empty when no input needs
  /// gradients. Rejects non-finite values (op name is reported).
  Var record(Mat value, bool requires_grad, std::function<void(Tape&)> backprop,
             const char* op_name);

  Mat& grad_mut(Var v);

 private:
  struct Tensor {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backprop;
  };

  std::vector<Tensor> nodes_;
  bool backward_done_ = false;
};

// ---- elementwise / linear-algebra ops (free functions) --------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var neg(Var a);
Var cmul(Var a, Var b);  // Hadamard product
Var cdiv(Var a, Var b);
Var scale(Var a, double k);
Var add_scalar(Var a, double k);

/// w [K x D] times x [D x 1].
Var matvec(Var w, Var x);
/// w*x + b in one tape node.
Var affine(Var w, Var x, Var b);

Var sigmoid(Var x);
Var tanh(Var x);
Var exp(Var x);
Var log(Var x);

/// max(0,x) + alpha*min(0,x) with a learnable 1x1 alpha.
Var prelu(Var x, Var alpha);

/// Numerically stable softmax over all entries of a column vector.
Var softmax(Var x);

Var concat(std::span<const Var> parts);
Var slice(Var x, int offset, int len);
Var sum(Var x);                       // 1x1
Var mean(std::span<const Var> xs);    // elementwise mean of same-shape vars

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator-(Var a) { return neg(a); }
inline Var operator*(Var a, Var b) { return cmul(a, b); }
inline Var operator/(Var a, Var b) { return cdiv(a, b); }
inline Var operator*(double k, Var a) { return scale(a, k); }

}  // namespace stga::nn
