#include "stga/nn/tape.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace stga::nn {

namespace {

void check_same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape) {
    throw ShapeError(std::string(op) + ": operands live on different tapes");
  }
}

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

Var at(Tape& t, std::int32_t i) { return Var{&t, i}; }

}  // namespace

Var Tape::record(Mat value, bool requires_grad, std::function<void(Tape&)> backprop,
                 const char* op_name) {
  if (!value.allFinite()) {
    throw NumericError(std::string(op_name) + ": non-finite result");
  }
  Tensor node;
  node.grad = Mat::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) {
    node.backprop = std::move(backprop);
  }
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(const Mat& value, bool requires_grad) {
  return record(value, requires_grad, nullptr, "leaf");
}

Var Tape::leaf(const Vec& value, bool requires_grad) {
  return record(Mat(value), requires_grad, nullptr, "leaf");
}

Var Tape::scalar(double value, bool requires_grad) {
  Mat m(1, 1);
  m(0, 0) = value;
  return record(std::move(m), requires_grad, nullptr, "scalar");
}

Var Tape::zeros(int rows, int cols) {
  return record(Mat::Zero(rows, cols), false, nullptr, "zeros");
}

const Mat& Tape::value(Var v) const {
  if (v.tape != this || v.idx < 0 || v.idx >= static_cast<std::int32_t>(nodes_.size())) {
    throw ShapeError("value: stale or foreign tape handle");
  }
  return nodes_[v.idx].value;
}

const Mat& Tape::grad(Var v) const {
  if (v.tape != this || v.idx < 0 || v.idx >= static_cast<std::int32_t>(nodes_.size())) {
    throw ShapeError("grad: stale or foreign tape handle");
  }
  return nodes_[v.idx].grad;
}

Mat& Tape::grad_mut(Var v) { return nodes_[v.idx].grad; }

bool Tape::requires_grad(Var v) const { return nodes_[v.idx].requires_grad; }

void Tape::backward(Var root) {
  if (root.tape != this) {
    throw ShapeError("backward: root lives on a different tape");
  }
  if (backward_done_) {
    throw NumericError("backward: tape already differentiated once");
  }
  Tensor& r = nodes_[root.idx];
  if (r.value.size() != 1) {
    throw ShapeError("backward: root must be a scalar");
  }
  backward_done_ = true;
  r.grad(0, 0) = 1.0;
  for (std::int32_t i = root.idx; i >= 0; --i) {
    if (nodes_[i].backprop) {
      nodes_[i].backprop(*this);
    }
  }
}

void Tape::truncate(std::size_t mark) {
  if (mark > nodes_.size()) {
    throw ShapeError("truncate: mark beyond tape end");
  }
  nodes_.resize(mark);
}

// --- binary elementwise -----------------------------------------------------

Var add(Var a, Var b) {
  check_same_tape(a, b, "add");
  Tape& t = *a.tape;
  check_same_shape(t.value(a), t.value(b), "add");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  const auto ia = a.idx, ib = b.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      t.value(a) + t.value(b), rg,
      [ia, ib, io](Tape& tp) {
        const Mat& g = tp.grad(at(tp, io));
        if (tp.requires_grad(at(tp, ia))) tp.grad_mut(at(tp, ia)) += g;
        if (tp.requires_grad(at(tp, ib))) tp.grad_mut(at(tp, ib)) += g;
      },
      "add");
}

Var sub(Var a, Var b) {
  check_same_tape(a, b, "sub");
  Tape& t = *a.tape;
  check_same_shape(t.value(a), t.value(b), "sub");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  const auto ia = a.idx, ib = b.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      t.value(a) - t.value(b), rg,
      [ia, ib, io](Tape& tp) {
        const Mat& g = tp.grad(at(tp, io));
        if (tp.requires_grad(at(tp, ia))) tp.grad_mut(at(tp, ia)) += g;
        if (tp.requires_grad(at(tp, ib))) tp.grad_mut(at(tp, ib)) -= g;
      },
      "sub");
}

Var cmul(Var a, Var b) {
  check_same_tape(a, b, "cmul");
  Tape& t = *a.tape;
  check_same_shape(t.value(a), t.value(b), "cmul");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  const auto ia = a.idx, ib = b.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      t.value(a).cwiseProduct(t.value(b)), rg,
      [ia, ib, io](Tape& tp) {
        const Mat& g = tp.grad(at(tp, io));
        if (tp.requires_grad(at(tp, ia)))
          tp.grad_mut(at(tp, ia)) += g.cwiseProduct(tp.value(at(tp, ib)));
        if (tp.requires_grad(at(tp, ib)))
          tp.grad_mut(at(tp, ib)) += g.cwiseProduct(tp.value(at(tp, ia)));
      },
      "cmul");
}

Var cdiv(Var a, Var b) {
  check_same_tape(a, b, "cdiv");
  Tape& t = *a.tape;
  check_same_shape(t.value(a), t.value(b), "cdiv");
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  const auto ia = a.idx, ib = b.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      t.value(a).cwiseQuotient(t.value(b)), rg,
      [ia, ib, io](Tape& tp) {
        const Mat& g = tp.grad(at(tp, io));
        const Mat& bv = tp.value(at(tp, ib));
        if (tp.requires_grad(at(tp, ia))) tp.grad_mut(at(tp, ia)) += g.cwiseQuotient(bv);
        if (tp.requires_grad(at(tp, ib))) {
          const Mat& yv = tp.value(at(tp, io));  // a/b
          tp.grad_mut(at(tp, ib)) -= g.cwiseProduct(yv).cwiseQuotient(bv);
        }
      },
      "cdiv");
}

// --- unary ------------------------------------------------------------------

Var neg(Var a) {
  Tape& t = *a.tape;
  const bool rg = t.requires_grad(a);
  const auto ia = a.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      -t.value(a), rg,
      [ia, io](Tape& tp) { tp.grad_mut(at(tp, ia)) -= tp.grad(at(tp, io)); }, "neg");
}

Var scale(Var a, double k) {
  Tape& t = *a.tape;
  const bool rg = t.requires_grad(a);
  const auto ia = a.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      k * t.value(a), rg,
      [ia, io, k](Tape& tp) { tp.grad_mut(at(tp, ia)) += k * tp.grad(at(tp, io)); }, "scale");
}

Var add_scalar(Var a, double k) {
  Tape& t = *a.tape;
  const bool rg = t.requires_grad(a);
  const auto ia = a.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      t.value(a).array() + k, rg,
      [ia, io](Tape& tp) { tp.grad_mut(at(tp, ia)) += tp.grad(at(tp, io)); }, "add_scalar");
}

Var sigmoid(Var x) {
  Tape& t = *x.tape;
  const bool rg = t.requires_grad(x);
  const auto ix = x.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  Mat y = (1.0 / (1.0 + (-t.value(x).array()).exp())).matrix();
  return t.record(
      std::move(y), rg,
      [ix, io](Tape& tp) {
        const auto& y = tp.value(at(tp, io)).array();
        tp.grad_mut(at(tp, ix)).array() += tp.grad(at(tp, io)).array() * y * (1.0 - y);
      },
      "sigmoid");
}

Var tanh(Var x) {
  Tape& t = *x.tape;
  const bool rg = t.requires_grad(x);
  const auto ix = x.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      t.value(x).array().tanh().matrix(), rg,
      [ix, io](Tape& tp) {
        const auto& y = tp.value(at(tp, io)).array();
        tp.grad_mut(at(tp, ix)).array() += tp.grad(at(tp, io)).array() * (1.0 - y * y);
      },
      "tanh");
}

Var exp(Var x) {
  Tape& t = *x.tape;
  const bool rg = t.requires_grad(x);
  const auto ix = x.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      t.value(x).array().exp().matrix(), rg,
      [ix, io](Tape& tp) {
        tp.grad_mut(at(tp, ix)).array() +=
            tp.grad(at(tp, io)).array() * tp.value(at(tp, io)).array();
      },
      "exp");
}

Var log(Var x) {
  Tape& t = *x.tape;
  const bool rg = t.requires_grad(x);
  const auto ix = x.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      t.value(x).array().log().matrix(), rg,
      [ix, io](Tape& tp) {
        tp.grad_mut(at(tp, ix)).array() +=
            tp.grad(at(tp, io)).array() / tp.value(at(tp, ix)).array();
      },
      "log");
}

Var prelu(Var x, Var alpha) {
  check_same_tape(x, alpha, "prelu");
  Tape& t = *x.tape;
  if (t.value(alpha).size() != 1) {
    throw ShapeError("prelu: alpha must be a 1x1 leak parameter");
  }
  const double a = t.value(alpha)(0, 0);
  const bool rg = t.requires_grad(x) || t.requires_grad(alpha);
  const auto ix = x.idx, ial = alpha.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  const auto& xv = t.value(x).array();
  Mat y = (xv.max(0.0) + a * xv.min(0.0)).matrix();
  return t.record(
      std::move(y), rg,
      [ix, ial, io](Tape& tp) {
        const auto& g = tp.grad(at(tp, io)).array();
        const auto& xv = tp.value(at(tp, ix)).array();
        const double a = tp.value(at(tp, ial))(0, 0);
        if (tp.requires_grad(at(tp, ix))) {
          // slope 1 on the positive branch, alpha elsewhere (x == 0 takes alpha)
          tp.grad_mut(at(tp, ix)).array() +=
              g * ((xv > 0.0).cast<double>() + a * (xv <= 0.0).cast<double>());
        }
        if (tp.requires_grad(at(tp, ial))) {
          tp.grad_mut(at(tp, ial))(0, 0) += (g * xv.min(0.0)).sum();
        }
      },
      "prelu");
}

Var softmax(Var x) {
  Tape& t = *x.tape;
  const Mat& xv = t.value(x);
  if (xv.cols() != 1 || xv.rows() < 1) {
    throw ShapeError("softmax: expects a nonempty column vector");
  }
  const bool rg = t.requires_grad(x);
  const auto ix = x.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  // Max-subtraction keeps exp() in range regardless of input scale.
  Eigen::ArrayXd shifted = xv.col(0).array() - xv.col(0).maxCoeff();
  Eigen::ArrayXd e = shifted.exp();
  Mat y = (e / e.sum()).matrix();
  return t.record(
      std::move(y), rg,
      [ix, io](Tape& tp) {
        const auto& y = tp.value(at(tp, io)).array();
        const auto& g = tp.grad(at(tp, io)).array();
        const double dot = (g * y).sum();
        tp.grad_mut(at(tp, ix)).array() += y * (g - dot);
      },
      "softmax");
}

// --- linear algebra -----------------------------------------------------------

Var matvec(Var w, Var x) {
  check_same_tape(w, x, "matvec");
  Tape& t = *w.tape;
  const Mat& wv = t.value(w);
  const Mat& xv = t.value(x);
  if (xv.cols() != 1 || wv.cols() != xv.rows()) {
    throw ShapeError("matvec: incompatible shapes " + std::to_string(wv.rows()) + "x" +
                     std::to_string(wv.cols()) + " * " + std::to_string(xv.rows()) + "x" +
                     std::to_string(xv.cols()));
  }
  const bool rg = t.requires_grad(w) || t.requires_grad(x);
  const auto iw = w.idx, ix = x.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      wv * xv, rg,
      [iw, ix, io](Tape& tp) {
        const Mat& g = tp.grad(at(tp, io));
        if (tp.requires_grad(at(tp, iw)))
          tp.grad_mut(at(tp, iw)).noalias() += g * tp.value(at(tp, ix)).transpose();
        if (tp.requires_grad(at(tp, ix)))
          tp.grad_mut(at(tp, ix)).noalias() += tp.value(at(tp, iw)).transpose() * g;
      },
      "matvec");
}

Var affine(Var w, Var x, Var b) {
  check_same_tape(w, x, "affine");
  check_same_tape(w, b, "affine");
  Tape& t = *w.tape;
  const Mat& wv = t.value(w);
  const Mat& xv = t.value(x);
  const Mat& bv = t.value(b);
  if (xv.cols() != 1 || wv.cols() != xv.rows() || bv.cols() != 1 || bv.rows() != wv.rows()) {
    throw ShapeError("affine: incompatible shapes");
  }
  const bool rg = t.requires_grad(w) || t.requires_grad(x) || t.requires_grad(b);
  const auto iw = w.idx, ix = x.idx, ib = b.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      wv * xv + bv, rg,
      [iw, ix, ib, io](Tape& tp) {
        const Mat& g = tp.grad(at(tp, io));
        if (tp.requires_grad(at(tp, iw)))
          tp.grad_mut(at(tp, iw)).noalias() += g * tp.value(at(tp, ix)).transpose();
        if (tp.requires_grad(at(tp, ix)))
          tp.grad_mut(at(tp, ix)).noalias() += tp.value(at(tp, iw)).transpose() * g;
        if (tp.requires_grad(at(tp, ib))) tp.grad_mut(at(tp, ib)) += g;
      },
      "affine");
}

// --- structural ---------------------------------------------------------------

Var concat(std::span<const Var> parts) {
  if (parts.empty()) {
    throw ShapeError("concat: needs at least one part");
  }
  Tape& t = *parts[0].tape;
  int total = 0;
  bool rg = false;
  for (const Var& p : parts) {
    check_same_tape(parts[0], p, "concat");
    if (t.value(p).cols() != 1) throw ShapeError("concat: expects column vectors");
    total += static_cast<int>(t.value(p).rows());
    rg = rg || t.requires_grad(p);
  }
  Mat y(total, 1);
  int off = 0;
  std::vector<std::pair<std::int32_t, std::pair<int, int>>> spans;  // idx -> (offset, len)
  spans.reserve(parts.size());
  for (const Var& p : parts) {
    const int n = static_cast<int>(t.value(p).rows());
    y.block(off, 0, n, 1) = t.value(p);
    spans.emplace_back(p.idx, std::make_pair(off, n));
    off += n;
  }
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      std::move(y), rg,
      [spans = std::move(spans), io](Tape& tp) {
        const Mat& g = tp.grad(at(tp, io));
        for (const auto& [idx, span] : spans) {
          if (tp.requires_grad(at(tp, idx))) {
            tp.grad_mut(at(tp, idx)) += g.block(span.first, 0, span.second, 1);
          }
        }
      },
      "concat");
}

Var slice(Var x, int offset, int len) {
  Tape& t = *x.tape;
  const Mat& xv = t.value(x);
  if (xv.cols() != 1 || offset < 0 || len < 1 || offset + len > xv.rows()) {
    throw ShapeError("slice: range [" + std::to_string(offset) + ", " +
                     std::to_string(offset + len) + ") out of bounds for length " +
                     std::to_string(xv.rows()));
  }
  const bool rg = t.requires_grad(x);
  const auto ix = x.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      xv.block(offset, 0, len, 1), rg,
      [ix, io, offset, len](Tape& tp) {
        tp.grad_mut(at(tp, ix)).block(offset, 0, len, 1) += tp.grad(at(tp, io));
      },
      "slice");
}

Var sum(Var x) {
  Tape& t = *x.tape;
  const bool rg = t.requires_grad(x);
  const auto ix = x.idx;
  const auto io = static_cast<std::int32_t>(t.size());
  Mat y(1, 1);
  y(0, 0) = t.value(x).sum();
  return t.record(
      std::move(y), rg,
      [ix, io](Tape& tp) {
        tp.grad_mut(at(tp, ix)).array() += tp.grad(at(tp, io))(0, 0);
      },
      "sum");
}

Var mean(std::span<const Var> xs) {
  if (xs.empty()) {
    throw ShapeError("mean: needs at least one operand");
  }
  Tape& t = *xs[0].tape;
  const Mat& first = t.value(xs[0]);
  bool rg = false;
  Mat acc = Mat::Zero(first.rows(), first.cols());
  std::vector<std::int32_t> idxs;
  idxs.reserve(xs.size());
  for (const Var& v : xs) {
    check_same_tape(xs[0], v, "mean");
    check_same_shape(first, t.value(v), "mean");
    acc += t.value(v);
    rg = rg || t.requires_grad(v);
    idxs.push_back(v.idx);
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  acc *= inv;
  const auto io = static_cast<std::int32_t>(t.size());
  return t.record(
      std::move(acc), rg,
      [idxs = std::move(idxs), io, inv](Tape& tp) {
        const Mat& g = tp.grad(at(tp, io));
        for (std::int32_t idx : idxs) {
          if (tp.requires_grad(at(tp, idx))) {
            tp.grad_mut(at(tp, idx)) += inv * g;
          }
        }
      },
      "mean");
}

}  // namespace stga::nn
