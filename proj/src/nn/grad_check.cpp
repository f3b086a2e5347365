#include "stga/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace stga::nn {

namespace {

double evaluate(std::span<Mat* const> params,
                const std::function<Var(Tape&, std::span<const Var>)>& build) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Mat* p : params) {
    leaves.push_back(tape.leaf(*p, false));
  }
  Var root = build(tape, leaves);
  if (tape.value(root).size() != 1) {
    throw ShapeError("grad_check: build must return a scalar");
  }
  return tape.value(root)(0, 0);
}

}  // namespace

double grad_check(std::span<Mat* const> params,
                  const std::function<Var(Tape&, std::span<const Var>)>& build, double eps) {
  // Analytic pass.
  std::vector<Mat> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (const Mat* p : params) {
      leaves.push_back(tape.leaf(*p, true));
    }
    Var root = build(tape, leaves);
    if (tape.value(root).size() != 1) {
      throw ShapeError("grad_check: build must return a scalar");
    }
    tape.backward(root);
    analytic.reserve(params.size());
    for (const Var& l : leaves) {
      analytic.push_back(tape.grad(l));
    }
  }

  // Numeric pass, one coordinate at a time.
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Mat& p = *params[k];
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + eps;
      const double f_plus = evaluate(params, build);
      p.data()[i] = saved - eps;
      const double f_minus = evaluate(params, build);
      p.data()[i] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic[k].data()[i];
      const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace stga::nn
