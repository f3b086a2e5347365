#include "stga/nn/adam.hpp"

#include <cmath>

namespace stga::nn {

void adam_step(std::span<Mat* const> params, std::span<const Mat* const> grads,
               std::span<const std::string> names, AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != names.size()) {
    throw ShapeError("adam_step: params/grads/names size mismatch");
  }
  if (state.m.empty()) {
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Mat* p : params) {
      state.m.emplace_back(Mat::Zero(p->rows(), p->cols()));
      state.v.emplace_back(Mat::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state does not match parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Mat& g = *grads[i];
    Mat& p = *params[i];
    if (g.rows() != p.rows() || g.cols() != p.cols()) {
      throw ShapeError("adam_step: gradient shape mismatch for block " + names[i]);
    }
    if (!g.allFinite()) {
      throw NumericError("adam_step: non-finite gradient in block " + names[i]);
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Mat& g = *grads[i];
    Mat& m = state.m[i];
    Mat& v = state.v[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Mat m_hat = m / bc1;
    const Mat v_hat = v / bc2;
    params[i]->array() -= lr * m_hat.array() / (v_hat.array().sqrt() + state.eps);
  }
}

}  // namespace stga::nn
