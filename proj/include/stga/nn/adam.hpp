#pragma once

#include <span>
#include <string>
#include <vector>

#include "stga/types.hpp"

namespace stga::nn {

/// Per-parameter first/second moment accumulators plus the shared step count.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int step = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;
};

/// Bias-corrected Adam update applied in place. `names` is used only for
/// error reporting when a gradient block is non-finite. Moments are sized on
/// the first call.
void adam_step(std::span<Mat* const> params, std::span<const Mat* const> grads,
               std::span<const std::string> names, AdamState& state, double lr);

}  // namespace stga::nn
