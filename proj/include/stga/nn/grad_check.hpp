#pragma once

#include <functional>
#include <span>

#include "stga/nn/tape.hpp"
#include "stga/types.hpp"

namespace stga::nn {

/// Central-difference verification of reverse-mode gradients.
///
/// `build` constructs a scalar expression on the given tape from leaves bound
/// (in order) to the matrices in `params`. The function is evaluated once
/// with gradients enabled to obtain the analytic gradient, then every
/// coordinate of every parameter is perturbed by +/- eps and the expression
/// re-evaluated. Returns the worst relative error, with
/// rel = |a - n| / max(1, |a|, |n|).
double grad_check(std::span<Mat* const> params,
                  const std::function<Var(Tape&, std::span<const Var>)>& build,
                  double eps = 1e-5);

}  // namespace stga::nn
