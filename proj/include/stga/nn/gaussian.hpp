#pragma once

#include "stga/nn/random.hpp"
#include "stga/nn/tape.hpp"
#include "stga/types.hpp"

namespace stga::nn {

/// Parameters of one bivariate normal over the next (x, y) position.
struct GaussianParams2D {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double rho = 0.0;

  bool valid() const {
    return sigma_x > 0.0 && sigma_y > 0.0 && rho > -1.0 && rho < 1.0 &&
           std::isfinite(mu_x) && std::isfinite(mu_y) && std::isfinite(sigma_x) &&
           std::isfinite(sigma_y) && std::isfinite(rho);
  }
};

/// Maps an unconstrained 5-vector onto valid Gaussian parameters:
/// mu = raw[0:2], sigma = exp(raw[2:4]), rho = tanh(raw[4]).
GaussianParams2D constrain_head(const Vec& raw);

/// Negative log density of `target` under the bivariate normal.
/// Throws DomainError when sigma <= 0 or |rho| >= 1.
double bivariate_nll(const GaussianParams2D& p, const Vec2& target);

/// Cholesky-based draw; consumes exactly two normals from `rng`.
Vec2 sample_bivariate(const GaussianParams2D& p, Rng& rng);

// --- tape (differentiable) versions ----------------------------------------

struct GaussianVars {
  Var mu;     // [2]
  Var sigma;  // [2]
  Var rho;    // [1]
};

/// constrain_head on the tape; raw5 is the head's affine output.
GaussianVars constrain_head(Var raw5);

/// Reads the current numeric parameter values out of the tape.
GaussianParams2D gaussian_value(const GaussianVars& g);

/// Differentiable negative log likelihood of a fixed target.
Var bivariate_nll(const GaussianVars& g, const Vec2& target);

}  // namespace stga::nn
