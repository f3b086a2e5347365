#include "stga/nn/gaussian.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace stga::nn {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
// tanh saturates to exactly +/-1 in doubles; shrink it so |rho| < 1 holds for
// any raw input and the covariance stays positive definite.
constexpr double kRhoScale = 1.0 - 1e-9;
}

GaussianParams2D constrain_head(const Vec& raw) {
  if (raw.size() != 5) {
    throw ShapeError("constrain_head: expects a 5-vector");
  }
  GaussianParams2D p;
  p.mu_x = raw(0);
  p.mu_y = raw(1);
  p.sigma_x = std::exp(raw(2));
  p.sigma_y = std::exp(raw(3));
  p.rho = kRhoScale * std::tanh(raw(4));
  return p;
}

double bivariate_nll(const GaussianParams2D& p, const Vec2& target) {
  if (!(p.sigma_x > 0.0) || !(p.sigma_y > 0.0) || !(std::abs(p.rho) < 1.0)) {
    throw DomainError("bivariate_nll: invalid covariance parameters");
  }
  const double dx = (target.x() - p.mu_x) / p.sigma_x;
  const double dy = (target.y() - p.mu_y) / p.sigma_y;
  const double omr = 1.0 - p.rho * p.rho;
  const double z = dx * dx - 2.0 * p.rho * dx * dy + dy * dy;
  return kLog2Pi + std::log(p.sigma_x) + std::log(p.sigma_y) + 0.5 * std::log(omr) +
         z / (2.0 * omr);
}

Vec2 sample_bivariate(const GaussianParams2D& p, Rng& rng) {
  const double z1 = normal01(rng);
  const double z2 = normal01(rng);
  // Lower Cholesky factor of [[sx^2, r sx sy], [r sx sy, sy^2]].
  const double x = p.mu_x + p.sigma_x * z1;
  const double y = p.mu_y + p.sigma_y * (p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * z2);
  return Vec2(x, y);
}

GaussianVars constrain_head(Var raw5) {
  Tape& t = *raw5.tape;
  if (t.value(raw5).rows() != 5 || t.value(raw5).cols() != 1) {
    throw ShapeError("constrain_head: expects a 5-vector");
  }
  GaussianVars g;
  g.mu = slice(raw5, 0, 2);
  g.sigma = exp(slice(raw5, 2, 2));
  g.rho = scale(tanh(slice(raw5, 4, 1)), kRhoScale);
  return g;
}

GaussianParams2D gaussian_value(const GaussianVars& g) {
  Tape& t = *g.mu.tape;
  GaussianParams2D p;
  p.mu_x = t.value(g.mu)(0, 0);
  p.mu_y = t.value(g.mu)(1, 0);
  p.sigma_x = t.value(g.sigma)(0, 0);
  p.sigma_y = t.value(g.sigma)(1, 0);
  p.rho = t.value(g.rho)(0, 0);
  return p;
}

Var bivariate_nll(const GaussianVars& g, const Vec2& target) {
  Tape& t = *g.mu.tape;
  Var tv = t.leaf(Vec(target));
  Var d = sub(tv, g.mu);
  Var zv = cdiv(d, g.sigma);                    // (dx/sx, dy/sy)
  Var q = sum(cmul(zv, zv));                    // dx^2/sx^2 + dy^2/sy^2
  Var cross = cmul(slice(zv, 0, 1), slice(zv, 1, 1));
  Var r2 = cmul(g.rho, g.rho);
  Var omr = add_scalar(neg(r2), 1.0);           // 1 - rho^2
  Var z = sub(q, scale(cmul(g.rho, cross), 2.0));
  Var log_sig = sum(log(g.sigma));
  Var nll = add(add_scalar(log_sig, kLog2Pi),
                add(scale(log(omr), 0.5), cdiv(z, scale(omr, 2.0))));
  return nll;
}

}  // namespace stga::nn
