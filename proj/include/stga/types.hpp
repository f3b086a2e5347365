#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stga {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

// Sequence layout: 8 observed steps followed by 12 predicted steps.
inline constexpr int kObsSteps = 8;
inline constexpr int kPredSteps = 12;
inline constexpr int kSeqSteps = kObsSteps + kPredSteps;

// Error taxonomy; the CLI maps these onto exit codes (usage=1, data/io=2,
// numeric=3).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline Vec2 clamp01(const Vec2& p) { return Vec2(clamp01(p.x()), clamp01(p.y())); }

}  // namespace stga
