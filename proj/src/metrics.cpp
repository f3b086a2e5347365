#include "stga/metrics.hpp"

#include <string>

namespace stga {

namespace {

void validate(const std::vector<std::vector<Vec2>>& pred,
              const std::vector<std::vector<Vec2>>& truth, const char* what) {
  if (pred.size() != truth.size()) {
    throw ShapeError(std::string(what) + ": pedestrian counts differ");
  }
  if (pred.empty()) {
    throw ShapeError(std::string(what) + ": no trajectories");
  }
  for (std::size_t j = 0; j < pred.size(); ++j) {
    if (pred[j].size() != truth[j].size() || pred[j].empty()) {
      throw ShapeError(std::string(what) + ": step counts differ for pedestrian " +
                       std::to_string(j));
    }
  }
}

}  // namespace

double ade(const std::vector<std::vector<Vec2>>& pred,
           const std::vector<std::vector<Vec2>>& truth) {
  validate(pred, truth, "ade");
  double total = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    double per_ped = 0.0;
    for (std::size_t i = 0; i < pred[j].size(); ++i) {
      per_ped += (pred[j][i] - truth[j][i]).norm();
    }
    total += per_ped / static_cast<double>(pred[j].size());
  }
  return total / static_cast<double>(pred.size());
}

double fde(const std::vector<std::vector<Vec2>>& pred,
           const std::vector<std::vector<Vec2>>& truth) {
  validate(pred, truth, "fde");
  double total = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    total += (pred[j].back() - truth[j].back()).norm();
  }
  return total / static_cast<double>(pred.size());
}

}  // namespace stga
