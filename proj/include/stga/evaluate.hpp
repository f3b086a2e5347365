#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stga/model.hpp"
#include "stga/trajectory_data.hpp"

namespace stga {

/// Metric cells for one scene (or the aggregate row). Means average the K
/// sampled rollouts; min-of-K takes the best sample per instance first.
/// mu_* report the deterministic mean-parameter rollout.
struct SceneEval {
  std::string scene;
  double ade_mean = 0.0;
  double fde_mean = 0.0;
  double ade_min = 0.0;
  double fde_min = 0.0;
  double ade_mu = 0.0;
  double fde_mu = 0.0;
  int n_sequences = 0;
  int n_instances = 0;
};

struct EvalReport {
  std::vector<SceneEval> scenes;
  SceneEval aggregate;
  int k = 0;
};

/// Rolls out every instance of every test scene: one mean rollout plus K
/// sampled rollouts with per-instance derived seeds. Errors are reported in
/// meters (scene units via the stored transform, times meters_per_unit).
EvalReport evaluate(const std::vector<SceneDataset>& test_scenes, const ModelParams& params,
                    const ModelConfig& config, int k, std::uint64_t seed, int threads = 1);

/// CSV with header `scene,ade_mean,fde_mean,ade_min,fde_min,n_sequences`,
/// one row per scene plus an AVG row. Byte-deterministic.
void write_eval_csv(const std::filesystem::path& file, const EvalReport& report);

/// Human-readable table mirroring the CSV plus the mean-rollout columns.
std::string format_eval_table(const EvalReport& report);

}  // namespace stga
