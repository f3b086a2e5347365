#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "stga/model.hpp"
#include "stga/nn/adam.hpp"
#include "stga/trajectory_data.hpp"

namespace stga {

struct TrainConfig {
  int batch_size = 24;   // scene instances per Adam step
  int epochs = 100;
  double lr = 0.001;
  int skip_rate = 10;
  std::uint64_t seed = 1;
  double grad_clip = 10.0;  // global gradient norm threshold
  int threads = 1;
  int checkpoint_every = 1;  // epochs between checkpoint files

  void validate() const;
};

struct TrainResult {
  std::vector<double> epoch_mean_nll;
  std::filesystem::path final_checkpoint;
  int clip_activations = 0;
  int start_epoch = 0;  // nonzero when resumed
};

/// Trains over all instances of the given scenes: seeded per-epoch shuffle,
/// gradient accumulation over batch_size instances per Adam step, global-norm
/// clipping, one checkpoint per checkpoint_every epochs, and a
/// `loss.csv` curve (`epoch,mean_nll`). Bit-reproducible for a fixed seed and
/// threads=1. With threads>1 gradients are accumulated in fixed chunk order,
/// so results are reproducible per thread count.
TrainResult train(const std::vector<SceneDataset>& scenes, const ModelConfig& model_config,
                  const TrainConfig& train_config, const std::filesystem::path& out_dir,
                  bool resume = false, std::ostream* log = nullptr);

}  // namespace stga
