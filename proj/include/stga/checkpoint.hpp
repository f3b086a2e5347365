#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stga/model.hpp"
#include "stga/nn/adam.hpp"
#include "stga/types.hpp"

namespace stga {

/// Container format: header line `STGA1`, then per block a text record
/// `name<TAB>rank<TAB>dims...` followed by the block's little-endian 64-bit
/// floats in row-major order, and a final `END` line. Round-trips bit-exactly.
void write_blocks(const std::filesystem::path& file,
                  const std::vector<std::pair<std::string, const Mat*>>& blocks);
std::vector<std::pair<std::string, Mat>> read_blocks(const std::filesystem::path& file);

void save_checkpoint(const std::filesystem::path& file, const ModelParams& params);

/// Loads a checkpoint. Shapes come from the file; `expect` (when given) is
/// validated against them so a mismatched --hidden/--embed fails loudly.
ModelParams load_checkpoint(const std::filesystem::path& file, const ModelConfig* expect = nullptr);

/// Model sizes recorded in a checkpoint (derived from block shapes).
struct CheckpointInfo {
  int hidden_size = 0;
  int embed_size = 0;
};
CheckpointInfo checkpoint_info(const ModelParams& params);

/// Optimizer sidecar for resumable training: Adam moments (visit order),
/// step counter, and the epoch the checkpoint belongs to.
void save_train_state(const std::filesystem::path& file, const nn::AdamState& adam, int epoch);
bool load_train_state(const std::filesystem::path& file, nn::AdamState& adam, int& epoch);

}  // namespace stga
