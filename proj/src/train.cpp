#include "stga/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <thread>

#include "stga/checkpoint.hpp"
#include "stga/nn/random.hpp"

namespace stga {

namespace {

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, int epoch) {
  char name[64];
  std::snprintf(name, sizeof(name), "checkpoint_epoch_%04d.stga", epoch);
  return out_dir / name;
}

int latest_checkpoint_epoch(const std::filesystem::path& out_dir) {
  int best = -1;
  if (!std::filesystem::exists(out_dir)) return best;
  for (const auto& entry : std::filesystem::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    int epoch = 0;
    if (std::sscanf(name.c_str(), "checkpoint_epoch_%d.stga", &epoch) == 1) {
      best = std::max(best, epoch);
    }
  }
  return best;
}

struct BatchAccumulator {
  ModelParams grads;
  double loss_sum = 0.0;
};

/// Forward + backward over one instance; adds gradients and loss into `acc`.
void accumulate_instance(const SceneInstance& instance, const ModelParams& params,
                         const ModelConfig& config, BatchAccumulator& acc) {
  nn::Tape tape;
  BoundParams bound = BoundParams::bind(tape, params, true);
  nn::Var loss = sequence_nll_var(tape, bound, instance, config);
  const double value = tape.value(loss)(0, 0);
  if (!std::isfinite(value)) {
    throw NumericError("train: non-finite loss");
  }
  tape.backward(loss);
  bound.accumulate_grads(tape, acc.grads);
  acc.loss_sum += value;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1 || epochs < 0 || !(lr > 0.0) || skip_rate < 1 || !(grad_clip > 0.0) ||
      threads < 1 || checkpoint_every < 1) {
    throw DomainError("TrainConfig: all settings must be positive (epochs may be zero)");
  }
}

TrainResult train(const std::vector<SceneDataset>& scenes, const ModelConfig& model_config,
                  const TrainConfig& train_config, const std::filesystem::path& out_dir,
                  bool resume, std::ostream* log) {
  model_config.validate();
  train_config.validate();

  std::vector<const SceneInstance*> instances;
  for (const SceneDataset& s : scenes) {
    for (const SceneInstance& inst : s.instances) {
      instances.push_back(&inst);
    }
  }
  if (instances.empty()) {
    throw DomainError("train: no scene instances in the training set");
  }

  std::filesystem::create_directories(out_dir);

  ModelParams params = ModelParams::init(model_config, train_config.seed);
  nn::AdamState adam;
  int start_epoch = 0;
  if (resume) {
    const int latest = latest_checkpoint_epoch(out_dir);
    if (latest >= 0) {
      params = load_checkpoint(checkpoint_path(out_dir, latest), &model_config);
      int saved_epoch = latest;
      load_train_state(out_dir / "train_state.stga", adam, saved_epoch);
      start_epoch = latest;
      if (log) *log << "resuming from epoch " << latest << "\n";
    }
  }

  const std::filesystem::path loss_csv = out_dir / "loss.csv";
  std::ofstream loss_out;
  if (start_epoch == 0) {
    loss_out.open(loss_csv, std::ios::binary);
    loss_out << "epoch,mean_nll\n";
  } else {
    loss_out.open(loss_csv, std::ios::binary | std::ios::app);
  }
  if (!loss_out) {
    throw IoError("cannot write " + loss_csv.string());
  }

  if (start_epoch == 0) {
    save_checkpoint(checkpoint_path(out_dir, 0), params);
  }

  TrainResult result;
  result.start_epoch = start_epoch;

  auto block_ptrs = params.blocks();
  std::vector<Mat*> param_ptrs;
  std::vector<std::string> names;
  for (auto& [name, ptr] : block_ptrs) {
    param_ptrs.push_back(ptr);
    names.push_back(name);
  }

  for (int epoch = start_epoch + 1; epoch <= train_config.epochs; ++epoch) {
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    nn::Rng shuffle_rng(nn::derive_seed(train_config.seed, 0x65706f63, epoch));  // "epoc"
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t batch_start = 0; batch_start < order.size();
         batch_start += train_config.batch_size) {
      const std::size_t batch_end =
          std::min(order.size(), batch_start + static_cast<std::size_t>(train_config.batch_size));
      const std::size_t count = batch_end - batch_start;

      ModelParams grads = ModelParams::zeros_like(params);
      double batch_loss = 0.0;
      try {
        if (train_config.threads <= 1 || count == 1) {
          BatchAccumulator acc{ModelParams::zeros_like(params), 0.0};
          for (std::size_t i = batch_start; i < batch_end; ++i) {
            accumulate_instance(*instances[order[i]], params, model_config, acc);
          }
          grads = std::move(acc.grads);
          batch_loss = acc.loss_sum;
        } else {
          // Parallel gradient accumulation: per-thread buffers reduced in
          // fixed chunk order, reproducible per thread count.
          const int n_threads =
              std::min<int>(train_config.threads, static_cast<int>(count));
          std::vector<BatchAccumulator> partial;
          partial.reserve(n_threads);
          for (int t = 0; t < n_threads; ++t) {
            partial.push_back(BatchAccumulator{ModelParams::zeros_like(params), 0.0});
          }
          std::vector<std::thread> workers;
          std::vector<std::exception_ptr> errors(n_threads);
          for (int t = 0; t < n_threads; ++t) {
            workers.emplace_back([&, t]() {
              try {
                for (std::size_t i = batch_start + t; i < batch_end;
                     i += static_cast<std::size_t>(n_threads)) {
                  accumulate_instance(*instances[order[i]], params, model_config, partial[t]);
                }
              } catch (...) {
                errors[t] = std::current_exception();
              }
            });
          }
          for (auto& w : workers) w.join();
          for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
          }
          for (const BatchAccumulator& acc : partial) {
            grads.add_scaled(acc.grads, 1.0);
            batch_loss += acc.loss_sum;
          }
        }
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + ", batch at instance " +
                           std::to_string(batch_start) + ": " + e.what());
      }

      grads.scale_all(1.0 / static_cast<double>(count));
      const double norm = grads.grad_norm();
      if (norm > train_config.grad_clip) {
        grads.scale_all(train_config.grad_clip / norm);
        ++result.clip_activations;
        if (log) {
          *log << "epoch " << epoch << ": clipped gradient norm " << norm << " -> "
               << train_config.grad_clip << "\n";
        }
      }

      std::vector<const Mat*> grad_ptrs;
      grads.visit([&grad_ptrs](const char*, const Mat& m) { grad_ptrs.push_back(&m); });
      nn::adam_step(param_ptrs, grad_ptrs, names, adam, train_config.lr);
      epoch_loss += batch_loss;
    }

    const double mean_nll = epoch_loss / static_cast<double>(instances.size());
    result.epoch_mean_nll.push_back(mean_nll);
    {
      char line[64];
      std::snprintf(line, sizeof(line), "%d,%.12g\n", epoch, mean_nll);
      loss_out << line;
      loss_out.flush();
    }
    if (log) {
      *log << "epoch " << epoch << "/" << train_config.epochs << " mean_nll " << mean_nll
           << "\n";
    }
    if (epoch % train_config.checkpoint_every == 0 || epoch == train_config.epochs) {
      save_checkpoint(checkpoint_path(out_dir, epoch), params);
      save_train_state(out_dir / "train_state.stga", adam, epoch);
      result.final_checkpoint = checkpoint_path(out_dir, epoch);
    }
  }
  if (result.final_checkpoint.empty()) {
    result.final_checkpoint = checkpoint_path(out_dir, start_epoch);
  }
  return result;
}

}  // namespace stga
