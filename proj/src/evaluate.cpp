#include "stga/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "stga/metrics.hpp"
#include "stga/nn/random.hpp"

namespace stga {

namespace {

struct InstanceEval {
  double ade_mean = 0.0, fde_mean = 0.0;
  double ade_min = 0.0, fde_min = 0.0;
  double ade_mu = 0.0, fde_mu = 0.0;
  int n_sequences = 0;
};

struct InstanceRef {
  const SceneDataset* scene = nullptr;
  const SceneInstance* instance = nullptr;
  std::size_t scene_index = 0;
};

/// Converts a normalized rollout into per-pedestrian metric tracks in meters.
std::vector<std::vector<Vec2>> to_metric_tracks(
    const std::vector<std::map<int, Vec2>>& rollout, const SceneInstance& instance,
    const SceneDataset& scene) {
  const double scale = scene.meters_per_unit;
  std::vector<std::vector<Vec2>> tracks(instance.sequences.size());
  for (std::size_t j = 0; j < instance.sequences.size(); ++j) {
    const int ped = instance.sequences[j].ped_id;
    tracks[j].reserve(rollout.size());
    for (const auto& step : rollout) {
      tracks[j].push_back(scale * scene.transform.invert(step.at(ped)));
    }
  }
  return tracks;
}

InstanceEval evaluate_instance(const InstanceRef& ref, const ModelParams& params,
                               const ModelConfig& config, int k, std::uint64_t seed,
                               std::size_t global_index) {
  const SceneInstance& instance = *ref.instance;
  const SceneDataset& scene = *ref.scene;

  std::vector<std::vector<Vec2>> truth(instance.sequences.size());
  for (std::size_t j = 0; j < instance.sequences.size(); ++j) {
    for (const Vec2& p : instance.sequences[j].future) {
      truth[j].push_back(scene.meters_per_unit * scene.transform.invert(p));
    }
  }

  RecurrentState base = observe(instance, params, config);
  const std::size_t mark = base.tape->size();
  const std::map<int, Vec2> last_positions = instance.positions_at(config.t_obs - 1);

  auto rollout_metrics = [&](RolloutMode mode, nn::Rng& rng) {
    RecurrentState state = base;  // shares the tape; handles predate `mark`
    auto rollout = predict(state, last_positions, instance.obstacles, config, mode, rng);
    auto tracks = to_metric_tracks(rollout, instance, scene);
    const double a = ade(tracks, truth);
    const double f = fde(tracks, truth);
    base.tape->truncate(mark);
    return std::pair{a, f};
  };

  InstanceEval ev;
  ev.n_sequences = static_cast<int>(instance.sequences.size());
  {
    nn::Rng rng(nn::derive_seed(seed, global_index, 0));
    auto [a, f] = rollout_metrics(RolloutMode::Mean, rng);
    ev.ade_mu = a;
    ev.fde_mu = f;
  }
  double ade_sum = 0.0, fde_sum = 0.0;
  double ade_best = std::numeric_limits<double>::infinity();
  double fde_best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < k; ++s) {
    nn::Rng rng(nn::derive_seed(seed, global_index, 1 + s));
    auto [a, f] = rollout_metrics(RolloutMode::Sample, rng);
    ade_sum += a;
    fde_sum += f;
    ade_best = std::min(ade_best, a);
    fde_best = std::min(fde_best, f);
  }
  ev.ade_mean = ade_sum / k;
  ev.fde_mean = fde_sum / k;
  ev.ade_min = ade_best;
  ev.fde_min = fde_best;
  return ev;
}

}  // namespace

EvalReport evaluate(const std::vector<SceneDataset>& test_scenes, const ModelParams& params,
                    const ModelConfig& config, int k, std::uint64_t seed, int threads) {
  config.validate();
  if (k < 1) {
    throw DomainError("evaluate: k must be >= 1");
  }
  std::vector<InstanceRef> refs;
  for (std::size_t si = 0; si < test_scenes.size(); ++si) {
    for (const SceneInstance& inst : test_scenes[si].instances) {
      refs.push_back(InstanceRef{&test_scenes[si], &inst, si});
    }
  }
  if (refs.empty()) {
    throw DomainError("evaluate: test set has no scene instances");
  }

  std::vector<InstanceEval> evals(refs.size());
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(refs.size())));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < refs.size(); ++i) {
      evals[i] = evaluate_instance(refs[i], params, config, k, seed, i);
    }
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      workers.emplace_back([&, t]() {
        try {
          for (std::size_t i = t; i < refs.size(); i += static_cast<std::size_t>(n_threads)) {
            evals[i] = evaluate_instance(refs[i], params, config, k, seed, i);
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
  }

  EvalReport report;
  report.k = k;
  for (std::size_t si = 0; si < test_scenes.size(); ++si) {
    SceneEval se;
    se.scene = test_scenes[si].name;
    int count = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (refs[i].scene_index != si) continue;
      se.ade_mean += evals[i].ade_mean;
      se.fde_mean += evals[i].fde_mean;
      se.ade_min += evals[i].ade_min;
      se.fde_min += evals[i].fde_min;
      se.ade_mu += evals[i].ade_mu;
      se.fde_mu += evals[i].fde_mu;
      se.n_sequences += evals[i].n_sequences;
      ++count;
    }
    if (count == 0) continue;
    se.n_instances = count;
    const double inv = 1.0 / count;
    se.ade_mean *= inv;
    se.fde_mean *= inv;
    se.ade_min *= inv;
    se.fde_min *= inv;
    se.ade_mu *= inv;
    se.fde_mu *= inv;
    report.scenes.push_back(std::move(se));
  }

  SceneEval& agg = report.aggregate;
  agg.scene = "AVG";
  for (const SceneEval& se : report.scenes) {
    agg.ade_mean += se.ade_mean;
    agg.fde_mean += se.fde_mean;
    agg.ade_min += se.ade_min;
    agg.fde_min += se.fde_min;
    agg.ade_mu += se.ade_mu;
    agg.fde_mu += se.fde_mu;
    agg.n_sequences += se.n_sequences;
    agg.n_instances += se.n_instances;
  }
  const double inv = 1.0 / static_cast<double>(report.scenes.size());
  agg.ade_mean *= inv;
  agg.fde_mean *= inv;
  agg.ade_min *= inv;
  agg.fde_min *= inv;
  agg.ade_mu *= inv;
  agg.fde_mu *= inv;
  return report;
}

void write_eval_csv(const std::filesystem::path& file, const EvalReport& report) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + file.string());
  }
  out << "scene,ade_mean,fde_mean,ade_min,fde_min,n_sequences\n";
  auto row = [&out](const SceneEval& se) {
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%.9f,%.9f,%.9f,%.9f,%d\n", se.scene.c_str(),
                  se.ade_mean, se.fde_mean, se.ade_min, se.fde_min, se.n_sequences);
    out << line;
  };
  for (const SceneEval& se : report.scenes) row(se);
  row(report.aggregate);
  if (!out) {
    throw IoError("short write to " + file.string());
  }
}

std::string format_eval_table(const EvalReport& report) {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %11s %11s %11s %11s %11s %11s %6s\n", "scene",
                "ade_mean", "fde_mean", "ade_min", "fde_min", "ade_mu", "fde_mu", "seqs");
  s += line;
  s += std::string(92, '-') + "\n";
  auto row = [&](const SceneEval& se) {
    std::snprintf(line, sizeof(line), "%-16s %11.4f %11.4f %11.4f %11.4f %11.4f %11.4f %6d\n",
                  se.scene.c_str(), se.ade_mean, se.fde_mean, se.ade_min, se.fde_min, se.ade_mu,
                  se.fde_mu, se.n_sequences);
    s += line;
  };
  for (const SceneEval& se : report.scenes) row(se);
  s += std::string(92, '-') + "\n";
  row(report.aggregate);
  return s;
}

}  // namespace stga
