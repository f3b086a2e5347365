#include "stga/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stga/nn/random.hpp"

namespace stga {

namespace {

constexpr double kMargin = 0.02;

using nn::Rng;
using nn::uniform_in;

TrajectorySequence to_sequence(int ped_id, const std::vector<Vec2>& track) {
  TrajectorySequence seq;
  seq.ped_id = ped_id;
  seq.start_frame = 0;
  seq.observed.assign(track.begin(), track.begin() + kObsSteps);
  seq.future.assign(track.begin() + kObsSteps, track.end());
  return seq;
}

bool in_box(const Vec2& p) {
  return p.x() >= kMargin && p.x() <= 1.0 - kMargin && p.y() >= kMargin && p.y() <= 1.0 - kMargin;
}

std::vector<Vec2> linear_track(Rng& rng) {
  const double speed = uniform_in(rng, 0.015, 0.035);
  const double angle = uniform_in(rng, 0.0, 2.0 * std::numbers::pi);
  const Vec2 v(speed * std::cos(angle), speed * std::sin(angle));
  const double span = static_cast<double>(kSeqSteps - 1);
  auto start_range = [&](double vi) {
    const double lo = kMargin - std::min(0.0, span * vi);
    const double hi = (1.0 - kMargin) - std::max(0.0, span * vi);
    return std::pair{lo, hi};
  };
  const auto [lox, hix] = start_range(v.x());
  const auto [loy, hiy] = start_range(v.y());
  const Vec2 start(uniform_in(rng, lox, hix), uniform_in(rng, loy, hiy));
  std::vector<Vec2> track(kSeqSteps);
  for (int t = 0; t < kSeqSteps; ++t) {
    track[t] = start + static_cast<double>(t) * v;
  }
  return track;
}

std::vector<Vec2> crossing_track(Rng& rng, int ped_index) {
  // Alternating groups: even indices travel along x, odd along y; both cross
  // the middle of the box around the same steps so paths intersect.
  const double speed = uniform_in(rng, 0.02, 0.03);
  const bool horizontal = (ped_index % 2) == 0;
  const double sign = uniform_in(rng, 0.0, 1.0) < 0.5 ? 1.0 : -1.0;
  const double lane = uniform_in(rng, 0.4, 0.6);
  const double cross_step = uniform_in(rng, 8.0, 12.0);
  const double moving_start = 0.5 - sign * speed * cross_step;
  std::vector<Vec2> track(kSeqSteps);
  for (int t = 0; t < kSeqSteps; ++t) {
    const double along = moving_start + sign * speed * static_cast<double>(t);
    track[t] = horizontal ? Vec2(along, lane) : Vec2(lane, along);
  }
  return track;
}

std::vector<Vec2> avoid_track(Rng& rng, const Vec2& obstacle, double clearance) {
  // A straight pass aimed near the obstacle, then pushed out radially onto
  // the clearance circle; closest approach lands inside the prediction
  // window so most of the detour must be anticipated rather than observed.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double speed = uniform_in(rng, 0.027, 0.033);
    const double angle = uniform_in(rng, 0.0, 2.0 * std::numbers::pi);
    const Vec2 u(std::cos(angle), std::sin(angle));
    const Vec2 n(-u.y(), u.x());
    const double impact = (uniform_in(rng, 0.0, 1.0) < 0.5 ? 1.0 : -1.0) *
                          uniform_in(rng, 0.02, 0.08);
    const double closest_step = uniform_in(rng, 11.0, 14.0);
    const Vec2 closest_point = obstacle + impact * n;
    const Vec2 start = closest_point - speed * closest_step * u;

    std::vector<Vec2> track(kSeqSteps);
    bool ok = true;
    for (int t = 0; t < kSeqSteps && ok; ++t) {
      Vec2 p = start + speed * static_cast<double>(t) * u;
      const Vec2 rel = p - obstacle;
      const double r = rel.norm();
      if (r < clearance) {
        p = obstacle + rel * (clearance / r);
      }
      ok = in_box(p);
      track[t] = p;
    }
    if (ok) {
      return track;
    }
  }
  throw NumericError("make_synthetic: could not place an avoidance track");
}

}  // namespace

Scenario scenario_from_string(const std::string& name) {
  if (name == "linear") return Scenario::Linear;
  if (name == "crossing") return Scenario::Crossing;
  if (name == "obstacle_avoid") return Scenario::ObstacleAvoid;
  throw DomainError("unknown scenario '" + name + "'");
}

SceneDataset make_synthetic(Scenario scenario, int n_peds, std::uint64_t seed, double lambda) {
  if (n_peds < 1) {
    throw DomainError("make_synthetic: n_peds must be >= 1");
  }
  Rng rng(nn::derive_seed(seed, 0x73796e)); // "syn"
  SceneDataset ds;
  ds.transform = NormalizationTransform::identity();
  ds.meters_per_unit = 1.0;

  SceneInstance instance;
  instance.start_frame = 0;

  Vec2 obstacle(0.0, 0.0);
  const double clearance = lambda / 2.0 + 0.02;
  if (scenario == Scenario::ObstacleAvoid) {
    obstacle = Vec2(0.5 + uniform_in(rng, -0.1, 0.1), 0.5 + uniform_in(rng, -0.1, 0.1));
    ds.obstacles.emplace(0, obstacle);
    instance.obstacles = ds.obstacles;
  }

  for (int ped = 0; ped < n_peds; ++ped) {
    std::vector<Vec2> track;
    switch (scenario) {
      case Scenario::Linear:
        ds.name = "linear";
        track = linear_track(rng);
        break;
      case Scenario::Crossing:
        ds.name = "crossing";
        track = crossing_track(rng, ped);
        break;
      case Scenario::ObstacleAvoid:
        ds.name = "obstacle_avoid";
        track = avoid_track(rng, obstacle, clearance);
        break;
    }
    instance.sequences.push_back(to_sequence(ped + 1, track));
  }
  ds.instances.push_back(std::move(instance));
  return ds;
}

std::vector<SceneDataset> make_synthetic_set(Scenario scenario, int n_instances,
                                             int peds_per_instance, std::uint64_t base_seed,
                                             double lambda) {
  std::vector<SceneDataset> out;
  out.reserve(n_instances);
  for (int i = 0; i < n_instances; ++i) {
    SceneDataset ds =
        make_synthetic(scenario, peds_per_instance, nn::derive_seed(base_seed, 1000 + i), lambda);
    ds.name += "_" + std::to_string(i);
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace stga
