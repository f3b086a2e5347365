#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stga/types.hpp"

namespace stga {

struct RawAnnotation {
  int frame_id = 0;
  int ped_id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct ObstacleAnnotation {
  int obstacle_id = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Affine map of a scene bounding box onto [0,1]^2 and back.
struct NormalizationTransform {
  double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;

  Vec2 apply(const Vec2& p) const {
    return Vec2((p.x() - min_x) / (max_x - min_x), (p.y() - min_y) / (max_y - min_y));
  }
  Vec2 invert(const Vec2& p) const {
    return Vec2(min_x + p.x() * (max_x - min_x), min_y + p.y() * (max_y - min_y));
  }
  static NormalizationTransform identity() { return NormalizationTransform{}; }
};

/// One pedestrian's 8 observed + 12 future positions, normalized to [0,1].
struct TrajectorySequence {
  int ped_id = 0;
  int start_frame = 0;
  std::vector<Vec2> observed;  // kObsSteps entries
  std::vector<Vec2> future;    // kPredSteps entries

  Vec2 position(int step) const {
    return step < kObsSteps ? observed[step] : future[step - kObsSteps];
  }
};

/// Co-temporal sequences sharing one start frame, processed as one graph
/// sequence. Carries the scene obstacle set so the model can gate HO edges.
struct SceneInstance {
  int start_frame = 0;
  std::vector<TrajectorySequence> sequences;
  std::map<int, Vec2> obstacles;  // normalized coordinates

  std::map<int, Vec2> positions_at(int step) const;
};

struct SceneDataset {
  std::string name;
  std::vector<SceneInstance> instances;
  std::map<int, Vec2> obstacles;  // normalized
  NormalizationTransform transform;
  double meters_per_unit = 1.0;

  int sequence_count() const;
};

// --- parsing -----------------------------------------------------------------

/// Canonical annotation text: one `frame ped x y` record per line, fields
/// whitespace-separated, `#` starts a comment. Duplicate (frame, ped) pairs
/// are rejected.
std::vector<RawAnnotation> parse_annotations(std::istream& in);
std::vector<RawAnnotation> parse_annotations(const std::string& text);
std::vector<RawAnnotation> load_annotations(const std::filesystem::path& file);

/// Obstacle text: `obstacle_id x y` per line, same conventions.
std::vector<ObstacleAnnotation> parse_obstacles(std::istream& in);
std::vector<ObstacleAnnotation> parse_obstacles(const std::string& text);
std::vector<ObstacleAnnotation> load_obstacles(const std::filesystem::path& file);

void write_annotations(const std::filesystem::path& file,
                       const std::vector<RawAnnotation>& annotations);
void write_obstacles(const std::filesystem::path& file,
                     const std::vector<ObstacleAnnotation>& obstacles);

// --- preprocessing -----------------------------------------------------------

/// Fits the joint bounding box of pedestrians and obstacles onto [0,1]^2.
/// Degenerate extent on either axis is an error.
NormalizationTransform fit_normalization(const std::vector<RawAnnotation>& annotations,
                                         const std::vector<ObstacleAnnotation>& obstacles);

struct ResampleResult {
  std::vector<RawAnnotation> annotations;  // frame ids are multiples of skip_rate
  int dropped_single_warnings = 0;         // pedestrians with < 2 annotations
};

/// Keeps one position per pedestrian every `skip_rate` frames, linearly
/// interpolating grid frames that fall between annotated ones. Idempotent on
/// input already aligned to the grid.
ResampleResult resample_by_skip(const std::vector<RawAnnotation>& annotations, int skip_rate);

/// Slides a 20-step window (stride 1) over every maximal run of consecutive
/// resampled steps. A track of L steps yields max(0, L-19) sequences.
/// Input coordinates must already be normalized.
std::vector<TrajectorySequence> window_sequences(const std::vector<RawAnnotation>& normalized,
                                                 int skip_rate);

/// Full pipeline: resample -> fit normalization -> normalize -> window ->
/// group co-temporal windows into scene instances.
struct SceneBuildStats {
  int pedestrians = 0;
  int sequences = 0;
  int instances = 0;
  int dropped_single_warnings = 0;
};
SceneDataset build_scene_dataset(const std::string& name,
                                 const std::vector<RawAnnotation>& annotations,
                                 const std::vector<ObstacleAnnotation>& obstacles,
                                 int skip_rate, double meters_per_unit,
                                 SceneBuildStats* stats = nullptr);

// --- splits & manifests --------------------------------------------------------

/// Leave-one-out split over named scenes: train = all but `held_out`,
/// test = the held-out scene. Unknown names are an error.
std::pair<std::vector<SceneDataset>, std::vector<SceneDataset>> leave_one_out_split(
    const std::vector<SceneDataset>& scenes, const std::string& held_out);

/// Manifest line: `scene_name<TAB>annotation_path<TAB>obstacle_path<TAB>meters_per_unit`.
/// `-` stands for "no obstacle file". Relative paths resolve against the
/// manifest's directory.
struct ManifestEntry {
  std::string scene_name;
  std::filesystem::path annotation_path;
  std::filesystem::path obstacle_path;  // empty when absent
  double meters_per_unit = 1.0;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& file);
void write_manifest(const std::filesystem::path& file, const std::vector<ManifestEntry>& entries);

/// Loads every scene listed in a manifest through the full pipeline.
std::vector<SceneDataset> load_scenes(const std::filesystem::path& manifest, int skip_rate);

}  // namespace stga
