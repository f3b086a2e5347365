#include "stga/trajectory_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace stga {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

int parse_int(std::string_view s, int line_no, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                     std::string(s) + "'");
  }
  return value;
}

double parse_real(std::string_view s, int line_no, const char* what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                     std::string(s) + "'");
  }
  return value;
}

bool is_blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::ifstream open_input(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw IoError("cannot open " + file.string());
  }
  return in;
}

}  // namespace

std::vector<RawAnnotation> parse_annotations(std::istream& in) {
  std::vector<RawAnnotation> out;
  std::set<std::pair<int, int>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
    }
    RawAnnotation a;
    a.frame_id = parse_int(fields[0], line_no, "frame id");
    a.ped_id = parse_int(fields[1], line_no, "pedestrian id");
    a.x = parse_real(fields[2], line_no, "x");
    a.y = parse_real(fields[3], line_no, "y");
    if (a.frame_id < 0) {
      throw ParseError("line " + std::to_string(line_no) + ": negative frame id");
    }
    if (!seen.insert({a.frame_id, a.ped_id}).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate (frame, ped) pair (" +
                       std::to_string(a.frame_id) + ", " + std::to_string(a.ped_id) + ")");
    }
    out.push_back(a);
  }
  return out;
}

std::vector<RawAnnotation> parse_annotations(const std::string& text) {
  std::istringstream in(text);
  return parse_annotations(in);
}

std::vector<RawAnnotation> load_annotations(const std::filesystem::path& file) {
  auto in = open_input(file);
  try {
    return parse_annotations(in);
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

std::vector<ObstacleAnnotation> parse_obstacles(std::istream& in) {
  std::vector<ObstacleAnnotation> out;
  std::set<int> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    auto fields = split_fields(line);
    if (fields.size() != 3) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                       std::to_string(fields.size()));
    }
    ObstacleAnnotation o;
    o.obstacle_id = parse_int(fields[0], line_no, "obstacle id");
    o.x = parse_real(fields[1], line_no, "x");
    o.y = parse_real(fields[2], line_no, "y");
    if (!seen.insert(o.obstacle_id).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate obstacle id " +
                       std::to_string(o.obstacle_id));
    }
    out.push_back(o);
  }
  return out;
}

std::vector<ObstacleAnnotation> parse_obstacles(const std::string& text) {
  std::istringstream in(text);
  return parse_obstacles(in);
}

std::vector<ObstacleAnnotation> load_obstacles(const std::filesystem::path& file) {
  auto in = open_input(file);
  try {
    return parse_obstacles(in);
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

namespace {

void write_lines(const std::filesystem::path& file, const std::string& body) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + file.string());
  }
  out << body;
  if (!out) {
    throw IoError("short write to " + file.string());
  }
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_annotations(const std::filesystem::path& file,
                       const std::vector<RawAnnotation>& annotations) {
  std::string body;
  for (const RawAnnotation& a : annotations) {
    body += std::to_string(a.frame_id) + "\t" + std::to_string(a.ped_id) + "\t" +
            format_real(a.x) + "\t" + format_real(a.y) + "\n";
  }
  write_lines(file, body);
}

void write_obstacles(const std::filesystem::path& file,
                     const std::vector<ObstacleAnnotation>& obstacles) {
  std::string body;
  for (const ObstacleAnnotation& o : obstacles) {
    body += std::to_string(o.obstacle_id) + "\t" + format_real(o.x) + "\t" + format_real(o.y) +
            "\n";
  }
  write_lines(file, body);
}

NormalizationTransform fit_normalization(const std::vector<RawAnnotation>& annotations,
                                         const std::vector<ObstacleAnnotation>& obstacles) {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  auto feed = [&](double x, double y) {
    min_x = std::min(min_x, x);
    min_y = std::min(min_y, y);
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  };
  for (const auto& a : annotations) feed(a.x, a.y);
  for (const auto& o : obstacles) feed(o.x, o.y);
  if (!(max_x > min_x)) {
    throw DomainError("fit_normalization: degenerate x extent");
  }
  if (!(max_y > min_y)) {
    throw DomainError("fit_normalization: degenerate y extent");
  }
  return NormalizationTransform{min_x, min_y, max_x, max_y};
}

ResampleResult resample_by_skip(const std::vector<RawAnnotation>& annotations, int skip_rate) {
  if (skip_rate < 1) {
    throw DomainError("resample_by_skip: skip_rate must be >= 1");
  }
  // Group per pedestrian, preserving first-seen pedestrian order for output
  // stability, then sort each track by frame.
  std::vector<int> ped_order;
  std::unordered_map<int, std::vector<RawAnnotation>> tracks;
  for (const RawAnnotation& a : annotations) {
    auto [it, inserted] = tracks.try_emplace(a.ped_id);
    if (inserted) ped_order.push_back(a.ped_id);
    it->second.push_back(a);
  }

  ResampleResult result;
  for (int ped : ped_order) {
    auto& track = tracks[ped];
    if (track.size() < 2) {
      ++result.dropped_single_warnings;
      continue;
    }
    std::sort(track.begin(), track.end(),
              [](const RawAnnotation& a, const RawAnnotation& b) { return a.frame_id < b.frame_id; });
    const int first = track.front().frame_id;
    const int last = track.back().frame_id;
    // Grid frames: multiples of skip_rate within [first, last].
    int f = ((first + skip_rate - 1) / skip_rate) * skip_rate;
    std::size_t hi = 1;  // first annotation with frame >= f below
    for (; f <= last; f += skip_rate) {
      while (hi < track.size() && track[hi].frame_id < f) ++hi;
      const RawAnnotation& b = track[hi == track.size() ? track.size() - 1 : hi];
      if (b.frame_id == f) {
        result.annotations.push_back(RawAnnotation{f, ped, b.x, b.y});
        continue;
      }
      const RawAnnotation& a = track[hi - 1];
      const double t = static_cast<double>(f - a.frame_id) /
                       static_cast<double>(b.frame_id - a.frame_id);
      result.annotations.push_back(
          RawAnnotation{f, ped, a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return result;
}

std::vector<TrajectorySequence> window_sequences(const std::vector<RawAnnotation>& normalized,
                                                 int skip_rate) {
  std::vector<int> ped_order;
  std::unordered_map<int, std::vector<RawAnnotation>> tracks;
  for (const RawAnnotation& a : normalized) {
    auto [it, inserted] = tracks.try_emplace(a.ped_id);
    if (inserted) ped_order.push_back(a.ped_id);
    it->second.push_back(a);
  }
  std::vector<TrajectorySequence> out;
  for (int ped : ped_order) {
    auto& track = tracks[ped];
    std::sort(track.begin(), track.end(),
              [](const RawAnnotation& a, const RawAnnotation& b) { return a.frame_id < b.frame_id; });
    // Maximal runs of frames spaced exactly skip_rate apart.
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= track.size(); ++i) {
      const bool contiguous =
          i < track.size() && track[i].frame_id == track[i - 1].frame_id + skip_rate;
      if (contiguous) continue;
      const std::size_t run_len = i - run_start;
      if (run_len >= static_cast<std::size_t>(kSeqSteps)) {
        for (std::size_t w = run_start; w + kSeqSteps <= i; ++w) {
          TrajectorySequence seq;
          seq.ped_id = ped;
          seq.start_frame = track[w].frame_id;
          seq.observed.reserve(kObsSteps);
          seq.future.reserve(kPredSteps);
          for (int s = 0; s < kObsSteps; ++s) {
            seq.observed.emplace_back(track[w + s].x, track[w + s].y);
          }
          for (int s = 0; s < kPredSteps; ++s) {
            seq.future.emplace_back(track[w + kObsSteps + s].x, track[w + kObsSteps + s].y);
          }
          out.push_back(std::move(seq));
        }
      }
      run_start = i;
    }
  }
  return out;
}

std::map<int, Vec2> SceneInstance::positions_at(int step) const {
  std::map<int, Vec2> out;
  for (const TrajectorySequence& seq : sequences) {
    out.emplace(seq.ped_id, seq.position(step));
  }
  return out;
}

int SceneDataset::sequence_count() const {
  int n = 0;
  for (const SceneInstance& inst : instances) {
    n += static_cast<int>(inst.sequences.size());
  }
  return n;
}

SceneDataset build_scene_dataset(const std::string& name,
                                 const std::vector<RawAnnotation>& annotations,
                                 const std::vector<ObstacleAnnotation>& obstacles,
                                 int skip_rate, double meters_per_unit,
                                 SceneBuildStats* stats) {
  SceneDataset ds;
  ds.name = name;
  ds.meters_per_unit = meters_per_unit;

  ResampleResult resampled = resample_by_skip(annotations, skip_rate);
  if (resampled.annotations.empty()) {
    ds.transform = NormalizationTransform::identity();
    if (stats) {
      *stats = SceneBuildStats{0, 0, 0, resampled.dropped_single_warnings};
    }
    return ds;
  }
  ds.transform = fit_normalization(resampled.annotations, obstacles);

  std::vector<RawAnnotation> normalized = resampled.annotations;
  for (RawAnnotation& a : normalized) {
    const Vec2 p = ds.transform.apply(Vec2(a.x, a.y));
    a.x = p.x();
    a.y = p.y();
  }
  for (const ObstacleAnnotation& o : obstacles) {
    ds.obstacles.emplace(o.obstacle_id, ds.transform.apply(Vec2(o.x, o.y)));
  }

  std::vector<TrajectorySequence> sequences = window_sequences(normalized, skip_rate);
  std::map<int, SceneInstance> by_start;
  for (TrajectorySequence& seq : sequences) {
    SceneInstance& inst = by_start[seq.start_frame];
    inst.start_frame = seq.start_frame;
    inst.sequences.push_back(std::move(seq));
  }
  for (auto& [frame, inst] : by_start) {
    inst.obstacles = ds.obstacles;
    ds.instances.push_back(std::move(inst));
  }

  if (stats) {
    std::set<int> peds;
    for (const RawAnnotation& a : resampled.annotations) peds.insert(a.ped_id);
    stats->pedestrians = static_cast<int>(peds.size());
    stats->sequences = ds.sequence_count();
    stats->instances = static_cast<int>(ds.instances.size());
    stats->dropped_single_warnings = resampled.dropped_single_warnings;
  }
  return ds;
}

std::pair<std::vector<SceneDataset>, std::vector<SceneDataset>> leave_one_out_split(
    const std::vector<SceneDataset>& scenes, const std::string& held_out) {
  bool found = false;
  std::pair<std::vector<SceneDataset>, std::vector<SceneDataset>> split;
  for (const SceneDataset& s : scenes) {
    if (s.name == held_out) {
      split.second.push_back(s);
      found = true;
    } else {
      split.first.push_back(s);
    }
  }
  if (!found) {
    throw DomainError("leave_one_out_split: unknown scene '" + held_out + "'");
  }
  return split;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& file) {
  auto in = open_input(file);
  const std::filesystem::path base = file.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ParseError(file.string() + ": line " + std::to_string(line_no) +
                       ": expected 4 fields, got " + std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.scene_name = std::string(fields[0]);
    const std::filesystem::path ann{std::string(fields[1])};
    e.annotation_path = ann.is_absolute() ? ann : base / ann;
    if (fields[2] != "-") {
      const std::filesystem::path obs{std::string(fields[2])};
      e.obstacle_path = obs.is_absolute() ? obs : base / obs;
    }
    e.meters_per_unit = parse_real(fields[3], line_no, "meters_per_unit");
    if (!(e.meters_per_unit > 0.0)) {
      throw ParseError(file.string() + ": line " + std::to_string(line_no) +
                       ": meters_per_unit must be positive");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& file,
                    const std::vector<ManifestEntry>& entries) {
  std::string body;
  for (const ManifestEntry& e : entries) {
    body += e.scene_name + "\t" + e.annotation_path.string() + "\t" +
            (e.obstacle_path.empty() ? std::string("-") : e.obstacle_path.string()) + "\t" +
            format_real(e.meters_per_unit) + "\n";
  }
  write_lines(file, body);
}

std::vector<SceneDataset> load_scenes(const std::filesystem::path& manifest, int skip_rate) {
  std::vector<SceneDataset> scenes;
  for (const ManifestEntry& e : read_manifest(manifest)) {
    auto annotations = load_annotations(e.annotation_path);
    std::vector<ObstacleAnnotation> obstacles;
    if (!e.obstacle_path.empty()) {
      obstacles = load_obstacles(e.obstacle_path);
    }
    scenes.push_back(build_scene_dataset(e.scene_name, annotations, obstacles, skip_rate,
                                         e.meters_per_unit));
  }
  return scenes;
}

}  // namespace stga
