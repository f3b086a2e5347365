#include <doctest.h>

#include <algorithm>
#include <set>

#include "stga/nn/random.hpp"
#include "stga/trajectory_data.hpp"

using namespace stga;

TEST_SUITE("trajectory_data") {

TEST_CASE("parse_annotations: basic records, order preserved") {
  auto recs = parse_annotations(std::string("0 1 2.0 3.0\n10 1 2.5 3.0\n"));
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].frame_id == 0);
  CHECK(recs[0].ped_id == 1);
  CHECK(recs[0].x == doctest::Approx(2.0));
  CHECK(recs[1].frame_id == 10);
  CHECK(recs[1].y == doctest::Approx(3.0));
}

TEST_CASE("parse_annotations: empty input, comments, tabs") {
  CHECK(parse_annotations(std::string("")).empty());
  auto recs = parse_annotations(std::string("# header\n\n5\t2\t1.5\t-0.5\n"));
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].ped_id == 2);
  CHECK(recs[0].y == doctest::Approx(-0.5));
}

TEST_CASE("parse_annotations: malformed line carries line number") {
  CHECK_THROWS_WITH_AS(parse_annotations(std::string("0 1 2.0\n")), doctest::Contains("line 1"),
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_annotations(std::string("0 1 2.0 3.0\nx 2 1 1\n")),
                       doctest::Contains("line 2"), ParseError);
}

TEST_CASE("parse_annotations: duplicate (frame, ped) rejected") {
  CHECK_THROWS_WITH_AS(parse_annotations(std::string("0 1 2.0 3.0\n0 1 9.9 9.9\n")),
                       doctest::Contains("duplicate"), ParseError);
}

TEST_CASE("parse_obstacles: format and duplicates") {
  auto obs = parse_obstacles(std::string("0\t3.0\t4.5\n1\t1.0\t1.0\n"));
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].x == doctest::Approx(3.0));
  CHECK_THROWS_AS(parse_obstacles(std::string("0 1 2\n0 3 4\n")), ParseError);
  CHECK_THROWS_AS(parse_obstacles(std::string("0 1\n")), ParseError);
}

TEST_CASE("fit_normalization maps the bounding box onto the unit square") {
  std::vector<RawAnnotation> anns = {{0, 1, 0.0, 0.0}, {1, 1, 10.0, 20.0}};
  auto t = fit_normalization(anns, {});
  CHECK(t.min_x == doctest::Approx(0.0));
  CHECK(t.max_x == doctest::Approx(10.0));
  const Vec2 top = t.apply(Vec2(10.0, 20.0));
  CHECK(top.x() == doctest::Approx(1.0));
  CHECK(top.y() == doctest::Approx(1.0));
}

TEST_CASE("fit_normalization: degenerate extent errors") {
  std::vector<RawAnnotation> anns = {{0, 1, 5.0, 5.0}, {1, 1, 5.0, 9.0}};
  CHECK_THROWS_AS(fit_normalization(anns, {}), DomainError);
}

TEST_CASE("fit_normalization: obstacles extend the box; round-trip is identity") {
  std::vector<RawAnnotation> anns = {{0, 1, 2.0, 2.0}, {1, 1, 4.0, 6.0}};
  std::vector<ObstacleAnnotation> obs = {{0, 8.0, 1.0}};
  auto t = fit_normalization(anns, obs);
  CHECK(t.max_x == doctest::Approx(8.0));
  const Vec2 p(3.0, 4.0);
  const Vec2 back = t.invert(t.apply(p));
  CHECK(std::abs(back.x() - p.x()) < 1e-9);
  CHECK(std::abs(back.y() - p.y()) < 1e-9);
}

TEST_CASE("resample_by_skip keeps aligned frames") {
  std::vector<RawAnnotation> anns;
  for (int f = 0; f <= 50; f += 10) {
    anns.push_back({f, 7, static_cast<double>(f), 1.0});
  }
  auto r = resample_by_skip(anns, 10);
  REQUIRE(r.annotations.size() == 6);
  for (std::size_t i = 0; i < r.annotations.size(); ++i) {
    CHECK(r.annotations[i].frame_id == static_cast<int>(10 * i));
    CHECK(r.annotations[i].x == doctest::Approx(10.0 * i));
  }
  CHECK(r.dropped_single_warnings == 0);
}

TEST_CASE("resample_by_skip interpolates missing grid frames") {
  std::vector<RawAnnotation> anns = {{0, 3, 0.0, 0.0}, {20, 3, 4.0, -2.0}};
  auto r = resample_by_skip(anns, 10);
  REQUIRE(r.annotations.size() == 3);
  CHECK(r.annotations[1].frame_id == 10);
  CHECK(r.annotations[1].x == doctest::Approx(2.0));
  CHECK(r.annotations[1].y == doctest::Approx(-1.0));
}

TEST_CASE("resample_by_skip drops single-annotation pedestrians with a warning") {
  std::vector<RawAnnotation> anns = {{0, 1, 1.0, 1.0}};
  auto r = resample_by_skip(anns, 10);
  CHECK(r.annotations.empty());
  CHECK(r.dropped_single_warnings == 1);
}

TEST_CASE("resample_by_skip is idempotent on grid-aligned input") {
  nn::Rng rng(31);
  std::vector<RawAnnotation> anns;
  for (int ped = 1; ped <= 3; ++ped) {
    for (int f = 0; f < 40; f += 10) {
      anns.push_back({f, ped, nn::uniform01(rng), nn::uniform01(rng)});
    }
  }
  auto once = resample_by_skip(anns, 10);
  auto twice = resample_by_skip(once.annotations, 10);
  REQUIRE(once.annotations.size() == twice.annotations.size());
  for (std::size_t i = 0; i < once.annotations.size(); ++i) {
    CHECK(once.annotations[i].frame_id == twice.annotations[i].frame_id);
    CHECK(once.annotations[i].x == twice.annotations[i].x);
    CHECK(once.annotations[i].y == twice.annotations[i].y);
  }
}

TEST_CASE("window_sequences: window count is max(0, L-19)") {
  auto make_track = [](int steps) {
    std::vector<RawAnnotation> anns;
    for (int i = 0; i < steps; ++i) {
      anns.push_back({10 * i, 1, 0.01 * i, 0.5});
    }
    return anns;
  };
  CHECK(window_sequences(make_track(20), 10).size() == 1);
  CHECK(window_sequences(make_track(21), 10).size() == 2);
  CHECK(window_sequences(make_track(19), 10).empty());
  CHECK(window_sequences(make_track(45), 10).size() == 45 - 19);
}

TEST_CASE("window_sequences: gaps split runs; shapes and ranges hold") {
  std::vector<RawAnnotation> anns;
  for (int i = 0; i < 25; ++i) {
    if (i == 21) continue;  // hole -> runs of 21 and 3
    anns.push_back({10 * i, 4, 0.02 * i, 1.0 - 0.02 * i});
  }
  auto seqs = window_sequences(anns, 10);
  REQUIRE(seqs.size() == 2);  // 21 - 19
  for (const auto& s : seqs) {
    CHECK(s.observed.size() == 8);
    CHECK(s.future.size() == 12);
    for (int i = 0; i < kSeqSteps; ++i) {
      const Vec2 p = s.position(i);
      CHECK(p.x() >= 0.0);
      CHECK(p.x() <= 1.0);
      CHECK(p.y() >= 0.0);
      CHECK(p.y() <= 1.0);
    }
  }
  CHECK(seqs[0].start_frame == 0);
  CHECK(seqs[1].start_frame == 10);
}

TEST_CASE("leave_one_out_split partitions scenes") {
  std::vector<SceneDataset> scenes(5);
  const char* names[] = {"ETH", "HOTEL", "ZARA1", "ZARA2", "UNIV"};
  for (int i = 0; i < 5; ++i) scenes[i].name = names[i];

  auto [train, test] = leave_one_out_split(scenes, "ETH");
  REQUIRE(train.size() == 4);
  REQUIRE(test.size() == 1);
  CHECK(test[0].name == "ETH");
  std::set<std::string> train_names;
  for (const auto& s : train) train_names.insert(s.name);
  CHECK(train_names == std::set<std::string>{"HOTEL", "ZARA1", "ZARA2", "UNIV"});

  CHECK_THROWS_AS(leave_one_out_split(scenes, "ZARA9"), DomainError);

  // All five choices partition with no overlap.
  for (const char* held : names) {
    auto [tr, te] = leave_one_out_split(scenes, held);
    CHECK(tr.size() + te.size() == 5);
    for (const auto& s : tr) CHECK(s.name != held);
  }
}

TEST_CASE("build_scene_dataset groups co-temporal windows into instances") {
  // Two pedestrians walking side by side for 21 resampled steps.
  std::vector<RawAnnotation> anns;
  for (int i = 0; i < 21; ++i) {
    anns.push_back({10 * i, 1, 1.0 * i, 0.0});
    anns.push_back({10 * i, 2, 1.0 * i, 5.0});
  }
  SceneBuildStats stats;
  SceneDataset ds = build_scene_dataset("pair", anns, {}, 10, 1.0, &stats);
  CHECK(stats.pedestrians == 2);
  CHECK(stats.sequences == 4);  // 2 peds x (21-19)
  REQUIRE(ds.instances.size() == 2);
  for (const auto& inst : ds.instances) {
    CHECK(inst.sequences.size() == 2);
    for (const auto& seq : inst.sequences) {
      CHECK(seq.start_frame == inst.start_frame);
    }
  }
  // Normalized coordinates respect the fitted box.
  const auto pos = ds.instances[0].positions_at(0);
  CHECK(pos.at(1).x() == doctest::Approx(0.0));
  CHECK(pos.at(1).y() == doctest::Approx(0.0));
  CHECK(pos.at(2).y() == doctest::Approx(1.0));
}

TEST_CASE("manifest round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "stga_manifest_test";
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> entries;
  entries.push_back({"sceneA", dir / "a.tsv", dir / "a_obs.tsv", 0.05});
  entries.push_back({"sceneB", dir / "b.tsv", {}, 1.0});
  const auto file = dir / "manifest.tsv";
  write_manifest(file, entries);
  auto back = read_manifest(file);
  REQUIRE(back.size() == 2);
  CHECK(back[0].scene_name == "sceneA");
  CHECK(back[0].meters_per_unit == doctest::Approx(0.05));
  CHECK(back[1].obstacle_path.empty());
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
