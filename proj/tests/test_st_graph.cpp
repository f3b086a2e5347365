#include <doctest.h>

#include <algorithm>
#include <random>

#include "stga/nn/random.hpp"
#include "stga/st_graph.hpp"

using namespace stga;

TEST_SUITE("st_graph") {

TEST_CASE("edge_feature is the componentwise difference and antisymmetric") {
  auto f = edge_feature(Vec2(0.5, 0.5), Vec2(0.2, 0.1));
  CHECK(f.dx == doctest::Approx(0.3));
  CHECK(f.dy == doctest::Approx(0.4));

  auto zero = edge_feature(Vec2(0.3, 0.3), Vec2(0.3, 0.3));
  CHECK(zero.dx == 0.0);
  CHECK(zero.dy == 0.0);

  nn::Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    const Vec2 a(nn::uniform01(rng), nn::uniform01(rng));
    const Vec2 b(nn::uniform01(rng), nn::uniform01(rng));
    const auto ab = edge_feature(a, b);
    const auto ba = edge_feature(b, a);
    CHECK(ab.dx == doctest::Approx(-ba.dx));
    CHECK(ab.dy == doctest::Approx(-ba.dy));
  }
}

TEST_CASE("four pedestrians give 12 directed HH edges, incidence 2(N-1)") {
  std::map<int, Vec2> peds;
  for (int i = 1; i <= 4; ++i) {
    peds.emplace(i, Vec2(0.1 * i, 0.2 * i));
  }
  auto snap = build_snapshot(peds, {}, 0.5, GraphMode::HH);
  CHECK(snap.hh_edge_count() == 12);
  CHECK(snap.ho_edge_count() == 0);
  for (int i = 1; i <= 4; ++i) {
    int incident = 0;
    for (const auto& e : snap.spatial_edges) {
      if (e.src.id == i || e.dst.id == i) ++incident;
    }
    CHECK(incident == 2 * (4 - 1));
  }
  CHECK(snap.temporal_edges.size() == 4);
}

TEST_CASE("edge counts across N = 1..10") {
  for (int n = 1; n <= 10; ++n) {
    std::map<int, Vec2> peds;
    for (int i = 0; i < n; ++i) {
      peds.emplace(i, Vec2(0.05 + 0.09 * i, 0.5));
    }
    auto snap = build_snapshot(peds, {}, 0.5, GraphMode::HH);
    CHECK(snap.hh_edge_count() == n * (n - 1));
    CHECK(static_cast<int>(snap.temporal_edges.size()) == n);
  }
}

TEST_CASE("single pedestrian: no spatial edges, one temporal edge") {
  std::map<int, Vec2> peds{{1, Vec2(0.5, 0.5)}};
  auto snap = build_snapshot(peds, {}, 0.5, GraphMode::HHO);
  CHECK(snap.spatial_edges.empty());
  REQUIRE(snap.temporal_edges.size() == 1);
  CHECK(snap.temporal_edges[0].feature.dx == doctest::Approx(0.5));
}

TEST_CASE("zero pedestrians yield an empty snapshot") {
  auto snap = build_snapshot({}, {{0, Vec2(0.5, 0.5)}}, 0.5, GraphMode::HHO);
  CHECK(snap.spatial_edges.empty());
  CHECK(snap.temporal_edges.empty());
}

TEST_CASE("HO gating: strict inequality at lambda") {
  std::map<int, Vec2> peds{{1, Vec2(0.2, 0.2)}};
  SUBCASE("inside the neighborhood") {
    std::map<int, Vec2> obs{{0, Vec2(0.2, 0.6)}};  // distance 0.4 < 0.5
    auto snap = build_snapshot(peds, obs, 0.5, GraphMode::HHO);
    REQUIRE(snap.ho_edge_count() == 1);
    CHECK(snap.spatial_edges[0].src.kind == NodeKind::Obstacle);
    CHECK(snap.spatial_edges[0].feature.dy == doctest::Approx(0.4));
  }
  SUBCASE("exactly at lambda -> no edge") {
    // 0.75 - 0.25 is exactly representable, so the distance is exactly 0.5.
    std::map<int, Vec2> at_boundary{{1, Vec2(0.25, 0.25)}};
    std::map<int, Vec2> obs{{0, Vec2(0.25, 0.75)}};
    auto snap = build_snapshot(at_boundary, obs, 0.5, GraphMode::HHO);
    CHECK(snap.ho_edge_count() == 0);
  }
  SUBCASE("HH mode ignores obstacles entirely") {
    std::map<int, Vec2> obs{{0, Vec2(0.2, 0.3)}};
    auto snap = build_snapshot(peds, obs, 0.5, GraphMode::HH);
    CHECK(snap.ho_edge_count() == 0);
    CHECK(snap.obstacles.empty());
  }
}

TEST_CASE("HO edge presence is monotone in lambda") {
  nn::Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<int, Vec2> peds;
    std::map<int, Vec2> obs;
    for (int i = 0; i < 4; ++i) peds.emplace(i, Vec2(nn::uniform01(rng), nn::uniform01(rng)));
    for (int i = 0; i < 3; ++i) obs.emplace(i, Vec2(nn::uniform01(rng), nn::uniform01(rng)));
    const double small = nn::uniform_in(rng, 0.05, 0.4);
    const double large = small + nn::uniform_in(rng, 0.05, 0.5);
    auto s1 = build_snapshot(peds, obs, small, GraphMode::HHO);
    auto s2 = build_snapshot(peds, obs, large, GraphMode::HHO);
    CHECK(s2.ho_edge_count() >= s1.ho_edge_count());
    // Every small-lambda edge persists at the larger lambda.
    for (const auto& e : s1.spatial_edges) {
      if (e.cls != EdgeClass::HO) continue;
      const bool found =
          std::any_of(s2.spatial_edges.begin(), s2.spatial_edges.end(), [&](const SpatialEdge& f) {
            return f.cls == EdgeClass::HO && f.src.id == e.src.id && f.dst.id == e.dst.id;
          });
      CHECK(found);
    }
  }
}

TEST_CASE("snapshot construction is order independent") {
  nn::Rng rng(23);
  std::vector<std::pair<int, Vec2>> entries;
  for (int i = 0; i < 6; ++i) {
    entries.emplace_back(i * 3 + 1, Vec2(nn::uniform01(rng), nn::uniform01(rng)));
  }
  std::map<int, Vec2> in_order(entries.begin(), entries.end());
  std::shuffle(entries.begin(), entries.end(), rng);
  std::map<int, Vec2> shuffled(entries.begin(), entries.end());

  auto a = build_snapshot(in_order, {}, 0.5, GraphMode::HH);
  auto b = build_snapshot(shuffled, {}, 0.5, GraphMode::HH);
  REQUIRE(a.spatial_edges.size() == b.spatial_edges.size());
  for (std::size_t i = 0; i < a.spatial_edges.size(); ++i) {
    CHECK(a.spatial_edges[i].src.id == b.spatial_edges[i].src.id);
    CHECK(a.spatial_edges[i].dst.id == b.spatial_edges[i].dst.id);
    CHECK(a.spatial_edges[i].feature.dx == b.spatial_edges[i].feature.dx);
  }
}

TEST_CASE("incoming edges are ordered by (class, src)") {
  std::map<int, Vec2> peds{{1, Vec2(0.5, 0.5)}, {2, Vec2(0.4, 0.5)}, {3, Vec2(0.6, 0.5)}};
  std::map<int, Vec2> obs{{7, Vec2(0.5, 0.6)}};
  auto snap = build_snapshot(peds, obs, 0.5, GraphMode::HHO);
  auto in1 = snap.incoming(1);
  REQUIRE(in1.size() == 3);  // two HH + one HO
  CHECK(in1[0]->cls == EdgeClass::HH);
  CHECK(in1[0]->src.id == 2);
  CHECK(in1[1]->cls == EdgeClass::HH);
  CHECK(in1[1]->src.id == 3);
  CHECK(in1[2]->cls == EdgeClass::HO);
  CHECK(in1[2]->src.id == 7);
}

TEST_CASE("diff_snapshots partitions node sets") {
  std::map<int, Vec2> p1{{1, Vec2(0.1, 0.1)}, {2, Vec2(0.2, 0.2)}};
  std::map<int, Vec2> p2{{1, Vec2(0.15, 0.1)}, {3, Vec2(0.9, 0.9)}};
  auto prev = build_snapshot(p1, {}, 0.5, GraphMode::HH);
  auto next = build_snapshot(p2, {}, 0.5, GraphMode::HH);

  auto d = diff_snapshots(prev, next);
  CHECK(d.entered == std::vector<int>{3});
  CHECK(d.exited == std::vector<int>{2});
  CHECK(d.persisting == std::vector<int>{1});

  auto same = diff_snapshots(prev, prev);
  CHECK(same.entered.empty());
  CHECK(same.exited.empty());

  auto from_empty = diff_snapshots(build_snapshot({}, {}, 0.5, GraphMode::HH), next);
  CHECK(from_empty.entered == std::vector<int>{1, 3});
}

}  // TEST_SUITE
