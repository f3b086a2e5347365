#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "stga/attention.hpp"
#include "stga/nn/grad_check.hpp"
#include "stga/nn/random.hpp"

using namespace stga;
using nn::Tape;
using nn::Var;

namespace {

// Independent brute-force route: plain Eigen, naive softmax, no tape.
Vec brute_force_attention(const Vec& temporal, const std::vector<Vec>& spatial, double alpha) {
  auto coeff = [alpha](const Vec& h) {
    Vec activated(h.size());
    for (int i = 0; i < h.size(); ++i) {
      activated(i) = std::max(0.0, h(i)) + alpha * std::min(0.0, h(i));
    }
    Vec e = activated.array().exp();
    e /= e.sum();
    return Vec(e.cwiseProduct(h));
  };
  Vec acc = coeff(temporal);
  for (const Vec& h : spatial) {
    acc += coeff(h);
  }
  return acc / static_cast<double>(1 + spatial.size());
}

Vec random_vec(int n, nn::Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * nn::normal01(rng);
  return v;
}

}  // namespace

TEST_SUITE("attention") {

TEST_CASE("embed_hidden: zero vector gives the uniform distribution") {
  Tape tape;
  Var alpha = tape.scalar(0.2);
  Var h = tape.leaf(Mat(Mat::Zero(8, 1)));
  Var e = embed_hidden(h, alpha);
  for (int i = 0; i < 8; ++i) {
    CHECK(tape.value(e)(i, 0) == doctest::Approx(1.0 / 8.0));
  }
}

TEST_CASE("embed_hidden: direct evaluation at h=(1,-1), alpha=0.2") {
  Tape tape;
  Var alpha = tape.scalar(0.2);
  Var h = tape.leaf(Vec(Vec2(1.0, -1.0)));
  Var e = embed_hidden(h, alpha);
  // softmax(1, -0.2)
  CHECK(tape.value(e)(0, 0) == doctest::Approx(0.7685).epsilon(1e-4));
  CHECK(tape.value(e)(1, 0) == doctest::Approx(0.2315).epsilon(1e-4));
}

TEST_CASE("embed_hidden sums to one on random input") {
  nn::Rng rng(5);
  Tape tape;
  Var alpha = tape.scalar(0.2);
  for (int trial = 0; trial < 10; ++trial) {
    Var h = tape.leaf(random_vec(16, rng, 2.0));
    Var e = embed_hidden(h, alpha);
    CHECK(tape.value(e).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(tape.value(e).minCoeff() > 0.0);
  }
}

TEST_CASE("coefficients: uniform embedding scales by 1/H; zero hidden gives zero") {
  Tape tape;
  const int h_size = 4;
  Var e = tape.leaf(Mat(Mat::Constant(h_size, 1, 1.0 / h_size)));
  Var h = tape.leaf(Vec((Vec(4) << 2.0, -4.0, 0.4, 8.0).finished()));
  Var a = coefficients(e, h);
  for (int i = 0; i < h_size; ++i) {
    CHECK(tape.value(a)(i, 0) == doctest::Approx(tape.value(h)(i, 0) / h_size));
  }

  Var z = coefficients(tape.leaf(Mat(Mat::Constant(2, 1, 0.3))), tape.leaf(Mat(Mat::Zero(2, 1))));
  CHECK(tape.value(z).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(coefficients(tape.leaf(Mat(Mat::Zero(3, 1))), tape.leaf(Mat(Mat::Zero(2, 1)))),
                  ShapeError);
}

TEST_CASE("coefficient magnitudes never exceed the hidden state") {
  nn::Rng rng(9);
  Tape tape;
  Var alpha = tape.scalar(0.2);
  for (int trial = 0; trial < 10; ++trial) {
    Var h = tape.leaf(random_vec(12, rng, 3.0));
    Var a = coefficients(embed_hidden(h, alpha), h);
    for (int i = 0; i < 12; ++i) {
      CHECK(std::abs(tape.value(a)(i, 0)) <= std::abs(tape.value(h)(i, 0)) + 1e-15);
    }
  }
}

TEST_CASE("multi_node_attention: no spatial edges returns the temporal coefficients") {
  nn::Rng rng(13);
  Tape tape;
  Var alpha = tape.scalar(0.2);
  Var h = tape.leaf(random_vec(8, rng));
  EdgeHiddenBundle bundle{h, {}};
  Var out = multi_node_attention(bundle, alpha);
  Var expected = coefficients(embed_hidden(h, alpha), h);
  for (int i = 0; i < 8; ++i) {
    CHECK(tape.value(out)(i, 0) == doctest::Approx(tape.value(expected)(i, 0)).epsilon(1e-15));
  }
}

TEST_CASE("multi_node_attention: identical edges collapse to one coefficient vector") {
  nn::Rng rng(15);
  Tape tape;
  Var alpha = tape.scalar(0.2);
  Var h = tape.leaf(random_vec(8, rng));
  EdgeHiddenBundle bundle{h, {h, h}};
  Var out = multi_node_attention(bundle, alpha);
  Var single = coefficients(embed_hidden(h, alpha), h);
  for (int i = 0; i < 8; ++i) {
    CHECK(tape.value(out)(i, 0) == doctest::Approx(tape.value(single)(i, 0)).epsilon(1e-12));
  }
}

TEST_CASE("multi_node_attention matches the brute-force route to 1e-12") {
  nn::Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int h_size = 2 + static_cast<int>(rng() % 24);
    const int n_spatial = static_cast<int>(rng() % 6);
    const double alpha = nn::uniform_in(rng, 0.05, 0.45);

    Vec temporal = random_vec(h_size, rng, 1.5);
    std::vector<Vec> spatial;
    for (int i = 0; i < n_spatial; ++i) spatial.push_back(random_vec(h_size, rng, 1.5));

    Tape tape;
    Var alpha_v = tape.scalar(alpha);
    EdgeHiddenBundle bundle;
    bundle.temporal = tape.leaf(temporal);
    for (const Vec& h : spatial) bundle.spatial.push_back(tape.leaf(h));
    Var out = multi_node_attention(bundle, alpha_v);

    const Vec expected = brute_force_attention(temporal, spatial, alpha);
    REQUIRE(tape.value(out).rows() == h_size);
    for (int i = 0; i < h_size; ++i) {
      CHECK(tape.value(out)(i, 0) == doctest::Approx(expected(i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("multi_node_attention is invariant to spatial permutation") {
  nn::Rng rng(21);
  Tape tape;
  Var alpha = tape.scalar(0.2);
  std::vector<Var> spatial;
  for (int i = 0; i < 4; ++i) spatial.push_back(tape.leaf(random_vec(8, rng)));
  Var temporal = tape.leaf(random_vec(8, rng));

  EdgeHiddenBundle fwd{temporal, spatial};
  std::vector<Var> reversed(spatial.rbegin(), spatial.rend());
  EdgeHiddenBundle rev{temporal, reversed};
  Var a = multi_node_attention(fwd, alpha);
  Var b = multi_node_attention(rev, alpha);
  for (int i = 0; i < 8; ++i) {
    CHECK(tape.value(a)(i, 0) == doctest::Approx(tape.value(b)(i, 0)).epsilon(1e-15));
  }
}

TEST_CASE("attention output is bounded by the largest hidden magnitude") {
  nn::Rng rng(33);
  Tape tape;
  Var alpha = tape.scalar(0.2);
  for (int trial = 0; trial < 10; ++trial) {
    EdgeHiddenBundle bundle;
    bundle.temporal = tape.leaf(random_vec(10, rng, 2.0));
    double max_inf = tape.value(bundle.temporal).cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i) {
      Var h = tape.leaf(random_vec(10, rng, 2.0));
      bundle.spatial.push_back(h);
      max_inf = std::max(max_inf, tape.value(h).cwiseAbs().maxCoeff());
    }
    Var out = multi_node_attention(bundle, alpha);
    CHECK(tape.value(out).cwiseAbs().maxCoeff() <= max_inf + 1e-15);
  }
}

TEST_CASE("gradient through the attention block matches finite differences") {
  nn::Rng rng(41);
  Mat temporal = random_vec(6, rng);
  Mat s0 = random_vec(6, rng);
  Mat s1 = random_vec(6, rng);
  Mat alpha = Mat::Constant(1, 1, 0.2);
  Mat proj = random_vec(6, rng);
  std::array<Mat*, 5> params = {&temporal, &s0, &s1, &alpha, &proj};
  const double err = nn::grad_check(params, [](Tape&, std::span<const Var> v) {
    EdgeHiddenBundle bundle{v[0], {v[1], v[2]}};
    return nn::sum(nn::cmul(multi_node_attention(bundle, v[3]), v[4]));
  });
  CHECK(err < 1e-4);
}

}  // TEST_SUITE
