#include <doctest.h>

#include <cmath>

#include "blaser/error.hpp"
#include "blaser/stats.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace blaser;
using D = std::vector<double>;

namespace {

D normals(Engine& eng, std::size_t n) {
  D v(n);
  for (auto& x : v) x = standard_normal(eng);
  return v;
}

}  // namespace

TEST_CASE("pearson hand examples") {
  CHECK(pearson(D{1, 2, 3}, D{1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(D{1, 2, 3}, D{-1, -2, -3}) == doctest::Approx(-1.0).epsilon(1e-15));
  // 11 / sqrt(5 * 26)
  CHECK(pearson(D{1, 2, 3, 4}, D{2, 4, 5, 9}) == doctest::Approx(0.9647638212377321).epsilon(1e-14));
}

TEST_CASE("pearson errors") {
  CHECK_THROWS_AS(pearson(D{1, 2, 3}, D{1, 2}), DimensionError);
  CHECK_THROWS_AS(pearson(D{1}, D{1}), DimensionError);
  CHECK_THROWS_AS(pearson(D{2, 2, 2}, D{1, 2, 3}), DegenerateInput);
  CHECK_THROWS_AS(pearson(D{1, 2, 3}, D{4, 4, 4}), DegenerateInput);
  CHECK_FALSE(try_pearson(D{2, 2, 2}, D{1, 2, 3}));
}

TEST_CASE("pearson properties") {
  Engine eng = make_engine(31);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + uniform_index(eng, 60);
    const D x = normals(eng, n), y = normals(eng, n);
    const double r = pearson(x, y);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(r == pearson(y, x));
    CHECK(std::abs(r - oracle::pearson(x, y)) < 1e-10);
    D neg(x);
    for (auto& v : neg) v = -v;
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-14));
  }
}

TEST_CASE("affine invariance check") {
  Engine eng = make_engine(32);
  const D x = normals(eng, 50), y = normals(eng, 50);
  CHECK(affine_invariance_check(x, y, 2.0, 5.0));
  CHECK(affine_invariance_check(x, y, 1.0, 0.0));
  for (int t = 0; t < 100; ++t) {
    CHECK(affine_invariance_check(x, y, std::exp(uniform(eng, -4, 4)), uniform(eng, -100, 100)));
  }
  CHECK_THROWS_AS(affine_invariance_check(x, y, 0.0, 1.0), Error);
  CHECK_THROWS_AS(affine_invariance_check(D{1, 1}, D{1, 2}, 1.0, 1.0), DegenerateInput);
}

TEST_CASE("paired bootstrap on identical systems is all ties") {
  Engine eng = make_engine(33);
  const D a = normals(eng, 40), h = normals(eng, 40);
  const SignificanceVerdict v = paired_bootstrap(a, a, h, 200, 0.05, 1);
  CHECK(v.wins_a == 0.0);
  CHECK(v.wins_b == 0.0);
  CHECK(v.ties == 1.0);
  CHECK_FALSE(v.significant);
  CHECK(v.winner() == "none");
}

TEST_CASE("paired bootstrap detects a planted winner") {
  Engine eng = make_engine(34);
  const D human = normals(eng, 200);
  const D noise = normals(eng, 200);
  const SignificanceVerdict v = paired_bootstrap(human, noise, human, 1000, 0.05, 7);
  CHECK(v.significant);
  CHECK(v.wins_a == 1.0);
  CHECK(v.winner() == "A");
  const SignificanceVerdict flipped = paired_bootstrap(noise, human, human, 1000, 0.05, 7);
  CHECK(flipped.winner() == "B");
  CHECK(flipped.wins_b == v.wins_a);
}

TEST_CASE("paired bootstrap fractions, determinism, seed sensitivity") {
  Engine eng = make_engine(35);
  const D h = normals(eng, 30);
  D a(h), b(h);
  for (auto& x : a) x += 1.5 * standard_normal(eng);
  for (auto& x : b) x += 1.5 * standard_normal(eng);
  const SignificanceVerdict v = paired_bootstrap(a, b, h, 500, 0.05, 11);
  CHECK(v.wins_a >= 0.0);
  CHECK(v.wins_b >= 0.0);
  CHECK(v.ties >= 0.0);
  CHECK(std::abs(v.wins_a + v.wins_b + v.ties - 1.0) <= 1e-12);
  if (v.significant) CHECK(std::max(v.wins_a, v.wins_b) >= 0.95);
  CHECK(paired_bootstrap(a, b, h, 500, 0.05, 11) == v);
  CHECK(paired_bootstrap(a, b, h, 500, 0.05, 12) != v);
  CHECK(v.resamples == 500);
  CHECK(v.seed == 11);
}

TEST_CASE("paired bootstrap counts degenerate resamples as ties") {
  // Two points: roughly half of all resamples pick the same index twice.
  const SignificanceVerdict v = paired_bootstrap(D{0, 1}, D{1, 0}, D{0, 1}, 400, 0.05, 3);
  CHECK(v.ties > 0.3);
  CHECK(v.wins_b == 0.0);
  CHECK(std::abs(v.wins_a + v.ties - 1.0) <= 1e-12);
}

TEST_CASE("paired bootstrap argument errors") {
  CHECK_THROWS_AS(paired_bootstrap(D{1, 2}, D{1, 2, 3}, D{1, 2}), DimensionError);
  CHECK_THROWS_AS(paired_bootstrap(D{1, 2}, D{1, 2}, D{1, 2}, 0), Error);
  CHECK_THROWS_AS(paired_bootstrap(D{1, 2}, D{1, 2}, D{1, 2}, 10, 1.5), Error);
}

TEST_CASE("verdict json line") {
  SignificanceVerdict v;
  v.wins_a = 0.97;
  v.wins_b = 0.02;
  v.ties = 0.01;
  v.significant = true;
  v.resamples = 100;
  v.seed = 4;
  CHECK(v.to_json() ==
        R"({"wins_a":0.97,"wins_b":0.02,"ties":0.01,"significant":true,"winner":"A","alpha":0.05,"resamples":100,"seed":4})");
}
