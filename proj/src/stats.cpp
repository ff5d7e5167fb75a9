#include "blaser/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "blaser/error.hpp"
#include "blaser/rng.hpp"

namespace blaser {

namespace {

void check_pair(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DimensionError("length mismatch: " + std::to_string(xs.size()) + " vs " +
                         std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw DimensionError("need at least 2 points");
}

}  // namespace

std::optional<double> try_pearson(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  auto r = try_pearson(xs, ys);
  if (!r) throw DegenerateInput("pearson: constant input, correlation undefined");
  return *r;
}

std::string SignificanceVerdict::winner() const {
  if (!significant) return "none";
  return wins_a >= wins_b ? "A" : "B";
}

std::string SignificanceVerdict::to_json() const {
  nlohmann::ordered_json j;
  j["wins_a"] = wins_a;
  j["wins_b"] = wins_b;
  j["ties"] = ties;
  j["significant"] = significant;
  j["winner"] = winner();
  j["alpha"] = alpha;
  j["resamples"] = resamples;
  j["seed"] = seed;
  return j.dump();
}

SignificanceVerdict paired_bootstrap(std::span<const double> scores_a, std::span<const double> scores_b,
                                     std::span<const double> human, std::size_t resamples, double alpha,
                                     std::uint64_t seed) {
  check_pair(scores_a, human);
  check_pair(scores_b, human);
  if (resamples < 1) throw Error("paired_bootstrap: resamples must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("paired_bootstrap: alpha must be in (0, 1)");

  const std::size_t n = human.size();
  std::vector<double> a(n), b(n), h(n);
  std::size_t count_a = 0, count_b = 0, count_tie = 0;
  for (std::size_t k = 0; k < resamples; ++k) {
    Engine eng = make_engine(seed, k);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = uniform_index(eng, n);
      a[i] = scores_a[idx];
      b[i] = scores_b[idx];
      h[i] = human[idx];
    }
    const auto ra = try_pearson(a, h);
    const auto rb = try_pearson(b, h);
    if (!ra || !rb || *ra == *rb) {
      ++count_tie;
    } else if (*ra > *rb) {
      ++count_a;
    } else {
      ++count_b;
    }
  }
  SignificanceVerdict v;
  const double total = static_cast<double>(resamples);
  v.wins_a = static_cast<double>(count_a) / total;
  v.wins_b = static_cast<double>(count_b) / total;
  v.ties = static_cast<double>(count_tie) / total;
  v.alpha = alpha;
  v.resamples = resamples;
  v.seed = seed;
  v.significant = std::max(v.wins_a, v.wins_b) >= 1.0 - alpha;
  return v;
}

bool affine_invariance_check(std::span<const double> xs, std::span<const double> ys, double a, double b) {
  if (!(a > 0.0)) throw Error("affine_invariance_check: slope must be positive");
  std::vector<double> mapped(xs.size());
  std::transform(xs.begin(), xs.end(), mapped.begin(), [&](double x) { return a * x + b; });
  return std::abs(pearson(mapped, ys) - pearson(xs, ys)) < 1e-9;
}

}  // namespace blaser
