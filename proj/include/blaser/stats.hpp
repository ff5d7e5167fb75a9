#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace blaser {

// Sentence-level Pearson r in double precision, clamped to [-1, 1].
// Throws DimensionError for unequal lengths or fewer than 2 points and
// DegenerateInput when either series is constant.
double pearson(std::span<const double> xs, std::span<const double> ys);

// As pearson(), but returns nullopt instead of throwing on degenerate input.
std::optional<double> try_pearson(std::span<const double> xs, std::span<const double> ys);

inline constexpr std::size_t kDefaultResamples = 1000;
inline constexpr double kDefaultAlpha = 0.05;

// Outcome of a paired bootstrap comparison of metrics A and B against the
// same human scores.
struct SignificanceVerdict {
  double wins_a = 0.0;  // fraction of resamples where r(A, human) > r(B, human)
  double wins_b = 0.0;
  double ties = 0.0;    // equal correlations or an undefined correlation
  bool significant = false;  // max(wins_a, wins_b) >= 1 - alpha
  double alpha = kDefaultAlpha;
  std::size_t resamples = 0;
  std::uint64_t seed = 0;

  // "A", "B", or "none" when not significant.
  std::string winner() const;
  // Single-line JSON rendering.
  std::string to_json() const;

  friend bool operator==(const SignificanceVerdict&, const SignificanceVerdict&) = default;
};

// Paired bootstrap resampling. Resample k draws its indices from an engine
// seeded by (seed, k), so the verdict does not depend on evaluation order.
SignificanceVerdict paired_bootstrap(std::span<const double> scores_a, std::span<const double> scores_b,
                                     std::span<const double> human, std::size_t resamples = kDefaultResamples,
                                     double alpha = kDefaultAlpha, std::uint64_t seed = 0);

// True iff |pearson(a*xs + b, ys) - pearson(xs, ys)| < 1e-9. Requires a > 0.
bool affine_invariance_check(std::span<const double> xs, std::span<const double> ys, double a, double b);

}  // namespace blaser
