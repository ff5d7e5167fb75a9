#pragma once

// Synthetic datasets with planted, independently checkable structure.
//
// Each instance gets a base direction b. The source is b, the translation
// mixes b with fresh noise at a per-instance quality q ~ U(0, 1), and the
// reference mixes b with noise at r ~ U(0.5, 1):
//
//   src = b,  mt = q b + sqrt(1 - q^2) e,  ref = r b + sqrt(1 - r^2) e'
//
// so cos(src, mt) covers roughly [0, 1]. Ratings are then planted:
//
//   cosine_linked   rating = offset + scale * g(blaser_u) + noise
//   feature_linear  rating = intercept + coef . features + noise
//   random          rating ~ U(1, 5), independent of the embeddings
//
// where g is the identity or a logistic distortion, and the affine constants
// map the clean values onto [1.5, 4.5]. Ratings are clipped to [1, 5].
// All clean values are computed from the stored f32 embeddings, so with zero
// noise the relation holds exactly on what load_dataset returns.
//
// Output directory: manifest.jsonl, speech.blse / text.blse (only those that
// hold rows), truth.json (planted parameters and clean ratings).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blaser/embedding_store.hpp"

namespace blaser {

enum class Plant : std::uint8_t { kCosineLinked, kFeatureLinear, kRandom };
enum class Distortion : std::uint8_t { kNone, kLogistic };

std::string_view to_string(Plant p);
std::optional<Plant> parse_plant(std::string_view s);
std::string_view to_string(Distortion d);
std::optional<Distortion> parse_distortion(std::string_view s);

struct OracleSpec {
  std::size_t n = 500;
  std::size_t d = 32;
  double noise_sigma = 0.0;
  Plant plant = Plant::kCosineLinked;
  std::uint64_t seed = 0;
  std::vector<std::pair<ModalityCombo, double>> modality_mix{{ModalityCombo{}, 1.0}};

  double test_fraction = 0.2;  // trailing instances form the test split
  std::size_t ratings_per_instance = 1;
  Distortion distortion = Distortion::kNone;
  double distortion_steepness = 8.0;  // logistic slope on min-max scaled scores
  bool normalize = true;              // L2-normalize every embedding
  std::size_t systems = 1;
  std::string src_lang = "es";
  std::string tgt_lang = "en";

  // Throws Error on n < 1, d < 2, negative sigma, bad weights, or a test
  // fraction outside [0, 1).
  void validate() const;
};

// Planted parameters, also serialized to truth.json.
struct PlantedTruth {
  Plant plant = Plant::kCosineLinked;
  Distortion distortion = Distortion::kNone;
  double scale = 0.0;  // cosine_linked: rating = offset + scale * g(u)
  double offset = 0.0;
  double distortion_lo = 0.0;  // g(u) = logistic(k * ((u - lo) / (hi - lo) - 0.5))
  double distortion_hi = 1.0;
  double distortion_steepness = 0.0;
  std::vector<double> coef;  // feature_linear: rating = intercept + coef . f
  double intercept = 0.0;
  std::vector<double> clean_ratings;  // per instance, manifest order, before noise
};

struct GeneratedDataset {
  std::filesystem::path manifest;
  PlantedTruth truth;
};

// Writes the dataset into `out_dir` (created if missing). Byte-identical
// output for identical specs.
GeneratedDataset generate(const OracleSpec& spec, const std::filesystem::path& out_dir);

// Applies the planted distortion g to a blaser_u total.
double apply_distortion(const PlantedTruth& t, double u);

}  // namespace blaser
