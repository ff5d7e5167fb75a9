#pragma once

// Training-free score: mean of cos(src, mt) and cos(ref, mt).

#include <span>
#include <string>
#include <vector>

#include "blaser/embedding_store.hpp"

namespace blaser {

struct UScore {
  double total = 0.0;     // (src_term + ref_term) / 2
  double src_term = 0.0;  // cos(src, mt)
  double ref_term = 0.0;  // cos(ref, mt)
};

// Dot product and norms accumulate in double. The result is clamped to
// [-1, 1]. Throws DimensionError on a length mismatch, DegenerateInput when
// either vector has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

UScore blaser_u(std::span<const float> src, std::span<const float> mt, std::span<const float> ref);

struct InstanceError {
  std::string id;
  std::string message;
};

struct UScoreResult {
  std::vector<std::pair<std::string, UScore>> scores;  // manifest order
  std::vector<InstanceError> errors;
};

// Scores every instance; a failing instance is reported and skipped.
UScoreResult score_dataset_u(const Dataset& ds);

// Arithmetic mean. Throws on an empty list or a non-finite entry.
double corpus_score(std::span<const double> sentence_scores);

}  // namespace blaser
