#pragma once

// Sentence-level meta-evaluation: metric scores against median human ratings,
// and the per-modality-combination ablation harness.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blaser/embedding_store.hpp"
#include "blaser/regressor.hpp"

namespace blaser {

using ScoreList = std::vector<std::pair<std::string, double>>;

// Median rating per instance; nullopt for an instance without ratings.
std::vector<std::optional<double>> median_ratings(const Dataset& ds);

struct ScoreReport {
  ScoreList scores;                // per sentence, dataset order
  double corpus_mean = 0.0;        // mean of all sentence scores
  std::size_t n_rated = 0;         // instances with at least one rating
  std::optional<double> pearson;   // vs median ratings; nullopt if undefined
};

// `scores` must be in dataset order (as produced by score_dataset_u/_s).
ScoreReport make_report(const Dataset& ds, ScoreList scores);

ScoreList unsupervised_totals(const Dataset& ds);

struct ComboReport {
  ModalityCombo combo;
  std::size_t n = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::optional<double> pearson_u;  // BLASER_u on the combo's test split
  std::optional<double> pearson_s;  // supervised, trained and tested on this combo
};

struct AblationOptions {
  std::vector<ModalityCombo> combos{kAblationCombos.begin(), kAblationCombos.end()};
  // When set, a regressor is trained per combo on its train split.
  std::optional<TrainConfig> supervised;
};

std::vector<ComboReport> modality_ablation(const Dataset& ds, const AblationOptions& opts = {});

}  // namespace blaser
