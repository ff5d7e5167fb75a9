#include "blaser/evaluation.hpp"

#include "blaser/error.hpp"
#include "blaser/stats.hpp"
#include "blaser/unsupervised.hpp"

namespace blaser {

std::vector<std::optional<double>> median_ratings(const Dataset& ds) {
  std::vector<std::optional<double>> out;
  out.reserve(ds.size());
  for (const auto& inst : ds.instances()) {
    if (inst.ratings.empty()) {
      out.emplace_back();
    } else {
      out.emplace_back(aggregate_ratings(inst.ratings));
    }
  }
  return out;
}

ScoreReport make_report(const Dataset& ds, ScoreList scores) {
  if (scores.size() != ds.size()) {
    throw DimensionError("make_report: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(ds.size()) + " instances");
  }
  ScoreReport rep;
  const auto human = median_ratings(ds);
  std::vector<double> all, xs, ys;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].first != ds.instances()[i].id) {
      throw ValidationError(scores[i].first, "score list out of dataset order");
    }
    all.push_back(scores[i].second);
    if (human[i]) {
      xs.push_back(scores[i].second);
      ys.push_back(*human[i]);
    }
  }
  rep.scores = std::move(scores);
  if (!all.empty()) rep.corpus_mean = corpus_score(all);
  rep.n_rated = xs.size();
  if (xs.size() >= 2) rep.pearson = try_pearson(xs, ys);
  return rep;
}

ScoreList unsupervised_totals(const Dataset& ds) {
  ScoreList out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const TripleView t = ds.triple(i);
    out.emplace_back(ds.instances()[i].id, blaser_u(t.src, t.mt, t.ref).total);
  }
  return out;
}

std::vector<ComboReport> modality_ablation(const Dataset& ds, const AblationOptions& opts) {
  std::vector<ComboReport> out;
  for (const ModalityCombo& combo : opts.combos) {
    const Dataset part = filter_by_modality(ds, combo);
    const Dataset test = filter_by_split(part, Split::kTest);
    ComboReport rep;
    rep.combo = combo;
    rep.n = part.size();
    rep.n_test = test.size();
    rep.n_train = rep.n - rep.n_test;
    if (!test.empty()) {
      rep.pearson_u = make_report(test, unsupervised_totals(test)).pearson;
    }
    if (opts.supervised && !test.empty() && rep.n_train >= opts.supervised->batch_size) {
      const TrainResult trained = train(part, *opts.supervised);
      rep.pearson_s = make_report(test, score_dataset_s(trained.model, test)).pearson;
    }
    out.push_back(rep);
  }
  return out;
}

}  // namespace blaser
