// blaser: command-line front end.
//
//   blaser synth        generate a synthetic dataset with planted structure
//   blaser score-u      unsupervised (cosine) scores
//   blaser train        fit the supervised regressor
//   blaser score-s      supervised scores
//   blaser ratings      median human rating per instance
//   blaser significance paired bootstrap between two score files
//   blaser ablate       per-modality-combination correlation report
//
// Exit status: 0 ok, 1 error, 2 usage error, 3 some instances failed to score.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blaser/embedding_store.hpp"
#include "blaser/error.hpp"
#include "blaser/evaluation.hpp"
#include "blaser/regressor.hpp"
#include "blaser/score_io.hpp"
#include "blaser/stats.hpp"
#include "blaser/synthetic.hpp"
#include "blaser/unsupervised.hpp"

namespace {

using namespace blaser;

Dataset load_subset(const std::string& manifest, const std::string& split, const std::string& combo) {
  Dataset ds = load_dataset(manifest);
  if (split != "all") ds = filter_by_split(ds, *parse_split(split));
  if (!combo.empty()) {
    auto c = parse_combo(combo);
    if (!c) throw Error("bad --combo '" + combo + "'");
    ds = filter_by_modality(ds, *c);
  }
  return ds;
}

void print_summary(const Dataset& ds, ScoreList scores) {
  if (scores.empty()) {
    std::cerr << "n=0\n";
    return;
  }
  const ScoreReport rep = make_report(ds, std::move(scores));
  std::cerr << "n=" << rep.scores.size() << " corpus_mean=" << rep.corpus_mean;
  if (rep.pearson) std::cerr << " pearson=" << *rep.pearson << " (n_rated=" << rep.n_rated << ")";
  std::cerr << "\n";
}

std::vector<std::pair<ModalityCombo, double>> parse_mix(const std::string& text) {
  // "sss:0.25,sst:0.25,stt:0.25,ttt:0.25"
  std::vector<std::pair<ModalityCombo, double>> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    auto combo = parse_combo(item.substr(0, colon));
    if (!combo || colon == std::string::npos) throw Error("bad --mix entry '" + item + "'");
    out.emplace_back(*combo, std::stod(item.substr(colon + 1)));
  }
  return out;
}

const std::vector<std::string> kSplitChoices{"train", "test", "all"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-free speech translation quality scoring"};
  app.require_subcommand(1);
  int status = 0;

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  OracleSpec spec;
  std::string plant = "cosine_linked", distortion = "none", mix, synth_out;
  bool no_normalize = false;
  synth->add_option("--plant", plant, "cosine_linked | feature_linear | random")
      ->check(CLI::IsMember({"cosine_linked", "feature_linear", "random"}));
  synth->add_option("--n", spec.n, "Instance count");
  synth->add_option("--dim", spec.d, "Embedding dimension");
  synth->add_option("--sigma", spec.noise_sigma, "Rating noise standard deviation");
  synth->add_option("--seed", spec.seed);
  synth->add_option("--test-fraction", spec.test_fraction);
  synth->add_option("--ratings-per-instance", spec.ratings_per_instance);
  synth->add_option("--distortion", distortion, "none | logistic")->check(CLI::IsMember({"none", "logistic"}));
  synth->add_option("--steepness", spec.distortion_steepness);
  synth->add_option("--mix", mix, "Modality mix, e.g. sss:0.5,ttt:0.5");
  synth->add_option("--systems", spec.systems);
  synth->add_flag("--no-normalize", no_normalize, "Keep raw Gaussian embedding norms");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->callback([&] {
    spec.plant = *parse_plant(plant);
    spec.distortion = *parse_distortion(distortion);
    spec.normalize = !no_normalize;
    if (!mix.empty()) spec.modality_mix = parse_mix(mix);
    const GeneratedDataset g = generate(spec, synth_out);
    std::cout << g.manifest.string() << "\n";
  });

  // score-u ----------------------------------------------------------------
  auto* score_u = app.add_subcommand("score-u", "Unsupervised scores: id, total, src_term, ref_term");
  std::string manifest, out, split = "all", combo;
  score_u->add_option("--manifest", manifest)->required();
  score_u->add_option("--out", out)->required();
  score_u->add_option("--split", split)->check(CLI::IsMember(kSplitChoices));
  score_u->add_option("--combo", combo, "Keep one modality combination, e.g. sst");
  score_u->callback([&] {
    const Dataset ds = load_subset(manifest, split, combo);
    const UScoreResult res = score_dataset_u(ds);
    std::vector<ScoreRow> rows;
    for (const auto& [id, s] : res.scores) rows.push_back({id, {s.total, s.src_term, s.ref_term}});
    write_score_tsv(out, rows);
    for (const auto& e : res.errors) std::cerr << "error: " << e.id << ": " << e.message << "\n";
    if (res.errors.empty()) print_summary(ds, unsupervised_totals(ds));
    if (!res.errors.empty()) status = 3;
  });

  // train ------------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Train the supervised regressor");
  TrainConfig cfg;
  std::string report_path;
  bool no_shuffle = false, quiet = false;
  train_cmd->add_option("--manifest", manifest)->required();
  train_cmd->add_option("--out", out, "Model file (.blsm)")->required();
  train_cmd->add_option("--epochs", cfg.epochs);
  train_cmd->add_option("--lr", cfg.lr0);
  train_cmd->add_option("--batch", cfg.batch_size);
  train_cmd->add_option("--seed", cfg.seed);
  train_cmd->add_option("--hidden1", cfg.hidden1);
  train_cmd->add_option("--hidden2", cfg.hidden2);
  train_cmd->add_option("--combo", combo);
  train_cmd->add_flag("--no-shuffle", no_shuffle);
  train_cmd->add_option("--report", report_path, "Write the training report as JSON");
  train_cmd->add_flag("--quiet", quiet);
  train_cmd->callback([&] {
    cfg.shuffle = !no_shuffle;
    const Dataset ds = load_subset(manifest, "all", combo);
    const TrainResult res = train(ds, cfg, [&](int epoch, double mse) {
      if (!quiet) std::cerr << "epoch " << epoch << " mse " << mse << "\n";
    });
    save_model(res.model, out);
    if (!report_path.empty()) {
      nlohmann::ordered_json j;
      j["epoch_mse"] = res.report.epoch_mse;
      j["final_mse"] = res.report.final_mse;
      j["seconds"] = res.report.seconds;
      std::ofstream(report_path) << j.dump(2) << "\n";
    }
  });

  // score-s ----------------------------------------------------------------
  auto* score_s = app.add_subcommand("score-s", "Supervised scores: id, score");
  std::string model_path;
  bool destd = false;
  score_s->add_option("--model", model_path)->required();
  score_s->add_option("--manifest", manifest)->required();
  score_s->add_option("--out", out)->required();
  score_s->add_option("--split", split)->check(CLI::IsMember(kSplitChoices));
  score_s->add_option("--combo", combo);
  score_s->add_flag("--destandardize", destd, "Report scores on the rating scale");
  score_s->callback([&] {
    const RegressorModel model = load_model(model_path);
    const Dataset ds = load_subset(manifest, split, combo);
    ScoreList scores = score_dataset_s(model, ds);
    if (destd)
      for (auto& [id, s] : scores) s = to_rating_scale(model, s);
    std::vector<ScoreRow> rows;
    for (const auto& [id, s] : scores) rows.push_back({id, {s}});
    write_score_tsv(out, rows);
    print_summary(ds, std::move(scores));
  });

  // ratings ----------------------------------------------------------------
  auto* ratings = app.add_subcommand("ratings", "Median human rating per rated instance: id, rating");
  ratings->add_option("--manifest", manifest)->required();
  ratings->add_option("--out", out)->required();
  ratings->add_option("--split", split)->check(CLI::IsMember(kSplitChoices));
  ratings->add_option("--combo", combo);
  ratings->callback([&] {
    const Dataset ds = load_subset(manifest, split, combo);
    const auto medians = median_ratings(ds);
    std::vector<ScoreRow> rows;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (medians[i]) rows.push_back({ds.instances()[i].id, {*medians[i]}});
    write_score_tsv(out, rows);
  });

  // significance -----------------------------------------------------------
  auto* sig = app.add_subcommand("significance", "Paired bootstrap test of two metrics");
  std::string file_a, file_b, file_h;
  std::size_t resamples = kDefaultResamples;
  double alpha = kDefaultAlpha;
  std::uint64_t seed = 0;
  sig->add_option("--scores-a", file_a)->required();
  sig->add_option("--scores-b", file_b)->required();
  sig->add_option("--human", file_h)->required();
  sig->add_option("--resamples", resamples);
  sig->add_option("--alpha", alpha);
  sig->add_option("--seed", seed);
  sig->callback([&] {
    const auto human_rows = read_score_tsv(file_h);
    std::vector<std::string> ids;
    std::vector<double> human;
    for (const auto& r : human_rows) {
      ids.push_back(r.id);
      human.push_back(r.values.at(0));
    }
    const auto a = align_scores(read_score_tsv(file_a), ids);
    const auto b = align_scores(read_score_tsv(file_b), ids);
    std::cout << paired_bootstrap(a, b, human, resamples, alpha, seed).to_json() << "\n";
  });

  // ablate -----------------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "Correlation per (src, mt, ref) modality combination");
  bool supervised = false;
  TrainConfig ab_cfg;
  ablate->add_option("--manifest", manifest)->required();
  ablate->add_flag("--supervised", supervised, "Also train and test a regressor per combination");
  ablate->add_option("--epochs", ab_cfg.epochs);
  ablate->add_option("--lr", ab_cfg.lr0);
  ablate->add_option("--batch", ab_cfg.batch_size);
  ablate->add_option("--seed", ab_cfg.seed);
  ablate->add_option("--hidden1", ab_cfg.hidden1);
  ablate->add_option("--hidden2", ab_cfg.hidden2);
  ablate->callback([&] {
    AblationOptions opts;
    if (supervised) opts.supervised = ab_cfg;
    for (const ComboReport& r : modality_ablation(load_dataset(manifest), opts)) {
      nlohmann::ordered_json j;
      j["combo"] = to_string(r.combo);
      j["n"] = r.n;
      j["n_train"] = r.n_train;
      j["n_test"] = r.n_test;
      j["pearson_u"] = r.pearson_u ? nlohmann::json(*r.pearson_u) : nlohmann::json(nullptr);
      j["pearson_s"] = r.pearson_s ? nlohmann::json(*r.pearson_s) : nlohmann::json(nullptr);
      std::cout << j.dump() << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "blaser: " << e.what() << "\n";
    return 1;
  }
  return status;
}
