#include "blaser/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "blaser/error.hpp"
#include "blaser/features.hpp"
#include "blaser/rng.hpp"
#include "blaser/unsupervised.hpp"
#include "byte_io.hpp"

namespace blaser {

std::string_view to_string(Plant p) {
  switch (p) {
    case Plant::kCosineLinked: return "cosine_linked";
    case Plant::kFeatureLinear: return "feature_linear";
    case Plant::kRandom: return "random";
  }
  return "unknown";
}

std::optional<Plant> parse_plant(std::string_view s) {
  if (s == "cosine_linked") return Plant::kCosineLinked;
  if (s == "feature_linear") return Plant::kFeatureLinear;
  if (s == "random") return Plant::kRandom;
  return std::nullopt;
}

std::string_view to_string(Distortion d) { return d == Distortion::kNone ? "none" : "logistic"; }

std::optional<Distortion> parse_distortion(std::string_view s) {
  if (s == "none") return Distortion::kNone;
  if (s == "logistic") return Distortion::kLogistic;
  return std::nullopt;
}

void OracleSpec::validate() const {
  if (n < 1) throw Error("synthetic generator: n must be >= 1");
  if (d < 2) throw Error("synthetic generator: d must be >= 2");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw Error("synthetic generator: noise_sigma must be >= 0");
  if (modality_mix.empty()) throw Error("synthetic generator: empty modality mix");
  double total = 0.0;
  for (const auto& [combo, w] : modality_mix) {
    if (!(w >= 0.0)) throw Error("synthetic generator: negative modality weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("synthetic generator: modality weights must sum to 1");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw Error("synthetic generator: test_fraction outside [0, 1)");
  if (ratings_per_instance < 1) throw Error("synthetic generator: ratings_per_instance must be >= 1");
  if (systems < 1) throw Error("synthetic generator: systems must be >= 1");
  if (!(distortion_steepness > 0.0)) throw Error("synthetic generator: distortion_steepness must be positive");
}

double apply_distortion(const PlantedTruth& t, double u) {
  if (t.distortion == Distortion::kNone) return u;
  const double span = t.distortion_hi - t.distortion_lo;
  const double x = span > 0.0 ? (u - t.distortion_lo) / span : 0.5;
  return 1.0 / (1.0 + std::exp(-t.distortion_steepness * (x - 0.5)));
}

namespace {

// Exact quotas per combo (largest remainder), then a seeded shuffle.
std::vector<ModalityCombo> assign_combos(const OracleSpec& spec, Engine& eng) {
  const std::size_t k = spec.modality_mix.size();
  std::vector<std::size_t> counts(k);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = spec.modality_mix[c].second * static_cast<double>(spec.n);
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; assigned < spec.n; ++i, ++assigned) ++counts[remainders[i % k].second];

  std::vector<ModalityCombo> out;
  out.reserve(spec.n);
  for (std::size_t c = 0; c < k; ++c) out.insert(out.end(), counts[c], spec.modality_mix[c].first);
  shuffle(out.begin(), out.end(), eng);
  return out;
}

std::vector<double> normal_vector(std::size_t d, Engine& eng) {
  std::vector<double> v(d);
  for (auto& x : v) x = standard_normal(eng);
  return v;
}

void normalize_in_place(std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double norm = std::sqrt(ss);
  if (norm > 0.0)
    for (auto& x : v) x /= norm;
}

std::vector<double> mix(const std::vector<double>& base, const std::vector<double>& noise, double q) {
  const double w = std::sqrt(std::max(0.0, 1.0 - q * q));
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = q * base[i] + w * noise[i];
  return out;
}

std::vector<float> to_float(const std::vector<double>& v) { return {v.begin(), v.end()}; }

std::string instance_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn-%06zu", i);
  return buf;
}

// Affine map sending [min, max] of `values` onto [1.5, 4.5].
std::pair<double, double> fit_range(const std::vector<double>& values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi - *lo <= 0.0) return {0.0, 3.0};
  const double scale = 3.0 / (*hi - *lo);
  return {scale, 1.5 - scale * *lo};
}

}  // namespace

GeneratedDataset generate(const OracleSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::filesystem::create_directories(out_dir);

  Engine emb_eng = make_engine(spec.seed, 0);
  Engine rating_eng = make_engine(spec.seed, 1);
  Engine mix_eng = make_engine(spec.seed, 2);
  Engine weight_eng = make_engine(spec.seed, 3);

  const std::vector<ModalityCombo> combos = assign_combos(spec, mix_eng);
  const auto file_for = [](Modality m) { return m == Modality::kSpeech ? "speech.blse" : "text.blse"; };
  std::vector<float> speech_rows, text_rows;
  auto append = [&](Modality m, const std::vector<float>& v) -> std::uint64_t {
    auto& rows = m == Modality::kSpeech ? speech_rows : text_rows;
    rows.insert(rows.end(), v.begin(), v.end());
    return rows.size() / spec.d - 1;
  };

  const std::size_t n_test =
      static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(spec.n)));
  std::vector<EvalInstance> instances(spec.n);
  std::vector<std::array<std::vector<float>, 3>> triples(spec.n);  // src, mt, ref

  for (std::size_t i = 0; i < spec.n; ++i) {
    std::vector<double> base = normal_vector(spec.d, emb_eng);
    std::vector<double> mt_noise = normal_vector(spec.d, emb_eng);
    std::vector<double> ref_noise = normal_vector(spec.d, emb_eng);
    const double quality = uniform01(emb_eng);
    const double ref_quality = uniform(emb_eng, 0.5, 1.0);
    if (spec.normalize) {
      normalize_in_place(base);
      normalize_in_place(mt_noise);
      normalize_in_place(ref_noise);
    }
    std::vector<double> mt = mix(base, mt_noise, quality);
    std::vector<double> ref = mix(base, ref_noise, ref_quality);
    if (spec.normalize) {
      normalize_in_place(mt);
      normalize_in_place(ref);
    }
    triples[i] = {to_float(base), to_float(mt), to_float(ref)};

    EvalInstance& inst = instances[i];
    inst.id = instance_id(i);
    inst.system_id = "sys-" + std::to_string(i % spec.systems);
    inst.split = i + n_test >= spec.n ? Split::kTest : Split::kTrain;
    const ModalityCombo& c = combos[i];
    inst.src = {file_for(c.src), append(c.src, triples[i][0]), c.src, spec.src_lang};
    inst.mt = {file_for(c.mt), append(c.mt, triples[i][1]), c.mt, spec.tgt_lang};
    inst.ref = {file_for(c.ref), append(c.ref, triples[i][2]), c.ref, spec.tgt_lang};
  }

  GeneratedDataset out;
  PlantedTruth& truth = out.truth;
  truth.plant = spec.plant;
  truth.distortion = spec.distortion;
  truth.distortion_steepness = spec.distortion_steepness;

  std::vector<double> raw(spec.n);
  std::vector<double> weights;
  if (spec.plant == Plant::kCosineLinked) {
    for (std::size_t i = 0; i < spec.n; ++i) {
      raw[i] = blaser_u(triples[i][0], triples[i][1], triples[i][2]).total;
    }
  } else if (spec.plant == Plant::kFeatureLinear) {
    weights = normal_vector(kFeatureBlocks * spec.d, weight_eng);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const FeatureVector f = build_features(triples[i][0], triples[i][1], triples[i][2]);
      raw[i] = std::inner_product(f.values.begin(), f.values.end(), weights.begin(), 0.0);
    }
  }

  truth.clean_ratings.resize(spec.n);
  if (spec.plant == Plant::kRandom) {
    for (auto& r : truth.clean_ratings) r = uniform(rating_eng, kMinRating, kMaxRating);
  } else {
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    truth.distortion_lo = *lo;
    truth.distortion_hi = *hi;
    std::vector<double> shaped(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) shaped[i] = apply_distortion(truth, raw[i]);
    std::tie(truth.scale, truth.offset) = fit_range(shaped);
    for (std::size_t i = 0; i < spec.n; ++i) truth.clean_ratings[i] = truth.offset + truth.scale * shaped[i];
    if (spec.plant == Plant::kFeatureLinear && spec.distortion == Distortion::kNone) {
      truth.coef.resize(weights.size());
      for (std::size_t j = 0; j < weights.size(); ++j) truth.coef[j] = truth.scale * weights[j];
      truth.intercept = truth.offset;
    }
  }

  for (std::size_t i = 0; i < spec.n; ++i) {
    auto& ratings = instances[i].ratings;
    for (std::size_t k = 0; k < spec.ratings_per_instance; ++k) {
      double r = truth.clean_ratings[i];
      if (spec.noise_sigma > 0.0) r += spec.noise_sigma * standard_normal(rating_eng);
      ratings.push_back(std::clamp(r, kMinRating, kMaxRating));
    }
  }

  const auto dim = static_cast<std::uint32_t>(spec.d);
  if (!speech_rows.empty()) write_embeddings(EmbeddingMatrix(dim, std::move(speech_rows)), out_dir / "speech.blse");
  if (!text_rows.empty()) write_embeddings(EmbeddingMatrix(dim, std::move(text_rows)), out_dir / "text.blse");
  out.manifest = out_dir / "manifest.jsonl";
  write_manifest(instances, out.manifest);

  nlohmann::ordered_json j;
  j["plant"] = to_string(spec.plant);
  j["seed"] = spec.seed;
  j["n"] = spec.n;
  j["d"] = spec.d;
  j["noise_sigma"] = spec.noise_sigma;
  j["normalize"] = spec.normalize;
  j["test_fraction"] = spec.test_fraction;
  j["ratings_per_instance"] = spec.ratings_per_instance;
  j["distortion"] = {{"kind", to_string(truth.distortion)},
                     {"lo", truth.distortion_lo},
                     {"hi", truth.distortion_hi},
                     {"steepness", truth.distortion_steepness}};
  j["scale"] = truth.scale;
  j["offset"] = truth.offset;
  if (!truth.coef.empty()) {
    j["intercept"] = truth.intercept;
    j["coef"] = truth.coef;
  }
  j["clean_ratings"] = truth.clean_ratings;
  const std::string text = j.dump(2) + "\n";
  detail::write_file(out_dir / "truth.json", std::as_bytes(std::span(text.data(), text.size())));
  return out;
}

}  // namespace blaser
