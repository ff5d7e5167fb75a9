// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "blaser/embedding_store.hpp"
#include "blaser/error.hpp"
#include "blaser/evaluation.hpp"
#include "blaser/features.hpp"
#include "blaser/regressor.hpp"
#include "blaser/stats.hpp"
#include "blaser/synthetic.hpp"
#include "blaser/unsupervised.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace blaser;
using blaser::testing::TempDir;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " FAILED: " << what << ";";
    }
  }
};

struct Criterion {
  std::string name;
  double budget_s;  // 0 means no time limit
  std::function<void(Outcome&)> body;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- criteria --------------------------------------------------------------

void unsupervised_exactness(Outcome& out) {
  Engine eng = make_engine(1001);
  double worst = 0.0;
  bool in_range = true;
  for (int i = 0; i < 1000; ++i) {
    const auto s = testing::random_vec(eng, 32), m = testing::random_vec(eng, 32), r = testing::random_vec(eng, 32);
    const double got = blaser_u(s, m, r).total;
    const double want = (oracle::cosine(s, m) + oracle::cosine(r, m)) / 2.0;
    worst = std::max(worst, std::abs(got - want));
    in_range = in_range && got >= -1.0 && got <= 1.0;
  }
  out.detail << "max |diff| " << worst;
  out.require(worst <= 1e-12, "oracle agreement within 1e-12");
  out.require(in_range, "outputs in [-1, 1]");
}

void feature_layout(Outcome& out) {
  Engine eng = make_engine(1002);
  const auto s = testing::random_vec(eng, 1024), m = testing::random_vec(eng, 1024), r = testing::random_vec(eng, 1024);
  const FeatureVector f = build_features(s, m, r);
  out.detail << "length " << f.values.size();
  out.require(f.values.size() == 6144, "length 6144 at d=1024");

  const std::vector<float> src{1, 2}, mt{3, 4}, ref{5, 6};
  const std::vector<double> want{5, 6, 3, 4, 3, 8, 2, 2, 15, 24, 2, 2};
  out.require(build_features(src, mt, ref).values == want, "d=2 hand example");
}

void gradient_check(Outcome& out) {
  Engine eng = make_engine(1003);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + uniform_index(eng, 8), h1 = 1 + uniform_index(eng, 6), h2 = 1 + uniform_index(eng, 4);
    RegressorModel m = init_model(d, h1, h2, eng());
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1(i) = uniform(eng, -0.5, 0.5);
    for (Eigen::Index i = 0; i < m.b2.size(); ++i) m.b2(i) = uniform(eng, -0.5, 0.5);
    m.b_out = uniform(eng, -0.5, 0.5);
    std::vector<double> f(6 * d);
    for (auto& x : f) x = standard_normal(eng);
    const double target = standard_normal(eng);
    const Gradients g = gradients(m, f, target);
    const auto loss = [&] {
      const double r = forward(m, f) - target;
      return r * r;
    };
    const auto check = [&](double& p, double analytic) {
      worst = std::max(worst, oracle::relative_error(analytic, oracle::central_difference(loss, p, 1e-4)));
    };
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) check(m.w1.data()[i], g.w1.data()[i]);
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) check(m.b1.data()[i], g.b1.data()[i]);
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) check(m.w2.data()[i], g.w2.data()[i]);
    for (Eigen::Index i = 0; i < m.b2.size(); ++i) check(m.b2.data()[i], g.b2.data()[i]);
    for (Eigen::Index i = 0; i < m.w_out.size(); ++i) check(m.w_out.data()[i], g.w_out.data()[i]);
    check(m.b_out, g.b_out);
  }
  out.detail << "worst relative error " << worst;
  out.require(worst < 1e-4, "relative error < 1e-4");
}

std::vector<double> test_ratings(const Dataset& test) {
  std::vector<double> out;
  for (const auto& r : median_ratings(test)) out.push_back(*r);
  return out;
}

std::vector<double> values(const ScoreList& scores) {
  std::vector<double> out;
  for (const auto& [id, s] : scores) out.push_back(s);
  return out;
}

void learnability(Outcome& out) {
  TempDir dir;
  OracleSpec spec;
  spec.plant = Plant::kFeatureLinear;
  spec.n = 2500;
  spec.test_fraction = 0.2;
  spec.d = 32;
  spec.noise_sigma = 0.05;
  spec.seed = 2024;
  const Dataset ds = load_dataset(generate(spec, dir.path()).manifest);
  const TrainConfig cfg;  // default recipe: 20 epochs, lr 5e-5 annealed, 3072/1536
  const TrainResult res = train(ds, cfg);
  const Dataset test = filter_by_split(ds, Split::kTest);
  const double r = pearson(values(score_dataset_s(res.model, test)), test_ratings(test));
  const double ratio = res.report.final_mse / res.report.epoch_mse.front();
  out.detail << "train " << filter_by_split(ds, Split::kTrain).size() << " test " << test.size()
             << ", test pearson " << r << ", final/first mse " << ratio << ", train " << res.report.seconds << "s";
  out.require(r >= 0.95, "test pearson >= 0.95");
  out.require(ratio < 0.1, "final mse < 0.1 x first epoch");
}

void supervised_vs_unsupervised(Outcome& out) {
  TempDir dir;
  OracleSpec spec;
  spec.plant = Plant::kCosineLinked;
  spec.distortion = Distortion::kLogistic;
  spec.n = 2500;
  spec.d = 32;
  spec.noise_sigma = 0.1;
  spec.seed = 2025;
  const Dataset ds = load_dataset(generate(spec, dir.path()).manifest);
  const TrainResult res = train(ds, TrainConfig{});
  const Dataset test = filter_by_split(ds, Split::kTest);
  const auto human = test_ratings(test);
  const double ps = pearson(values(score_dataset_s(res.model, test)), human);
  const double pu = pearson(values(unsupervised_totals(test)), human);
  out.detail << "pearson_s " << ps << ", pearson_u " << pu;
  out.require(ps >= pu - 0.02, "pearson_s >= pearson_u - 0.02");
}

void statistics(Outcome& out) {
  Engine eng = make_engine(1006);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + uniform_index(eng, 200);
    std::vector<double> x(n), y(n);
    const double mix = uniform(eng, -1, 1);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = uniform(eng, -3, 3) * 10.0;
      y[i] = mix * x[i] + standard_normal(eng) * 5.0;
    }
    worst = std::max(worst, std::abs(pearson(x, y) - oracle::pearson(x, y)));
  }
  out.require(worst <= 1e-10, "pearson within 1e-10 of oracle");

  bool affine = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
      x[i] = standard_normal(eng);
      y[i] = x[i] + standard_normal(eng);
    }
    affine = affine && affine_invariance_check(x, y, uniform(eng, 0.01, 100), uniform(eng, -100, 100));
  }
  out.require(affine, "affine invariance on 100 trials");

  std::vector<double> a(200), noise(200);
  for (std::size_t i = 0; i < 200; ++i) {
    a[i] = standard_normal(eng);
    noise[i] = standard_normal(eng);
  }
  const std::vector<double>& h = a;  // human ratings equal system A exactly
  const auto same = paired_bootstrap(a, a, noise, 1000, 0.05, 7);
  out.require(same.ties == 1.0 && !same.significant, "identical systems tie");
  const auto planted = paired_bootstrap(a, noise, h, 1000, 0.05, 7);
  out.require(planted.significant && planted.winner() == "A", "planted winner significant for A");
  out.detail << "pearson max |diff| " << worst << ", planted wins_a " << planted.wins_a;
}

struct PipelineOutput {
  std::vector<std::byte> embeddings, model;
  std::string verdict;
};

PipelineOutput run_pipeline(const std::filesystem::path& root) {
  OracleSpec spec;
  spec.n = 300;
  spec.d = 16;
  spec.noise_sigma = 0.1;
  spec.seed = 77;
  const GeneratedDataset g = generate(spec, root / "data");
  const Dataset ds = load_dataset(g.manifest);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden1 = 256;
  cfg.hidden2 = 128;
  cfg.seed = 5;
  const TrainResult res = train(ds, cfg);
  save_model(res.model, root / "model.blsm");
  const Dataset test = filter_by_split(ds, Split::kTest);
  const auto s = values(score_dataset_s(load_model(root / "model.blsm"), test));
  const auto u = values(unsupervised_totals(test));
  PipelineOutput out;
  out.embeddings = testing::slurp(root / "data" / "speech.blse");
  out.model = testing::slurp(root / "model.blsm");
  out.verdict = paired_bootstrap(s, u, test_ratings(test), 1000, 0.05, 11).to_json();
  return out;
}

void determinism(Outcome& out) {
  TempDir a, b;
  const PipelineOutput x = run_pipeline(a.path());
  const PipelineOutput y = run_pipeline(b.path());
  out.detail << "embeddings " << x.embeddings.size() << " B, model " << x.model.size() << " B";
  out.require(!x.embeddings.empty() && x.embeddings == y.embeddings, "embedding files identical");
  out.require(!x.model.empty() && x.model == y.model, "model files identical");
  out.require(x.verdict == y.verdict, "verdicts identical");
}

template <typename Fn>
bool rejects_with(FormatError::Kind kind, Fn&& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.kind() == kind;
  }
  return false;
}

void format_round_trip(Outcome& out) {
  TempDir dir;
  Engine eng = make_engine(1008);
  const std::uint32_t dim = 16;
  std::vector<float> rows(10000 * dim);
  for (auto& x : rows) {
    // random bit patterns restricted to finite floats, plus ordinary draws
    std::uint32_t bits = static_cast<std::uint32_t>(eng());
    float f;
    std::memcpy(&f, &bits, sizeof f);
    x = std::isfinite(f) ? f : static_cast<float>(standard_normal(eng));
  }
  const EmbeddingMatrix m(dim, rows);
  write_embeddings(m, dir / "v.blse");
  const EmbeddingMatrix back = read_embeddings(dir / "v.blse");
  out.require(back.count() == 10000 && back.dim() == dim, "shape preserved");
  out.require(std::memcmp(back.data().data(), rows.data(), rows.size() * sizeof(float)) == 0, "bit-exact rows");

  auto bytes = testing::slurp(dir / "v.blse");
  auto bad_magic = bytes;
  bad_magic[0] = std::byte{'X'};
  testing::spit(dir / "magic.blse", bad_magic);
  out.require(rejects_with(FormatError::Kind::kBadMagic, [&] { read_embeddings(dir / "magic.blse"); }), "bad magic rejected");
  bytes.resize(bytes.size() - 3);
  testing::spit(dir / "trunc.blse", bytes);
  out.require(rejects_with(FormatError::Kind::kTruncated, [&] { read_embeddings(dir / "trunc.blse"); }), "truncation rejected");
  out.detail << "10000 x " << dim << " rows";
}

void modality_ablation_harness(Outcome& out) {
  TempDir dir;
  OracleSpec spec;
  spec.n = 800;
  spec.d = 16;
  spec.noise_sigma = 0.1;
  spec.seed = 1009;
  spec.modality_mix.clear();
  for (const auto& c : kAblationCombos) spec.modality_mix.emplace_back(c, 0.25);
  const Dataset ds = load_dataset(generate(spec, dir.path()).manifest);

  std::set<std::string> seen;
  bool disjoint = true;
  for (const auto& c : kAblationCombos) {
    const Dataset part = filter_by_modality(ds, c);
    for (const auto& inst : part.instances()) disjoint = seen.insert(inst.id).second && disjoint;
  }
  out.require(disjoint, "partitions disjoint");
  out.require(seen.size() == ds.size(), "partitions exhaustive");

  const auto reports = modality_ablation(ds);
  bool all_reported = reports.size() == 4;
  for (const auto& r : reports) {
    all_reported = all_reported && r.n > 0 && r.pearson_u.has_value();
    out.detail << to_string(r.combo) << " n=" << r.n << " r_u=" << r.pearson_u.value_or(NAN) << "; ";
  }
  out.require(all_reported, "per-combo pearson reported");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"unsupervised score exactness", 1, unsupervised_exactness},
      {"feature layout", 1, feature_layout},
      {"gradient check", 30, gradient_check},
      {"learnability oracle", 300, learnability},
      {"supervised vs unsupervised ordering", 0, supervised_vs_unsupervised},
      {"statistics correctness", 30, statistics},
      {"determinism", 0, determinism},
      {"format round trips", 0, format_round_trip},
      {"modality ablation harness", 0, modality_ablation_harness},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(out);
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail << " exception: " << e.what();
    }
    const double secs = seconds_since(t0);
    if (c.budget_s > 0 && secs >= c.budget_s) {
      out.ok = false;
      out.detail << " over time budget " << c.budget_s << "s;";
    }
    std::printf("[%s] %s (%s) %.2fs\n", out.ok ? "PASS" : "FAIL", c.name.c_str(), out.detail.str().c_str(), secs);
    std::fflush(stdout);
    failures += out.ok ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
