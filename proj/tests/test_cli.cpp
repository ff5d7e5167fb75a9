#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "blaser/embedding_store.hpp"
#include "blaser/regressor.hpp"
#include "blaser/score_io.hpp"
#include "test_util.hpp"

using namespace blaser;
using blaser::testing::TempDir;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(BLASER_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

}  // namespace

TEST_CASE("cli end to end on a small synthetic dataset") {
  TempDir dir;
  const std::string d = dir.path().string();
  REQUIRE(run("synth --plant cosine_linked --n 120 --dim 8 --sigma 0.1 --seed 3 --out " + d + "/data").status == 0);
  const std::string manifest = d + "/data/manifest.jsonl";
  CHECK(load_dataset(manifest).size() == 120);

  REQUIRE(run("score-u --manifest " + manifest + " --out " + d + "/u.tsv --split test").status == 0);
  const auto u = read_score_tsv(d + "/u.tsv");
  REQUIRE(u.size() == 24);
  CHECK(u[0].values.size() == 3);
  CHECK(u[0].values[0] == doctest::Approx((u[0].values[1] + u[0].values[2]) / 2).epsilon(1e-12));

  REQUIRE(run("train --manifest " + manifest + " --out " + d + "/m.blsm --epochs 3 --hidden1 16 --hidden2 8 " +
              "--lr 1e-3 --seed 1 --quiet --report " + d + "/report.json")
              .status == 0);
  const RegressorModel model = load_model(d + "/m.blsm");
  CHECK(model.d_in() == 48);
  CHECK(model.h1() == 16);
  std::ifstream rep(d + "/report.json");
  CHECK(nlohmann::json::parse(rep)["epoch_mse"].size() == 3);

  REQUIRE(run("score-s --model " + d + "/m.blsm --manifest " + manifest + " --out " + d + "/s.tsv --split test").status == 0);
  REQUIRE(run("score-s --model " + d + "/m.blsm --manifest " + manifest + " --out " + d +
              "/sd.tsv --split test --destandardize")
              .status == 0);
  const auto s = read_score_tsv(d + "/s.tsv");
  const auto sd = read_score_tsv(d + "/sd.tsv");
  REQUIRE(s.size() == 24);
  CHECK(sd[0].values[0] == doctest::Approx(to_rating_scale(model, s[0].values[0])).epsilon(1e-12));

  REQUIRE(run("ratings --manifest " + manifest + " --out " + d + "/h.tsv --split test").status == 0);
  const RunResult sig = run("significance --scores-a " + d + "/u.tsv --scores-b " + d + "/u.tsv --human " + d +
                            "/h.tsv --resamples 100 --alpha 0.05 --seed 4");
  REQUIRE(sig.status == 0);
  const auto verdict = nlohmann::json::parse(sig.out);
  CHECK(verdict["ties"] == 1.0);
  CHECK(verdict["significant"] == false);

  const RunResult ab = run("ablate --manifest " + manifest);
  REQUIRE(ab.status == 0);
  std::istringstream lines(ab.out);
  std::string first;
  std::getline(lines, first);
  CHECK(nlohmann::json::parse(first)["combo"] == "speech,speech,speech");
  CHECK(nlohmann::json::parse(first)["n"] == 120);
}

TEST_CASE("cli error statuses") {
  TempDir dir;
  const std::string d = dir.path().string();
  CHECK(run("").status != 0);
  CHECK(run("score-u --manifest " + d + "/nope.jsonl --out " + d + "/x.tsv").status == 1);
  CHECK(run("synth --plant nonsense --out " + d).status == 2);

  // one zero-norm translation: partial failure exit status
  write_embeddings({{1, 0}, {0, 0}, {0, 1}}, 2, dir / "e.blse");
  EvalInstance ok, bad;
  ok.id = "ok";
  ok.src = {"e.blse", 0, Modality::kSpeech, "es"};
  ok.mt = {"e.blse", 2, Modality::kSpeech, "en"};
  ok.ref = ok.src;
  bad = ok;
  bad.id = "bad";
  bad.mt.row = 1;
  const std::vector<EvalInstance> insts{ok, bad};
  write_manifest(insts, dir / "m.jsonl");
  CHECK(run("score-u --manifest " + d + "/m.jsonl --out " + d + "/u.tsv").status == 3);
  CHECK(read_score_tsv(d + "/u.tsv").size() == 1);
}
