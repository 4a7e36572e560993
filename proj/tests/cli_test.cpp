#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "safer/cli.hpp"
#include "safer/ingest.hpp"
#include "support/builders.hpp"

using namespace safer;
using namespace safer::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = SAFER_CORPUS_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "safer");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("safer_cli_test_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& file) const { return (path_ / file).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Index-1 candidates always admissible, later ones mixed; uncertainties vary.
std::vector<QuestionRecord> easy_dataset(std::size_t n) {
  std::vector<QuestionRecord> recs;
  SplitMix64 rng(1);
  for (std::size_t i = 0; i < n; ++i) {
    recs.push_back(testing::make_record(
        "e" + std::to_string(i), {0.9, rng.uniform01(), 0.2},
        {0.5 + rng.uniform01(), 1.0 + rng.uniform01(), 2.0 + rng.uniform01()}));
  }
  return recs;
}

}  // namespace

TEST_CASE("calibrate on an easy dataset gives s_hat 1 and a finite threshold", "[cli]") {
  TempDir dir("easy");
  write_dataset(dir / "cal.jsonl", easy_dataset(200));
  const auto r = run_cli({"calibrate", "--data", dir / "cal.jsonl", "--alpha", "0.05",
                          "--beta", "0.1", "--out", dir / "art.json"});
  REQUIRE(r.code == kExitOk);
  const json art = json::parse(slurp(dir / "art.json"));
  CHECK(art["abstain"] == false);
  CHECK(art["s_hat"] == 1);
  CHECK(art["t_hat"].is_number());
  CHECK(art["n_cal"] == 200);
  CHECK(art["n_prime"] == 200);
  CHECK(art["criterion"] == "similarity");
  CHECK(art["lambda_a"] == 0.6);
  CHECK(art["max_samples"] == 3);
  CHECK(art["diagnostics"].size() == 3);

  const CalibrationArtifact parsed = artifact_from_json(art);
  CHECK(to_json(parsed) == art);
}

TEST_CASE("calibrate abstains below the zero-failure floor", "[cli]") {
  TempDir dir("abstain");
  write_dataset(dir / "cal.jsonl", testing::always_covered(100, 3));
  const auto r = run_cli({"calibrate", "--data", dir / "cal.jsonl", "--alpha", "0.02",
                          "--out", dir / "art.json"});
  CHECK(r.code == kExitAbstain);
  const json art = json::parse(slurp(dir / "art.json"));
  CHECK(art["abstain"] == true);
  CHECK(art["s_hat"].is_null());
  CHECK(art["t_hat"].is_null());
  CHECK(art["bound_at_max"].get<double>() == Catch::Approx(0.029513).margin(1e-6));

  const auto apply = run_cli({"apply", "--artifact", dir / "art.json", "--data",
                              dir / "cal.jsonl"});
  CHECK(apply.code == kExitAbstain);
  const auto eval = run_cli({"evaluate", "--artifact", dir / "art.json", "--test-data",
                             dir / "cal.jsonl"});
  CHECK(eval.code == kExitAbstain);
}

TEST_CASE("calibrate records an infinite threshold when beta is infeasible", "[cli]") {
  TempDir dir("inf");
  write_dataset(dir / "cal.jsonl", easy_dataset(9));
  const auto r = run_cli({"calibrate", "--data", dir / "cal.jsonl", "--alpha", "0.5",
                          "--beta", "0.05", "--out", dir / "art.json"});
  REQUIRE(r.code == kExitOk);
  const json art = json::parse(slurp(dir / "art.json"));
  CHECK(art["t_hat"] == "inf");
  CHECK(artifact_from_json(art).t_hat == kNoFilter);

  // Every output set holds the full s_hat prefix.
  const auto apply = run_cli({"apply", "--artifact", dir / "art.json", "--data",
                              dir / "cal.jsonl"});
  REQUIRE(apply.code == kExitOk);
  std::istringstream lines(apply.out);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    CHECK(j["kept"].size() == art["s_hat"].get<std::size_t>());
    ++count;
  }
  CHECK(count == 9);
}

TEST_CASE("apply matches the library prediction sets", "[cli]") {
  TempDir dir("apply");
  const auto corpus = parse_dataset(kCorpus / "example_qa.jsonl");
  const auto r = run_cli({"calibrate", "--data", (kCorpus / "example_qa.jsonl").string(),
                          "--alpha", "0.5", "--beta", "0.3", "--out", dir / "art.json"});
  REQUIRE(r.code == kExitOk);
  const auto art = artifact_from_json(json::parse(slurp(dir / "art.json")));
  REQUIRE(art.t_hat);

  const auto apply = run_cli({"apply", "--artifact", dir / "art.json", "--data",
                              (kCorpus / "example_qa.jsonl").string(), "--out",
                              dir / "sets.jsonl"});
  REQUIRE(apply.code == kExitOk);
  std::istringstream lines(slurp(dir / "sets.jsonl"));
  std::string line;
  for (const auto& rec : corpus.records) {
    REQUIRE(std::getline(lines, line));
    const json j = json::parse(line);
    const auto expected = prediction_set(rec, *art.s_hat, *art.t_hat);
    CHECK(j["id"] == rec.id);
    CHECK(j["kept"].get<std::vector<std::size_t>>() == expected.kept_indices);
    CHECK(j["empty"] == expected.kept_indices.empty());
    if (!expected.kept_indices.empty()) CHECK(j["texts"].size() == expected.kept_indices.size());
  }
}

TEST_CASE("apply flags empty sets", "[cli]") {
  TempDir dir("empty");
  write_dataset(dir / "cal.jsonl", easy_dataset(50));
  REQUIRE(run_cli({"calibrate", "--data", dir / "cal.jsonl", "--alpha", "0.1", "--beta",
                   "0.2", "--out", dir / "art.json"})
              .code == kExitOk);
  const std::vector<QuestionRecord> hard = {
      testing::make_record("h", {0.9, 0.9, 0.9}, {50.0, 60.0, 70.0})};
  write_dataset(dir / "hard.jsonl", hard);
  const auto r = run_cli({"apply", "--artifact", dir / "art.json", "--data", dir / "hard.jsonl"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["kept"].empty());
  CHECK(j["empty"] == true);
  CHECK(r.err.find("empty prediction set") != std::string::npos);
}

TEST_CASE("evaluate reports EERs", "[cli]") {
  TempDir dir("eval");
  SimSpec spec;
  spec.n_questions = 400;
  spec.max_samples = 10;
  write_dataset(dir / "pop.jsonl", generate_population(spec, 3));
  REQUIRE(run_cli({"split", "--data", dir / "pop.jsonl", "--split-ratio", "0.5", "--seed",
                   "4", "--cal-out", dir / "cal.jsonl", "--test-out", dir / "test.jsonl"})
              .code == kExitOk);
  const auto cal = parse_dataset(dir / "cal.jsonl");
  CHECK(cal.records.size() == 200);

  REQUIRE(run_cli({"calibrate", "--data", dir / "cal.jsonl", "--alpha", "0.25", "--beta",
                   "0.05", "--out", dir / "art.json"})
              .code == kExitOk);
  const auto art = artifact_from_json(json::parse(slurp(dir / "art.json")));

  // Evaluating on the calibration data reproduces the calibration miscoverage.
  const auto self = run_cli({"evaluate", "--artifact", dir / "art.json", "--test-data",
                             dir / "cal.jsonl"});
  REQUIRE(self.code == kExitOk);
  const json rep = json::parse(self.out);
  CHECK(rep["stage1_eer"].get<double>() ==
        art.diagnostics.rows[*art.s_hat - 1].empirical_rate);
  CHECK(rep["combined_bound"].get<double>() == Catch::Approx(0.2875));
  CHECK(rep["config"]["alpha"] == 0.25);
  if (art.t_hat == kNoFilter)
    CHECK(rep["stage2_eer_overall"] == rep["stage1_eer"]);

  const auto csv = run_cli({"evaluate", "--artifact", dir / "art.json", "--test-data",
                            dir / "test.jsonl", "--format", "csv"});
  REQUIRE(csv.code == kExitOk);
  CHECK(csv.out.rfind("n_test,stage1_eer,", 0) == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 2);
}

TEST_CASE("evaluate combined bound echoes the risk levels", "[cli]") {
  TempDir dir("bound");
  write_dataset(dir / "cal.jsonl", easy_dataset(200));
  REQUIRE(run_cli({"calibrate", "--data", dir / "cal.jsonl", "--alpha", "0.05", "--beta",
                   "0.05", "--out", dir / "art.json"})
              .code == kExitOk);
  const auto r = run_cli({"evaluate", "--artifact", dir / "art.json", "--test-data",
                          dir / "cal.jsonl"});
  REQUIRE(r.code == kExitOk);
  CHECK(json::parse(r.out)["combined_bound"].get<double>() ==
        Catch::Approx(0.0975).epsilon(0).margin(1e-12));
}

TEST_CASE("sweep emits one row per grid cell", "[cli]") {
  TempDir dir("sweep");
  SimSpec spec;
  spec.n_questions = 300;
  spec.max_samples = 10;
  write_dataset(dir / "pop.jsonl", generate_population(spec, 9));
  const auto r = run_cli({"sweep", "--data", dir / "pop.jsonl", "--alpha-grid", "0.2,0.3",
                          "--beta-grid", "0.05,0.10,0.15,0.20,0.25,0.30,0.35,0.40",
                          "--ratio-grid", "0.5", "--repeats", "3"});
  REQUIRE(r.code == kExitOk);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 16);

  const auto once = run_cli({"sweep", "--data", dir / "pop.jsonl", "--repeats", "1",
                             "--alpha", "0.3", "--format", "json"});
  REQUIRE(once.code == kExitOk);
  const json cells = json::parse(once.out);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0]["stage1_eer"]["sd"].is_null());
}

TEST_CASE("sweep records abstaining cells", "[cli]") {
  const auto recs = testing::always_covered(100, 3);
  SweepConfig cfg;
  cfg.alphas = {0.01, 0.2};
  cfg.betas = {0.1};
  cfg.ratios = {0.5};
  cfg.repeats = 4;
  cfg.max_samples = 3;
  cfg.criterion = testing::criterion();
  const auto cells = run_sweep(recs, cfg);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].abstained == 4);
  CHECK(cells[0].stage1_eer.count == 0);
  CHECK(cells[1].abstained == 0);
  CHECK(cells[1].stage1_eer.count == 4);
  const std::string csv = sweep_csv(cells);
  CHECK(csv.find("0.5,0.01,0.1,4,4,,,") != std::string::npos);
}

TEST_CASE("summarize", "[cli]") {
  const std::vector<double> one = {2.0};
  CHECK_FALSE(summarize(one).sd.has_value());
  const std::vector<double> vals = {1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(vals);
  CHECK(s.mean == 2.5);
  CHECK(*s.sd == Catch::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("simulate is deterministic and writes per-trial CSV", "[cli]") {
  TempDir dir("sim");
  {
    std::ofstream spec(dir / "spec.sim");
    spec << "n_questions = 200\nmax_samples = 8\ntrials = 1\nseed = 5\n";
  }
  const auto a = run_cli({"simulate", "--spec", dir / "spec.sim", "--out", dir / "a.json",
                          "--csv", dir / "a.csv"});
  const auto b = run_cli({"simulate", "--spec", dir / "spec.sim", "--out", dir / "b.json",
                          "--csv", dir / "b.csv"});
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  const std::string csv = slurp(dir / "a.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(json::parse(slurp(dir / "a.json"))["trials"] == 1);
}

TEST_CASE("generate and rouge subcommands", "[cli]") {
  TempDir dir("gen");
  {
    std::ofstream spec(dir / "spec.sim");
    spec << "n_questions = 30\nmax_samples = 4\n";
  }
  REQUIRE(run_cli({"generate", "--spec", dir / "spec.sim", "--out", dir / "pop.jsonl"}).code ==
          kExitOk);
  CHECK(parse_dataset(dir / "pop.jsonl").records.size() == 30);

  REQUIRE(run_cli({"rouge", "--data", (kCorpus / "example_qa.jsonl").string(), "--out",
                   dir / "scored.jsonl"})
              .code == kExitOk);
  CHECK(parse_dataset(dir / "scored.jsonl").declared_criteria.count("rouge_l") == 1);

  // No texts in generated data.
  CHECK(run_cli({"rouge", "--data", dir / "pop.jsonl"}).code == kExitValidation);
}

TEST_CASE("exit codes for failures", "[cli]") {
  TempDir dir("codes");
  CHECK(run_cli({}).code == kExitUsage);
  CHECK(run_cli({"calibrate"}).code == kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == kExitUsage);
  CHECK(run_cli({"--help"}).code == kExitOk);

  const auto missing = run_cli({"calibrate", "--data", dir / "nope.jsonl"});
  CHECK(missing.code == kExitIo);
  CHECK_FALSE(missing.err.empty());

  const auto bad = run_cli({"calibrate", "--data",
                            std::string(SAFER_TEST_DATA_DIR) + "/malformed/score_out_of_range.jsonl"});
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find(":3:") != std::string::npos);

  const auto absent_score = run_cli({"calibrate", "--data",
                                     (kCorpus / "example_qa.jsonl").string(), "--criterion",
                                     "rouge_l"});
  CHECK(absent_score.code == kExitValidation);
  CHECK(absent_score.err.find("score absent") != std::string::npos);

  const auto too_many = run_cli({"calibrate", "--data", (kCorpus / "example_qa.jsonl").string(),
                                 "--max-samples", "9"});
  CHECK(too_many.code == kExitValidation);
  CHECK(too_many.err.find("insufficient samples") != std::string::npos);

  CHECK(run_cli({"simulate", "--spec", dir / "nope.sim"}).code == kExitIo);
  CHECK(run_cli({"apply", "--artifact", dir / "nope.json", "--data", dir / "x"}).code == kExitIo);
}
