#include "safer/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "safer/ingest.hpp"
#include "safer/random.hpp"

namespace safer::cli {
namespace {

using nlohmann::json;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json threshold_json(double t) { return std::isinf(t) ? json("inf") : json(t); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure(path.string() + ": cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": malformed JSON: " + e.what());
  }
}

double read_threshold(const json& v) {
  if (v.is_string() && v.get<std::string>() == "inf") return kNoFilter;
  if (!v.is_number()) throw InvalidArgument("artifact: t_hat must be a number or \"inf\"");
  return v.get<double>();
}

template <typename T>
T get_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(std::string("artifact: missing '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("artifact: bad type for '") + key + "'");
  }
}

}  // namespace

CalibrationArtifact make_artifact(const TwoStageCalibration& cal,
                                  const AdmissionCriterion& crit,
                                  const RiskConfig& config, std::size_t n_cal) {
  CalibrationArtifact a;
  a.abstained = cal.abstained();
  a.config = config;
  a.criterion = crit.name;
  a.lambda_a = crit.lambda_a;
  a.n_cal = n_cal;
  a.diagnostics = cal.budget.diagnostics;
  if (a.abstained) {
    a.bound_at_max = std::get<Abstain>(cal.budget.decision).bound_at_max;
  } else {
    a.s_hat = cal.budget.s_hat();
    a.t_hat = cal.filter->t_hat;
    a.n_prime = cal.filter->n_prime;
    a.target_level = cal.filter->target_level;
  }
  return a;
}

json to_json(const CalibrationArtifact& a) {
  json j;
  j["abstain"] = a.abstained;
  j["s_hat"] = a.s_hat ? json(*a.s_hat) : json(nullptr);
  j["t_hat"] = a.t_hat ? threshold_json(*a.t_hat) : json(nullptr);
  j["bound_at_max"] = optional_number(a.bound_at_max);
  j["alpha"] = a.config.alpha;
  j["beta"] = a.config.beta;
  j["delta"] = a.config.delta;
  j["max_samples"] = a.config.max_samples;
  j["split_ratio"] = a.config.split_ratio;
  j["seed"] = a.config.seed;
  j["criterion"] = a.criterion;
  j["lambda_a"] = a.lambda_a;
  j["n_cal"] = a.n_cal;
  j["n_prime"] = a.n_prime;
  j["target_level"] = optional_number(a.target_level);
  json rows = json::array();
  for (const auto& r : a.diagnostics.rows) {
    rows.push_back({{"s", r.s},
                    {"failures", r.failures},
                    {"empirical_rate", r.empirical_rate},
                    {"upper_bound", r.upper_bound}});
  }
  j["diagnostics"] = std::move(rows);
  return j;
}

CalibrationArtifact artifact_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("artifact: expected a JSON object");
  CalibrationArtifact a;
  a.abstained = get_field<bool>(j, "abstain");
  a.config.alpha = get_field<double>(j, "alpha");
  a.config.beta = get_field<double>(j, "beta");
  a.config.delta = get_field<double>(j, "delta");
  a.config.max_samples = get_field<std::size_t>(j, "max_samples");
  a.config.split_ratio = get_field<double>(j, "split_ratio");
  a.config.seed = get_field<std::uint64_t>(j, "seed");
  a.config.validate();
  a.criterion = get_field<std::string>(j, "criterion");
  a.lambda_a = get_field<double>(j, "lambda_a");
  a.n_cal = get_field<std::size_t>(j, "n_cal");
  a.n_prime = get_field<std::size_t>(j, "n_prime");

  const json& s_hat = j.at("s_hat");
  const json& t_hat = j.at("t_hat");
  if (a.abstained != s_hat.is_null() || a.abstained != t_hat.is_null())
    throw InvalidArgument("artifact: abstain flag must match absent s_hat and t_hat");
  if (!a.abstained) {
    a.s_hat = get_field<std::size_t>(j, "s_hat");
    if (*a.s_hat < 1) throw InvalidArgument("artifact: s_hat must be >= 1");
    a.t_hat = read_threshold(t_hat);
  } else if (const auto it = j.find("bound_at_max"); it != j.end() && it->is_number()) {
    a.bound_at_max = it->get<double>();
  }
  if (const auto it = j.find("target_level"); it != j.end() && it->is_number())
    a.target_level = it->get<double>();

  a.diagnostics.n = a.n_cal;
  a.diagnostics.delta = a.config.delta;
  if (const auto it = j.find("diagnostics"); it != j.end()) {
    for (const auto& row : *it) {
      a.diagnostics.rows.push_back({get_field<std::size_t>(row, "s"),
                                    get_field<std::size_t>(row, "failures"),
                                    get_field<double>(row, "empirical_rate"),
                                    get_field<double>(row, "upper_bound")});
    }
  }
  return a;
}

json to_json(const EvaluationReport& r) {
  return {{"n_test", r.n_test},
          {"stage1_eer", r.stage1_eer},
          {"stage2_eer_overall", r.stage2_eer_overall},
          {"stage2_eer_conditional", optional_number(r.stage2_eer_conditional)},
          {"n_conditional", r.n_conditional},
          {"avg_budget", r.avg_budget},
          {"avg_set_size", r.avg_set_size},
          {"empty_set_rate", r.empty_set_rate},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"delta", r.delta},
          {"combined_bound", r.combined_bound}};
}

std::string csv_header(const EvaluationReport&) {
  return "n_test,stage1_eer,stage2_eer_overall,stage2_eer_conditional,"
         "n_conditional,avg_budget,avg_set_size,empty_set_rate,alpha,beta,delta,"
         "combined_bound\n";
}

std::string csv_row(const EvaluationReport& r) {
  std::ostringstream out;
  out << r.n_test << ',' << num(r.stage1_eer) << ',' << num(r.stage2_eer_overall)
      << ',' << opt_num(r.stage2_eer_conditional) << ',' << r.n_conditional << ','
      << num(r.avg_budget) << ',' << num(r.avg_set_size) << ','
      << num(r.empty_set_rate) << ',' << num(r.alpha) << ',' << num(r.beta) << ','
      << num(r.delta) << ',' << num(r.combined_bound) << '\n';
  return out.str();
}

json to_json(const GuaranteeReport& r) {
  const SimSpec& s = r.spec;
  json spec = {{"n_questions", s.n_questions},
               {"pi0", s.pi0},
               {"beta_a", s.beta_a},
               {"beta_b", s.beta_b},
               {"max_samples", s.max_samples},
               {"adm_unc_log_mean", s.adm_unc_log_mean},
               {"adm_unc_log_sd", s.adm_unc_log_sd},
               {"inadm_unc_log_mean", s.inadm_unc_log_mean},
               {"inadm_unc_log_sd", s.inadm_unc_log_sd},
               {"lambda_a", s.lambda_a},
               {"trials", s.trials},
               {"split_ratio", s.split_ratio},
               {"seed", s.seed},
               {"alpha", s.alpha},
               {"beta", s.beta},
               {"delta", s.delta}};
  return {{"spec", std::move(spec)},
          {"trials", r.trials},
          {"calibrated_trials", r.calibrated_trials},
          {"abstain_fraction", r.abstain_fraction},
          {"stage1_violation_fraction", optional_number(r.stage1_violation_fraction)},
          {"stage2_conditional_mean", optional_number(r.stage2_conditional_mean)},
          {"combined_violation_fraction",
           optional_number(r.combined_violation_fraction)},
          {"combined_bound", r.combined_bound}};
}

std::string trials_csv(const GuaranteeReport& report) {
  std::ostringstream out;
  out << "trial,seed,abstained,n_cal,n_test,s_hat,bound,true_risk,t_hat,n_prime,"
         "stage1_eer,stage2_eer_overall,stage2_eer_conditional,avg_set_size\n";
  for (const auto& t : report.per_trial) {
    out << t.trial << ',' << t.seed << ',' << (t.abstained ? 1 : 0) << ','
        << t.n_cal << ',' << t.n_test << ','
        << (t.s_hat ? std::to_string(*t.s_hat) : "") << ',' << num(t.bound) << ','
        << opt_num(t.true_risk) << ',' << opt_num(t.t_hat) << ',' << t.n_prime
        << ',' << opt_num(t.stage1_eer) << ',' << opt_num(t.stage2_eer_overall)
        << ',' << opt_num(t.stage2_eer_conditional) << ','
        << opt_num(t.avg_set_size) << '\n';
  }
  return out.str();
}

json to_json(const PredictionSet& set, const QuestionRecord& rec) {
  json j = {{"id", set.record_id},
            {"s_hat", set.source_budget},
            {"kept", set.kept_indices},
            {"empty", set.kept_indices.empty()}};
  const bool has_text = std::all_of(
      set.kept_indices.begin(), set.kept_indices.end(),
      [&](std::size_t i) { return rec.candidates[i - 1].text.has_value(); });
  if (has_text && !set.kept_indices.empty()) {
    json texts = json::array();
    for (std::size_t i : set.kept_indices) texts.push_back(*rec.candidates[i - 1].text);
    j["texts"] = std::move(texts);
  }
  return j;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<SweepCell> run_sweep(std::span<const QuestionRecord> records,
                                 const SweepConfig& config) {
  if (config.alphas.empty() || config.betas.empty() || config.ratios.empty())
    throw InvalidArgument("sweep: grids must be nonempty");
  if (config.repeats < 1) throw InvalidArgument("sweep: repeats must be >= 1");

  struct Samples {
    std::size_t abstained = 0;
    std::vector<double> s_hat, stage1, stage2, conditional, set_size;
  };

  std::vector<SweepCell> cells;
  for (double ratio : config.ratios) {
    const std::size_t n_alpha = config.alphas.size();
    const std::size_t n_beta = config.betas.size();
    std::vector<Samples> samples(n_alpha * n_beta);

    for (std::size_t rep = 0; rep < config.repeats; ++rep) {
      const Split split =
          split_calibration_test(records, ratio, derive_seed(config.seed, rep));
      if (split.test.empty())
        throw InvalidArgument("sweep: ratio " + num(ratio) + " leaves no test records");
      const BudgetDiagnostics curve = risk_upper_curve(
          split.calibration, config.criterion, config.delta, config.max_samples);

      for (std::size_t ai = 0; ai < n_alpha; ++ai) {
        const BudgetOutcome budget = select_budget(curve, config.alphas[ai]);
        if (budget.abstained()) {
          for (std::size_t bi = 0; bi < n_beta; ++bi) ++samples[ai * n_beta + bi].abstained;
          continue;
        }
        const std::size_t s_hat = budget.s_hat();
        const auto u_stars =
            build_calibration_subset(split.calibration, s_hat, config.criterion);
        for (std::size_t bi = 0; bi < n_beta; ++bi) {
          const double beta = config.betas[bi];
          const FilterCalibration filter = calibrate_threshold(u_stars, beta);
          const EvaluationReport eval =
              evaluate(split.test, s_hat, filter.t_hat, config.criterion,
                       config.alphas[ai], beta, config.delta);
          Samples& cell = samples[ai * n_beta + bi];
          cell.s_hat.push_back(static_cast<double>(s_hat));
          cell.stage1.push_back(eval.stage1_eer);
          cell.stage2.push_back(eval.stage2_eer_overall);
          if (eval.stage2_eer_conditional)
            cell.conditional.push_back(*eval.stage2_eer_conditional);
          cell.set_size.push_back(eval.avg_set_size);
        }
      }
    }

    for (std::size_t ai = 0; ai < n_alpha; ++ai) {
      for (std::size_t bi = 0; bi < n_beta; ++bi) {
        const Samples& s = samples[ai * n_beta + bi];
        SweepCell cell;
        cell.ratio = ratio;
        cell.alpha = config.alphas[ai];
        cell.beta = config.betas[bi];
        cell.repeats = config.repeats;
        cell.abstained = s.abstained;
        cell.s_hat = summarize(s.s_hat);
        cell.stage1_eer = summarize(s.stage1);
        cell.stage2_eer = summarize(s.stage2);
        cell.stage2_conditional = summarize(s.conditional);
        cell.set_size = summarize(s.set_size);
        cell.combined_bound = combined_bound(cell.alpha, cell.beta);
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::string sweep_csv(std::span<const SweepCell> cells) {
  std::ostringstream out;
  out << "ratio,alpha,beta,repeats,abstained,s_hat_mean,s_hat_sd,stage1_eer_mean,"
         "stage1_eer_sd,stage2_eer_mean,stage2_eer_sd,stage2_cond_mean,"
         "stage2_cond_sd,set_size_mean,set_size_sd,combined_bound\n";
  auto put = [&out](const Summary& s) {
    out << ',' << (s.count ? num(s.mean) : "") << ',' << opt_num(s.sd);
  };
  for (const auto& c : cells) {
    out << num(c.ratio) << ',' << num(c.alpha) << ',' << num(c.beta) << ','
        << c.repeats << ',' << c.abstained;
    put(c.s_hat);
    put(c.stage1_eer);
    put(c.stage2_eer);
    put(c.stage2_conditional);
    put(c.set_size);
    out << ',' << num(c.combined_bound) << '\n';
  }
  return out.str();
}

json to_json(std::span<const SweepCell> cells) {
  auto summary = [](const Summary& s) {
    return json{{"count", s.count},
                {"mean", s.count ? json(s.mean) : json(nullptr)},
                {"sd", optional_number(s.sd)}};
  };
  json arr = json::array();
  for (const auto& c : cells) {
    arr.push_back({{"ratio", c.ratio},
                   {"alpha", c.alpha},
                   {"beta", c.beta},
                   {"repeats", c.repeats},
                   {"abstained", c.abstained},
                   {"s_hat", summary(c.s_hat)},
                   {"stage1_eer", summary(c.stage1_eer)},
                   {"stage2_eer", summary(c.stage2_eer)},
                   {"stage2_conditional", summary(c.stage2_conditional)},
                   {"set_size", summary(c.set_size)},
                   {"combined_bound", c.combined_bound}});
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Command wiring
// ---------------------------------------------------------------------------

namespace {

struct Options {
  std::string data;
  std::string test_data;
  std::string artifact;
  std::string spec;
  std::string out;
  std::string csv_out;
  std::string cal_out;
  std::string test_out;
  std::string format = "json";
  double alpha = 0.10;
  double beta = 0.10;
  double delta = 0.05;
  std::optional<std::size_t> max_samples;
  std::string criterion = "similarity";
  std::optional<double> lambda;
  double split_ratio = 0.5;
  std::uint64_t seed = 0;
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  std::vector<double> ratio_grid;
  std::size_t repeats = 1;
};

double default_lambda(const std::string& criterion) {
  return criterion == "rouge_l" ? kDefaultRougeLambda : kDefaultSimilarityLambda;
}

std::size_t resolve_max_samples(const Options& o,
                                std::span<const QuestionRecord> records) {
  if (o.max_samples) return *o.max_samples;
  std::size_t m = records.front().candidates.size();
  for (const auto& r : records) m = std::min(m, r.candidates.size());
  return m;
}

DatasetFile load(const std::string& path) {
  DatasetFile file = parse_dataset(path);
  if (file.records.empty()) throw InvalidArgument(path + ": dataset has no records");
  return file;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

int cmd_calibrate(const Options& o, std::ostream& out, std::ostream& err) {
  const DatasetFile data = load(o.data);
  const AdmissionCriterion crit(o.criterion, o.lambda.value_or(default_lambda(o.criterion)));
  const RiskConfig config{o.alpha, o.beta, o.delta, resolve_max_samples(o, data.records),
                          o.split_ratio, o.seed};
  const auto cal = calibrate_two_stage(data.records, crit, config);
  const CalibrationArtifact artifact =
      make_artifact(cal, crit, config, data.records.size());
  emit(o.out, to_json(artifact).dump(2) + "\n", out);
  if (artifact.abstained) {
    err << "abstain: upper bound at M=" << config.max_samples << " is "
        << num(*artifact.bound_at_max) << " > alpha=" << num(config.alpha) << "\n";
    return kExitAbstain;
  }
  return kExitOk;
}

CalibrationArtifact load_artifact(const std::string& path) {
  return artifact_from_json(read_json_file(path));
}

int refuse_abstained(std::ostream& err) {
  err << "artifact records an abstention; no budget or threshold to apply\n";
  return kExitAbstain;
}

int cmd_apply(const Options& o, std::ostream& out, std::ostream& err) {
  const CalibrationArtifact artifact = load_artifact(o.artifact);
  if (artifact.abstained) return refuse_abstained(err);
  const DatasetFile data = load(o.data);
  std::string lines;
  std::size_t empties = 0;
  for (const auto& rec : data.records) {
    const PredictionSet set = prediction_set(rec, *artifact.s_hat, *artifact.t_hat);
    if (set.kept_indices.empty()) ++empties;
    lines += to_json(set, rec).dump() + "\n";
  }
  emit(o.out, lines, out);
  if (empties > 0) err << "warning: " << empties << " empty prediction set(s)\n";
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const CalibrationArtifact artifact = load_artifact(o.artifact);
  if (artifact.abstained) return refuse_abstained(err);
  const DatasetFile data = load(o.test_data);
  const EvaluationReport report =
      evaluate(data.records, *artifact.s_hat, *artifact.t_hat, artifact.admission(),
               artifact.config.alpha, artifact.config.beta, artifact.config.delta);
  if (o.format == "csv") {
    emit(o.out, csv_header(report) + csv_row(report), out);
  } else {
    json j = to_json(report);
    j["config"] = to_json(artifact);
    j["config"].erase("diagnostics");
    emit(o.out, j.dump(2) + "\n", out);
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream&) {
  const DatasetFile data = load(o.data);
  SweepConfig config;
  config.alphas = o.alpha_grid.empty() ? std::vector<double>{o.alpha} : o.alpha_grid;
  config.betas = o.beta_grid.empty() ? std::vector<double>{o.beta} : o.beta_grid;
  config.ratios =
      o.ratio_grid.empty() ? std::vector<double>{o.split_ratio} : o.ratio_grid;
  config.repeats = o.repeats;
  config.delta = o.delta;
  config.max_samples = resolve_max_samples(o, data.records);
  config.criterion =
      AdmissionCriterion(o.criterion, o.lambda.value_or(default_lambda(o.criterion)));
  config.seed = o.seed;
  const auto cells = run_sweep(data.records, config);
  if (o.format == "json") {
    emit(o.out, to_json(cells).dump(2) + "\n", out);
  } else {
    emit(o.out, sweep_csv(cells), out);
  }
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream&) {
  const SimSpec spec = o.spec.empty() ? SimSpec{} : load_sim_spec(o.spec);
  const GuaranteeReport report = validate_guarantees(spec);
  emit(o.out, to_json(report).dump(2) + "\n", out);
  if (!o.csv_out.empty()) write_file_atomic(o.csv_out, trials_csv(report));
  return kExitOk;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream&) {
  const SimSpec spec = o.spec.empty() ? SimSpec{} : load_sim_spec(o.spec);
  const auto records = generate_population(spec, spec.seed);
  emit(o.out, serialize_dataset(records), out);
  return kExitOk;
}

int cmd_split(const Options& o, std::ostream&, std::ostream& err) {
  const DatasetFile data = load(o.data);
  const Split split = split_calibration_test(data.records, o.split_ratio, o.seed);
  write_dataset(o.cal_out, split.calibration);
  write_dataset(o.test_out, split.test);
  err << "calibration: " << split.calibration.size()
      << " records, test: " << split.test.size() << " records\n";
  return kExitOk;
}

int cmd_rouge(const Options& o, std::ostream& out, std::ostream&) {
  const DatasetFile scored = attach_rouge_scores(load(o.data), o.criterion);
  emit(o.out, serialize_dataset(scored.records), out);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage risk control for sampled open-ended answers"};
  app.require_subcommand(1);
  Options o;

  auto risk_flags = [&o](CLI::App* sub) {
    sub->add_option("--alpha", o.alpha, "Stage-I risk level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--beta", o.beta, "Stage-II risk level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--delta", o.delta, "Significance level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--max-samples", o.max_samples,
                    "Sampling cap M (default: shortest record)");
    sub->add_option("--criterion", o.criterion, "Relevance score name");
    sub->add_option("--lambda", o.lambda,
                    "Admission threshold (default 0.6, or 0.3 for rouge_l)");
    sub->add_option("--split-ratio", o.split_ratio, "Calibration fraction");
    sub->add_option("--seed", o.seed, "Split seed");
  };

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate budget and threshold");
  calibrate->add_option("--data", o.data, "Calibration JSONL")->required();
  calibrate->add_option("--out", o.out, "Artifact path (default stdout)");
  risk_flags(calibrate);

  auto* apply = app.add_subcommand("apply", "Build prediction sets");
  apply->add_option("--artifact", o.artifact)->required();
  apply->add_option("--data", o.data, "Records to filter")->required();
  apply->add_option("--out", o.out, "JSONL output (default stdout)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Test-time error rates");
  evaluate_cmd->add_option("--artifact", o.artifact)->required();
  evaluate_cmd->add_option("--test-data", o.test_data)->required();
  evaluate_cmd->add_option("--out", o.out);
  evaluate_cmd->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}));

  auto* sweep = app.add_subcommand("sweep", "Repeated split grid sweep");
  sweep->add_option("--data", o.data)->required();
  sweep->add_option("--out", o.out);
  sweep->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}));
  sweep->add_option("--alpha-grid", o.alpha_grid)->delimiter(',');
  sweep->add_option("--beta-grid", o.beta_grid)->delimiter(',');
  sweep->add_option("--ratio-grid", o.ratio_grid)->delimiter(',');
  sweep->add_option("--repeats", o.repeats)->check(CLI::PositiveNumber);
  risk_flags(sweep);
  sweep->callback([&o, sweep] {
    if (sweep->count("--format") == 0) o.format = "csv";
  });

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo guarantee check");
  simulate->add_option("--spec", o.spec, "key = value SimSpec file");
  simulate->add_option("--out", o.out, "JSON report (default stdout)");
  simulate->add_option("--csv", o.csv_out, "Per-trial CSV");

  auto* generate = app.add_subcommand("generate", "Write a synthetic population");
  generate->add_option("--spec", o.spec);
  generate->add_option("--out", o.out);

  auto* split = app.add_subcommand("split", "Seeded calibration/test split");
  split->add_option("--data", o.data)->required();
  split->add_option("--split-ratio", o.split_ratio);
  split->add_option("--seed", o.seed);
  split->add_option("--cal-out", o.cal_out)->required();
  split->add_option("--test-out", o.test_out)->required();

  auto* rouge = app.add_subcommand("rouge", "Attach ROUGE-L scores");
  rouge->add_option("--data", o.data)->required();
  rouge->add_option("--criterion", o.criterion, "Score name to write");
  rouge->add_option("--out", o.out);
  rouge->callback([&o, rouge] {
    if (rouge->count("--criterion") == 0) o.criterion = "rouge_l";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*calibrate) return cmd_calibrate(o, out, err);
    if (*apply) return cmd_apply(o, out, err);
    if (*evaluate_cmd) return cmd_evaluate(o, out, err);
    if (*sweep) return cmd_sweep(o, out, err);
    if (*simulate) return cmd_simulate(o, out, err);
    if (*generate) return cmd_generate(o, out, err);
    if (*split) return cmd_split(o, out, err);
    if (*rouge) return cmd_rouge(o, out, err);
  } catch (const DatasetError& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == DatasetErrorKind::kIo ? kExitIo : kExitValidation;
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace safer::cli
