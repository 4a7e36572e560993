#include "safer/simulate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "safer/metrics.hpp"
#include "safer/pipeline.hpp"
#include "safer/random.hpp"

namespace safer {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw InvalidArgument("sim spec: bad value '" + text + "' for key '" + key + "'");
  return value;
}

using Setter = std::function<void(SimSpec&, const std::string&, const std::string&)>;

template <typename T>
Setter field(T SimSpec::*member) {
  return [member](SimSpec& spec, const std::string& key, const std::string& v) {
    spec.*member = parse_value<T>(key, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n_questions", field(&SimSpec::n_questions)},
      {"pi0", field(&SimSpec::pi0)},
      {"beta_a", field(&SimSpec::beta_a)},
      {"beta_b", field(&SimSpec::beta_b)},
      {"max_samples", field(&SimSpec::max_samples)},
      {"adm_unc_log_mean", field(&SimSpec::adm_unc_log_mean)},
      {"adm_unc_log_sd", field(&SimSpec::adm_unc_log_sd)},
      {"inadm_unc_log_mean", field(&SimSpec::inadm_unc_log_mean)},
      {"inadm_unc_log_sd", field(&SimSpec::inadm_unc_log_sd)},
      {"lambda_a", field(&SimSpec::lambda_a)},
      {"trials", field(&SimSpec::trials)},
      {"split_ratio", field(&SimSpec::split_ratio)},
      {"seed", field(&SimSpec::seed)},
      {"alpha", field(&SimSpec::alpha)},
      {"beta", field(&SimSpec::beta)},
      {"delta", field(&SimSpec::delta)},
  };
  return table;
}

}  // namespace

void SimSpec::validate() const {
  if (n_questions < 1) throw InvalidArgument("sim spec: n_questions must be >= 1");
  if (!(pi0 >= 0.0 && pi0 <= 1.0)) throw InvalidArgument("sim spec: pi0 must lie in [0,1]");
  if (!(beta_a > 0.0 && beta_b > 0.0))
    throw InvalidArgument("sim spec: beta_a and beta_b must be positive");
  if (max_samples < 1) throw InvalidArgument("sim spec: max_samples must be >= 1");
  if (!(adm_unc_log_sd >= 0.0 && inadm_unc_log_sd >= 0.0))
    throw InvalidArgument("sim spec: uncertainty log-sd must be nonnegative");
  if (!std::isfinite(adm_unc_log_mean) || !std::isfinite(inadm_unc_log_mean))
    throw InvalidArgument("sim spec: uncertainty log-mean must be finite");
  if (!(lambda_a > 0.0 && lambda_a <= 1.0))
    throw InvalidArgument("sim spec: lambda_a must lie in (0,1]");
  if (trials < 1) throw InvalidArgument("sim spec: trials must be >= 1");
  risk_config().validate();
}

RiskConfig SimSpec::risk_config() const {
  return RiskConfig{alpha, beta, delta, max_samples, split_ratio, seed};
}

SimSpec parse_sim_spec(std::istream& in) {
  SimSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("sim spec line " + std::to_string(line_no) +
                            ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw InvalidArgument("sim spec line " + std::to_string(line_no) +
                            ": unknown key '" + key + "'");
    it->second(spec, key, value);
  }
  spec.validate();
  return spec;
}

SimSpec load_sim_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::filesystem::filesystem_error(
        "cannot open sim spec", path,
        std::make_error_code(std::errc::no_such_file_or_directory));
  return parse_sim_spec(in);
}

std::string format_sim_spec(const SimSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "n_questions = " << spec.n_questions << '\n'
      << "pi0 = " << spec.pi0 << '\n'
      << "beta_a = " << spec.beta_a << '\n'
      << "beta_b = " << spec.beta_b << '\n'
      << "max_samples = " << spec.max_samples << '\n'
      << "adm_unc_log_mean = " << spec.adm_unc_log_mean << '\n'
      << "adm_unc_log_sd = " << spec.adm_unc_log_sd << '\n'
      << "inadm_unc_log_mean = " << spec.inadm_unc_log_mean << '\n'
      << "inadm_unc_log_sd = " << spec.inadm_unc_log_sd << '\n'
      << "lambda_a = " << spec.lambda_a << '\n'
      << "trials = " << spec.trials << '\n'
      << "split_ratio = " << spec.split_ratio << '\n'
      << "seed = " << spec.seed << '\n'
      << "alpha = " << spec.alpha << '\n'
      << "beta = " << spec.beta << '\n'
      << "delta = " << spec.delta << '\n';
  return out.str();
}

double true_stage1_risk(const SimSpec& spec, std::size_t s) {
  if (s < 1) throw InvalidArgument("true_stage1_risk: s must be >= 1");
  // B(a, b+s) / B(a, b) = prod_{j<s} (b + j) / (a + b + j)
  double ratio = 1.0;
  for (std::size_t j = 0; j < s; ++j) {
    const double jd = static_cast<double>(j);
    ratio *= (spec.beta_b + jd) / (spec.beta_a + spec.beta_b + jd);
  }
  return spec.pi0 + (1.0 - spec.pi0) * ratio;
}

std::vector<QuestionRecord> generate_population(const SimSpec& spec,
                                                std::uint64_t seed) {
  spec.validate();
  SplitMix64 rng(seed);
  boost::random::beta_distribution<double> ability(spec.beta_a, spec.beta_b);
  boost::random::normal_distribution<double> adm_log(spec.adm_unc_log_mean,
                                                     spec.adm_unc_log_sd);
  boost::random::normal_distribution<double> inadm_log(spec.inadm_unc_log_mean,
                                                       spec.inadm_unc_log_sd);
  const double lam = spec.lambda_a;

  std::vector<QuestionRecord> records(spec.n_questions);
  for (std::size_t i = 0; i < spec.n_questions; ++i) {
    QuestionRecord& rec = records[i];
    rec.id = "q" + std::to_string(i + 1);
    const bool unanswerable = rng.uniform01() < spec.pi0;
    const double p = unanswerable ? 0.0 : ability(rng);

    rec.candidates.resize(spec.max_samples);
    for (std::size_t j = 0; j < spec.max_samples; ++j) {
      Candidate& c = rec.candidates[j];
      c.index = j + 1;
      const bool admissible = rng.uniform01() < p;
      const double u = rng.uniform01();
      // (lam, 1] for admissible, [0, lam) otherwise.
      const double score = admissible ? lam + (1.0 - lam) * (1.0 - u) : lam * u;
      c.relevance_scores.emplace(kSimScoreName, score);
      c.uncertainty = std::exp(admissible ? adm_log(rng) : inadm_log(rng));
    }
  }
  return records;
}

TrialResult run_trial(const SimSpec& spec, std::size_t trial) {
  TrialResult r;
  r.trial = trial;
  r.seed = derive_seed(spec.seed, trial);
  const auto population = generate_population(spec, derive_seed(r.seed, 0));
  const Split split =
      split_calibration_test(population, spec.split_ratio, derive_seed(r.seed, 1));
  r.n_cal = split.calibration.size();
  r.n_test = split.test.size();

  const AdmissionCriterion crit = spec.criterion();
  const auto cal = calibrate_two_stage(split.calibration, crit, spec.risk_config());
  if (cal.abstained()) {
    r.abstained = true;
    r.bound = std::get<Abstain>(cal.budget.decision).bound_at_max;
    return r;
  }
  const std::size_t s_hat = cal.budget.s_hat();
  r.s_hat = s_hat;
  r.bound = cal.budget.diagnostics.rows[s_hat - 1].upper_bound;
  r.true_risk = true_stage1_risk(spec, s_hat);
  r.t_hat = cal.filter->t_hat;
  r.n_prime = cal.filter->n_prime;
  if (split.test.empty()) return r;

  const EvaluationReport eval = evaluate(split.test, s_hat, cal.filter->t_hat, crit,
                                         spec.alpha, spec.beta, spec.delta);
  r.stage1_eer = eval.stage1_eer;
  r.stage2_eer_overall = eval.stage2_eer_overall;
  r.stage2_eer_conditional = eval.stage2_eer_conditional;
  r.avg_set_size = eval.avg_set_size;
  return r;
}

GuaranteeReport validate_guarantees(const SimSpec& spec) {
  spec.validate();
  GuaranteeReport report;
  report.spec = spec;
  report.trials = spec.trials;
  report.combined_bound = combined_bound(spec.alpha, spec.beta);
  report.per_trial.reserve(spec.trials);

  std::size_t stage1_violations = 0;
  std::size_t combined_checked = 0;
  std::size_t combined_violations = 0;
  std::size_t conditional_count = 0;
  double conditional_sum = 0.0;
  for (std::size_t t = 0; t < spec.trials; ++t) {
    TrialResult r = run_trial(spec, t);
    if (!r.abstained) {
      ++report.calibrated_trials;
      if (*r.true_risk > spec.alpha) ++stage1_violations;
      if (r.stage2_eer_overall) {
        ++combined_checked;
        if (*r.stage2_eer_overall > report.combined_bound) ++combined_violations;
      }
      if (r.stage2_eer_conditional) {
        ++conditional_count;
        conditional_sum += *r.stage2_eer_conditional;
      }
    }
    report.per_trial.push_back(std::move(r));
  }

  const auto trials = static_cast<double>(spec.trials);
  report.abstain_fraction =
      static_cast<double>(spec.trials - report.calibrated_trials) / trials;
  if (report.calibrated_trials > 0)
    report.stage1_violation_fraction =
        static_cast<double>(stage1_violations) /
        static_cast<double>(report.calibrated_trials);
  if (conditional_count > 0)
    report.stage2_conditional_mean =
        conditional_sum / static_cast<double>(conditional_count);
  if (combined_checked > 0)
    report.combined_violation_fraction =
        static_cast<double>(combined_violations) /
        static_cast<double>(combined_checked);
  return report;
}

}  // namespace safer
