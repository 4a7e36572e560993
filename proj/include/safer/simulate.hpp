#pragma once

// Synthetic populations with a closed-form true miscoverage rate, and a
// Monte Carlo harness that checks the two-stage guarantees against it.
//
// Generative model, per question i:
//   p_i = 0 with probability pi0, otherwise p_i ~ Beta(beta_a, beta_b);
//   each of the M candidates is admissible independently with probability p_i;
//   an admissible candidate scores Uniform(lambda_a, 1] and has uncertainty
//   exp(N(adm_unc_log_mean, adm_unc_log_sd^2)); an inadmissible one scores
//   Uniform[0, lambda_a) with uncertainty exp(N(inadm_unc_log_mean, ...)).
//
// The probability that the first s candidates all miss is E[(1 - p)^s]
//   = pi0 + (1 - pi0) B(a, b + s) / B(a, b).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "safer/records.hpp"

namespace safer {

/// Score name carried by generated candidates.
inline constexpr const char* kSimScoreName = "similarity";

struct SimSpec {
  std::size_t n_questions = 1000;
  double pi0 = 0.02;
  double beta_a = 2.0;
  double beta_b = 2.0;
  std::size_t max_samples = 20;
  double adm_unc_log_mean = 0.0;
  double adm_unc_log_sd = 0.5;
  double inadm_unc_log_mean = 0.5;
  double inadm_unc_log_sd = 0.5;
  double lambda_a = 0.6;
  std::size_t trials = 1000;
  double split_ratio = 0.5;
  std::uint64_t seed = 20240601;
  double alpha = 0.10;
  double beta = 0.10;
  double delta = 0.05;

  void validate() const;
  AdmissionCriterion criterion() const { return {kSimScoreName, lambda_a}; }
  RiskConfig risk_config() const;
};

/// Reads `key = value` lines; '#' starts a comment, blank lines are ignored.
/// Keys are the SimSpec field names; unknown keys and malformed values throw
/// InvalidArgument. Missing keys keep their defaults.
SimSpec parse_sim_spec(std::istream& in);
SimSpec load_sim_spec(const std::filesystem::path& path);
std::string format_sim_spec(const SimSpec& spec);

double true_stage1_risk(const SimSpec& spec, std::size_t s);

std::vector<QuestionRecord> generate_population(const SimSpec& spec,
                                                std::uint64_t seed);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool abstained = false;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;
  std::optional<std::size_t> s_hat;
  double bound = 0.0;  // R+ at s_hat, or at M when abstaining
  std::optional<double> true_risk;
  std::optional<double> t_hat;
  std::size_t n_prime = 0;
  std::optional<double> stage1_eer;
  std::optional<double> stage2_eer_overall;
  std::optional<double> stage2_eer_conditional;
  std::optional<double> avg_set_size;
};

struct GuaranteeReport {
  SimSpec spec;
  std::size_t trials = 0;
  std::size_t calibrated_trials = 0;
  double abstain_fraction = 0.0;
  // Over calibrated trials: fraction with true R(s_hat) > alpha.
  std::optional<double> stage1_violation_fraction;
  // Over calibrated trials with a covered test record.
  std::optional<double> stage2_conditional_mean;
  // Over calibrated trials: fraction with overall test EER > alpha+beta-alpha*beta.
  std::optional<double> combined_violation_fraction;
  double combined_bound = 0.0;
  std::vector<TrialResult> per_trial;
};

/// Trial t uses seed derive_seed(spec.seed, t) for its population and split,
/// so results do not depend on evaluation order.
TrialResult run_trial(const SimSpec& spec, std::size_t trial);

GuaranteeReport validate_guarantees(const SimSpec& spec);

}  // namespace safer
