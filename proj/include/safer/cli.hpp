#pragma once

// Command-line surface: calibrate, apply, evaluate, sweep, simulate, plus the
// file helpers split, generate and rouge.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "safer/metrics.hpp"
#include "safer/pipeline.hpp"
#include "safer/simulate.hpp"

namespace safer::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitAbstain = 2,
  kExitValidation = 3,
  kExitIo = 4,
  kExitUsage = 64,
};

inline constexpr double kDefaultSimilarityLambda = 0.6;
inline constexpr double kDefaultRougeLambda = 0.3;

struct CalibrationArtifact {
  bool abstained = false;
  std::optional<std::size_t> s_hat;
  std::optional<double> t_hat;  // +inf when nothing is filtered
  std::optional<double> bound_at_max;  // set on abstention
  RiskConfig config;
  std::string criterion;
  double lambda_a = 0.0;
  std::size_t n_cal = 0;
  std::size_t n_prime = 0;
  std::optional<double> target_level;
  BudgetDiagnostics diagnostics;

  AdmissionCriterion admission() const { return {criterion, lambda_a}; }
};

CalibrationArtifact make_artifact(const TwoStageCalibration& cal,
                                  const AdmissionCriterion& crit,
                                  const RiskConfig& config, std::size_t n_cal);

nlohmann::json to_json(const CalibrationArtifact& artifact);
/// Throws InvalidArgument on schema violations.
CalibrationArtifact artifact_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvaluationReport& report);
std::string csv_header(const EvaluationReport&);
std::string csv_row(const EvaluationReport& report);

nlohmann::json to_json(const GuaranteeReport& report);
std::string trials_csv(const GuaranteeReport& report);

nlohmann::json to_json(const PredictionSet& set, const QuestionRecord& rec);

struct SweepConfig {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> ratios;
  std::size_t repeats = 1;
  double delta = 0.05;
  std::size_t max_samples = 20;
  AdmissionCriterion criterion;
  std::uint64_t seed = 0;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample standard deviation, needs count >= 2
};

Summary summarize(std::span<const double> values);

struct SweepCell {
  double ratio = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t repeats = 0;
  std::size_t abstained = 0;
  Summary s_hat;
  Summary stage1_eer;
  Summary stage2_eer;
  Summary stage2_conditional;
  Summary set_size;
  double combined_bound = 0.0;
};

/// Repeat r of a given ratio splits with derive_seed(seed, r), shared by every
/// (alpha, beta) pair. Cells are ordered by ratio, then alpha, then beta.
std::vector<SweepCell> run_sweep(std::span<const QuestionRecord> records,
                                 const SweepConfig& config);
std::string sweep_csv(std::span<const SweepCell> cells);
nlohmann::json to_json(std::span<const SweepCell> cells);

/// Entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace safer::cli
