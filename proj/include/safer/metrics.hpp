#pragma once

// Test-time empirical error rates (EER) and set-size statistics.

#include <cstddef>
#include <map>
#include <optional>
#include <span>

#include "safer/records.hpp"
#include "safer/stage2_filter.hpp"

namespace safer {

struct Stage2Eer {
  double overall = 0.0;
  // Restricted to records whose s_hat-prefix is covered; absent when none is.
  std::optional<double> conditional;
  std::size_t n_conditional = 0;
};

struct SetSizeStats {
  double mean = 0.0;
  std::map<std::size_t, std::size_t> histogram;  // size -> count
};

struct EvaluationReport {
  std::size_t n_test = 0;
  double stage1_eer = 0.0;
  double stage2_eer_overall = 0.0;
  std::optional<double> stage2_eer_conditional;
  std::size_t n_conditional = 0;
  double avg_budget = 0.0;
  double avg_set_size = 0.0;
  double empty_set_rate = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double combined_bound = 0.0;
};

double stage1_eer(std::span<const QuestionRecord> test_records,
                  std::size_t s_hat, const AdmissionCriterion& crit);

Stage2Eer stage2_eer(std::span<const QuestionRecord> test_records,
                     std::size_t s_hat, double t_hat,
                     const AdmissionCriterion& crit);

/// alpha + beta - alpha * beta.
double combined_bound(double alpha, double beta);

SetSizeStats set_size_stats(std::span<const PredictionSet> sets);

EvaluationReport evaluate(std::span<const QuestionRecord> test_records,
                          std::size_t s_hat, double t_hat,
                          const AdmissionCriterion& crit, double alpha,
                          double beta, double delta);

}  // namespace safer
