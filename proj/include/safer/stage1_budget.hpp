#pragma once

// Sampling-budget calibration with abstention.
//
// For each budget s = 1..M the failure count m(s) is the number of
// calibration records whose first s candidates are all inadmissible. The
// exact binomial upper bound R+(s) on the miscoverage rate is computed from
// m(s) and N, and the calibrated budget is the smallest s with R+(s) <= alpha.
// When even R+(M) exceeds alpha the procedure abstains.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "safer/records.hpp"

namespace safer {

struct BudgetRow {
  std::size_t s = 0;
  std::size_t failures = 0;
  double empirical_rate = 0.0;
  double upper_bound = 0.0;
};

struct BudgetDiagnostics {
  std::size_t n = 0;  // calibration records
  double delta = 0.0;
  std::vector<BudgetRow> rows;  // rows[s-1] describes budget s
};

struct Calibrated {
  std::size_t s_hat = 0;
};

struct Abstain {
  double bound_at_max = 1.0;
};

struct BudgetOutcome {
  std::variant<Calibrated, Abstain> decision;
  BudgetDiagnostics diagnostics;

  bool abstained() const { return std::holds_alternative<Abstain>(decision); }
  // Throws std::bad_variant_access when abstained.
  std::size_t s_hat() const { return std::get<Calibrated>(decision).s_hat; }
};

std::size_t count_failures(std::span<const QuestionRecord> records,
                           std::size_t s, const AdmissionCriterion& crit);

/// Failure counts for every s = 1..max_samples in one pass (element s-1).
std::vector<std::size_t> failure_curve(std::span<const QuestionRecord> records,
                                       const AdmissionCriterion& crit,
                                       std::size_t max_samples);

BudgetDiagnostics risk_upper_curve(std::span<const QuestionRecord> records,
                                   const AdmissionCriterion& crit, double delta,
                                   std::size_t max_samples);

/// Minimal s with R+(s) <= alpha (ties satisfy), or Abstain{R+(M)}.
BudgetOutcome select_budget(BudgetDiagnostics diagnostics, double alpha);

BudgetOutcome calibrate_budget(std::span<const QuestionRecord> records,
                               const AdmissionCriterion& crit, double alpha,
                               double delta, std::size_t max_samples);

}  // namespace safer
