#include "safer/stage1_budget.hpp"

#include <string>

#include "safer/exact_bounds.hpp"

namespace safer {

std::size_t count_failures(std::span<const QuestionRecord> records,
                           std::size_t s, const AdmissionCriterion& crit) {
  if (s < 1) throw InvalidArgument("count_failures: s must be >= 1");
  std::size_t failures = 0;
  for (const auto& rec : records) {
    require_samples(rec, s);
    if (!first_admissible_index(rec, crit, s)) ++failures;
  }
  return failures;
}

std::vector<std::size_t> failure_curve(std::span<const QuestionRecord> records,
                                       const AdmissionCriterion& crit,
                                       std::size_t max_samples) {
  if (max_samples < 1) throw InvalidArgument("failure_curve: M must be >= 1");
  // Record i fails at every s below its first admissible index.
  std::vector<std::size_t> fails_before(max_samples + 1, 0);
  for (const auto& rec : records) {
    require_samples(rec, max_samples);
    const auto first = first_admissible_index(rec, crit, max_samples);
    ++fails_before[first ? *first - 1 : max_samples];
  }
  std::vector<std::size_t> curve(max_samples, 0);
  std::size_t running = 0;
  for (std::size_t s = max_samples; s >= 1; --s) {
    running += fails_before[s];
    curve[s - 1] = running;
  }
  return curve;
}

BudgetDiagnostics risk_upper_curve(std::span<const QuestionRecord> records,
                                   const AdmissionCriterion& crit, double delta,
                                   std::size_t max_samples) {
  if (records.empty())
    throw InvalidArgument("risk_upper_curve: empty calibration set");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgument("risk_upper_curve: delta must lie in (0,1)");

  const auto curve = failure_curve(records, crit, max_samples);
  BudgetDiagnostics diag;
  diag.n = records.size();
  diag.delta = delta;
  diag.rows.reserve(max_samples);
  const auto n = static_cast<std::int64_t>(diag.n);
  for (std::size_t s = 1; s <= max_samples; ++s) {
    const std::size_t m = curve[s - 1];
    // Identical counts give identical bounds; skip the bisection.
    const double bound =
        (s > 1 && m == diag.rows.back().failures)
            ? diag.rows.back().upper_bound
            : clopper_pearson_upper(static_cast<std::int64_t>(m), n, delta);
    diag.rows.push_back({s, m, static_cast<double>(m) / static_cast<double>(n),
                         bound});
  }
  return diag;
}

BudgetOutcome select_budget(BudgetDiagnostics diagnostics, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("calibrate_budget: alpha must lie in (0,1)");
  if (diagnostics.rows.empty())
    throw InvalidArgument("calibrate_budget: empty diagnostics");
  for (const auto& row : diagnostics.rows) {
    if (row.upper_bound <= alpha)
      return {Calibrated{row.s}, std::move(diagnostics)};
  }
  const double at_max = diagnostics.rows.back().upper_bound;
  return {Abstain{at_max}, std::move(diagnostics)};
}

BudgetOutcome calibrate_budget(std::span<const QuestionRecord> records,
                               const AdmissionCriterion& crit, double alpha,
                               double delta, std::size_t max_samples) {
  return select_budget(risk_upper_curve(records, crit, delta, max_samples),
                       alpha);
}

}  // namespace safer
