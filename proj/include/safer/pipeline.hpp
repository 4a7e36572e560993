#pragma once

// Both calibration stages run back to back on one calibration set.

#include <optional>
#include <span>

#include "safer/records.hpp"
#include "safer/stage1_budget.hpp"
#include "safer/stage2_filter.hpp"

namespace safer {

struct TwoStageCalibration {
  BudgetOutcome budget;
  std::optional<FilterCalibration> filter;  // absent iff budget abstained

  bool abstained() const { return budget.abstained(); }
};

/// Stage II is skipped on abstention. Throws NoCoveredRecords when the budget
/// calibrates but no calibration record is covered within it.
TwoStageCalibration calibrate_two_stage(std::span<const QuestionRecord> calibration,
                                        const AdmissionCriterion& crit,
                                        const RiskConfig& config);

}  // namespace safer
