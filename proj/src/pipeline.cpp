#include "safer/pipeline.hpp"

namespace safer {

TwoStageCalibration calibrate_two_stage(std::span<const QuestionRecord> calibration,
                                        const AdmissionCriterion& crit,
                                        const RiskConfig& config) {
  config.validate();
  TwoStageCalibration out{calibrate_budget(calibration, crit, config.alpha,
                                           config.delta, config.max_samples),
                          std::nullopt};
  if (out.abstained()) return out;
  const auto u_stars =
      build_calibration_subset(calibration, out.budget.s_hat(), crit);
  out.filter = calibrate_threshold(u_stars, config.beta);
  return out;
}

}  // namespace safer
