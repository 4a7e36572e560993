#pragma once

// Conformalized filtering of the calibrated candidate sets.
//
// Among calibration records whose s_hat-prefix contains an admissible answer,
// u*_i is the smallest uncertainty of an admissible candidate in the prefix.
// Keeping candidates with U <= t loses record i exactly when u*_i > t, so the
// empirical loss L(t) = #{u*_i > t} / N' is a right-continuous step function
// and the calibrated threshold
//
//   t_hat = inf { t : L(t) <= (beta (N'+1) - 1) / N' }
//
// is an order statistic of the u* values, or +inf when the level is negative.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "safer/records.hpp"

namespace safer {

inline constexpr double kNoFilter = std::numeric_limits<double>::infinity();

class NoCoveredRecords : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FilterCalibration {
  double t_hat = kNoFilter;  // +inf: keep the whole prefix
  std::size_t n_prime = 0;
  double target_level = 0.0;
  std::vector<double> min_admissible_uncertainties;  // sorted ascending

  bool filters() const { return t_hat != kNoFilter; }
};

struct PredictionSet {
  std::string record_id;
  std::vector<std::size_t> kept_indices;
  std::size_t source_budget = 0;
};

std::optional<double> min_admissible_uncertainty(const QuestionRecord& rec,
                                                 std::size_t s_hat,
                                                 const AdmissionCriterion& crit);

/// u* for every calibration record covered within s_hat samples, in input
/// order. N' is the length of the result.
std::vector<double> build_calibration_subset(
    std::span<const QuestionRecord> records, std::size_t s_hat,
    const AdmissionCriterion& crit);

double average_loss(std::span<const double> u_stars, double t);

/// Throws NoCoveredRecords on empty input.
FilterCalibration calibrate_threshold(std::span<const double> u_stars,
                                      double beta);

PredictionSet prediction_set(const QuestionRecord& rec, std::size_t s_hat,
                             double t_hat);

}  // namespace safer
