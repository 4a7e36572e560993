#include "safer/stage2_filter.hpp"

#include <algorithm>
#include <cmath>

namespace safer {

std::optional<double> min_admissible_uncertainty(const QuestionRecord& rec,
                                                 std::size_t s_hat,
                                                 const AdmissionCriterion& crit) {
  require_samples(rec, s_hat);
  std::optional<double> best;
  for (std::size_t j = 0; j < s_hat; ++j) {
    const Candidate& c = rec.candidates[j];
    if (is_admissible(c, crit, rec.id) && (!best || c.uncertainty < *best))
      best = c.uncertainty;
  }
  return best;
}

std::vector<double> build_calibration_subset(
    std::span<const QuestionRecord> records, std::size_t s_hat,
    const AdmissionCriterion& crit) {
  std::vector<double> u_stars;
  u_stars.reserve(records.size());
  for (const auto& rec : records) {
    if (auto u = min_admissible_uncertainty(rec, s_hat, crit))
      u_stars.push_back(*u);
  }
  return u_stars;
}

double average_loss(std::span<const double> u_stars, double t) {
  if (u_stars.empty()) throw InvalidArgument("average_loss: empty input");
  const auto lost = std::count_if(u_stars.begin(), u_stars.end(),
                                  [t](double u) { return u > t; });
  return static_cast<double>(lost) / static_cast<double>(u_stars.size());
}

FilterCalibration calibrate_threshold(std::span<const double> u_stars,
                                      double beta) {
  if (u_stars.empty())
    throw NoCoveredRecords(
        "no covered calibration records: no record has an admissible answer "
        "within the calibrated budget");
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidArgument("calibrate_threshold: beta must lie in (0,1)");

  FilterCalibration out;
  out.n_prime = u_stars.size();
  const double n = static_cast<double>(out.n_prime);
  out.target_level = (beta * (n + 1.0) - 1.0) / n;
  out.min_admissible_uncertainties.assign(u_stars.begin(), u_stars.end());
  std::sort(out.min_admissible_uncertainties.begin(),
            out.min_admissible_uncertainties.end());

  // L(t) <= target  <=>  lost + 1 <= beta (N'+1)  <=>  lost <= floor(beta (N'+1)) - 1.
  const auto allowed =
      static_cast<std::int64_t>(std::floor(beta * (n + 1.0))) - 1;
  if (allowed < 0) return out;  // t_hat = +inf

  // beta < 1 keeps allowed < N', so k >= 1.
  const std::size_t k = out.n_prime - static_cast<std::size_t>(allowed);
  out.t_hat = out.min_admissible_uncertainties[k - 1];
  return out;
}

PredictionSet prediction_set(const QuestionRecord& rec, std::size_t s_hat,
                             double t_hat) {
  require_samples(rec, s_hat);
  PredictionSet set{rec.id, {}, s_hat};
  for (std::size_t j = 0; j < s_hat; ++j) {
    if (rec.candidates[j].uncertainty <= t_hat)
      set.kept_indices.push_back(rec.candidates[j].index);
  }
  return set;
}

}  // namespace safer
