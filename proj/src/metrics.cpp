#include "safer/metrics.hpp"

#include <vector>

namespace safer {
namespace {

void require_nonempty(std::span<const QuestionRecord> records, const char* op) {
  if (records.empty())
    throw InvalidArgument(std::string(op) + ": empty test set");
}

}  // namespace

double stage1_eer(std::span<const QuestionRecord> test_records,
                  std::size_t s_hat, const AdmissionCriterion& crit) {
  require_nonempty(test_records, "stage1_eer");
  std::size_t missed = 0;
  for (const auto& rec : test_records) {
    require_samples(rec, s_hat);
    if (!first_admissible_index(rec, crit, s_hat)) ++missed;
  }
  return static_cast<double>(missed) /
         static_cast<double>(test_records.size());
}

Stage2Eer stage2_eer(std::span<const QuestionRecord> test_records,
                     std::size_t s_hat, double t_hat,
                     const AdmissionCriterion& crit) {
  require_nonempty(test_records, "stage2_eer");
  std::size_t missed = 0;
  std::size_t covered = 0;
  std::size_t covered_missed = 0;
  for (const auto& rec : test_records) {
    // A record keeps an admissible answer iff its best admissible u* survives.
    const auto u_star = min_admissible_uncertainty(rec, s_hat, crit);
    const bool kept = u_star && *u_star <= t_hat;
    if (!kept) ++missed;
    if (u_star) {
      ++covered;
      if (!kept) ++covered_missed;
    }
  }
  Stage2Eer out;
  out.overall =
      static_cast<double>(missed) / static_cast<double>(test_records.size());
  out.n_conditional = covered;
  if (covered > 0)
    out.conditional =
        static_cast<double>(covered_missed) / static_cast<double>(covered);
  return out;
}

double combined_bound(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
    throw InvalidArgument("combined_bound: alpha and beta must lie in [0,1]");
  return alpha + beta - alpha * beta;
}

SetSizeStats set_size_stats(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw InvalidArgument("set_size_stats: no sets");
  SetSizeStats out;
  std::size_t total = 0;
  for (const auto& set : sets) {
    total += set.kept_indices.size();
    ++out.histogram[set.kept_indices.size()];
  }
  out.mean = static_cast<double>(total) / static_cast<double>(sets.size());
  return out;
}

EvaluationReport evaluate(std::span<const QuestionRecord> test_records,
                          std::size_t s_hat, double t_hat,
                          const AdmissionCriterion& crit, double alpha,
                          double beta, double delta) {
  EvaluationReport r;
  r.n_test = test_records.size();
  r.stage1_eer = stage1_eer(test_records, s_hat, crit);
  const Stage2Eer s2 = stage2_eer(test_records, s_hat, t_hat, crit);
  r.stage2_eer_overall = s2.overall;
  r.stage2_eer_conditional = s2.conditional;
  r.n_conditional = s2.n_conditional;
  r.avg_budget = static_cast<double>(s_hat);

  std::vector<PredictionSet> sets;
  sets.reserve(test_records.size());
  for (const auto& rec : test_records)
    sets.push_back(prediction_set(rec, s_hat, t_hat));
  const SetSizeStats sizes = set_size_stats(sets);
  r.avg_set_size = sizes.mean;
  const auto empties = sizes.histogram.count(0) ? sizes.histogram.at(0) : 0;
  r.empty_set_rate =
      static_cast<double>(empties) / static_cast<double>(sets.size());

  r.alpha = alpha;
  r.beta = beta;
  r.delta = delta;
  r.combined_bound = combined_bound(alpha, beta);
  return r;
}

}  // namespace safer
