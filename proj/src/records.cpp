#include "safer/records.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "safer/random.hpp"

namespace safer {

std::uint64_t SplitMix64::bounded(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("bounded: bound must be positive");
  // Largest multiple of bound that fits; values at or above it are redrawn.
  const std::uint64_t limit = max() - max() % bound;
  for (;;) {
    const std::uint64_t x = (*this)();
    if (x < limit) return x % bound;
  }
}

void QuestionRecord::validate() const {
  if (candidates.empty())
    throw InvalidArgument("record '" + id + "' has no candidates");
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const Candidate& c = candidates[j];
    if (c.index != j + 1)
      throw InvalidArgument("record '" + id + "': candidate at position " +
                            std::to_string(j + 1) + " has index " +
                            std::to_string(c.index));
    if (!(c.uncertainty >= 0.0))
      throw InvalidArgument("record '" + id + "': candidate " +
                            std::to_string(c.index) +
                            " has negative uncertainty");
    for (const auto& [name, score] : c.relevance_scores) {
      if (!(score >= 0.0 && score <= 1.0))
        throw InvalidArgument("record '" + id + "': candidate " +
                              std::to_string(c.index) + " score '" + name +
                              "' outside [0,1]");
    }
  }
}

AdmissionCriterion::AdmissionCriterion(std::string name_, double lambda_a_)
    : name(std::move(name_)), lambda_a(lambda_a_) {
  if (!(lambda_a >= 0.0 && lambda_a <= 1.0))
    throw InvalidArgument("lambda_a must lie in [0,1]");
}

void RiskConfig::validate() const {
  auto open_unit = [](double v, const char* what) {
    if (!(v > 0.0 && v < 1.0))
      throw InvalidArgument(std::string(what) + " must lie in (0,1)");
  };
  open_unit(alpha, "alpha");
  open_unit(beta, "beta");
  open_unit(delta, "delta");
  open_unit(split_ratio, "split_ratio");
  if (max_samples < 1) throw InvalidArgument("max_samples must be >= 1");
}

bool is_admissible(const Candidate& c, const AdmissionCriterion& crit,
                   std::string_view record_id) {
  const auto it = c.relevance_scores.find(crit.name);
  if (it == c.relevance_scores.end()) {
    throw ScoreAbsent("score absent: record '" + std::string(record_id) +
                      "' candidate " + std::to_string(c.index) +
                      " has no score '" + crit.name + "'");
  }
  return it->second >= crit.lambda_a;
}

void require_samples(const QuestionRecord& rec, std::size_t s) {
  if (rec.candidates.size() < s) {
    throw InsufficientSamples("insufficient samples: record '" + rec.id +
                              "' has " + std::to_string(rec.candidates.size()) +
                              " candidates, need " + std::to_string(s));
  }
}

std::optional<std::size_t> first_admissible_index(const QuestionRecord& rec,
                                                  const AdmissionCriterion& crit,
                                                  std::size_t limit) {
  const std::size_t n = std::min(limit, rec.candidates.size());
  for (std::size_t j = 0; j < n; ++j) {
    if (is_admissible(rec.candidates[j], crit, rec.id)) return j + 1;
  }
  return std::nullopt;
}

Split split_calibration_test(std::span<const QuestionRecord> records,
                             double ratio, std::uint64_t seed) {
  if (records.empty()) throw InvalidArgument("split: no records");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw InvalidArgument("split: ratio must lie in (0,1)");

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(order[i - 1], order[j]);
  }

  const auto n_cal = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(records.size())));
  Split out;
  out.calibration.reserve(n_cal);
  out.test.reserve(records.size() - n_cal);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_cal ? out.calibration : out.test).push_back(records[order[i]]);
  }
  return out;
}

}  // namespace safer
