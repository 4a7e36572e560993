#pragma once

// Core data model: sampled candidates, question records, admission criteria
// and the risk configuration shared by the calibration stages.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace safer {

/// Raised when a value violates a documented precondition or range.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a candidate does not carry the score an admission criterion
/// asks for.
class ScoreAbsent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a record has fewer sampled candidates than a budget needs.
class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One sampled answer. `index` is the 1-based sampling order.
struct Candidate {
  std::size_t index = 1;
  double uncertainty = 0.0;  // nats, >= 0
  std::map<std::string, double> relevance_scores;
  std::optional<std::string> text;
};

/// A question with its candidates in sampling order; the first s candidates
/// form the sampling set of size s.
struct QuestionRecord {
  std::string id;
  std::optional<std::string> question;
  std::optional<std::string> reference;
  std::vector<Candidate> candidates;

  // Throws InvalidArgument when an invariant is broken.
  void validate() const;
};

/// Names a relevance score and its admission threshold lambda_A.
struct AdmissionCriterion {
  std::string name;
  double lambda_a = 0.0;

  AdmissionCriterion() = default;
  AdmissionCriterion(std::string name_, double lambda_a_);
};

struct RiskConfig {
  double alpha = 0.10;
  double beta = 0.10;
  double delta = 0.05;
  std::size_t max_samples = 20;
  double split_ratio = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// score >= lambda_a. `record_id` only feeds the error message.
bool is_admissible(const Candidate& c, const AdmissionCriterion& crit,
                   std::string_view record_id = {});

/// 1-based index of the first admissible candidate among the first `limit`
/// candidates, or nullopt.
std::optional<std::size_t> first_admissible_index(const QuestionRecord& rec,
                                                  const AdmissionCriterion& crit,
                                                  std::size_t limit);

/// Throws InsufficientSamples unless rec has at least `s` candidates.
void require_samples(const QuestionRecord& rec, std::size_t s);

struct Split {
  std::vector<QuestionRecord> calibration;
  std::vector<QuestionRecord> test;
};

/// Seeded Fisher-Yates shuffle (SplitMix64, see random.hpp) followed by a
/// prefix split with |calibration| = round(ratio * N).
Split split_calibration_test(std::span<const QuestionRecord> records,
                             double ratio, std::uint64_t seed);

}  // namespace safer
