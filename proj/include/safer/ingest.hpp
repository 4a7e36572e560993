#pragma once

// Newline-delimited JSON datasets of pre-scored sampled generations.
//
// One record per line:
//
//   {"id": "q1", "question": "...", "reference": "...",
//    "candidates": [{"index": 1, "text": "...", "uncertainty": 0.42,
//                    "scores": {"similarity": 0.71, "rouge_l": 0.5}}, ...]}
//
// "question", "reference", "text" and "index" are optional. Candidate array
// order is sampling order; an explicit "index" must equal the 1-based
// position. Every record must expose the same set of score names.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safer/records.hpp"

namespace safer {

enum class DatasetErrorKind {
  kIo,
  kMalformedJson,
  kMissingField,
  kWrongType,
  kEmptyCandidates,
  kScoreOutOfRange,
  kNegativeUncertainty,
  kNonContiguousIndex,
  kInconsistentScores,
  kDuplicateId,
  kMissingText,
};

std::string_view to_string(DatasetErrorKind kind);

class DatasetError : public std::runtime_error {
 public:
  // line == 0 when the error is not tied to one line.
  DatasetError(DatasetErrorKind kind, std::size_t line, const std::string& what);

  DatasetErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  DatasetErrorKind kind_;
  std::size_t line_;
};

struct DatasetFile {
  std::filesystem::path path;
  std::vector<QuestionRecord> records;
  std::set<std::string> declared_criteria;
};

DatasetFile parse_dataset(const std::filesystem::path& path);
// `origin` labels diagnostics.
DatasetFile parse_dataset(std::istream& in, const std::string& origin = "<stream>");

/// One JSON line per record, '\n'-terminated.
std::string serialize_dataset(std::span<const QuestionRecord> records);
void write_dataset(const std::filesystem::path& path,
                   std::span<const QuestionRecord> records);

/// Lowercase, then split on maximal runs of non-alphanumeric (ASCII) bytes.
std::vector<std::string> tokenize(std::string_view text);

/// ROUGE-L F1 over token sequences. 0 for an empty candidate; throws
/// InvalidArgument for an empty reference.
double rouge_l(std::span<const std::string> candidate_tokens,
               std::span<const std::string> reference_tokens);

/// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);

/// Scores every candidate text against its record's reference and stores the
/// result under `criterion_name`, replacing any previous value.
DatasetFile attach_rouge_scores(DatasetFile dataset,
                                const std::string& criterion_name);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace safer
