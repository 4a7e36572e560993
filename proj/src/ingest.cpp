#include "safer/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace safer {
namespace {

using nlohmann::json;

std::string at_line(const std::string& origin, std::size_t line) {
  return origin + ":" + std::to_string(line) + ": ";
}

class LineParser {
 public:
  LineParser(const std::string& origin, std::size_t line)
      : prefix_(at_line(origin, line)), line_(line) {}

  [[noreturn]] void fail(DatasetErrorKind kind, const std::string& msg) const {
    throw DatasetError(kind, line_, prefix_ + msg);
  }

  const json& require(const json& obj, const char* key,
                      const std::string& where) const {
    const auto it = obj.find(key);
    if (it == obj.end())
      fail(DatasetErrorKind::kMissingField,
           "missing required field '" + std::string(key) + "' in " + where);
    return *it;
  }

  std::optional<std::string> optional_string(const json& obj, const char* key,
                                             const std::string& where) const {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string())
      fail(DatasetErrorKind::kWrongType,
           "field '" + std::string(key) + "' in " + where + " must be a string");
    return it->get<std::string>();
  }

  double number(const json& v, const std::string& what) const {
    if (!v.is_number())
      fail(DatasetErrorKind::kWrongType, what + " must be a number");
    return v.get<double>();
  }

  QuestionRecord record(const json& obj) const {
    if (!obj.is_object())
      fail(DatasetErrorKind::kWrongType, "record must be a JSON object");
    QuestionRecord rec;
    const json& id = require(obj, "id", "record");
    if (!id.is_string())
      fail(DatasetErrorKind::kWrongType, "field 'id' must be a string");
    rec.id = id.get<std::string>();
    const std::string where = "record '" + rec.id + "'";
    rec.question = optional_string(obj, "question", where);
    rec.reference = optional_string(obj, "reference", where);

    const json& cands = require(obj, "candidates", where);
    if (!cands.is_array())
      fail(DatasetErrorKind::kWrongType, "'candidates' must be an array");
    if (cands.empty())
      fail(DatasetErrorKind::kEmptyCandidates, where + " has no candidates");

    rec.candidates.reserve(cands.size());
    for (std::size_t j = 0; j < cands.size(); ++j)
      rec.candidates.push_back(candidate(cands[j], j + 1, where));
    return rec;
  }

 private:
  Candidate candidate(const json& obj, std::size_t position,
                      const std::string& record_where) const {
    const std::string where =
        record_where + " candidate " + std::to_string(position);
    if (!obj.is_object())
      fail(DatasetErrorKind::kWrongType, where + " must be a JSON object");
    Candidate c;
    c.index = position;
    if (const auto it = obj.find("index"); it != obj.end()) {
      if (!it->is_number_integer())
        fail(DatasetErrorKind::kWrongType, where + ": 'index' must be an integer");
      if (it->get<std::int64_t>() != static_cast<std::int64_t>(position))
        fail(DatasetErrorKind::kNonContiguousIndex,
             where + ": index " + it->dump() +
                 " breaks the contiguous 1-based sampling order");
    }
    c.uncertainty = number(require(obj, "uncertainty", where),
                           where + ": 'uncertainty'");
    if (!(c.uncertainty >= 0.0))
      fail(DatasetErrorKind::kNegativeUncertainty,
           where + ": uncertainty " + std::to_string(c.uncertainty) +
               " is negative");

    const json& scores = require(obj, "scores", where);
    if (!scores.is_object())
      fail(DatasetErrorKind::kWrongType, where + ": 'scores' must be an object");
    for (const auto& [name, value] : scores.items()) {
      const double v = number(value, where + ": score '" + name + "'");
      if (!(v >= 0.0 && v <= 1.0))
        fail(DatasetErrorKind::kScoreOutOfRange,
             where + ": score '" + name + "' = " + value.dump() +
                 " is outside [0,1]");
      c.relevance_scores.emplace(name, v);
    }
    c.text = optional_string(obj, "text", where);
    return c;
  }

  std::string prefix_;
  std::size_t line_;
};

std::set<std::string> score_names(const Candidate& c) {
  std::set<std::string> names;
  for (const auto& [name, _] : c.relevance_scores) names.insert(name);
  return names;
}

std::string join(const std::set<std::string>& names) {
  std::string out = "{";
  for (const auto& n : names) out += (out.size() > 1 ? "," : "") + n;
  return out + "}";
}

json to_json(const QuestionRecord& rec) {
  json obj;
  obj["id"] = rec.id;
  if (rec.question) obj["question"] = *rec.question;
  if (rec.reference) obj["reference"] = *rec.reference;
  json cands = json::array();
  for (const auto& c : rec.candidates) {
    json jc;
    jc["index"] = c.index;
    jc["uncertainty"] = c.uncertainty;
    jc["scores"] = json::object();
    for (const auto& [name, v] : c.relevance_scores) jc["scores"][name] = v;
    if (c.text) jc["text"] = *c.text;
    cands.push_back(std::move(jc));
  }
  obj["candidates"] = std::move(cands);
  return obj;
}

}  // namespace

std::string_view to_string(DatasetErrorKind kind) {
  switch (kind) {
    case DatasetErrorKind::kIo: return "io";
    case DatasetErrorKind::kMalformedJson: return "malformed_json";
    case DatasetErrorKind::kMissingField: return "missing_field";
    case DatasetErrorKind::kWrongType: return "wrong_type";
    case DatasetErrorKind::kEmptyCandidates: return "empty_candidates";
    case DatasetErrorKind::kScoreOutOfRange: return "score_out_of_range";
    case DatasetErrorKind::kNegativeUncertainty: return "negative_uncertainty";
    case DatasetErrorKind::kNonContiguousIndex: return "non_contiguous_index";
    case DatasetErrorKind::kInconsistentScores: return "inconsistent_scores";
    case DatasetErrorKind::kDuplicateId: return "duplicate_id";
    case DatasetErrorKind::kMissingText: return "missing_text";
  }
  return "unknown";
}

DatasetError::DatasetError(DatasetErrorKind kind, std::size_t line,
                           const std::string& what)
    : std::runtime_error(what), kind_(kind), line_(line) {}

DatasetFile parse_dataset(std::istream& in, const std::string& origin) {
  DatasetFile out;
  out.path = origin;
  std::unordered_set<std::string> ids;
  std::optional<std::set<std::string>> expected;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char ch) { return std::isspace(ch); }))
      continue;

    const LineParser parser(origin, line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      parser.fail(DatasetErrorKind::kMalformedJson,
                  std::string("malformed JSON: ") + e.what());
    }
    QuestionRecord rec = parser.record(obj);

    if (!ids.insert(rec.id).second)
      parser.fail(DatasetErrorKind::kDuplicateId,
                  "duplicate record id '" + rec.id + "'");
    for (const auto& c : rec.candidates) {
      const auto names = score_names(c);
      if (!expected) {
        expected = names;
      } else if (names != *expected) {
        parser.fail(DatasetErrorKind::kInconsistentScores,
                    "record '" + rec.id + "' candidate " +
                        std::to_string(c.index) + " has scores " + join(names) +
                        ", expected " + join(*expected));
      }
    }
    out.records.push_back(std::move(rec));
  }
  if (in.bad())
    throw DatasetError(DatasetErrorKind::kIo, 0, origin + ": read error");
  if (expected) out.declared_criteria = *expected;
  return out;
}

DatasetFile parse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw DatasetError(DatasetErrorKind::kIo, 0,
                       path.string() + ": cannot open for reading");
  DatasetFile out = parse_dataset(in, path.string());
  out.path = path;
  return out;
}

std::string serialize_dataset(std::span<const QuestionRecord> records) {
  std::string out;
  for (const auto& rec : records) {
    out += to_json(rec).dump();
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& path,
                   std::span<const QuestionRecord> records) {
  write_file_atomic(path, serialize_dataset(records));
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw DatasetError(DatasetErrorKind::kIo, 0,
                         tmp.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
      throw DatasetError(DatasetErrorKind::kIo, 0, tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DatasetError(DatasetErrorKind::kIo, 0,
                       path.string() + ": cannot replace file");
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  // Two rolling rows over b.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const std::string> candidate_tokens,
               std::span<const std::string> reference_tokens) {
  if (reference_tokens.empty())
    throw InvalidArgument("rouge_l: empty reference");
  if (candidate_tokens.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(candidate_tokens, reference_tokens));
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(candidate_tokens.size());
  const double recall = lcs / static_cast<double>(reference_tokens.size());
  return 2.0 * precision * recall / (precision + recall);
}

DatasetFile attach_rouge_scores(DatasetFile dataset,
                                const std::string& criterion_name) {
  std::vector<std::string> affected;
  for (const auto& rec : dataset.records) {
    const bool ok =
        rec.reference && !tokenize(*rec.reference).empty() &&
        std::all_of(rec.candidates.begin(), rec.candidates.end(),
                    [](const Candidate& c) { return c.text.has_value(); });
    if (!ok) affected.push_back(rec.id);
  }
  if (!affected.empty()) {
    std::string list;
    for (const auto& id : affected) list += (list.empty() ? "" : ", ") + id;
    throw DatasetError(DatasetErrorKind::kMissingText, 0,
                       "rouge-l needs reference and candidate texts; missing in: " +
                           list);
  }

  for (auto& rec : dataset.records) {
    const auto ref = tokenize(*rec.reference);
    for (auto& c : rec.candidates)
      c.relevance_scores[criterion_name] = rouge_l(tokenize(*c.text), ref);
  }
  dataset.declared_criteria.insert(criterion_name);
  return dataset;
}

}  // namespace safer
