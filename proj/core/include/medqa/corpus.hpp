#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "medqa/entities.hpp"
#include "medqa/trainer.hpp"

namespace medqa {

/// One row of the duplicate-question TSV.
struct QuoraRow {
  std::int64_t id = 0;
  std::int64_t qid1 = 0;
  std::int64_t qid2 = 0;
  std::string question1;
  std::string question2;
  int is_duplicate = 0;

  friend bool operator==(const QuoraRow&, const QuoraRow&) = default;
};

struct RowError {
  std::size_t line = 0;  // physical line where the record starts
  std::string message;
};

struct PairParseResult {
  std::vector<QuoraRow> rows;
  std::vector<RowError> errors;
};

/// Tab-separated with a header `id qid1 qid2 question1 question2 is_duplicate`.
/// Fields may be double-quoted ("" escapes a quote) and then contain tabs or
/// newlines. Bad rows go to `errors`; a missing header throws ParseError.
PairParseResult parse_pairs(std::istream& in);
PairParseResult load_pairs_file(const std::string& path);

/// Writes the header and rows, quoting fields only where needed.
void write_pairs(const std::vector<QuoraRow>& rows, std::ostream& out);

std::vector<LabeledPair> to_labeled_pairs(const std::vector<QuoraRow>& rows);

struct FilterReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::map<std::string, std::size_t> keyword_hits;  // rows mentioning each term
};

struct FilterResult {
  std::vector<QuoraRow> kept;
  FilterReport report;
};

/// Keeps a row iff either question contains a dictionary entity.
FilterResult filter_medical(const std::vector<QuoraRow>& rows, const MedicalDictionary& dict,
                            const PatternAutomaton& automaton);

std::string filter_report_json(const FilterReport& report);

class InsufficientRowsError : public std::invalid_argument {
 public:
  InsufficientRowsError(std::size_t needed_each, std::size_t positives, std::size_t negatives)
      : std::invalid_argument("need " + std::to_string(needed_each) +
                              " rows of each label; available positives=" +
                              std::to_string(positives) +
                              " negatives=" + std::to_string(negatives)),
        positives_(positives),
        negatives_(negatives) {}

  std::size_t positives() const { return positives_; }
  std::size_t negatives() const { return negatives_; }

 private:
  std::size_t positives_, negatives_;
};

/// n/2 positives and n/2 negatives drawn with a seeded shuffle, then shuffled
/// together. `n` must be even.
std::vector<QuoraRow> sample_balanced(const std::vector<QuoraRow>& rows, std::size_t n,
                                      std::uint64_t seed);

enum class SourceTag { ehealthforum, questiondoctor, webmd, other };

std::string_view to_string(SourceTag tag);
SourceTag source_tag_from_string(std::string_view name);

struct QaRecord {
  std::string question;
  std::string answer;
  SourceTag source = SourceTag::other;
  std::vector<std::string> tags;
};

struct QaLoadResult {
  std::vector<QaRecord> records;
  std::vector<RowError> errors;
};

/// JSON lines `{"question":..., "answer":..., "tags":[...], "source":...}`.
QaLoadResult load_qa_records(std::istream& in);
QaLoadResult load_qa_records_file(const std::string& path);

std::map<SourceTag, std::size_t> count_by_source(const std::vector<QaRecord>& records);

/// Dictionary terms that appear among the records' tags.
std::set<std::string> tag_keywords(const std::vector<QaRecord>& records,
                                   const MedicalDictionary& dict);

/// The subset of `dict` whose terms are in `keywords`, roles preserved.
MedicalDictionary restrict_dictionary(const MedicalDictionary& dict,
                                      const std::set<std::string>& keywords);

}  // namespace medqa
