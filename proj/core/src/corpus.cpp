#include "medqa/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>

namespace medqa {

namespace {

constexpr std::array<std::string_view, 6> kColumns = {"id",        "qid1",      "qid2",
                                                      "question1", "question2", "is_duplicate"};

/// Reads one TSV record; returns false at end of input. `line` is advanced by
/// the number of physical lines consumed.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line,
                 bool& unterminated) {
  fields.clear();
  unterminated = false;
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool at_field_start = true;
  ++line;
  for (int ch = in.get(); ch != std::char_traits<char>::eof(); ch = in.get()) {
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && at_field_start) {
      quoted = true;
      at_field_start = false;
    } else if (c == '\t') {
      fields.push_back(std::move(field));
      field.clear();
      at_field_start = true;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field += c;
      at_field_start = false;
    }
  }
  unterminated = quoted;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

template <typename T>
bool parse_int(std::string_view text, T& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return !text.empty() && ec == std::errc() && ptr == text.data() + text.size();
}

bool needs_quotes(const std::string& s) {
  return s.find_first_of("\t\n\r\"") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

PairParseResult parse_pairs(std::istream& in) {
  PairParseResult result;
  std::vector<std::string> fields;
  std::size_t line = 0;
  bool unterminated = false;
  if (!read_record(in, fields, line, unterminated)) throw ParseError(1, "missing header row");
  if (fields.size() != kColumns.size() || !std::equal(fields.begin(), fields.end(), kColumns.begin())) {
    throw ParseError(1, "header must be: id qid1 qid2 question1 question2 is_duplicate");
  }

  while (true) {
    const std::size_t start = line + 1;
    if (!read_record(in, fields, line, unterminated)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (unterminated) {
      result.errors.push_back({start, "unterminated quoted field"});
      break;
    }
    if (fields.size() != kColumns.size()) {
      result.errors.push_back({start, "row has " + std::to_string(fields.size()) +
                                          " columns, expected 6"});
      continue;
    }
    QuoraRow row;
    if (!parse_int(fields[0], row.id) || !parse_int(fields[1], row.qid1) ||
        !parse_int(fields[2], row.qid2)) {
      result.errors.push_back({start, "row has a non-integer id"});
      continue;
    }
    if (fields[5] != "0" && fields[5] != "1") {
      result.errors.push_back(
          {start, "row " + fields[0] + ": is_duplicate must be 0 or 1, got '" + fields[5] + "'"});
      continue;
    }
    row.question1 = std::move(fields[3]);
    row.question2 = std::move(fields[4]);
    row.is_duplicate = fields[5] == "1" ? 1 : 0;
    result.rows.push_back(std::move(row));
  }
  return result;
}

PairParseResult load_pairs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open pairs file: " + path);
  return parse_pairs(in);
}

void write_pairs(const std::vector<QuoraRow>& rows, std::ostream& out) {
  out << "id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate\n";
  for (const auto& r : rows) {
    out << r.id << '\t' << r.qid1 << '\t' << r.qid2 << '\t';
    write_field(out, r.question1);
    out << '\t';
    write_field(out, r.question2);
    out << '\t' << r.is_duplicate << '\n';
  }
}

std::vector<LabeledPair> to_labeled_pairs(const std::vector<QuoraRow>& rows) {
  std::vector<LabeledPair> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.question1, r.question2, r.is_duplicate});
  return out;
}

FilterResult filter_medical(const std::vector<QuoraRow>& rows, const MedicalDictionary& dict,
                            const PatternAutomaton& automaton) {
  FilterResult result;
  result.report.rows_read = rows.size();
  for (const auto& row : rows) {
    std::set<std::string> terms;
    for (const auto* text : {&row.question1, &row.question2}) {
      for (const auto& m : extract_entities(automaton, dict, *text)) terms.insert(m.term);
    }
    if (terms.empty()) continue;
    for (const auto& t : terms) ++result.report.keyword_hits[t];
    result.kept.push_back(row);
  }
  result.report.rows_kept = result.kept.size();
  return result;
}

std::string filter_report_json(const FilterReport& report) {
  nlohmann::ordered_json doc;
  doc["rows_read"] = report.rows_read;
  doc["rows_kept"] = report.rows_kept;
  doc["keyword_hits"] = report.keyword_hits;
  return doc.dump();
}

std::vector<QuoraRow> sample_balanced(const std::vector<QuoraRow>& rows, std::size_t n,
                                      std::uint64_t seed) {
  if (n % 2 != 0) throw std::invalid_argument("sample_balanced: n must be even");
  std::vector<QuoraRow> positives;
  std::vector<QuoraRow> negatives;
  for (const auto& r : rows) (r.is_duplicate == 1 ? positives : negatives).push_back(r);
  const std::size_t half = n / 2;
  if (positives.size() < half || negatives.size() < half) {
    throw InsufficientRowsError(half, positives.size(), negatives.size());
  }
  std::mt19937_64 rng(seed);
  std::shuffle(positives.begin(), positives.end(), rng);
  std::shuffle(negatives.begin(), negatives.end(), rng);
  std::vector<QuoraRow> sample(positives.begin(), positives.begin() + static_cast<long>(half));
  sample.insert(sample.end(), negatives.begin(), negatives.begin() + static_cast<long>(half));
  std::shuffle(sample.begin(), sample.end(), rng);
  return sample;
}

std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::ehealthforum:
      return "ehealthforum";
    case SourceTag::questiondoctor:
      return "questiondoctor";
    case SourceTag::webmd:
      return "webmd";
    default:
      return "other";
  }
}

SourceTag source_tag_from_string(std::string_view name) {
  const std::string lowered = to_lower_ascii(name);
  if (lowered.rfind("ehealthforum", 0) == 0) return SourceTag::ehealthforum;
  if (lowered.rfind("questiondoctor", 0) == 0) return SourceTag::questiondoctor;
  if (lowered.rfind("webmd", 0) == 0) return SourceTag::webmd;
  return SourceTag::other;
}

QaLoadResult load_qa_records(std::istream& in) {
  using nlohmann::json;
  QaLoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json doc = json::parse(line);
      QaRecord rec;
      rec.question = doc.at("question").get<std::string>();
      rec.answer = doc.at("answer").get<std::string>();
      if (doc.contains("source") && !doc["source"].is_null()) {
        rec.source = source_tag_from_string(doc["source"].get<std::string>());
      }
      if (doc.contains("tags") && !doc["tags"].is_null()) {
        rec.tags = doc["tags"].get<std::vector<std::string>>();
      }
      if (normalize_phrase(rec.question).empty() || rec.answer.find_first_not_of(" \t\r\n") ==
                                                        std::string::npos) {
        result.errors.push_back({line_no, "empty question or answer"});
        continue;
      }
      result.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

QaLoadResult load_qa_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open QA records file: " + path);
  return load_qa_records(in);
}

std::map<SourceTag, std::size_t> count_by_source(const std::vector<QaRecord>& records) {
  std::map<SourceTag, std::size_t> counts;
  for (const auto& r : records) ++counts[r.source];
  return counts;
}

std::set<std::string> tag_keywords(const std::vector<QaRecord>& records,
                                   const MedicalDictionary& dict) {
  std::set<std::string> out;
  for (const auto& r : records) {
    for (const auto& tag : r.tags) {
      const std::string norm = normalize_phrase(tag);
      if (dict.diseases.count(norm) || dict.symptoms.count(norm)) out.insert(norm);
    }
  }
  return out;
}

MedicalDictionary restrict_dictionary(const MedicalDictionary& dict,
                                      const std::set<std::string>& keywords) {
  MedicalDictionary out;
  for (const auto& t : dict.diseases) {
    if (keywords.count(t)) out.diseases.insert(t);
  }
  for (const auto& t : dict.symptoms) {
    if (keywords.count(t)) out.symptoms.insert(t);
  }
  return out;
}

}  // namespace medqa
