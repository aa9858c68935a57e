#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "medqa/corpus.hpp"
#include "test_support.hpp"

using namespace medqa;

namespace {

const char* kHeader = "id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate\n";

PairParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_pairs(in);
}

MedicalDictionary filter_dictionary() {
  MedicalDictionary d;
  for (const char* t : {"cold", "cancer", "lung cancer", "allergy", "sawdust allergy", "asthma"}) {
    d.add(EntityRole::disease, t);
  }
  d.add(EntityRole::symptom, "fever");
  return d;
}

std::vector<QuoraRow> rows_from(const std::vector<std::pair<std::string, std::string>>& qs) {
  std::vector<QuoraRow> rows;
  std::int64_t id = 0;
  for (const auto& [a, b] : qs) {
    rows.push_back({id, 2 * id, 2 * id + 1, a, b, static_cast<int>(id % 2)});
    ++id;
  }
  return rows;
}

std::vector<QuoraRow> labeled_rows(std::size_t positives, std::size_t negatives) {
  std::vector<QuoraRow> rows;
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    rows.push_back({static_cast<std::int64_t>(i), 0, 0, "q" + std::to_string(i), "p",
                    i < positives ? 1 : 0});
  }
  return rows;
}

bool letter_like(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

// Plain substring search with explicit boundary checks.
bool naive_is_medical(const std::string& text, const MedicalDictionary& dict) {
  std::string lowered = text;
  for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& term : dict.terms()) {
    for (auto pos = lowered.find(term); pos != std::string::npos; pos = lowered.find(term, pos + 1)) {
      const auto end = pos + term.size();
      const bool left_ok = pos == 0 || !letter_like(lowered[pos - 1]);
      const bool right_ok = end == lowered.size() || !letter_like(lowered[end]);
      if (left_ok && right_ok) return true;
    }
  }
  return false;
}

}  // namespace

TEST(ParsePairs, QuoraSampleRows) {
  const auto result = load_pairs_file(fixtures::data_path("quora_sample.tsv"));
  EXPECT_TRUE(result.errors.empty());
  ASSERT_EQ(result.rows.size(), 3u);
  EXPECT_EQ(result.rows[0], (QuoraRow{130859, 209926, 209927, "How do you treat a cat with a cold?",
                                      "How can you cure a cat of a cold?", 1}));
  EXPECT_EQ(result.rows[1].question1,
            "How much medical evidence is there in support of the claim weed causes cancer?");
  EXPECT_EQ(result.rows[1].question2, "Does weed give you lung cancer?");
  EXPECT_EQ(result.rows[2], (QuoraRow{261370, 377490, 377491,
                                      "How can an allergy to sawdust be treated?",
                                      "How do you treat sawdust allergy?", 1}));
}

TEST(ParsePairs, HeaderOnly) {
  const auto r = parse(kHeader);
  EXPECT_TRUE(r.rows.empty());
  EXPECT_TRUE(r.errors.empty());
}

TEST(ParsePairs, MissingOrWrongHeaderThrows) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("1\t2\t3\ta\tb\t0\n"), ParseError);
}

TEST(ParsePairs, BadLabelIsReportedAndSkipped) {
  const auto r = parse(std::string(kHeader) + "7\t1\t2\ta\tb\t2\n8\t3\t4\tc\td\t0\n");
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].id, 8);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_NE(r.errors[0].message.find("7"), std::string::npos);
}

TEST(ParsePairs, WrongFieldCountReportsLine) {
  const auto r = parse(std::string(kHeader) + "1\t2\t3\n");
  EXPECT_TRUE(r.rows.empty());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 2u);
}

TEST(ParsePairs, QuotedFieldsWithTabsNewlinesAndQuotes) {
  const auto r = parse(std::string(kHeader) +
                       "1\t2\t3\t\"line one\nline\ttwo\"\t\"say \"\"hi\"\"\"\t0\n4\t5\t6\tx\ty\t1\n");
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].question1, "line one\nline\ttwo");
  EXPECT_EQ(r.rows[0].question2, "say \"hi\"");
  EXPECT_TRUE(r.errors.empty());
}

TEST(ParsePairs, ErrorLineCountsPhysicalLines) {
  const auto r = parse(std::string(kHeader) + "1\t2\t3\t\"a\nb\"\tc\t0\n4\t5\t6\tx\ty\t9\n");
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 4u);
}

TEST(WritePairs, RoundTripsAwkwardText) {
  std::mt19937_64 rng(12);
  const std::string alphabet = "ab \t\n\"'?\xc3\xa9";
  std::vector<QuoraRow> rows;
  for (std::int64_t i = 0; i < 200; ++i) {
    auto text = [&] {
      std::string s;
      const std::size_t n = rng() % 12;
      for (std::size_t k = 0; k < n; ++k) s += alphabet[rng() % alphabet.size()];
      return s;
    };
    rows.push_back({i, i * 2, i * 2 + 1, text(), text(), static_cast<int>(rng() % 2)});
  }
  std::stringstream buf;
  write_pairs(rows, buf);
  const auto back = parse_pairs(buf);
  EXPECT_TRUE(back.errors.empty());
  EXPECT_EQ(back.rows, rows);
}

TEST(FilterMedical, QuoraSampleKeepsAllRows) {
  const auto rows = load_pairs_file(fixtures::data_path("quora_sample.tsv")).rows;
  const auto d = load_dictionary_file(fixtures::data_path("dictionary.txt"));
  const auto result = filter_medical(rows, d, build_automaton(d));
  EXPECT_EQ(result.kept, rows);
  EXPECT_EQ(result.report.rows_read, 3u);
  EXPECT_EQ(result.report.rows_kept, 3u);
}

TEST(FilterMedical, DropsNonMedicalRows) {
  const auto d = filter_dictionary();
  const auto rows = rows_from({{"How do I learn piano?", "Best way to practice piano?"},
                               {"Is a cold contagious?", "How long is a cold contagious?"},
                               {"Why do colder days", "feel longer?"}});
  const auto result = filter_medical(rows, d, build_automaton(d));
  ASSERT_EQ(result.kept.size(), 1u);
  EXPECT_EQ(result.kept[0].id, 1);
  EXPECT_EQ(result.report.keyword_hits.at("cold"), 1u);
  EXPECT_EQ(filter_report_json(result.report),
            R"({"rows_read":3,"rows_kept":1,"keyword_hits":{"cold":1}})");
}

TEST(FilterMedical, SeededMixKeepsExactlyTheMedicalRows) {
  const auto d = filter_dictionary();
  std::mt19937_64 rng(100);
  const std::vector<std::string> medical = {"can asthma go away", "is lung cancer curable",
                                            "sawdust allergy at work", "fever at night"};
  const std::vector<std::string> plain = {"learn piano fast", "best pizza in town",
                                          "coldplay tickets", "cancerous politics"};
  std::vector<std::pair<std::string, std::string>> qs;
  std::vector<bool> is_medical;
  for (int i = 0; i < 100; ++i) {
    const bool med = i % 5 < 2;
    const auto& pick = med ? medical[rng() % medical.size()] : plain[rng() % plain.size()];
    qs.push_back(rng() % 2 ? std::pair{pick, plain[0]} : std::pair{plain[1], pick});
    is_medical.push_back(med);
  }
  const auto rows = rows_from(qs);
  const auto result = filter_medical(rows, d, build_automaton(d));
  EXPECT_EQ(result.kept.size(), 40u);
  for (const auto& r : result.kept) EXPECT_TRUE(is_medical[static_cast<std::size_t>(r.id)]);
}

TEST(FilterMedical, AgreesWithNaiveSearch) {
  const auto d = filter_dictionary();
  const auto ac = build_automaton(d);
  const std::vector<std::string> words = {"cold", "colds", "lung", "cancer", "sawdust", "allergy",
                                          "fever", "x", "the", "-", "?", "\xc3\xa9", "asthma2"};
  std::mt19937_64 rng(31);
  std::vector<QuoraRow> rows;
  for (std::int64_t i = 0; i < 1000; ++i) {
    auto text = [&] {
      std::string s;
      const std::size_t n = rng() % 6;
      for (std::size_t k = 0; k < n; ++k) {
        s += words[rng() % words.size()];
        if (rng() % 4) s += ' ';
      }
      return s;
    };
    rows.push_back({i, 0, 0, text(), text(), 0});
  }
  const auto result = filter_medical(rows, d, ac);
  std::vector<QuoraRow> expected;
  for (const auto& r : rows) {
    if (naive_is_medical(r.question1, d) || naive_is_medical(r.question2, d)) expected.push_back(r);
  }
  EXPECT_EQ(result.kept, expected);
}

TEST(SampleBalanced, SixtyFortyGivesEqualHalves) {
  const auto rows = labeled_rows(60, 40);
  const auto sample = sample_balanced(rows, 80, 3);
  ASSERT_EQ(sample.size(), 80u);
  const auto pos = std::count_if(sample.begin(), sample.end(),
                                 [](const QuoraRow& r) { return r.is_duplicate == 1; });
  EXPECT_EQ(pos, 40);
  std::set<std::int64_t> ids;
  for (const auto& r : sample) ids.insert(r.id);
  EXPECT_EQ(ids.size(), 80u);
}

TEST(SampleBalanced, DeterministicForSeed) {
  const auto rows = labeled_rows(30, 30);
  EXPECT_EQ(sample_balanced(rows, 20, 9), sample_balanced(rows, 20, 9));
  EXPECT_NE(sample_balanced(rows, 20, 9), sample_balanced(rows, 20, 10));
}

TEST(SampleBalanced, ReportsShortfall) {
  try {
    sample_balanced(labeled_rows(4, 10), 10, 1);
    FAIL();
  } catch (const InsufficientRowsError& e) {
    EXPECT_EQ(e.positives(), 4u);
    EXPECT_EQ(e.negatives(), 10u);
    EXPECT_NE(std::string(e.what()).find("positives=4"), std::string::npos);
  }
  EXPECT_THROW(sample_balanced(labeled_rows(10, 10), 7, 1), std::invalid_argument);
}

TEST(QaRecords, ThreeLines) {
  std::istringstream in(
      R"({"question":"a?","answer":"b","tags":["cold"],"source":"ehealthforum"}
{"question":"c?","answer":"d","source":"webmd"}
{"question":"e?","answer":"f","tags":[],"source":"somewhere"}
)");
  const auto r = load_qa_records(in);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_TRUE(r.errors.empty());
  EXPECT_EQ(r.records[0].tags, (std::vector<std::string>{"cold"}));
  EXPECT_EQ(r.records[2].source, SourceTag::other);
}

TEST(QaRecords, MissingOrEmptyAnswerReportsLine) {
  std::istringstream in(
      "{\"question\":\"a?\",\"answer\":\"b\"}\n{\"question\":\"c?\"}\n{\"question\":\"d\",\"answer\":\" \"}\n");
  const auto r = load_qa_records(in);
  EXPECT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_EQ(r.errors[1].line, 3u);
}

TEST(QaRecords, CountsBySource) {
  std::string text;
  for (int i = 0; i < 171; ++i) text += R"({"question":"q","answer":"a","source":"ehealthforum"})" "\n";
  text += R"({"question":"q","answer":"a","source":"questiondoctor_2019"})" "\n";
  std::istringstream in(text);
  const auto counts = count_by_source(load_qa_records(in).records);
  EXPECT_EQ(counts.at(SourceTag::ehealthforum), 171u);
  EXPECT_EQ(counts.at(SourceTag::questiondoctor), 1u);
  EXPECT_FALSE(counts.count(SourceTag::webmd));
}

TEST(QaRecords, TagKeywordsRestrictDictionary) {
  const auto records = load_qa_records_file(fixtures::data_path("qa.jsonl")).records;
  const auto dict = load_dictionary_file(fixtures::data_path("dictionary.txt"));
  const auto keywords = tag_keywords(records, dict);
  EXPECT_TRUE(keywords.count("lung cancer"));
  EXPECT_TRUE(keywords.count("cold"));
  const auto restricted = restrict_dictionary(dict, keywords);
  for (const auto& t : restricted.terms()) EXPECT_TRUE(keywords.count(t));
  EXPECT_FALSE(restricted.diseases.count("eczema"));
}
