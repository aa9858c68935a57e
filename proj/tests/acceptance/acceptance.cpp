// One line per acceptance criterion; exit status is non-zero if any gating check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "medqa/chat_json.hpp"
#include "medqa/corpus.hpp"
#include "medqa/service.hpp"
#include "medqa/similarity.hpp"
#include "medqa/synthetic.hpp"
#include "test_support.hpp"

using namespace medqa;
using fixtures::data_path;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

std::string random_sentence(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {
      "how", "do", "you", "treat", "a", "cat", "with", "cold", "fever", "is", "asthma",
      "bad", "what", "causes", "lung", "cancer", "weed", "allergy", "sawdust", "zzz"};
  std::string s;
  const std::size_t n = 1 + rng() % 12;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + words[rng() % words.size()];
  return s;
}

Outcome similarity_exactness() {
  std::mt19937_64 rng(12);
  const auto params = fixtures::random_params(6, 8, 0, 12);
  const EmbeddingTable table(8, 12);
  double worst = 0.0;
  double worst_identity = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto a = random_sentence(rng);
    const auto b = random_sentence(rng);
    const auto ea = encode_text(params, table, a, 10);
    const auto eb = encode_text(params, table, b, 10);
    double l1 = 0.0;
    for (std::size_t k = 0; k < ea.pooled.size(); ++k) l1 += std::fabs(ea.pooled[k] - eb.pooled[k]);
    worst = std::max(worst, std::fabs(score_pair(params, table, a, b, 10).similarity - std::exp(-l1)));
    worst_identity =
        std::max(worst_identity, std::fabs(score_pair(params, table, a, a, 10).similarity - 1.0));
  }
  return {worst <= 1e-9 && worst_identity <= 1e-9,
          fmt("max |sim - exp(-L1)| = %.3g, max |sim(x,x) - 1| = %.3g over 100 pairs", worst,
              worst_identity)};
}

Outcome attention_normalization() {
  std::mt19937_64 rng(13);
  double worst_sum = 0.0;
  bool pads_zero = true;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t hidden = 1 + rng() % 6;
    const std::size_t dim = 1 + rng() % 6;
    const std::size_t len = 1 + rng() % 12;
    const auto params = fixtures::random_params(hidden, dim, 1 + rng() % 8, rng());
    EmbeddedSequence seq;
    for (std::size_t t = 0; t < len; ++t) {
      const bool real = rng() % 3 != 0;
      seq.mask.push_back(real);
      seq.vectors.push_back(real ? fixtures::random_vector(dim, rng, 2.0) : Vector(dim));
    }
    seq.mask[rng() % len] = true;
    for (std::size_t t = 0; t < len; ++t) {
      if (seq.mask[t] && seq.vectors[t] == Vector(dim)) seq.vectors[t] = fixtures::random_vector(dim, rng);
    }
    const auto enc = encode(params, seq);
    double sum = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      if (seq.mask[t]) {
        sum += enc.attention_weights[t];
      } else if (enc.attention_weights[t] != 0.0) {
        pads_zero = false;
      }
    }
    worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
  }
  return {worst_sum <= 1e-6 && pads_zero,
          fmt("max |sum alpha - 1| = %.3g", worst_sum) + ", pads exactly zero: " +
              (pads_zero ? "yes" : "no")};
}

Outcome gradient_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(14);
  double worst = 0.0;
  std::string worst_block;
  int checks = 0;
  for (std::size_t hidden = 1; hidden <= 4; ++hidden) {
    for (std::size_t dim = 1; dim <= 5; ++dim) {
      for (std::size_t len = 1; len <= 3; ++len) {
        const auto params = fixtures::random_params(hidden, dim, 0, rng());
        const auto left = fixtures::random_sequence(len, 1 + rng() % len, dim, rng);
        const auto right = fixtures::random_sequence(len, 1 + rng() % len, dim, rng);
        const auto r = fixtures::check_pair_gradient(params, left, right,
                                                      static_cast<double>(rng() % 2), 1e-4);
        ++checks;
        if (r.max_relative_error >= worst) {
          worst = r.max_relative_error;
          worst_block = r.worst_block;
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-4 && elapsed < 30.0,
          fmt("%g micro models, max relative error %.3g", checks, worst) + " (" + worst_block +
              ")" + fmt(", %.2f s", elapsed)};
}

Outcome trainability() {
  const auto start = std::chrono::steady_clock::now();
  const auto toy = make_toy_corpus();
  TrainConfig config;
  config.batch_size = 32;
  config.epochs = 50;
  config.hidden = 16;
  config.embedding_dim = toy.table.dim();
  config.learning_rate = 1e-3;
  config.seed = 1;
  config.train_fraction = 0.9;
  const auto [train_set, test_set] =
      split(to_labeled_pairs(toy.rows), config.train_fraction, config.seed);
  const auto result = train(config, toy.table, train_set);
  const auto eval = evaluate(result.model, toy.table, test_set, 0.5);
  const double gap = eval.mean_similarity_positive - eval.mean_similarity_negative;
  const double elapsed = seconds_since(start);
  const bool loss_down = result.loss_history.back() < result.loss_history.front();
  return {loss_down && eval.accuracy >= 0.9 && gap >= 0.3 && elapsed < 120.0,
          fmt("loss %.4f -> %.4f, ", result.loss_history.front(), result.loss_history.back()) +
              fmt("held-out accuracy %.3f, similarity gap %.3f, %.1f s", eval.accuracy, gap,
                  elapsed)};
}

Outcome full_scale_accuracy(bool& ran) {
  const char* pairs_path = std::getenv("MEDQA_QUORA_TSV");
  const char* vectors_path = std::getenv("MEDQA_VECTORS");
  if (pairs_path == nullptr || vectors_path == nullptr) {
    ran = false;
    return {true, "skipped; set MEDQA_QUORA_TSV and MEDQA_VECTORS to run (not gating)"};
  }
  ran = true;
  const auto config = TrainConfig::full_scale();
  const auto table = load_vectors_file(vectors_path, config.embedding_dim, config.seed);
  const auto pairs = to_labeled_pairs(load_pairs_file(pairs_path).rows);
  const auto [train_set, test_set] = split(pairs, config.train_fraction, config.seed);
  const auto result = train(config, table, train_set);
  const double acc = evaluate(result.model, table, test_set).accuracy;
  return {std::fabs(acc - 0.812) <= 0.03,
          fmt("held-out accuracy %.4f against 0.812 +- 0.03 (not gating)", acc)};
}

bool oracle_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool oracle_bounded(const std::string& text, std::size_t b, std::size_t e) {
  return (b == 0 || !oracle_letter(text[b - 1])) && (e == text.size() || !oracle_letter(text[e]));
}

Outcome aho_corasick_oracle() {
  std::mt19937_64 rng(16);
  const std::string alphabet = "ab c";
  auto random_string = [&](std::size_t lo, std::size_t hi) {
    std::string s(lo + rng() % (hi - lo + 1), 'a');
    for (auto& ch : s) ch = alphabet[rng() % alphabet.size()];
    return s;
  };
  int scan_mismatch = 0;
  int boundary_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    MedicalDictionary dict;
    const std::size_t n = 1 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      std::string term = normalize_phrase(random_string(1, 5));
      if (!term.empty()) dict.add(rng() % 2 ? EntityRole::disease : EntityRole::symptom, term);
    }
    if (dict.empty()) dict.add(EntityRole::disease, "ab");
    const auto terms = dict.terms();
    const std::string text = random_string(0, 40);
    const auto automaton = build_automaton(dict);

    std::vector<AhoCorasick::Hit> naive;
    for (std::size_t p = 0; p < terms.size(); ++p) {
      for (std::size_t b = 0; b + terms[p].size() <= text.size(); ++b) {
        if (text.compare(b, terms[p].size(), terms[p]) == 0) {
          naive.push_back({p, b, b + terms[p].size()});
        }
      }
    }
    auto hits = automaton.scan(text);
    std::sort(hits.begin(), hits.end());
    std::sort(naive.begin(), naive.end());
    if (hits != naive) ++scan_mismatch;

    const auto matches = extract_entities(automaton, dict, text);
    for (std::size_t i = 0; i < matches.size(); ++i) {
      const auto& m = matches[i];
      if (!oracle_bounded(text, m.span.begin, m.span.end) ||
          text.substr(m.span.begin, m.span.end - m.span.begin) != m.term ||
          (i > 0 && matches[i - 1].span.end > m.span.begin)) {
        ++boundary_violations;
      }
    }
    for (const auto& h : naive) {
      if (!oracle_bounded(text, h.begin, h.end)) continue;
      const bool covered = std::any_of(matches.begin(), matches.end(), [&](const EntityMatch& m) {
        return h.begin < m.span.end && m.span.begin < h.end;
      });
      if (!covered) ++boundary_violations;
    }
  }
  return {scan_mismatch == 0 && boundary_violations == 0,
          fmt("1000 trials, %g scan mismatches, %g boundary violations", scan_mismatch,
              boundary_violations)};
}

Outcome symptom_scenario() {
  const auto graph = load_graph_file(data_path("graph.jsonl"));
  const auto dict = load_dictionary_file(data_path("dictionary.txt"));
  const auto automaton = build_automaton(dict);
  const auto rules = load_intent_rules_file(data_path("intents.txt"));
  const auto answer = route("What are the symptoms of cold?",
                            {&graph, &dict, &automaton, &rules, nullptr}, nullptr, RouterConfig{});
  const auto& items = answer.diagnostics.kg_items;
  const bool has_fever = std::find(items.begin(), items.end(), "fever") != items.end();
  return {answer.source == AnswerSource::kg && has_fever,
          "source=" + std::string(to_string(answer.source)) + ", text=\"" + answer.text + "\""};
}

Outcome corpus_pipeline() {
  const std::vector<QuoraRow> expected = {
      {130859, 209926, 209927, "How do you treat a cat with a cold?",
       "How can you cure a cat of a cold?", 1},
      {82425, 139763, 133638,
       "How much medical evidence is there in support of the claim weed causes cancer?",
       "Does weed give you lung cancer?", 1},
      {261370, 377490, 377491, "How can an allergy to sawdust be treated?",
       "How do you treat sawdust allergy?", 1}};
  const auto parsed = load_pairs_file(data_path("quora_sample.tsv"));
  std::ifstream file(data_path("quora_sample.tsv"));
  const std::string original((std::istreambuf_iterator<char>(file)), {});
  std::ostringstream rewritten;
  write_pairs(parsed.rows, rewritten);
  const bool exact = parsed.errors.empty() && parsed.rows == expected && rewritten.str() == original;

  const auto dict = load_dictionary_file(data_path("dictionary.txt"));
  const auto filtered = filter_medical(parsed.rows, dict, build_automaton(dict));
  const bool all_kept = filtered.kept == parsed.rows;

  std::vector<QuoraRow> labeled;
  for (int i = 0; i < 12; ++i) labeled.push_back({i, 0, 0, "q", "p", i < 6 ? 1 : 0});
  const auto sample = sample_balanced(labeled, 8, 42);
  const auto pos = std::count_if(sample.begin(), sample.end(),
                                 [](const QuoraRow& r) { return r.is_duplicate == 1; });
  const bool balanced = sample.size() == 8 && pos == 4;
  const bool deterministic = sample == sample_balanced(labeled, 8, 42);
  return {exact && all_kept && balanced && deterministic,
          std::string("bit-exact: ") + (exact ? "yes" : "no") + ", kept " +
              std::to_string(filtered.kept.size()) + "/3, sample " + std::to_string(pos) + "/" +
              std::to_string(sample.size() - static_cast<std::size_t>(pos)) +
              ", deterministic: " + (deterministic ? "yes" : "no")};
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string random_utf8(std::mt19937_64& rng) {
  static const std::vector<std::string> fragments = {
      "symptoms", "cold", "what is", "cause", "prevent", "flu", "lung cancer", "treat", "?", " "};
  std::string s;
  const std::size_t n = rng() % 30;
  for (std::size_t i = 0; i < n; ++i) {
    switch (rng() % 5) {
      case 0:
        s += fragments[rng() % fragments.size()];
        break;
      case 1:
        append_utf8(s, static_cast<char32_t>(rng() % 0x80));
        break;
      case 2:
        append_utf8(s, static_cast<char32_t>(0x80 + rng() % (0x800 - 0x80)));
        break;
      case 3: {
        char32_t cp = static_cast<char32_t>(0x800 + rng() % (0x10000 - 0x800));
        if (cp >= 0xD800 && cp <= 0xDFFF) cp = 0x4E2D;
        append_utf8(s, cp);
        break;
      }
      default:
        append_utf8(s, static_cast<char32_t>(0x10000 + rng() % (0x110000 - 0x10000)));
    }
  }
  return s;
}

Outcome router_fuzz() {
  const auto graph = load_graph_file(data_path("graph.jsonl"));
  const auto dict = load_dictionary_file(data_path("dictionary.txt"));
  const auto automaton = build_automaton(dict);
  const auto rules = IntentRules::defaults();
  auto table = std::make_shared<const EmbeddingTable>(8, 17);
  auto model = std::make_shared<const HbamModel>(HbamModel{fixtures::random_params(4, 8, 0, 17), 10});
  const FuzzyEntityIndex fuzzy(*table, dict);
  const HbamRetriever retriever(model, table, load_qa_records_file(data_path("qa.jsonl")).records);
  const KgResources kg{&graph, &dict, &automaton, &rules, &fuzzy};
  const RouterConfig config;

  std::mt19937_64 rng(17);
  int invalid = 0;
  int degraded = 0;
  std::string first_problem;
  std::map<std::string, int> sources;
  for (int i = 0; i < 10000; ++i) {
    const auto text = random_utf8(rng);
    const auto answer = route(text, kg, &retriever, config);
    ++sources[std::string(to_string(answer.source))];
    const auto doc = nlohmann::json::parse(to_json(answer).dump());
    const auto problems = validate_chat_answer(doc, config.top_k);
    if (!problems.empty()) {
      ++invalid;
      if (first_problem.empty()) first_problem = problems.front();
    }
    if (!answer.diagnostics.note.empty()) {
      ++degraded;
      if (first_problem.empty()) first_problem = answer.diagnostics.note;
    }
  }
  std::string detail = fmt("10000 inputs, %g schema violations, %g degraded; kg=%g", invalid,
                           degraded, sources["kg"]) +
                       fmt(" qa=%g none=%g", sources["qa"], sources["none"]);
  if (!first_problem.empty()) detail += "; first: " + first_problem;
  return {invalid == 0 && degraded == 0, detail};
}

Outcome torn_state() {
  ServiceInputs inputs;
  inputs.graph = load_graph_file(data_path("graph.jsonl"));
  inputs.dictionary = load_dictionary_file(data_path("dictionary.txt"));
  inputs.graph.upsert_entity(EntityKind::disease, "marker", {{PropertyKey::description, "v0"}});
  ServiceState state(std::move(inputs));
  ChatServer server(state);
  const int port = server.bind("127.0.0.1", 0);
  std::thread serving([&] { server.serve(); });
  server.wait_until_ready();

  std::mutex mu;
  std::map<std::uint64_t, std::string> published{{state.snapshot()->generation, "v0"}};
  std::vector<std::pair<std::uint64_t, std::string>> observed;
  int transport_errors = 0;

  std::thread writer([&] {
    httplib::Client c("127.0.0.1", port);
    for (int i = 1; i <= 50; ++i) {
      const std::string v = "v" + std::to_string(i);
      const nlohmann::json body = {
          {"kind", "disease"}, {"name", "marker"}, {"properties", {{"description", v}}}};
      const auto res = c.Post("/kg/entities", body.dump(), "application/json");
      std::lock_guard lock(mu);
      if (!res || res->status != 200) {
        ++transport_errors;
        continue;
      }
      published[nlohmann::json::parse(res->body)["generation"].get<std::uint64_t>()] = v;
    }
  });
  std::vector<std::thread> readers;
  for (int r = 0; r < 2; ++r) {
    readers.emplace_back([&] {
      httplib::Client c("127.0.0.1", port);
      for (int i = 0; i < 25; ++i) {
        const auto res = c.Post("/chat", R"({"text":"What is marker?"})", "application/json");
        std::lock_guard lock(mu);
        if (!res || res->status != 200) {
          ++transport_errors;
          continue;
        }
        const auto doc = nlohmann::json::parse(res->body);
        observed.emplace_back(doc["diagnostics"]["snapshot"].get<std::uint64_t>(),
                              doc["text"].get<std::string>());
      }
    });
  }
  writer.join();
  for (auto& t : readers) t.join();
  server.stop();
  serving.join();

  int torn = 0;
  for (const auto& [generation, text] : observed) {
    const auto it = published.find(generation);
    if (it == published.end() || text != "marker: " + it->second) ++torn;
  }
  std::set<std::uint64_t> distinct;
  for (const auto& o : observed) distinct.insert(o.first);
  return {torn == 0 && transport_errors == 0 && observed.size() == 50,
          fmt("100 requests, %g chats across %g snapshots, %g torn", static_cast<double>(observed.size()),
              static_cast<double>(distinct.size()), torn) +
              fmt(", %g transport errors", transport_errors)};
}

}  // namespace

int main() {
  report("similarity-exactness", similarity_exactness);
  report("attention-normalization", attention_normalization);
  report("gradient-oracle", gradient_oracle);
  report("trainability", trainability);
  {
    bool ran = false;
    Outcome o;
    try {
      o = full_scale_accuracy(ran);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
      ran = true;
    }
    std::printf("%s full-scale-accuracy: %s\n", !ran ? "SKIP" : (o.pass ? "PASS" : "INFO"),
                o.detail.c_str());
  }
  report("aho-corasick-oracle", aho_corasick_oracle);
  report("kg-symptom-scenario", symptom_scenario);
  report("corpus-pipeline", corpus_pipeline);
  report("router-fuzz", router_fuzz);
  report("service-torn-state", torn_state);
  std::printf("%d gating check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
