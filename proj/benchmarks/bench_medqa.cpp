#include <benchmark/benchmark.h>

#include <random>

#include "medqa/entities.hpp"
#include "medqa/router.hpp"
#include "medqa/similarity.hpp"
#include "medqa/trainer.hpp"

using namespace medqa;

namespace {

constexpr std::size_t kMaxLen = 10;

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "how", "do", "you", "treat", "a", "cat", "with", "cold", "fever", "is", "asthma", "bad",
      "what", "causes", "lung", "cancer", "weed", "allergy", "sawdust", "cure", "pain", "skin"};
  return words;
}

std::string sentence(std::mt19937_64& rng, std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    s += (i ? " " : "") + vocabulary()[rng() % vocabulary().size()];
  }
  return s;
}

std::vector<std::string> questions(std::size_t n) {
  std::mt19937_64 rng(5);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sentence(rng, 4 + rng() % 8));
  return out;
}

EmbeddedSequence embedded(const EmbeddingTable& table, const std::string& text) {
  return embed_sequence(table, tokenize(text), kMaxLen);
}

void BM_EncodeSentence(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto params = HbamParameters::initialize(hidden, dim, 0, 1);
  const EmbeddingTable table(dim, 1);
  const auto seq = embedded(table, "how do you treat a cat with a cold and fever");
  for (auto _ : state) benchmark::DoNotOptimize(encode(params, seq));
}
BENCHMARK(BM_EncodeSentence)->Args({16, 32})->Args({100, 300});

void BM_ScorePair(benchmark::State& state) {
  const auto params = HbamParameters::initialize(100, 300, 0, 1);
  const EmbeddingTable table(300, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_pair(params, table, "How do you treat a cat with a cold?",
                                        "How can you cure a cat of a cold?", kMaxLen));
  }
}
BENCHMARK(BM_ScorePair);

void BM_PairGradient(benchmark::State& state) {
  const auto params = HbamParameters::initialize(100, 300, 0, 1);
  const EmbeddingTable table(300, 1);
  const auto left = embedded(table, "How do you treat a cat with a cold?");
  const auto right = embedded(table, "How can you cure a cat of a cold?");
  auto grads = params.zeros_like();
  for (auto _ : state) {
    benchmark::DoNotOptimize(accumulate_pair_gradient(params, left, right, 1.0, 1.0, grads));
  }
}
BENCHMARK(BM_PairGradient);

void BM_RankCorpusRescan(benchmark::State& state) {
  const auto params = HbamParameters::initialize(16, 32, 0, 1);
  const EmbeddingTable table(32, 1);
  const auto corpus = questions(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rank_against_corpus(params, table, "what causes lung cancer", corpus, 3, kMaxLen));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankCorpusRescan)->Arg(100)->Arg(1000);

void BM_RankCorpusPrecomputed(benchmark::State& state) {
  const auto params = HbamParameters::initialize(16, 32, 0, 1);
  const EmbeddingTable table(32, 1);
  const EncodedCorpus corpus(params, table, questions(static_cast<std::size_t>(state.range(0))),
                             kMaxLen);
  for (auto _ : state) {
    benchmark::DoNotOptimize(corpus.rank(params, table, "what causes lung cancer", 3));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankCorpusPrecomputed)->Arg(100)->Arg(1000)->Arg(10000);

void BM_ExtractEntities(benchmark::State& state) {
  const auto dict = load_dictionary_file(MEDQA_DATA_DIR "/dictionary.txt");
  const auto automaton = build_automaton(dict);
  std::mt19937_64 rng(9);
  const auto text = sentence(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_entities(automaton, dict, text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ExtractEntities)->Arg(12)->Arg(1000);

void BM_RouteGraphHit(benchmark::State& state) {
  const auto graph = load_graph_file(MEDQA_DATA_DIR "/graph.jsonl");
  const auto dict = load_dictionary_file(MEDQA_DATA_DIR "/dictionary.txt");
  const auto automaton = build_automaton(dict);
  const auto rules = IntentRules::defaults();
  const KgResources kg{&graph, &dict, &automaton, &rules, nullptr};
  const RouterConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(route("What are the symptoms of cold?", kg, nullptr, config));
  }
}
BENCHMARK(BM_RouteGraphHit);

void BM_RouteCorpusFallback(benchmark::State& state) {
  const auto graph = load_graph_file(MEDQA_DATA_DIR "/graph.jsonl");
  const auto dict = load_dictionary_file(MEDQA_DATA_DIR "/dictionary.txt");
  const auto automaton = build_automaton(dict);
  const auto rules = IntentRules::defaults();
  const KgResources kg{&graph, &dict, &automaton, &rules, nullptr};
  auto table = std::make_shared<const EmbeddingTable>(32, 1);
  auto model = std::make_shared<const HbamModel>(
      HbamModel{HbamParameters::initialize(16, 32, 0, 1), kMaxLen});
  std::vector<QaRecord> records;
  for (const auto& q : questions(1000)) records.push_back({q, "answer", SourceTag::other, {}});
  const HbamRetriever retriever(model, table, records);
  const RouterConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(route("What causes diabetes?", kg, &retriever, config));
  }
}
BENCHMARK(BM_RouteCorpusFallback);

}  // namespace

BENCHMARK_MAIN();
