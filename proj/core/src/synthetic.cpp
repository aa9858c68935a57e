#include "medqa/synthetic.hpp"

#include <random>
#include <stdexcept>

namespace medqa {

namespace {

using Synonyms = std::vector<std::string>;

const std::vector<Synonyms> kVerbs = {{"treat", "cure", "heal"}};
const std::vector<Synonyms> kSubjects = {{"cat", "kitten"}, {"dog", "puppy"}, {"child", "kid"},
                                         {"baby", "infant"}, {"man", "guy"},  {"woman", "lady"}};
const std::vector<Synonyms> kConditions = {
    {"cold", "chill"},       {"asthma", "wheezing"},         {"allergy", "allergies"},
    {"fever", "pyrexia"},    {"diabetes", "hyperglycemia"},  {"migraine", "headache"},
    {"insomnia", "sleeplessness"}, {"eczema", "dermatitis"}, {"flu", "influenza"},
    {"arthritis", "rheumatism"}};
const std::vector<Synonyms> kMedicines = {
    {"steroids", "corticosteroids"}, {"antibiotics", "antibacterials"},
    {"aspirin", "painkillers"},      {"vitamins", "supplements"},
    {"antihistamines", "cetirizine"}, {"inhaler", "bronchodilator"}};
const std::vector<std::string> kFunctionWords = {
    "a",    "with", "of",  "to",   "the",      "how",   "do",  "you", "can", "what",
    "is",   "best", "way", "are",  "benefits", "using", "it",  "good", "use"};

// {S} subject, {C} condition, {M} medicine, {V} verb.
const std::vector<std::vector<std::string>> kTemplateGroups = {
    {"how do you {V} a {S} with a {C}", "how can you {V} a {S} of a {C}",
     "what is the best way to {V} a {S} with {C}"},
    {"what are the benefits of using {M} to {V} {C}", "is it good to use {M} to {V} {C}",
     "can {M} {V} {C}"},
};

struct Slots {
  std::size_t group = 0;
  std::size_t subject = 0;
  std::size_t condition = 0;
  std::size_t medicine = 0;
};

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

std::size_t pick_index(std::size_t n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

void replace_all(std::string& s, const std::string& key, const std::string& value) {
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
}

std::string render(const Slots& slots, std::mt19937_64& rng) {
  std::string s = pick(kTemplateGroups[slots.group], rng);
  replace_all(s, "{V}", pick(kVerbs[0], rng));
  replace_all(s, "{S}", pick(kSubjects[slots.subject], rng));
  replace_all(s, "{C}", pick(kConditions[slots.condition], rng));
  replace_all(s, "{M}", pick(kMedicines[slots.medicine], rng));
  return s;
}

Slots random_slots(std::mt19937_64& rng) {
  return {pick_index(kTemplateGroups.size(), rng), pick_index(kSubjects.size(), rng),
          pick_index(kConditions.size(), rng), pick_index(kMedicines.size(), rng)};
}

Vector random_vector(std::size_t dim, double range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-range, range);
  Vector v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = d(rng);
  return v;
}

void add_concepts(EmbeddingTable& table, const std::vector<Synonyms>& groups,
                  const ToyCorpusOptions& opt, std::mt19937_64& rng) {
  for (const auto& group : groups) {
    const Vector center = random_vector(opt.dim, 0.5, rng);
    for (const auto& word : group) {
      Vector v = random_vector(opt.dim, opt.synonym_noise, rng);
      for (std::size_t i = 0; i < opt.dim; ++i) v[i] += center[i];
      table.insert(word, std::move(v));
    }
  }
}

}  // namespace

ToyCorpus make_toy_corpus(const ToyCorpusOptions& opt) {
  if (opt.n_pairs == 0 || opt.n_pairs % 2 != 0) {
    throw std::invalid_argument("toy corpus size must be a positive even number");
  }
  if (opt.dim == 0) throw std::invalid_argument("toy corpus dim must be positive");
  std::mt19937_64 rng(opt.seed);

  ToyCorpus out{EmbeddingTable(opt.dim, opt.seed), {}};
  for (const auto& w : kFunctionWords) out.table.insert(w, random_vector(opt.dim, 0.5, rng));
  add_concepts(out.table, kVerbs, opt, rng);
  add_concepts(out.table, kSubjects, opt, rng);
  add_concepts(out.table, kConditions, opt, rng);
  add_concepts(out.table, kMedicines, opt, rng);

  for (std::size_t i = 0; i < opt.n_pairs; ++i) {
    const bool duplicate = i % 2 == 0;
    const Slots a = random_slots(rng);
    Slots b = a;
    if (!duplicate) {
      b = random_slots(rng);
      while (b.condition == a.condition) b.condition = pick_index(kConditions.size(), rng);
    }
    QuoraRow row;
    row.id = static_cast<std::int64_t>(i);
    row.qid1 = static_cast<std::int64_t>(2 * i + 1);
    row.qid2 = static_cast<std::int64_t>(2 * i + 2);
    row.question1 = render(a, rng);
    row.question2 = render(b, rng);
    row.is_duplicate = duplicate ? 1 : 0;
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace medqa
