#include "medqa/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

#include "medqa/similarity.hpp"

namespace medqa {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& field, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(field, "not a valid number: '" + text + "'");
  }
  return value;
}

EmbeddedSequence embed_text(const EmbeddingTable& table, const std::string& text,
                            std::size_t max_len) {
  return embed_sequence(table, tokenize(text), max_len);
}

}  // namespace

TrainConfig TrainConfig::full_scale() {
  TrainConfig c;
  c.batch_size = 1024;
  c.epochs = 9;
  c.hidden = 100;
  c.embedding_dim = 300;
  c.max_seq_length = 10;
  c.train_fraction = 0.9;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
  if (epochs == 0) throw ConfigError("epochs", "must be >= 1");
  if (hidden == 0) throw ConfigError("hidden", "must be >= 1");
  if (embedding_dim == 0) throw ConfigError("embedding_dim", "must be >= 1");
  if (max_seq_length == 0) throw ConfigError("max_seq_length", "must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate", "must be a finite value >= 0");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction", "must lie strictly between 0 and 1");
  }
}

TrainConfig parse_train_config(std::istream& in, TrainConfig config) {
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "batch_size") {
      config.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "epochs") {
      config.epochs = parse_number<std::size_t>(key, value);
    } else if (key == "hidden") {
      config.hidden = parse_number<std::size_t>(key, value);
    } else if (key == "embedding_dim") {
      config.embedding_dim = parse_number<std::size_t>(key, value);
    } else if (key == "attention_dim") {
      config.attention_dim = parse_number<std::size_t>(key, value);
    } else if (key == "max_seq_length") {
      config.max_seq_length = parse_number<std::size_t>(key, value);
    } else if (key == "learning_rate") {
      config.learning_rate = parse_number<double>(key, value);
    } else if (key == "seed") {
      config.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "train_fraction") {
      config.train_fraction = parse_number<double>(key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  config.validate();
  return config;
}

TrainConfig load_train_config_file(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_train_config(in, base);
}

std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> split(
    const std::vector<LabeledPair>& pairs, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie strictly between 0 and 1");
  }
  if (pairs.empty()) throw std::invalid_argument("split: no pairs");
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  // Guard against 0.9 * 10 landing a hair above 9.
  const auto n_train = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(pairs.size()) - 1e-9));
  std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(pairs[order[i]]);
  }
  return out;
}

double pair_loss(const HbamParameters& params, const EmbeddedSequence& left,
                 const EmbeddedSequence& right, double label) {
  const double sim = manhattan_similarity(encode(params, left).pooled, encode(params, right).pooled);
  return (sim - label) * (sim - label);
}

double accumulate_pair_gradient(const HbamParameters& params, const EmbeddedSequence& left,
                                const EmbeddedSequence& right, double label, double scale,
                                HbamParameters& grads) {
  const auto left_trace = encode_traced(params, left);
  const auto right_trace = encode_traced(params, right);
  const Vector& a = left_trace.encoding.pooled;
  const Vector& b = right_trace.encoding.pooled;
  const double sim = manhattan_similarity(a, b);
  const double residual = sim - label;

  // d loss / d L1 = 2 (sim - y) * (-sim); d L1 / d a_i = sign(a_i - b_i).
  const double d_l1 = scale * 2.0 * residual * (-sim);
  Vector d_left(a.size());
  Vector d_right(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    d_left[i] = d_l1 * sign;
    d_right[i] = -d_l1 * sign;
  }
  backprop_encoding(params, left_trace, d_left, grads);
  backprop_encoding(params, right_trace, d_right, grads);
  return residual * residual;
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      m_(parameter_count, 0.0),
      v_(parameter_count, 0.0) {}

void AdamOptimizer::step(HbamParameters& params, const HbamParameters& grads) {
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto param_blocks = params.blocks();
  const auto grad_blocks = grads.blocks();
  std::size_t k = 0;
  for (std::size_t b = 0; b < param_blocks.size(); ++b) {
    auto p = param_blocks[b].values;
    const auto g = grad_blocks[b].values;
    for (std::size_t i = 0; i < p.size(); ++i, ++k) {
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g[i];
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g[i] * g[i];
      const double m_hat = m_[k] / bias1;
      const double v_hat = v_[k] / bias2;
      p[i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }
}

TrainResult train(const TrainConfig& config, const EmbeddingTable& table,
                  const std::vector<LabeledPair>& pairs, const EpochCallback& on_epoch) {
  config.validate();
  if (pairs.empty()) throw std::invalid_argument("train: no pairs");
  if (table.dim() != config.embedding_dim) {
    throw ConfigError("embedding_dim", "config says " + std::to_string(config.embedding_dim) +
                                           " but the vectors have dim " +
                                           std::to_string(table.dim()));
  }

  struct Example {
    EmbeddedSequence left, right;
    double label;
    bool usable;
  };
  std::vector<Example> examples;
  examples.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.label != 0 && p.label != 1) throw std::invalid_argument("train: label must be 0 or 1");
    Example ex{embed_text(table, p.q1, config.max_seq_length),
               embed_text(table, p.q2, config.max_seq_length), static_cast<double>(p.label),
               true};
    ex.usable = ex.left.real_count() > 0 && ex.right.real_count() > 0;
    examples.push_back(std::move(ex));
  }

  TrainResult result;
  result.model.max_seq_length = config.max_seq_length;
  auto& params = result.model.params;
  params = HbamParameters::initialize(config.hidden, config.embedding_dim, config.attention_dim,
                                      config.seed);
  AdamOptimizer optimizer(params.parameter_count(), config.learning_rate);
  HbamParameters grads = params.zeros_like();

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].usable) order.push_back(i);
  }
  if (order.empty()) throw std::invalid_argument("train: every pair has an empty question");

  std::mt19937_64 rng(config.seed ^ 0x5deece66dULL);
  std::vector<double> pair_losses(examples.size(), 0.0);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& block : grads.blocks()) std::fill(block.values.begin(), block.values.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = examples[order[k]];
        const double loss =
            accumulate_pair_gradient(params, ex.left, ex.right, ex.label, scale, grads);
        pair_losses[order[k]] = loss;
        batch_loss += loss;
      }
      if (!std::isfinite(batch_loss) || !all_finite(grads.flatten())) {
        throw TrainingError(epoch, batch_no, "non-finite loss or gradient");
      }
      optimizer.step(params, grads);
    }
    // Summed in pair-index order so the value does not depend on the shuffle.
    double total = 0.0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (examples[i].usable) total += pair_losses[i];
    }
    const double epoch_loss = total / static_cast<double>(order.size());
    result.loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return result;
}

EvalReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                           double threshold) {
  if (scores.empty()) throw std::invalid_argument("evaluate: no pairs");
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(scores.size()) + " scores for " +
                                std::to_string(labels.size()) + " labels");
  }
  EvalReport report;
  report.threshold = threshold;
  report.n_total = scores.size();
  double sum_pos = 0.0;
  double sum_neg = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] >= threshold ? 1 : 0;
    if (predicted == labels[i]) ++report.n_correct;
    if (labels[i] == 1) {
      ++report.n_positive;
      sum_pos += scores[i];
    } else {
      ++report.n_negative;
      sum_neg += scores[i];
    }
  }
  report.accuracy = static_cast<double>(report.n_correct) / static_cast<double>(report.n_total);
  if (report.n_positive > 0) report.mean_similarity_positive = sum_pos / report.n_positive;
  if (report.n_negative > 0) report.mean_similarity_negative = sum_neg / report.n_negative;
  return report;
}

EvalReport evaluate(const PairScorer& scorer, const std::vector<LabeledPair>& pairs,
                    double threshold) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    scores.push_back(scorer(p));
    labels.push_back(p.label);
  }
  return evaluate_scores(scores, labels, threshold);
}

EvalReport evaluate(const HbamModel& model, const EmbeddingTable& table,
                    const std::vector<LabeledPair>& pairs, double threshold) {
  return evaluate(
      [&](const LabeledPair& p) {
        const auto left = embed_text(table, p.q1, model.max_seq_length);
        const auto right = embed_text(table, p.q2, model.max_seq_length);
        if (left.real_count() == 0 || right.real_count() == 0) return 0.0;
        return manhattan_similarity(encode(model.params, left).pooled,
                                    encode(model.params, right).pooled);
      },
      pairs, threshold);
}

void write_loss_csv(const std::vector<double>& history, std::ostream& out) {
  out << "epoch,loss\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < history.size(); ++i) out << (i + 1) << ',' << history[i] << '\n';
}

}  // namespace medqa
