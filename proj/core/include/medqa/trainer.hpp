#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "medqa/embeddings.hpp"
#include "medqa/hbam.hpp"
#include "medqa/model_io.hpp"

namespace medqa {

/// Invalid configuration value; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Training hyperparameters. Defaults are desk-scale; `full_scale()` gives the
/// published setting (batch 1024, 9 epochs, hidden 100, 300-d vectors, length 10).
struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 9;
  std::size_t hidden = 16;
  std::size_t embedding_dim = 300;
  std::size_t attention_dim = 0;  // 0 = 2 * hidden
  std::size_t max_seq_length = 10;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  double train_fraction = 0.9;

  static TrainConfig full_scale();
  void validate() const;
};

/// Parses `key = value` lines ('#' starts a comment). Keys mirror the field names.
TrainConfig parse_train_config(std::istream& in, TrainConfig base = {});
TrainConfig load_train_config_file(const std::string& path, TrainConfig base = {});

struct LabeledPair {
  std::string q1;
  std::string q2;
  int label = 0;  // 0 or 1

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

/// Seeded shuffle, then the first ceil(fraction * N) pairs train and the rest test.
std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> split(
    const std::vector<LabeledPair>& pairs, double train_fraction, std::uint64_t seed);

/// (similarity - label)^2 for one pair.
double pair_loss(const HbamParameters& params, const EmbeddedSequence& left,
                 const EmbeddedSequence& right, double label);

/// Adds scale * d(pair_loss)/d(params) into `grads`; returns the loss.
double accumulate_pair_gradient(const HbamParameters& params, const EmbeddedSequence& left,
                                const EmbeddedSequence& right, double label, double scale,
                                HbamParameters& grads);

/// Adam with decay rates 0.9 / 0.999.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  void step(HbamParameters& params, const HbamParameters& grads);

 private:
  double learning_rate_, beta1_, beta2_, epsilon_;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

/// Raised when a batch produces a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::size_t epoch, std::size_t batch, const std::string& message)
      : std::runtime_error("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                           ": " + message),
        epoch_(epoch),
        batch_(batch) {}

  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_, batch_;
};

struct TrainResult {
  HbamModel model;
  std::vector<double> loss_history;  // mean pair loss per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Mini-batch MSE training of a freshly initialised encoder. The epoch loss is
/// the mean of the per-pair losses observed during that epoch. Bit-reproducible
/// for a fixed (config, pairs).
TrainResult train(const TrainConfig& config, const EmbeddingTable& table,
                  const std::vector<LabeledPair>& pairs, const EpochCallback& on_epoch = {});

struct EvalReport {
  double accuracy = 0.0;
  double threshold = 0.5;
  std::size_t n_correct = 0;
  std::size_t n_total = 0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  double mean_similarity_positive = 0.0;  // 0 when the class is absent
  double mean_similarity_negative = 0.0;
};

using PairScorer = std::function<double(const LabeledPair&)>;

/// Predicts 1 iff score >= threshold.
EvalReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                           double threshold = 0.5);
EvalReport evaluate(const PairScorer& scorer, const std::vector<LabeledPair>& pairs,
                    double threshold = 0.5);
EvalReport evaluate(const HbamModel& model, const EmbeddingTable& table,
                    const std::vector<LabeledPair>& pairs, double threshold = 0.5);

/// `epoch,loss` with a header row; epochs are 1-based.
void write_loss_csv(const std::vector<double>& history, std::ostream& out);

}  // namespace medqa
