#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "medqa/embeddings.hpp"
#include "medqa/linalg.hpp"

namespace medqa {

/// One LSTM direction. Every gate reads the concatenation [h_prev, x], so each
/// weight matrix is hidden x (hidden + input).
struct LstmCellParams {
  Matrix w_forget, w_input, w_candidate, w_output;
  Vector b_forget, b_input, b_candidate, b_output;

  static LstmCellParams zeros(std::size_t hidden, std::size_t input);

  std::size_t hidden() const { return b_forget.size(); }
  std::size_t input() const { return w_forget.cols() - hidden(); }

  /// Throws ShapeError if the gates disagree in shape.
  void validate() const;

  friend bool operator==(const LstmCellParams&, const LstmCellParams&) = default;
};

/// Word attention: u_t = tanh(projection h_t + bias), score_t = u_t . context.
struct AttentionParams {
  Matrix projection;  // attention_dim x 2*hidden
  Vector bias;        // attention_dim
  Vector context;     // attention_dim

  static AttentionParams zeros(std::size_t attention_dim, std::size_t state_dim);
  std::size_t dim() const { return bias.size(); }

  friend bool operator==(const AttentionParams&, const AttentionParams&) = default;
};

/// A named view of one parameter array, in declaration order.
template <typename T>
struct ParameterBlock {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  std::span<T> values;
};

/// The shared (Siamese) weight set. A zero-initialised instance doubles as a
/// gradient accumulator of the same shape.
struct HbamParameters {
  LstmCellParams forward;
  LstmCellParams backward;
  AttentionParams attention;
  std::size_t hidden = 0;
  std::size_t embedding_dim = 0;
  std::uint64_t seed = 0;

  static HbamParameters zeros(std::size_t hidden, std::size_t embedding_dim,
                              std::size_t attention_dim);

  /// Weights uniform in +-1/sqrt(fan_in), biases zero, context vector uniform
  /// in +-1/sqrt(attention_dim) and never exactly zero. `attention_dim` 0
  /// means 2*hidden.
  static HbamParameters initialize(std::size_t hidden, std::size_t embedding_dim,
                                   std::size_t attention_dim, std::uint64_t seed);

  std::size_t attention_dim() const { return attention.dim(); }
  std::size_t parameter_count() const;

  std::vector<ParameterBlock<double>> blocks();
  std::vector<ParameterBlock<const double>> blocks() const;

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  /// Same dims, all zeros.
  HbamParameters zeros_like() const;
  void validate() const;

  friend bool operator==(const HbamParameters&, const HbamParameters&) = default;
};

struct LstmState {
  Vector h;
  Vector c;
};

/// Intermediate values of one step, kept for backpropagation.
struct LstmStepCache {
  Vector joined;  // [h_prev, x]
  Vector forget, input, candidate, output;
  Vector c_prev, c, tanh_c;
};

LstmState lstm_step(const LstmCellParams& cell, const Vector& h_prev, const Vector& c_prev,
                    const Vector& x, LstmStepCache* cache = nullptr);

/// Backpropagates (dh, dc) through one step. Gradients are accumulated into
/// `grads`; the returned state holds dL/dh_prev and dL/dc_prev.
LstmState lstm_step_backward(const LstmCellParams& cell, const LstmStepCache& cache,
                             const Vector& dh, const Vector& dc, LstmCellParams& grads);

/// Per-token concat(forward h, backward h). Pad positions yield zero states
/// and are skipped by both recurrences.
std::vector<Vector> bilstm_encode(const HbamParameters& params, const std::vector<Vector>& embedded,
                                  const std::vector<bool>& mask);

struct SentenceEncoding {
  std::vector<Vector> token_states;  // h_t, 2*hidden each
  Vector attention_weights;          // alpha_t, zero on pads
  Vector pooled;                     // sum_t alpha_t h_t
};

/// Throws std::invalid_argument when the mask has no real token.
SentenceEncoding attention_pool(const AttentionParams& attention,
                                const std::vector<Vector>& token_states,
                                const std::vector<bool>& mask);

/// Everything the backward pass needs from one encoding.
struct EncoderTrace {
  SentenceEncoding encoding;
  std::vector<bool> mask;
  std::vector<LstmStepCache> forward_steps;   // indexed by time step
  std::vector<LstmStepCache> backward_steps;  // indexed by time step
  std::vector<Vector> attention_hidden;       // u_t
};

SentenceEncoding encode(const HbamParameters& params, const EmbeddedSequence& embedded);
EncoderTrace encode_traced(const HbamParameters& params, const EmbeddedSequence& embedded);

/// Accumulates dL/dparams into `grads` given dL/dpooled.
void backprop_encoding(const HbamParameters& params, const EncoderTrace& trace,
                       const Vector& d_pooled, HbamParameters& grads);

}  // namespace medqa
