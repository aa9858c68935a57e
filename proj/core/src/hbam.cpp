#include "medqa/hbam.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace medqa {

namespace {

void fill_uniform(std::span<double> values, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : values) v = dist(rng);
}

// grads += outer(dz, input)
void add_outer(Matrix& grads, const Vector& dz, const Vector& input) {
  auto g = grads.values();
  const std::size_t cols = grads.cols();
  for (std::size_t r = 0; r < dz.size(); ++r) {
    const double d = dz[r];
    if (d == 0.0) continue;
    double* row = g.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += d * input[c];
  }
}

// out += W^T dz
void add_transposed(const Matrix& weights, const Vector& dz, Vector& out) {
  const auto w = weights.values();
  const std::size_t cols = weights.cols();
  for (std::size_t r = 0; r < dz.size(); ++r) {
    const double d = dz[r];
    if (d == 0.0) continue;
    const double* row = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += d * row[c];
  }
}

void add_into(Vector& dst, const Vector& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void check_cell(const LstmCellParams& cell, const Vector& h_prev, const Vector& c_prev,
                const Vector& x) {
  require_size(h_prev.size(), cell.hidden(), "lstm_step: h_prev vs cell hidden size");
  require_size(c_prev.size(), cell.hidden(), "lstm_step: c_prev vs cell hidden size");
  require_size(x.size(), cell.input(), "lstm_step: x vs cell input size");
}

struct DirectionPass {
  std::vector<Vector> hidden;  // zero vectors at pads
  std::vector<LstmStepCache> steps;
};

DirectionPass run_direction(const LstmCellParams& cell, const std::vector<Vector>& embedded,
                            const std::vector<bool>& mask, bool reverse) {
  const std::size_t steps = embedded.size();
  DirectionPass pass;
  pass.hidden.assign(steps, Vector(cell.hidden()));
  pass.steps.resize(steps);
  LstmState state{Vector(cell.hidden()), Vector(cell.hidden())};
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    if (!mask[t]) continue;
    state = lstm_step(cell, state.h, state.c, embedded[t], &pass.steps[t]);
    pass.hidden[t] = state.h;
  }
  return pass;
}

void backprop_direction(const LstmCellParams& cell, const std::vector<LstmStepCache>& steps,
                        const std::vector<bool>& mask, const std::vector<Vector>& d_hidden,
                        bool reverse, LstmCellParams& grads) {
  const std::size_t n = steps.size();
  Vector dh_next(cell.hidden());
  Vector dc_next(cell.hidden());
  // Visit steps in the opposite order of the forward recurrence.
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? k : n - 1 - k;
    if (!mask[t]) continue;
    Vector dh = d_hidden[t];
    add_into(dh, dh_next);
    auto prev = lstm_step_backward(cell, steps[t], dh, dc_next, grads);
    dh_next = std::move(prev.h);
    dc_next = std::move(prev.c);
  }
}

}  // namespace

LstmCellParams LstmCellParams::zeros(std::size_t hidden, std::size_t input) {
  const std::size_t cols = hidden + input;
  LstmCellParams p;
  p.w_forget = p.w_input = p.w_candidate = p.w_output = Matrix(hidden, cols);
  p.b_forget = p.b_input = p.b_candidate = p.b_output = Vector(hidden);
  return p;
}

void LstmCellParams::validate() const {
  const std::size_t h = b_forget.size();
  for (const Matrix* w : {&w_forget, &w_input, &w_candidate, &w_output}) {
    require_size(w->rows(), h, "lstm cell weight rows vs hidden size");
    require_size(w->cols(), w_forget.cols(), "lstm cell weight cols vs forget gate cols");
  }
  for (const Vector* b : {&b_input, &b_candidate, &b_output}) {
    require_size(b->size(), h, "lstm cell bias vs hidden size");
  }
  if (w_forget.cols() <= h) throw ShapeError("lstm cell has no input columns");
}

AttentionParams AttentionParams::zeros(std::size_t attention_dim, std::size_t state_dim) {
  return {Matrix(attention_dim, state_dim), Vector(attention_dim), Vector(attention_dim)};
}

HbamParameters HbamParameters::zeros(std::size_t hidden, std::size_t embedding_dim,
                                     std::size_t attention_dim) {
  if (hidden == 0 || embedding_dim == 0) {
    throw std::invalid_argument("hidden and embedding_dim must be >= 1");
  }
  if (attention_dim == 0) attention_dim = 2 * hidden;
  HbamParameters p;
  p.forward = LstmCellParams::zeros(hidden, embedding_dim);
  p.backward = LstmCellParams::zeros(hidden, embedding_dim);
  p.attention = AttentionParams::zeros(attention_dim, 2 * hidden);
  p.hidden = hidden;
  p.embedding_dim = embedding_dim;
  return p;
}

HbamParameters HbamParameters::initialize(std::size_t hidden, std::size_t embedding_dim,
                                          std::size_t attention_dim, std::uint64_t seed) {
  HbamParameters p = zeros(hidden, embedding_dim, attention_dim);
  p.seed = seed;
  std::mt19937_64 rng(seed);
  const double lstm_bound = 1.0 / std::sqrt(static_cast<double>(hidden + embedding_dim));
  for (LstmCellParams* cell : {&p.forward, &p.backward}) {
    for (Matrix* w : {&cell->w_forget, &cell->w_input, &cell->w_candidate, &cell->w_output}) {
      fill_uniform(w->values(), lstm_bound, rng);
    }
  }
  fill_uniform(p.attention.projection.values(), 1.0 / std::sqrt(2.0 * hidden), rng);
  const double ctx_bound = 1.0 / std::sqrt(static_cast<double>(p.attention.dim()));
  fill_uniform(p.attention.context.values(), ctx_bound, rng);
  for (auto& v : p.attention.context) {
    if (v == 0.0) v = ctx_bound / 2.0;
  }
  return p;
}

std::vector<ParameterBlock<double>> HbamParameters::blocks() {
  std::vector<ParameterBlock<double>> out;
  auto add_matrix = [&](std::string name, Matrix& m) {
    out.push_back({std::move(name), m.rows(), m.cols(), m.values()});
  };
  auto add_vector = [&](std::string name, Vector& v) {
    out.push_back({std::move(name), 1, v.size(), v.values()});
  };
  for (auto [prefix, cell] : {std::pair<const char*, LstmCellParams*>{"forward", &forward},
                              std::pair<const char*, LstmCellParams*>{"backward", &backward}}) {
    const std::string p(prefix);
    add_matrix(p + ".w_forget", cell->w_forget);
    add_vector(p + ".b_forget", cell->b_forget);
    add_matrix(p + ".w_input", cell->w_input);
    add_vector(p + ".b_input", cell->b_input);
    add_matrix(p + ".w_candidate", cell->w_candidate);
    add_vector(p + ".b_candidate", cell->b_candidate);
    add_matrix(p + ".w_output", cell->w_output);
    add_vector(p + ".b_output", cell->b_output);
  }
  add_matrix("attention.projection", attention.projection);
  add_vector("attention.bias", attention.bias);
  add_vector("attention.context", attention.context);
  return out;
}

std::vector<ParameterBlock<const double>> HbamParameters::blocks() const {
  auto mutable_blocks = const_cast<HbamParameters*>(this)->blocks();
  std::vector<ParameterBlock<const double>> out;
  out.reserve(mutable_blocks.size());
  for (auto& b : mutable_blocks) {
    out.push_back({std::move(b.name), b.rows, b.cols, std::span<const double>(b.values)});
  }
  return out;
}

std::size_t HbamParameters::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks()) n += b.values.size();
  return n;
}

std::vector<double> HbamParameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& b : blocks()) flat.insert(flat.end(), b.values.begin(), b.values.end());
  return flat;
}

void HbamParameters::assign(std::span<const double> flat) {
  require_size(flat.size(), parameter_count(), "HbamParameters::assign: flat size");
  std::size_t offset = 0;
  for (auto& b : blocks()) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), b.values.size(),
                b.values.begin());
    offset += b.values.size();
  }
}

HbamParameters HbamParameters::zeros_like() const {
  HbamParameters z = zeros(hidden, embedding_dim, attention_dim());
  z.seed = seed;
  return z;
}

void HbamParameters::validate() const {
  forward.validate();
  backward.validate();
  require_size(forward.hidden(), hidden, "forward cell hidden size");
  require_size(backward.hidden(), hidden, "backward cell hidden size");
  require_size(forward.input(), embedding_dim, "forward cell input size vs embedding_dim");
  require_size(backward.input(), embedding_dim, "backward cell input size vs embedding_dim");
  require_size(attention.projection.cols(), 2 * hidden, "attention projection cols");
  require_size(attention.projection.rows(), attention.dim(), "attention projection rows");
  require_size(attention.context.size(), attention.dim(), "attention context length");
  if (attention.dim() == 0) throw ShapeError("attention dim must be >= 1");
}

LstmState lstm_step(const LstmCellParams& cell, const Vector& h_prev, const Vector& c_prev,
                    const Vector& x, LstmStepCache* cache) {
  check_cell(cell, h_prev, c_prev, x);
  Vector joined = concat(h_prev, x);
  Vector forget = elementwise(Activation::sigmoid, affine(cell.w_forget, joined, cell.b_forget));
  Vector input = elementwise(Activation::sigmoid, affine(cell.w_input, joined, cell.b_input));
  Vector candidate =
      elementwise(Activation::tanh, affine(cell.w_candidate, joined, cell.b_candidate));
  Vector output = elementwise(Activation::sigmoid, affine(cell.w_output, joined, cell.b_output));

  const std::size_t n = cell.hidden();
  Vector c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = forget[i] * c_prev[i] + input[i] * candidate[i];
  Vector tanh_c = elementwise(Activation::tanh, c);
  Vector h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = output[i] * tanh_c[i];

  if (cache != nullptr) {
    *cache = LstmStepCache{std::move(joined), std::move(forget), std::move(input),
                           std::move(candidate), std::move(output), c_prev, c, std::move(tanh_c)};
  }
  return {std::move(h), std::move(c)};
}

LstmState lstm_step_backward(const LstmCellParams& cell, const LstmStepCache& cache,
                             const Vector& dh, const Vector& dc, LstmCellParams& grads) {
  const std::size_t n = cell.hidden();
  Vector dz_forget(n), dz_input(n), dz_candidate(n), dz_output(n);
  Vector dc_prev(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double o = cache.output[i];
    const double tc = cache.tanh_c[i];
    const double d_out = dh[i] * tc;
    const double d_c = dc[i] + dh[i] * o * (1.0 - tc * tc);
    const double f = cache.forget[i];
    const double in = cache.input[i];
    const double cand = cache.candidate[i];
    dz_forget[i] = d_c * cache.c_prev[i] * f * (1.0 - f);
    dz_input[i] = d_c * cand * in * (1.0 - in);
    dz_candidate[i] = d_c * in * (1.0 - cand * cand);
    dz_output[i] = d_out * o * (1.0 - o);
    dc_prev[i] = d_c * f;
  }

  add_outer(grads.w_forget, dz_forget, cache.joined);
  add_outer(grads.w_input, dz_input, cache.joined);
  add_outer(grads.w_candidate, dz_candidate, cache.joined);
  add_outer(grads.w_output, dz_output, cache.joined);
  add_into(grads.b_forget, dz_forget);
  add_into(grads.b_input, dz_input);
  add_into(grads.b_candidate, dz_candidate);
  add_into(grads.b_output, dz_output);

  Vector d_joined(cache.joined.size());
  add_transposed(cell.w_forget, dz_forget, d_joined);
  add_transposed(cell.w_input, dz_input, d_joined);
  add_transposed(cell.w_candidate, dz_candidate, d_joined);
  add_transposed(cell.w_output, dz_output, d_joined);

  Vector dh_prev(n);
  for (std::size_t i = 0; i < n; ++i) dh_prev[i] = d_joined[i];
  return {std::move(dh_prev), std::move(dc_prev)};
}

std::vector<Vector> bilstm_encode(const HbamParameters& params, const std::vector<Vector>& embedded,
                                  const std::vector<bool>& mask) {
  require_size(mask.size(), embedded.size(), "bilstm_encode: mask vs embedded length");
  const auto fwd = run_direction(params.forward, embedded, mask, false);
  const auto bwd = run_direction(params.backward, embedded, mask, true);
  std::vector<Vector> states;
  states.reserve(embedded.size());
  for (std::size_t t = 0; t < embedded.size(); ++t) {
    states.push_back(concat(fwd.hidden[t], bwd.hidden[t]));
  }
  return states;
}

namespace {

SentenceEncoding pool_with_hidden(const AttentionParams& attention,
                                  const std::vector<Vector>& token_states,
                                  const std::vector<bool>& mask, std::vector<Vector>* hidden_out) {
  require_size(mask.size(), token_states.size(), "attention_pool: mask vs token states");
  bool any = false;
  for (bool m : mask) any = any || m;
  if (!any) throw std::invalid_argument("attention_pool: sentence has no real tokens");

  const std::size_t steps = token_states.size();
  const std::size_t state_dim = attention.projection.cols();
  Vector scores(steps);
  std::vector<Vector> hidden(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    if (!mask[t]) continue;
    require_size(token_states[t].size(), state_dim, "attention_pool: token state");
    hidden[t] = elementwise(Activation::tanh,
                            affine(attention.projection, token_states[t], attention.bias));
    scores[t] = dot(hidden[t], attention.context);
  }

  SentenceEncoding enc;
  enc.token_states = token_states;
  enc.attention_weights = masked_softmax(scores, mask);
  enc.pooled = Vector(state_dim);
  for (std::size_t t = 0; t < steps; ++t) {
    if (!mask[t]) continue;
    const double a = enc.attention_weights[t];
    for (std::size_t i = 0; i < state_dim; ++i) enc.pooled[i] += a * token_states[t][i];
  }
  if (hidden_out != nullptr) *hidden_out = std::move(hidden);
  return enc;
}

}  // namespace

SentenceEncoding attention_pool(const AttentionParams& attention,
                                const std::vector<Vector>& token_states,
                                const std::vector<bool>& mask) {
  return pool_with_hidden(attention, token_states, mask, nullptr);
}

SentenceEncoding encode(const HbamParameters& params, const EmbeddedSequence& embedded) {
  return attention_pool(params.attention, bilstm_encode(params, embedded.vectors, embedded.mask),
                        embedded.mask);
}

EncoderTrace encode_traced(const HbamParameters& params, const EmbeddedSequence& embedded) {
  require_size(embedded.mask.size(), embedded.vectors.size(), "encode: mask vs embedded length");
  auto fwd = run_direction(params.forward, embedded.vectors, embedded.mask, false);
  auto bwd = run_direction(params.backward, embedded.vectors, embedded.mask, true);
  std::vector<Vector> states;
  states.reserve(embedded.vectors.size());
  for (std::size_t t = 0; t < embedded.vectors.size(); ++t) {
    states.push_back(concat(fwd.hidden[t], bwd.hidden[t]));
  }
  EncoderTrace trace;
  trace.mask = embedded.mask;
  trace.encoding = pool_with_hidden(params.attention, states, embedded.mask,
                                    &trace.attention_hidden);
  trace.forward_steps = std::move(fwd.steps);
  trace.backward_steps = std::move(bwd.steps);
  return trace;
}

void backprop_encoding(const HbamParameters& params, const EncoderTrace& trace,
                       const Vector& d_pooled, HbamParameters& grads) {
  const auto& enc = trace.encoding;
  const std::size_t steps = enc.token_states.size();
  const std::size_t state_dim = 2 * params.hidden;
  const std::size_t h = params.hidden;
  require_size(d_pooled.size(), state_dim, "backprop_encoding: d_pooled");

  // Pooling and softmax.
  std::vector<Vector> d_states(steps, Vector(state_dim));
  Vector d_alpha(steps);
  double weighted = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    if (!trace.mask[t]) continue;
    d_alpha[t] = dot(d_pooled, enc.token_states[t]);
    weighted += enc.attention_weights[t] * d_alpha[t];
    for (std::size_t i = 0; i < state_dim; ++i) {
      d_states[t][i] += enc.attention_weights[t] * d_pooled[i];
    }
  }

  // Attention scoring.
  auto& att_grads = grads.attention;
  for (std::size_t t = 0; t < steps; ++t) {
    if (!trace.mask[t]) continue;
    const double d_score = enc.attention_weights[t] * (d_alpha[t] - weighted);
    const Vector& u = trace.attention_hidden[t];
    Vector dz(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      att_grads.context[k] += d_score * u[k];
      dz[k] = d_score * params.attention.context[k] * (1.0 - u[k] * u[k]);
    }
    add_outer(att_grads.projection, dz, enc.token_states[t]);
    add_into(att_grads.bias, dz);
    add_transposed(params.attention.projection, dz, d_states[t]);
  }

  // Split the state gradient by direction and run BPTT on each.
  std::vector<Vector> d_forward(steps, Vector(h));
  std::vector<Vector> d_backward(steps, Vector(h));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < h; ++i) {
      d_forward[t][i] = d_states[t][i];
      d_backward[t][i] = d_states[t][h + i];
    }
  }
  backprop_direction(params.forward, trace.forward_steps, trace.mask, d_forward, false,
                     grads.forward);
  backprop_direction(params.backward, trace.backward_steps, trace.mask, d_backward, true,
                     grads.backward);
}

}  // namespace medqa
