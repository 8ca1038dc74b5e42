#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nnl/dense.hpp"
#include "nnl/losses.hpp"
#include "nnl/params.hpp"
#include "nnl/tensor.hpp"

namespace nnl {

enum class CellKind { vanilla, gru, lstm };

std::string to_string(CellKind kind);
CellKind parse_cell_kind(const std::string& text);

/// Recurrent cell with hidden width n_h, input width n_u and output width n_y.
/// All states and inputs are (width, N) batches; the cell input is the
/// concatenation [h_prev; u]. Parameter local names:
///   vanilla  W_in, b, W_out
///   gru      W_in, b, W_r, b_r, W_u, b_u, W_out
///   lstm     W_f, b_f, W_i, b_i, W_o, b_o, W_c, b_c, W_out
/// Gate and candidate matrices are (n_h, n_h + n_u), W_out is (n_y, n_h).
/// The output y = W_out h is linear; a softmax belongs to the loss.
struct RnnCellSpec {
  CellKind kind = CellKind::vanilla;
  std::size_t n_u = 1;
  std::size_t n_h = 1;
  std::size_t n_y = 1;
  Activation hidden{ActivationKind::tanh};  // vanilla only

  std::size_t parameter_count() const;
  /// (local name, shape) in parameter order.
  std::vector<std::pair<std::string, Shape>> parameter_shapes() const;

  bool operator==(const RnnCellSpec&) const = default;
};

ParamSet init_cell_params(const RnnCellSpec& spec, const InitScheme& scheme, std::uint64_t seed);

/// Everything one time step computes; enough to run the step backwards.
struct StepCache {
  Tensor h_prev, c_prev, u;
  Tensor x;        // [h_prev; u]
  Tensor z;        // vanilla: W_in x + b
  Tensor gate_r, gate_u, x_reset, cand;  // gru (x_reset = [gate_r * h_prev; u])
  Tensor gate_f, gate_i, gate_o, tanh_c;  // lstm (cand is the cell candidate)
  Tensor h, c, y;
};

StepCache cell_step(const RnnCellSpec& spec, const ParamSet& params, const Tensor& h_prev,
                    const Tensor& c_prev, const Tensor& u);

struct RnnStep {
  Tensor h, y;
};
struct LstmStep {
  Tensor h, c, y;
};

/// h = sigma(W_in [h_prev; u] + b), y = W_out h.
RnnStep rnn_step(const RnnCellSpec& spec, const ParamSet& params, const Tensor& h_prev,
                 const Tensor& u);
/// Reset and update gates, candidate tanh(W_in [r * h_prev; u] + b),
/// h = g_u * candidate + (1 - g_u) * h_prev.
RnnStep gru_step(const RnnCellSpec& spec, const ParamSet& params, const Tensor& h_prev,
                 const Tensor& u);
/// c = g_f * c_prev + g_i * tanh(W_c x + b_c), h = g_o * tanh(c).
LstmStep lstm_step(const RnnCellSpec& spec, const ParamSet& params, const Tensor& h_prev,
                   const Tensor& c_prev, const Tensor& u);

enum class Wiring { one_to_many, many_to_one, aligned, delayed };

std::string to_string(Wiring wiring);
Wiring parse_wiring(const std::string& text);

/// Number of unrolled steps and which of them consume an input or emit an
/// output:
///   one_to_many  T = T_out, input at step 0 only (zeros afterwards), output every step
///   many_to_one  T = T_in, output at the final step only
///   aligned      T = T_in = T_out, input and output every step
///   delayed      T = T_in + T_out, inputs first, then outputs from zero inputs
struct SequenceLayout {
  std::size_t steps = 0;
  std::vector<bool> takes_input;
  std::vector<bool> emits_output;
};

SequenceLayout sequence_layout(Wiring wiring, std::size_t t_in, std::size_t t_out);

/// Inputs spread over every step of the layout, zero where none is consumed.
std::vector<Tensor> expand_inputs(const SequenceLayout& layout, const std::vector<Tensor>& inputs,
                                  std::size_t n_u);

struct Unrolled {
  std::vector<StepCache> steps;
};

/// Runs the cell over one input per step starting from h0 = c0 = 0.
Unrolled unroll_steps(const RnnCellSpec& spec, const ParamSet& params,
                      const std::vector<Tensor>& step_inputs);

struct BpttResult {
  GradSet grads;
  std::vector<Tensor> input_grads;  // dL/du at every step
};

/// Backpropagation through time. `y_bar[t]` and `h_bar[t]` are upstream
/// gradients w.r.t. the output and the hidden state of step t; an empty
/// tensor stands for zero and either vector may be empty altogether.
/// With `clip`, every step's contribution to each shared tensor is clipped to
/// that norm before it is accumulated.
BpttResult bptt_steps(const RnnCellSpec& spec, const ParamSet& params, const Unrolled& run,
                      const std::vector<Tensor>& y_bar, const std::vector<Tensor>& h_bar = {},
                      std::optional<double> clip = std::nullopt);

/// A sequence problem: inputs u^<t> and targets y^<t>, all (width, N).
struct SequenceBatch {
  std::vector<Tensor> inputs;
  std::vector<Tensor> targets;
  Wiring wiring = Wiring::aligned;
  std::size_t t_out = 0;  // output steps when `targets` is empty (prediction)

  std::size_t output_steps() const { return targets.empty() ? t_out : targets.size(); }
};

struct SequenceForward {
  SequenceLayout layout;
  Unrolled run;
  std::vector<Tensor> outputs;  // one per emitting step
};

SequenceForward unroll(const RnnCellSpec& spec, const ParamSet& params, const SequenceBatch& batch);

/// Sum over emitting steps of the per-step loss. kind is mse, or
/// softmax_nll with one-hot targets (the class is the target's argmax).
struct SequenceLoss {
  double value = 0.0;
  std::vector<Tensor> output_grads;  // one per emitting step
};

SequenceLoss sequence_loss(LossKind kind, const std::vector<Tensor>& outputs,
                           const std::vector<Tensor>& targets);

/// Gradients of a loss whose per-emitting-step output gradients are given.
BpttResult bptt(const RnnCellSpec& spec, const ParamSet& params, const SequenceForward& forward,
                const std::vector<Tensor>& output_grads, std::optional<double> clip = std::nullopt);

/// Forward states h^<t> on the sequence and backward states g^<t> on the
/// reversed sequence, concatenated per step as [h^<t>; g^<t>].
struct Bidirectional {
  Unrolled forward;
  Unrolled backward;  // step k holds the backward cell at time T - 1 - k
  std::vector<Tensor> states;
};

Bidirectional bidirectional(const RnnCellSpec& fwd_spec, const ParamSet& fwd_params,
                            const RnnCellSpec& bwd_spec, const ParamSet& bwd_params,
                            const std::vector<Tensor>& inputs);

struct BidirectionalGrads {
  GradSet forward;
  GradSet backward;
  std::vector<Tensor> input_grads;
};

BidirectionalGrads bidirectional_backward(const RnnCellSpec& fwd_spec, const ParamSet& fwd_params,
                                          const RnnCellSpec& bwd_spec, const ParamSet& bwd_params,
                                          const Bidirectional& run,
                                          const std::vector<Tensor>& state_grads);

/// Deep RNN: layer k reads layer k-1's outputs y^<t> as its inputs, so
/// n_y of layer k-1 must equal n_u of layer k. Every layer runs over all
/// steps of the layout; the last layer's outputs at emitting steps are returned.
struct DeepForward {
  SequenceLayout layout;
  std::vector<Unrolled> layers;
  std::vector<Tensor> outputs;
};

void check_stack(const std::vector<RnnCellSpec>& specs);

DeepForward stack_deep(const std::vector<RnnCellSpec>& specs, const std::vector<ParamSet>& params,
                       const SequenceBatch& batch);

struct DeepGrads {
  std::vector<GradSet> grads;
  std::vector<Tensor> input_grads;
};

DeepGrads stack_deep_backward(const std::vector<RnnCellSpec>& specs,
                              const std::vector<ParamSet>& params, const DeepForward& forward,
                              const std::vector<Tensor>& output_grads,
                              std::optional<double> clip = std::nullopt);

/// Unit vector e_index of length vocab_size (0-based), as a (vocab_size) vector.
Tensor one_hot_encode(std::size_t index, std::size_t vocab_size);
/// Argmax, lowest index on ties.
std::size_t one_hot_decode(const Tensor& v);

/// Sorted word list; the last two entries are reserved for the unknown-word
/// and end-of-sentence tokens.
class Vocabulary {
 public:
  /// `words` excludes the two reserved tokens. They are sorted, then the
  /// reserved tokens are appended, matching the vocabulary file layout.
  explicit Vocabulary(std::vector<std::string> words);
  /// One token per line; index = line number. The final two lines are taken
  /// as the reserved tokens.
  static Vocabulary load(const std::string& path);

  std::size_t size() const { return tokens_.size(); }
  std::size_t unk() const { return tokens_.size() - 2; }
  std::size_t eos() const { return tokens_.size() - 1; }
  std::size_t index_of(const std::string& word) const;  // unk() when absent
  const std::string& word(std::size_t index) const;
  Tensor encode(const std::string& word) const { return one_hot_encode(index_of(word), size()); }

 private:
  Vocabulary() = default;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace nnl
