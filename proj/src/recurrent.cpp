#include "nnl/recurrent.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "nnl/optim.hpp"
#include "nnl/text.hpp"

namespace nnl {

std::string to_string(CellKind kind) {
  switch (kind) {
    case CellKind::vanilla: return "vanilla";
    case CellKind::gru: return "gru";
    case CellKind::lstm: return "lstm";
  }
  return "?";
}

CellKind parse_cell_kind(const std::string& text) {
  if (text == "vanilla" || text == "rnn") return CellKind::vanilla;
  if (text == "gru") return CellKind::gru;
  if (text == "lstm") return CellKind::lstm;
  throw std::invalid_argument("unknown recurrent cell: " + text);
}

std::vector<std::pair<std::string, Shape>> RnnCellSpec::parameter_shapes() const {
  const Shape gate{n_h, n_h + n_u}, bias{n_h}, out{n_y, n_h};
  switch (kind) {
    case CellKind::vanilla:
      return {{"W_in", gate}, {"b", bias}, {"W_out", out}};
    case CellKind::gru:
      return {{"W_in", gate}, {"b", bias}, {"W_r", gate}, {"b_r", bias},
              {"W_u", gate},  {"b_u", bias}, {"W_out", out}};
    case CellKind::lstm:
      return {{"W_f", gate}, {"b_f", bias}, {"W_i", gate}, {"b_i", bias}, {"W_o", gate},
              {"b_o", bias}, {"W_c", gate}, {"b_c", bias}, {"W_out", out}};
  }
  return {};
}

std::size_t RnnCellSpec::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, shape] : parameter_shapes()) n += element_count(shape);
  return n;
}

ParamSet init_cell_params(const RnnCellSpec& spec, const InitScheme& scheme, std::uint64_t seed) {
  Rng rng(seed);
  ParamSet params;
  for (const auto& [name, shape] : spec.parameter_shapes()) {
    if (is_bias_name(name)) {
      params.insert(name, Tensor(shape));
    } else {
      params.insert(name, init_tensor(scheme, shape, shape[1], rng));
    }
  }
  return params;
}

namespace {

const Activation kSigmoid{ActivationKind::sigmoid};
const Activation kTanh{ActivationKind::tanh};

Tensor vstack(const Tensor& top, const Tensor& bottom) {
  const std::size_t a = top.extent(0), b = bottom.extent(0), n = top.extent(1);
  Tensor out({a + b, n});
  std::copy(top.values().begin(), top.values().end(), out.values().begin());
  std::copy(bottom.values().begin(), bottom.values().end(), out.values().begin() + a * n);
  return out;
}

Tensor row_block(const Tensor& t, std::size_t first, std::size_t count) {
  const std::size_t n = t.extent(1);
  Tensor out({count, n});
  std::copy_n(t.values().begin() + first * n, count * n, out.values().begin());
  return out;
}

Tensor affine(const Tensor& W, const Tensor& x, const Tensor& b) {
  return add_column(matmul(W, x), b);
}

// s (1 - s) for a sigmoid output s; 1 - t^2 for a tanh output t.
Tensor sigmoid_slope(const Tensor& s) {
  Tensor d(s.shape());
  for (std::size_t k = 0; k < s.size(); ++k) d[k] = s[k] * (1.0 - s[k]);
  return d;
}
Tensor tanh_slope(const Tensor& t) {
  Tensor d(t.shape());
  for (std::size_t k = 0; k < t.size(); ++k) d[k] = 1.0 - t[k] * t[k];
  return d;
}

void check_width(const Tensor& t, std::size_t rows, std::size_t batch, const char* what) {
  if (t.rank() != 2 || t.extent(0) != rows || t.extent(1) != batch) {
    throw ShapeError(std::string("recurrent cell: ") + what + " has shape " + to_string(t.shape()) +
                     ", expected " + to_string({rows, batch}));
  }
}

void check_params(const RnnCellSpec& spec, const ParamSet& params) {
  for (const auto& [name, shape] : spec.parameter_shapes())
    require_same_shape(params[name].shape(), shape, "recurrent cell parameter");
}

}  // namespace

StepCache cell_step(const RnnCellSpec& spec, const ParamSet& params, const Tensor& h_prev_in,
                    const Tensor& c_prev_in, const Tensor& u) {
  if (u.rank() != 2) throw ShapeError("recurrent cell: input must be (n_u, N), got " + to_string(u.shape()));
  const std::size_t batch = u.extent(1);
  check_width(u, spec.n_u, batch, "input");
  check_params(spec, params);
  StepCache s;
  s.u = u;
  s.h_prev = h_prev_in.empty() ? Tensor({spec.n_h, batch}) : h_prev_in;
  check_width(s.h_prev, spec.n_h, batch, "previous hidden state");
  s.x = vstack(s.h_prev, u);
  switch (spec.kind) {
    case CellKind::vanilla:
      s.z = affine(params["W_in"], s.x, params["b"]);
      s.h = activate(spec.hidden, s.z);
      break;
    case CellKind::gru:
      s.gate_r = activate(kSigmoid, affine(params["W_r"], s.x, params["b_r"]));
      s.gate_u = activate(kSigmoid, affine(params["W_u"], s.x, params["b_u"]));
      s.x_reset = vstack(hadamard(s.gate_r, s.h_prev), u);
      s.cand = activate(kTanh, affine(params["W_in"], s.x_reset, params["b"]));
      s.h = Tensor(s.h_prev.shape());
      for (std::size_t k = 0; k < s.h.size(); ++k)
        s.h[k] = s.gate_u[k] * s.cand[k] + (1.0 - s.gate_u[k]) * s.h_prev[k];
      break;
    case CellKind::lstm:
      s.c_prev = c_prev_in.empty() ? Tensor({spec.n_h, batch}) : c_prev_in;
      check_width(s.c_prev, spec.n_h, batch, "previous cell state");
      s.gate_f = activate(kSigmoid, affine(params["W_f"], s.x, params["b_f"]));
      s.gate_i = activate(kSigmoid, affine(params["W_i"], s.x, params["b_i"]));
      s.gate_o = activate(kSigmoid, affine(params["W_o"], s.x, params["b_o"]));
      s.cand = activate(kTanh, affine(params["W_c"], s.x, params["b_c"]));
      s.c = Tensor(s.c_prev.shape());
      for (std::size_t k = 0; k < s.c.size(); ++k)
        s.c[k] = s.gate_f[k] * s.c_prev[k] + s.gate_i[k] * s.cand[k];
      s.tanh_c = activate(kTanh, s.c);
      s.h = hadamard(s.gate_o, s.tanh_c);
      break;
  }
  s.y = matmul(params["W_out"], s.h);
  return s;
}

RnnStep rnn_step(const RnnCellSpec& spec, const ParamSet& params, const Tensor& h_prev,
                 const Tensor& u) {
  if (spec.kind != CellKind::vanilla) throw std::invalid_argument("rnn_step: cell is not vanilla");
  StepCache s = cell_step(spec, params, h_prev, Tensor(), u);
  return {std::move(s.h), std::move(s.y)};
}

RnnStep gru_step(const RnnCellSpec& spec, const ParamSet& params, const Tensor& h_prev,
                 const Tensor& u) {
  if (spec.kind != CellKind::gru) throw std::invalid_argument("gru_step: cell is not a GRU");
  StepCache s = cell_step(spec, params, h_prev, Tensor(), u);
  return {std::move(s.h), std::move(s.y)};
}

LstmStep lstm_step(const RnnCellSpec& spec, const ParamSet& params, const Tensor& h_prev,
                   const Tensor& c_prev, const Tensor& u) {
  if (spec.kind != CellKind::lstm) throw std::invalid_argument("lstm_step: cell is not an LSTM");
  StepCache s = cell_step(spec, params, h_prev, c_prev, u);
  return {std::move(s.h), std::move(s.c), std::move(s.y)};
}

std::string to_string(Wiring wiring) {
  switch (wiring) {
    case Wiring::one_to_many: return "one_to_many";
    case Wiring::many_to_one: return "many_to_one";
    case Wiring::aligned: return "aligned";
    case Wiring::delayed: return "delayed";
  }
  return "?";
}

Wiring parse_wiring(const std::string& text) {
  if (text == "one_to_many") return Wiring::one_to_many;
  if (text == "many_to_one") return Wiring::many_to_one;
  if (text == "aligned" || text == "many_to_many_aligned") return Wiring::aligned;
  if (text == "delayed" || text == "many_to_many_delayed") return Wiring::delayed;
  throw std::invalid_argument("unknown sequence wiring: " + text);
}

SequenceLayout sequence_layout(Wiring wiring, std::size_t t_in, std::size_t t_out) {
  auto fail = [&](const char* rule) {
    throw std::invalid_argument("sequence wiring " + to_string(wiring) + " needs " + rule +
                                " (got T_in = " + std::to_string(t_in) +
                                ", T_out = " + std::to_string(t_out) + ")");
  };
  SequenceLayout l;
  switch (wiring) {
    case Wiring::one_to_many:
      if (t_in != 1 || t_out == 0) fail("T_in = 1 and T_out >= 1");
      l.steps = t_out;
      l.takes_input.assign(l.steps, false);
      l.takes_input[0] = true;
      l.emits_output.assign(l.steps, true);
      break;
    case Wiring::many_to_one:
      if (t_in == 0 || t_out != 1) fail("T_in >= 1 and T_out = 1");
      l.steps = t_in;
      l.takes_input.assign(l.steps, true);
      l.emits_output.assign(l.steps, false);
      l.emits_output.back() = true;
      break;
    case Wiring::aligned:
      if (t_in == 0 || t_in != t_out) fail("T_in = T_out >= 1");
      l.steps = t_in;
      l.takes_input.assign(l.steps, true);
      l.emits_output.assign(l.steps, true);
      break;
    case Wiring::delayed:
      if (t_in == 0 || t_out == 0) fail("T_in >= 1 and T_out >= 1");
      l.steps = t_in + t_out;
      l.takes_input.assign(l.steps, false);
      l.emits_output.assign(l.steps, false);
      for (std::size_t t = 0; t < t_in; ++t) l.takes_input[t] = true;
      for (std::size_t t = t_in; t < l.steps; ++t) l.emits_output[t] = true;
      break;
  }
  return l;
}

std::vector<Tensor> expand_inputs(const SequenceLayout& layout, const std::vector<Tensor>& inputs,
                                  std::size_t n_u) {
  if (inputs.empty()) throw std::invalid_argument("sequence: no inputs");
  const std::size_t batch = inputs.front().rank() == 2 ? inputs.front().extent(1) : 1;
  std::vector<Tensor> steps;
  std::size_t next = 0;
  for (std::size_t t = 0; t < layout.steps; ++t) {
    if (layout.takes_input[t]) {
      if (next >= inputs.size()) throw std::invalid_argument("sequence: too few inputs for layout");
      steps.push_back(inputs[next++]);
    } else {
      steps.emplace_back(Shape{n_u, batch});
    }
  }
  return steps;
}

Unrolled unroll_steps(const RnnCellSpec& spec, const ParamSet& params,
                      const std::vector<Tensor>& step_inputs) {
  if (step_inputs.empty()) throw std::invalid_argument("unroll: empty sequence");
  Unrolled run;
  run.steps.reserve(step_inputs.size());
  Tensor h, c;
  for (const Tensor& u : step_inputs) {
    run.steps.push_back(cell_step(spec, params, h, c, u));
    h = run.steps.back().h;
    c = run.steps.back().c;
  }
  return run;
}

namespace {

void accumulate(GradSet& total, GradSet step, std::optional<double> clip) {
  if (clip) clip_gradients(step, *clip);
  for (auto& [name, value] : total) add_into(value, step[name]);
}

void add_outer(GradSet& g, const char* w, const char* b, const Tensor& z_bar, const Tensor& x) {
  add_into(g[w], matmul(z_bar, transpose(x)));
  if (b) add_into(g[b], sum_columns(z_bar));
}

}  // namespace

BpttResult bptt_steps(const RnnCellSpec& spec, const ParamSet& params, const Unrolled& run,
                      const std::vector<Tensor>& y_bar, const std::vector<Tensor>& h_bar,
                      std::optional<double> clip) {
  const std::size_t T = run.steps.size();
  if (!y_bar.empty() && y_bar.size() != T) throw std::invalid_argument("bptt: y_bar length mismatch");
  if (!h_bar.empty() && h_bar.size() != T) throw std::invalid_argument("bptt: h_bar length mismatch");
  BpttResult result;
  result.grads = params.zeros_like();
  result.input_grads.resize(T);
  const std::size_t n_h = spec.n_h;
  Tensor h_next_bar, c_next_bar;  // flowing back from step t + 1
  for (std::size_t t = T; t-- > 0;) {
    const StepCache& s = run.steps[t];
    GradSet g = params.zeros_like();
    Tensor hb = h_next_bar.empty() ? Tensor(s.h.shape()) : h_next_bar;
    if (!h_bar.empty() && !h_bar[t].empty()) add_into(hb, h_bar[t]);
    if (!y_bar.empty() && !y_bar[t].empty()) {
      require_same_shape(y_bar[t].shape(), s.y.shape(), "bptt y_bar");
      add_outer(g, "W_out", nullptr, y_bar[t], s.h);
      add_into(hb, matmul(transpose(params["W_out"]), y_bar[t]));
    }
    Tensor x_bar;
    Tensor h_prev_bar(s.h_prev.shape());
    switch (spec.kind) {
      case CellKind::vanilla: {
        const Tensor z_bar = hadamard(hb, activate_prime(spec.hidden, s.z));
        add_outer(g, "W_in", "b", z_bar, s.x);
        x_bar = matmul(transpose(params["W_in"]), z_bar);
        break;
      }
      case CellKind::gru: {
        Tensor gu_bar(hb.shape()), cand_bar(hb.shape());
        for (std::size_t k = 0; k < hb.size(); ++k) {
          gu_bar[k] = hb[k] * (s.cand[k] - s.h_prev[k]);
          cand_bar[k] = hb[k] * s.gate_u[k];
          h_prev_bar[k] = hb[k] * (1.0 - s.gate_u[k]);
        }
        const Tensor zc_bar = hadamard(cand_bar, tanh_slope(s.cand));
        add_outer(g, "W_in", "b", zc_bar, s.x_reset);
        const Tensor xr_bar = matmul(transpose(params["W_in"]), zc_bar);
        const Tensor rh_bar = row_block(xr_bar, 0, n_h);
        const Tensor r_bar = hadamard(rh_bar, s.h_prev);
        add_into(h_prev_bar, hadamard(rh_bar, s.gate_r));
        const Tensor zu_bar = hadamard(gu_bar, sigmoid_slope(s.gate_u));
        const Tensor zr_bar = hadamard(r_bar, sigmoid_slope(s.gate_r));
        add_outer(g, "W_r", "b_r", zr_bar, s.x);
        add_outer(g, "W_u", "b_u", zu_bar, s.x);
        x_bar = matmul(transpose(params["W_r"]), zr_bar);
        add_into(x_bar, matmul(transpose(params["W_u"]), zu_bar));
        // The input also reaches the candidate directly through x_reset.
        Tensor u_direct = row_block(xr_bar, n_h, spec.n_u);
        Tensor pad(Shape{n_h, u_direct.extent(1)});
        add_into(x_bar, vstack(pad, u_direct));
        break;
      }
      case CellKind::lstm: {
        Tensor cb = c_next_bar.empty() ? Tensor(s.c.shape()) : c_next_bar;
        Tensor o_bar(hb.shape());
        for (std::size_t k = 0; k < hb.size(); ++k) {
          o_bar[k] = hb[k] * s.tanh_c[k];
          cb[k] += hb[k] * s.gate_o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
        }
        Tensor f_bar(hb.shape()), i_bar(hb.shape()), cand_bar(hb.shape()), c_prev_bar(hb.shape());
        for (std::size_t k = 0; k < hb.size(); ++k) {
          f_bar[k] = cb[k] * s.c_prev[k];
          c_prev_bar[k] = cb[k] * s.gate_f[k];
          i_bar[k] = cb[k] * s.cand[k];
          cand_bar[k] = cb[k] * s.gate_i[k];
        }
        const Tensor zf = hadamard(f_bar, sigmoid_slope(s.gate_f));
        const Tensor zi = hadamard(i_bar, sigmoid_slope(s.gate_i));
        const Tensor zo = hadamard(o_bar, sigmoid_slope(s.gate_o));
        const Tensor zc = hadamard(cand_bar, tanh_slope(s.cand));
        add_outer(g, "W_f", "b_f", zf, s.x);
        add_outer(g, "W_i", "b_i", zi, s.x);
        add_outer(g, "W_o", "b_o", zo, s.x);
        add_outer(g, "W_c", "b_c", zc, s.x);
        x_bar = matmul(transpose(params["W_f"]), zf);
        add_into(x_bar, matmul(transpose(params["W_i"]), zi));
        add_into(x_bar, matmul(transpose(params["W_o"]), zo));
        add_into(x_bar, matmul(transpose(params["W_c"]), zc));
        c_next_bar = std::move(c_prev_bar);
        break;
      }
    }
    add_into(h_prev_bar, row_block(x_bar, 0, n_h));
    result.input_grads[t] = row_block(x_bar, n_h, spec.n_u);
    h_next_bar = std::move(h_prev_bar);
    accumulate(result.grads, std::move(g), clip);
  }
  return result;
}

SequenceForward unroll(const RnnCellSpec& spec, const ParamSet& params, const SequenceBatch& batch) {
  SequenceForward f;
  f.layout = sequence_layout(batch.wiring, batch.inputs.size(), batch.output_steps());
  f.run = unroll_steps(spec, params, expand_inputs(f.layout, batch.inputs, spec.n_u));
  for (std::size_t t = 0; t < f.layout.steps; ++t)
    if (f.layout.emits_output[t]) f.outputs.push_back(f.run.steps[t].y);
  return f;
}

SequenceLoss sequence_loss(LossKind kind, const std::vector<Tensor>& outputs,
                           const std::vector<Tensor>& targets) {
  if (outputs.size() != targets.size()) {
    throw std::invalid_argument("sequence_loss: " + std::to_string(outputs.size()) + " outputs vs " +
                                std::to_string(targets.size()) + " targets");
  }
  SequenceLoss loss;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    switch (kind) {
      case LossKind::mse:
        loss.value += mse(outputs[t], targets[t]);
        loss.output_grads.push_back(mse_grad(outputs[t], targets[t]));
        break;
      case LossKind::softmax_nll: {
        require_same_shape(outputs[t].shape(), targets[t].shape(), "sequence_loss");
        std::vector<std::size_t> labels(targets[t].extent(1));
        for (std::size_t j = 0; j < labels.size(); ++j) labels[j] = argmax(column(targets[t], j));
        loss.value += softmax_nll(outputs[t], labels);
        loss.output_grads.push_back(softmax_nll_grad(outputs[t], labels));
        break;
      }
      case LossKind::bce:
        throw std::invalid_argument("sequence_loss: bce is not supported for sequence outputs");
    }
  }
  return loss;
}

namespace {

std::vector<Tensor> spread_outputs(const SequenceLayout& layout, const std::vector<Tensor>& grads) {
  std::vector<Tensor> per_step(layout.steps);
  std::size_t next = 0;
  for (std::size_t t = 0; t < layout.steps; ++t) {
    if (!layout.emits_output[t]) continue;
    if (next >= grads.size()) throw std::invalid_argument("bptt: too few output gradients");
    per_step[t] = grads[next++];
  }
  if (next != grads.size()) throw std::invalid_argument("bptt: too many output gradients");
  return per_step;
}

}  // namespace

BpttResult bptt(const RnnCellSpec& spec, const ParamSet& params, const SequenceForward& forward,
                const std::vector<Tensor>& output_grads, std::optional<double> clip) {
  return bptt_steps(spec, params, forward.run, spread_outputs(forward.layout, output_grads), {}, clip);
}

Bidirectional bidirectional(const RnnCellSpec& fwd_spec, const ParamSet& fwd_params,
                            const RnnCellSpec& bwd_spec, const ParamSet& bwd_params,
                            const std::vector<Tensor>& inputs) {
  if (fwd_spec.n_u != bwd_spec.n_u) throw ShapeError("bidirectional: input widths differ");
  Bidirectional b;
  b.forward = unroll_steps(fwd_spec, fwd_params, inputs);
  const std::vector<Tensor> reversed(inputs.rbegin(), inputs.rend());
  b.backward = unroll_steps(bwd_spec, bwd_params, reversed);
  const std::size_t T = inputs.size();
  for (std::size_t t = 0; t < T; ++t)
    b.states.push_back(vstack(b.forward.steps[t].h, b.backward.steps[T - 1 - t].h));
  return b;
}

BidirectionalGrads bidirectional_backward(const RnnCellSpec& fwd_spec, const ParamSet& fwd_params,
                                          const RnnCellSpec& bwd_spec, const ParamSet& bwd_params,
                                          const Bidirectional& run,
                                          const std::vector<Tensor>& state_grads) {
  const std::size_t T = run.states.size();
  if (state_grads.size() != T) throw std::invalid_argument("bidirectional: state gradient count");
  std::vector<Tensor> hf(T), hb(T);
  for (std::size_t t = 0; t < T; ++t) {
    require_same_shape(state_grads[t].shape(), run.states[t].shape(), "bidirectional state grad");
    hf[t] = row_block(state_grads[t], 0, fwd_spec.n_h);
    hb[T - 1 - t] = row_block(state_grads[t], fwd_spec.n_h, bwd_spec.n_h);
  }
  BpttResult f = bptt_steps(fwd_spec, fwd_params, run.forward, {}, hf);
  BpttResult b = bptt_steps(bwd_spec, bwd_params, run.backward, {}, hb);
  BidirectionalGrads out{std::move(f.grads), std::move(b.grads), {}};
  for (std::size_t t = 0; t < T; ++t)
    out.input_grads.push_back(add(f.input_grads[t], b.input_grads[T - 1 - t]));
  return out;
}

void check_stack(const std::vector<RnnCellSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("stack_deep: no layers");
  for (std::size_t k = 1; k < specs.size(); ++k) {
    if (specs[k - 1].n_y != specs[k].n_u) {
      throw ShapeError("stack_deep: layer " + std::to_string(k - 1) + " emits " +
                       std::to_string(specs[k - 1].n_y) + " values but layer " + std::to_string(k) +
                       " reads " + std::to_string(specs[k].n_u));
    }
  }
}

DeepForward stack_deep(const std::vector<RnnCellSpec>& specs, const std::vector<ParamSet>& params,
                       const SequenceBatch& batch) {
  check_stack(specs);
  if (params.size() != specs.size()) throw std::invalid_argument("stack_deep: parameter count");
  DeepForward f;
  f.layout = sequence_layout(batch.wiring, batch.inputs.size(), batch.output_steps());
  std::vector<Tensor> seq = expand_inputs(f.layout, batch.inputs, specs.front().n_u);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    f.layers.push_back(unroll_steps(specs[k], params[k], seq));
    seq.clear();
    for (const auto& s : f.layers.back().steps) seq.push_back(s.y);
  }
  for (std::size_t t = 0; t < f.layout.steps; ++t)
    if (f.layout.emits_output[t]) f.outputs.push_back(seq[t]);
  return f;
}

DeepGrads stack_deep_backward(const std::vector<RnnCellSpec>& specs,
                              const std::vector<ParamSet>& params, const DeepForward& forward,
                              const std::vector<Tensor>& output_grads, std::optional<double> clip) {
  DeepGrads out;
  out.grads.resize(specs.size());
  std::vector<Tensor> y_bar = spread_outputs(forward.layout, output_grads);
  for (std::size_t k = specs.size(); k-- > 0;) {
    BpttResult r = bptt_steps(specs[k], params[k], forward.layers[k], y_bar, {}, clip);
    out.grads[k] = std::move(r.grads);
    y_bar = std::move(r.input_grads);
  }
  out.input_grads = std::move(y_bar);
  return out;
}

Tensor one_hot_encode(std::size_t index, std::size_t vocab_size) {
  if (index >= vocab_size) {
    throw std::out_of_range("one_hot_encode: index " + std::to_string(index) +
                            " outside vocabulary of size " + std::to_string(vocab_size));
  }
  Tensor v({vocab_size});
  v[index] = 1.0;
  return v;
}

std::size_t one_hot_decode(const Tensor& v) { return argmax(v); }

Vocabulary::Vocabulary(std::vector<std::string> words) {
  std::sort(words.begin(), words.end());
  words.emplace_back("<unk>");
  words.emplace_back("<eos>");
  tokens_ = std::move(words);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second)
      throw std::invalid_argument("vocabulary: duplicate token " + tokens_[i]);
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("vocabulary: cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 2) throw std::runtime_error("vocabulary: " + path + " lacks the two reserved tokens");
  Vocabulary v;
  v.tokens_ = std::move(lines);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], i).second)
      throw std::runtime_error("vocabulary: duplicate token '" + v.tokens_[i] + "' on line " +
                               std::to_string(i + 1));
  }
  return v;
}

std::size_t Vocabulary::index_of(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? unk() : it->second;
}

const std::string& Vocabulary::word(std::size_t index) const {
  if (index >= tokens_.size()) throw std::out_of_range("vocabulary: index " + std::to_string(index));
  return tokens_[index];
}

}  // namespace nnl
