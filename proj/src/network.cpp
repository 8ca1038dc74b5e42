#include "nnl/network.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nnl/text.hpp"

namespace nnl {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string prefix_of(std::size_t index) { return std::to_string(index) + "."; }

}  // namespace

bool NetworkSpec::is_sequence_model() const {
  return layers.size() == 1 && std::holds_alternative<RnnCellSpec>(layers.front());
}

const RnnCellSpec& NetworkSpec::cell() const {
  if (!is_sequence_model()) throw std::logic_error("network is not a sequence model");
  return std::get<RnnCellSpec>(layers.front());
}

// ---------------------------------------------------------------------------
// Architecture text

std::string format_layer(const LayerSpec& layer) {
  std::ostringstream out;
  std::visit(
      overloaded{
          [&](const DenseLayerSpec& d) {
            out << "dense " << d.n_in << ' ' << d.n_out << ' ' << to_string(d.activation);
          },
          [&](const ConvLayerSpec& c) {
            out << "conv " << c.in_rows << ' ' << c.in_cols << ' ' << c.in_depth << ' '
                << c.filters << ' ' << c.geometry.kernel << ' ' << c.geometry.stride << ' '
                << c.geometry.padding;
          },
          [&](const DetectorSpec& d) { out << "detector " << to_string(d.activation); },
          [&](const PoolSpec& p) {
            out << (p.kind == PoolKind::max ? "maxpool " : "avgpool ") << p.m << ' ' << p.s << ' '
                << p.p;
          },
          [&](const BatchNormSpec& b) {
            out << "batchnorm " << b.n_in << ' ' << b.n_out << ' ' << format_real(b.eps);
            if (b.per_component) out << " percomp";
          },
          [&](const LrnSpec& l) {
            out << "lrn " << (l.mode == LrnMode::inter_channel ? "inter " : "intra ") << l.n << ' '
                << format_real(l.kappa) << ' ' << format_real(l.gamma) << ' '
                << format_real(l.beta);
          },
          [&](const DropoutSpec& d) { out << "dropout " << format_real(d.p); },
          [&](const FlattenSpec&) { out << "flatten"; },
          [&](const ResidualLayerSpec& r) {
            out << "residual " << r.n_in << ' ' << r.n_out << ' ' << to_string(r.activation) << ' '
                << format_real(r.tau);
            if (r.learn_tau) out << " learn_tau";
          },
          [&](const ResidualBlockSpec& b) {
            out << "resblock " << to_string(b.variant) << ' ' << b.n << ' ' << format_real(b.eps);
          },
          [&](const RnnCellSpec& c) {
            out << "rnn " << to_string(c.kind) << ' ' << c.n_u << ' ' << c.n_h << ' ' << c.n_y;
            if (c.kind == CellKind::vanilla) out << ' ' << to_string(c.hidden);
          },
      },
      layer);
  return out.str();
}

namespace {

class LayerTokens {
 public:
  explicit LayerTokens(const std::string& text) : text_(text), tokens_(split_whitespace(text)) {
    if (tokens_.empty()) throw std::invalid_argument("empty layer description");
  }

  const std::string& kind() const { return tokens_[0]; }
  std::size_t count() const { return tokens_.size() - 1; }
  bool has(std::size_t i) const { return i + 1 < tokens_.size(); }
  const std::string& raw(std::size_t i) const {
    if (!has(i)) fail("missing field " + std::to_string(i + 1));
    return tokens_[i + 1];
  }
  std::size_t size_at(std::size_t i) const { return guarded([&] { return parse_count(raw(i)); }); }
  std::size_t positive_at(std::size_t i) const {
    const std::size_t v = size_at(i);
    if (v == 0) fail("field " + std::to_string(i + 1) + " must be positive");
    return v;
  }
  double real_at(std::size_t i) const { return guarded([&] { return parse_real(raw(i)); }); }
  Activation act_at(std::size_t i) const { return guarded([&] { return parse_activation(raw(i)); }); }

  void arity(std::size_t lo, std::size_t hi) const {
    if (count() < lo || count() > hi) {
      fail("expected " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi)) +
           " fields, got " + std::to_string(count()));
    }
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("layer '" + text_ + "': " + why);
  }

 private:
  template <class F>
  auto guarded(F f) const -> decltype(f()) {
    try {
      return f();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  std::string text_;
  std::vector<std::string> tokens_;
};

}  // namespace

LayerSpec parse_layer(const std::string& text) {
  const LayerTokens t(std::string(trim(text)));
  const std::string& kind = t.kind();
  if (kind == "dense") {
    t.arity(3, 3);
    return DenseLayerSpec{t.positive_at(0), t.positive_at(1), t.act_at(2)};
  }
  if (kind == "conv") {
    t.arity(7, 7);
    ConvLayerSpec c{t.positive_at(0), t.positive_at(1), t.positive_at(2), t.positive_at(3),
                    {t.positive_at(4), t.positive_at(5), t.size_at(6)}};
    return c;
  }
  if (kind == "detector") {
    t.arity(1, 1);
    return DetectorSpec{t.act_at(0)};
  }
  if (kind == "maxpool" || kind == "avgpool") {
    t.arity(2, 3);
    return PoolSpec{kind == "maxpool" ? PoolKind::max : PoolKind::avg, t.positive_at(0),
                    t.positive_at(1), t.has(2) ? t.size_at(2) : 0};
  }
  if (kind == "batchnorm") {
    t.arity(2, 4);
    BatchNormSpec b{t.positive_at(0), t.positive_at(1)};
    for (std::size_t i = 2; t.has(i); ++i) {
      if (t.raw(i) == "percomp") {
        b.per_component = true;
      } else if (i == 2) {
        b.eps = t.real_at(i);
        if (b.eps < 0) t.fail("eps must be >= 0");
      } else {
        t.fail("unexpected '" + t.raw(i) + "'");
      }
    }
    return b;
  }
  if (kind == "lrn") {
    t.arity(5, 5);
    LrnSpec l;
    if (t.raw(0) == "inter") {
      l.mode = LrnMode::inter_channel;
    } else if (t.raw(0) == "intra") {
      l.mode = LrnMode::intra_channel;
    } else {
      t.fail("mode must be inter or intra");
    }
    l.n = t.positive_at(1);
    l.kappa = t.real_at(2);
    l.gamma = t.real_at(3);
    l.beta = t.real_at(4);
    return l;
  }
  if (kind == "dropout") {
    t.arity(1, 1);
    const double p = t.real_at(0);
    if (!(p >= 0 && p < 1)) t.fail("probability must lie in [0,1)");
    return DropoutSpec{p};
  }
  if (kind == "flatten") {
    t.arity(0, 0);
    return FlattenSpec{};
  }
  if (kind == "residual") {
    t.arity(3, 5);
    ResidualLayerSpec r{t.positive_at(0), t.positive_at(1), t.act_at(2)};
    for (std::size_t i = 3; t.has(i); ++i) {
      if (t.raw(i) == "learn_tau") {
        r.learn_tau = true;
      } else if (i == 3) {
        r.tau = t.real_at(i);
      } else {
        t.fail("unexpected '" + t.raw(i) + "'");
      }
    }
    return r;
  }
  if (kind == "resblock") {
    t.arity(2, 3);
    ResidualBlockSpec b;
    try {
      b.variant = parse_block_variant(t.raw(0));
    } catch (const std::invalid_argument& e) {
      t.fail(e.what());
    }
    b.n = t.positive_at(1);
    if (t.has(2)) b.eps = t.real_at(2);
    return b;
  }
  if (kind == "rnn") {
    t.arity(4, 5);
    RnnCellSpec c;
    try {
      c.kind = parse_cell_kind(t.raw(0));
    } catch (const std::invalid_argument& e) {
      t.fail(e.what());
    }
    c.n_u = t.positive_at(1);
    c.n_h = t.positive_at(2);
    c.n_y = t.positive_at(3);
    if (t.has(4)) {
      if (c.kind != CellKind::vanilla) t.fail("only vanilla cells take an activation");
      c.hidden = t.act_at(4);
    }
    return c;
  }
  t.fail("unknown layer kind '" + kind + "'");
}

std::string format_network(const NetworkSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (i) out += "; ";
    out += format_layer(spec.layers[i]);
  }
  return out;
}

NetworkSpec parse_network(const std::string& text) {
  NetworkSpec spec;
  for (const auto& part : split(text, ';')) {
    if (trim(part).empty()) continue;
    spec.layers.push_back(parse_layer(part));
  }
  if (spec.layers.empty()) throw std::invalid_argument("architecture has no layers");
  infer_shapes(spec);
  return spec;
}

// ---------------------------------------------------------------------------
// Shapes and parameters

std::vector<Shape> infer_shapes(const NetworkSpec& spec) {
  if (spec.layers.empty()) throw ShapeError("network has no layers");
  std::vector<Shape> shapes;
  std::optional<Shape> cur;
  const std::size_t L = spec.layers.size();
  for (std::size_t i = 0; i < L; ++i) {
    const LayerSpec& layer = spec.layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + format_layer(layer) + ")";
    auto expect = [&](const Shape& want) {
      if (!cur) {
        cur = want;
        shapes.push_back(want);
      } else if (*cur != want) {
        throw ShapeError(where + " expects input " + to_string(want) + " but receives " +
                         to_string(*cur));
      }
    };
    auto need_input = [&]() -> const Shape& {
      if (!cur) throw ShapeError(where + " cannot be first: it does not fix the input shape");
      return *cur;
    };
    auto no_softmax = [&](const Activation& a) {
      if (a.kind == ActivationKind::softmax && !(i + 1 == L && std::holds_alternative<DenseLayerSpec>(layer)))
        throw ShapeError(where + ": softmax is only allowed on a final dense layer");
    };
    Shape next = std::visit(
        overloaded{
            [&](const DenseLayerSpec& d) -> Shape {
              no_softmax(d.activation);
              expect({d.n_in});
              return {d.n_out};
            },
            [&](const ConvLayerSpec& c) -> Shape {
              expect({c.in_rows, c.in_cols, c.in_depth});
              const auto& g = c.geometry;
              if (g.kernel > c.in_rows + 2 * g.padding || g.kernel > c.in_cols + 2 * g.padding)
                throw ShapeError(where + ": kernel larger than the padded input");
              return c.output_shape();
            },
            [&](const DetectorSpec& d) -> Shape {
              no_softmax(d.activation);
              return need_input();
            },
            [&](const PoolSpec& p) -> Shape {
              const Shape& in = need_input();
              if (in.size() != 3) throw ShapeError(where + " needs (rows, cols, channels) input");
              if (p.m > in[0] + 2 * p.p || p.m > in[1] + 2 * p.p)
                throw ShapeError(where + ": window larger than the padded input");
              const OutShape o = out_shape(in[0], in[1], {p.m, p.s, p.p});
              return {o.rows, o.cols, in[2]};
            },
            [&](const BatchNormSpec& b) -> Shape {
              expect({b.n_in});
              return {b.n_out};
            },
            [&](const LrnSpec&) -> Shape {
              const Shape& in = need_input();
              if (in.size() != 3) throw ShapeError(where + " needs (rows, cols, channels) input");
              return in;
            },
            [&](const DropoutSpec&) -> Shape { return need_input(); },
            [&](const FlattenSpec&) -> Shape { return {element_count(need_input())}; },
            [&](const ResidualLayerSpec& r) -> Shape {
              no_softmax(r.activation);
              expect({r.n_in});
              return {r.n_out};
            },
            [&](const ResidualBlockSpec& b) -> Shape {
              expect({b.n});
              return {b.n};
            },
            [&](const RnnCellSpec& c) -> Shape {
              if (L != 1) throw ShapeError(where + ": a recurrent cell must be the only layer");
              expect({c.n_u});
              return {c.n_y};
            },
        },
        layer);
    cur = next;
    shapes.push_back(std::move(next));
  }
  return shapes;
}

namespace {

std::vector<std::pair<std::string, Shape>> local_shapes(const LayerSpec& layer) {
  return std::visit(
      overloaded{
          [](const DenseLayerSpec& d) -> std::vector<std::pair<std::string, Shape>> {
            return {{"W", {d.n_out, d.n_in}}, {"b", {d.n_out}}};
          },
          [](const ConvLayerSpec& c) -> std::vector<std::pair<std::string, Shape>> {
            return {{"K", c.kernel_shape()}, {"b", {c.filters}}};
          },
          [](const BatchNormSpec& b) -> std::vector<std::pair<std::string, Shape>> {
            return {{"W", {b.n_out, b.n_in}}, {"b", {b.n_out}}};
          },
          [](const ResidualLayerSpec& r) -> std::vector<std::pair<std::string, Shape>> {
            std::vector<std::pair<std::string, Shape>> s{{"W", {r.n_out, r.n_in}}, {"b", {r.n_out}}};
            if (r.needs_projection()) s.push_back({"P", {r.n_out, r.n_in}});
            if (r.learn_tau) s.push_back({"tau", {1}});
            return s;
          },
          [](const ResidualBlockSpec& b) -> std::vector<std::pair<std::string, Shape>> {
            const Shape sq{b.n, b.n}, v{b.n};
            std::vector<std::pair<std::string, Shape>> s{{"W1", sq}, {"G1", sq}, {"b_g1", v},
                                                         {"W2", sq}, {"G2", sq}, {"b_g2", v}};
            if (b.variant == BlockVariant::pre_activation) s.push_back({"b2", v});
            return s;
          },
          [](const RnnCellSpec& c) { return c.parameter_shapes(); },
          [](const auto&) -> std::vector<std::pair<std::string, Shape>> { return {}; },
      },
      layer);
}

Tensor eye(const Shape& shape) {
  Tensor t(shape);
  for (std::size_t i = 0; i < std::min(shape[0], shape[1]); ++i) t(i, i) = 1.0;
  return t;
}

}  // namespace

std::vector<std::pair<std::string, Shape>> parameter_shapes(const NetworkSpec& spec) {
  std::vector<std::pair<std::string, Shape>> out;
  for (std::size_t i = 0; i < spec.layers.size(); ++i)
    for (auto& [name, shape] : local_shapes(spec.layers[i])) out.push_back({prefix_of(i) + name, shape});
  return out;
}

std::size_t param_count(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const auto& [name, shape] : parameter_shapes(spec)) n += element_count(shape);
  return n;
}

ParamSet init_layer_params(const NetworkSpec& spec, std::size_t index, const InitScheme& scheme,
                           Rng& rng) {
  const LayerSpec& layer = spec.layers.at(index);
  ParamSet out;
  for (const auto& [local, shape] : local_shapes(layer)) {
    const std::string name = prefix_of(index) + local;
    Tensor value;
    if (local == "tau") {
      value = Tensor({1}, std::get<ResidualLayerSpec>(layer).tau);
    } else if (is_bias_name(local)) {
      value = Tensor(shape);
    } else if (std::holds_alternative<BatchNormSpec>(layer) || local == "G1" || local == "G2") {
      value = eye(shape);
    } else if (local == "P") {
      value = init_tensor({InitKind::xavier}, shape, shape[1], rng);
    } else if (const auto* c = std::get_if<ConvLayerSpec>(&layer)) {
      value = init_tensor(scheme, shape, c->geometry.kernel * c->geometry.kernel * c->in_depth, rng);
    } else {
      value = init_tensor(scheme, shape, shape[1], rng);
    }
    out.insert(name, std::move(value));
  }
  return out;
}

ParamSet init_params(const NetworkSpec& spec, const InitScheme& scheme, std::uint64_t seed) {
  infer_shapes(spec);
  Rng rng(seed);
  ParamSet params;
  for (std::size_t i = 0; i < spec.layers.size(); ++i)
    for (auto& e : init_layer_params(spec, i, scheme, rng)) params.insert(e.name, std::move(e.value));
  return params;
}

// ---------------------------------------------------------------------------
// Forward and backward passes

namespace {

struct LayerParams {
  const ParamSet& all;
  std::string prefix;
  const Tensor& operator[](const char* local) const { return all[prefix + local]; }
  bool has(const char* local) const { return all.contains(prefix + local); }
};

ResidualParams residual_params(const ResidualLayerSpec& r, const LayerParams& p) {
  return {p["W"], p["b"], r.needs_projection() ? &p["P"] : nullptr,
          r.learn_tau ? p["tau"][0] : r.tau};
}

}  // namespace

ForwardCache network_forward(const NetworkSpec& spec, const ParamSet& params, const Tensor& batch,
                             Mode mode, Rng* rng) {
  if (spec.is_sequence_model())
    throw std::invalid_argument("network_forward: sequence models run through the recurrent API");
  const std::vector<Shape> shapes = infer_shapes(spec);
  Tensor input = batch;
  if (batch.shape() == shapes.front()) {
    Shape one = batch.shape();
    one.push_back(1);
    input = batch.reshaped(one);
  }
  {
    Shape sample(input.shape().begin(), input.shape().end() - 1);
    if (input.rank() == 0 || sample != shapes.front()) {
      throw ShapeError("network_forward: batch " + to_string(batch.shape()) +
                       " does not hold samples of shape " + to_string(shapes.front()));
    }
  }
  ForwardCache cache;
  cache.y.reserve(spec.layers.size() + 1);
  cache.y.push_back(std::move(input));
  cache.layers.resize(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerParams p{params, prefix_of(i)};
    LayerCache& lc = cache.layers[i];
    const Tensor& x = cache.y.back();
    Tensor y = std::visit(
        overloaded{
            [&](const DenseLayerSpec& d) {
              DenseForward f = dense_forward(d, p["W"], p["b"], x);
              lc.z = std::move(f.z);
              return std::move(f.y);
            },
            [&](const ConvLayerSpec& c) { return conv_forward(c, p["K"], p["b"], x); },
            [&](const DetectorSpec& d) { return detector_forward(d.activation, x); },
            [&](const PoolSpec& s) {
              lc.pool = pool_forward(s, x);
              return lc.pool.output;
            },
            [&](const BatchNormSpec& b) {
              lc.bn = batchnorm_forward(b, p["W"], p["b"], x);
              return lc.bn.output;
            },
            [&](const LrnSpec& l) { return lrn_forward(l, x); },
            [&](const DropoutSpec& d) {
              if (mode == Mode::train && d.p > 0 && rng == nullptr)
                throw std::invalid_argument("network_forward: dropout in train mode needs an Rng");
              Rng unused(0);
              DropoutForward f = dropout_forward(d.p, mode, rng ? *rng : unused, x);
              lc.mask = std::move(f.mask);
              return std::move(f.output);
            },
            [&](const FlattenSpec&) { return flatten(x); },
            [&](const ResidualLayerSpec& r) {
              lc.res = res_layer_forward(r, residual_params(r, p), x);
              return lc.res.y;
            },
            [&](const ResidualBlockSpec& b) {
              lc.block = block_forward(b, select_prefix(params, p.prefix), x);
              return lc.block.y;
            },
            [&](const RnnCellSpec&) -> Tensor { throw std::logic_error("unreachable"); },
        },
        spec.layers[i]);
    cache.y.push_back(std::move(y));
  }
  return cache;
}

Backprop backprop(const NetworkSpec& spec, const ParamSet& params, const ForwardCache& cache,
                  const Tensor& output_grad) {
  const std::size_t L = spec.layers.size();
  if (cache.layers.size() != L || cache.y.size() != L + 1)
    throw std::invalid_argument("backprop: cache does not belong to this network");
  require_same_shape(output_grad.shape(), cache.output().shape(), "backprop upstream");
  std::vector<TensorMap> local(L);
  Tensor g = output_grad;
  for (std::size_t i = L; i-- > 0;) {
    const LayerParams p{params, prefix_of(i)};
    const LayerCache& lc = cache.layers[i];
    const Tensor& x = cache.y[i];
    TensorMap& out = local[i];
    g = std::visit(
        overloaded{
            [&](const DenseLayerSpec& d) {
              DenseBackward b = dense_backward(d, p["W"], x, lc.z, g);
              out.insert("W", std::move(b.W));
              out.insert("b", std::move(b.b));
              return std::move(b.input);
            },
            [&](const ConvLayerSpec& c) {
              ConvBackward b = conv_backward(c, p["K"], x, g);
              out.insert("K", std::move(b.kernels));
              out.insert("b", std::move(b.bias));
              return std::move(b.input);
            },
            [&](const DetectorSpec& d) { return detector_backward(d.activation, x, g); },
            [&](const PoolSpec& s) { return pool_backward(s, x.shape(), lc.pool, g); },
            [&](const BatchNormSpec& b) {
              BatchNormBackward r = batchnorm_backward(b, p["W"], lc.bn, g);
              out.insert("W", std::move(r.W));
              out.insert("b", std::move(r.bias));
              return std::move(r.input);
            },
            [&](const LrnSpec& l) { return lrn_backward(l, x, g); },
            [&](const DropoutSpec&) { return dropout_backward(lc.mask, g); },
            [&](const FlattenSpec&) { return g.reshaped(x.shape()); },
            [&](const ResidualLayerSpec& r) {
              ResidualBackward b = res_layer_backward(r, residual_params(r, p), x, lc.res, g);
              out.insert("W", std::move(b.W));
              out.insert("b", std::move(b.b));
              if (r.needs_projection()) out.insert("P", std::move(b.P));
              if (r.learn_tau) out.insert("tau", Tensor({1}, b.tau));
              return std::move(b.input);
            },
            [&](const ResidualBlockSpec& b) {
              BlockBackward r = block_backward(b, select_prefix(params, p.prefix), x, lc.block, g);
              out = std::move(r.grads);
              return std::move(r.input);
            },
            [&](const RnnCellSpec&) -> Tensor { throw std::logic_error("unreachable"); },
        },
        spec.layers[i]);
  }
  Backprop result;
  for (std::size_t i = 0; i < L; ++i) merge_prefixed(result.grads, local[i], prefix_of(i));
  require_mirror(params, result.grads, "backprop");
  result.input = std::move(g);
  return result;
}

namespace {

bool softmax_head(const NetworkSpec& spec) {
  const auto* d = std::get_if<DenseLayerSpec>(&spec.layers.back());
  return d != nullptr && d->activation.kind == ActivationKind::softmax;
}

Tensor dense_targets(const Targets& targets, const Tensor& output) {
  if (!targets.dense.empty()) return targets.dense;
  if (targets.labels.empty()) throw std::invalid_argument("network_loss: no targets given");
  Tensor t(output.shape());
  for (std::size_t j = 0; j < targets.labels.size(); ++j) {
    if (targets.labels[j] >= output.extent(0)) throw std::out_of_range("network_loss: label out of range");
    t(targets.labels[j], j) = 1.0;
  }
  return t;
}

std::vector<std::size_t> label_targets(const Targets& targets) {
  if (!targets.labels.empty()) return targets.labels;
  if (targets.dense.empty()) throw std::invalid_argument("network_loss: no targets given");
  std::vector<std::size_t> labels(targets.dense.extent(1));
  for (std::size_t j = 0; j < labels.size(); ++j) labels[j] = argmax(column(targets.dense, j));
  return labels;
}

}  // namespace

LossAndGrad network_loss(const NetworkSpec& spec, const ForwardCache& cache, LossKind kind,
                         const Targets& targets) {
  const Tensor& out = cache.output();
  if (out.rank() != 2) throw ShapeError("network_loss: output must be (n, N), got " + to_string(out.shape()));
  const bool head = softmax_head(spec);
  LossAndGrad r;
  switch (kind) {
    case LossKind::softmax_nll: {
      const std::vector<std::size_t> labels = label_targets(targets);
      const Tensor& logits = head ? cache.layers.back().z : out;
      r.loss = softmax_nll(logits, labels);
      r.output_grad = softmax_nll_grad(logits, labels);
      break;
    }
    case LossKind::mse:
    case LossKind::bce: {
      if (head) throw std::invalid_argument("network_loss: a softmax output pairs only with softmax_nll");
      const Tensor s = dense_targets(targets, out);
      r.loss = kind == LossKind::mse ? mse(out, s) : bce(out, s);
      r.output_grad = kind == LossKind::mse ? mse_grad(out, s) : bce_grad(out, s);
      break;
    }
  }
  return r;
}

Tensor class_scores(const ForwardCache& cache) { return cache.output(); }

}  // namespace nnl
