#include "nnl/conv.hpp"

#include <algorithm>
#include <cmath>

#include "nnl/diagnostics.hpp"

namespace nnl {

namespace {

struct ImageDims {
  std::size_t rows, cols, depth, batch;
  bool single;  // input was a rank-3 single image

  std::size_t offset(std::size_t i, std::size_t j, std::size_t c, std::size_t s) const {
    return ((i * cols + j) * depth + c) * batch + s;
  }
  Shape shape() const {
    return single ? Shape{rows, cols, depth} : Shape{rows, cols, depth, batch};
  }
};

ImageDims image_dims(const Tensor& t, const char* where) {
  if (t.rank() == 3) return {t.extent(0), t.extent(1), t.extent(2), 1, true};
  if (t.rank() == 4) return {t.extent(0), t.extent(1), t.extent(2), t.extent(3), false};
  throw ShapeError(std::string(where) + ": expected (rows, cols, channels[, N]), got " +
                   to_string(t.shape()));
}

}  // namespace

Shape ConvLayerSpec::output_shape() const {
  const OutShape o = out_shape(in_rows, in_cols, geometry);
  return {o.rows, o.cols, filters};
}

std::size_t ConvLayerSpec::parameter_count() const {
  return filters * geometry.kernel * geometry.kernel * in_depth + filters;
}

namespace {

void check_conv(const ConvLayerSpec& spec, const Tensor& kernels, const ImageDims& in) {
  if (in.rows != spec.in_rows || in.cols != spec.in_cols || in.depth != spec.in_depth) {
    throw ShapeError("conv: input " + to_string(in.shape()) + " does not match layer input " +
                     to_string({spec.in_rows, spec.in_cols, spec.in_depth}));
  }
  require_same_shape(kernels.shape(), spec.kernel_shape(), "conv kernels");
}

}  // namespace

Tensor conv_forward(const ConvLayerSpec& spec, const Tensor& kernels, const Tensor& bias,
                    const Tensor& input) {
  const ImageDims in = image_dims(input, "conv_forward");
  check_conv(spec, kernels, in);
  require_same_shape(bias.shape(), {spec.filters}, "conv bias");
  const ConvGeometry& g = spec.geometry;
  const OutShape o = out_shape(in.rows, in.cols, g);
  if (o.inexact) warn("conv: stride does not divide the padded extent; ragged edge dropped");

  const Tensor padded = pad_zero(input, g.padding);
  const ImageDims pd{in.rows + 2 * g.padding, in.cols + 2 * g.padding, in.depth, in.batch, false};
  const ImageDims od{o.rows, o.cols, spec.filters, in.batch, in.single};
  Tensor out(od.shape());
  const std::size_t m = g.kernel;
  for (std::size_t s = 0; s < in.batch; ++s) {
    for (std::size_t f = 0; f < spec.filters; ++f) {
      for (std::size_t i = 0; i < o.rows; ++i) {
        for (std::size_t j = 0; j < o.cols; ++j) {
          double acc = 0.0;
          for (std::size_t c = 0; c < in.depth; ++c) {
            double part = 0.0;
            for (std::size_t a = 0; a < m; ++a)
              for (std::size_t b = 0; b < m; ++b)
                part += kernels[((f * m + a) * m + b) * in.depth + c] *
                        padded[pd.offset(i * g.stride + a, j * g.stride + b, c, s)];
            acc += part;
          }
          out[od.offset(i, j, f, s)] = acc + bias[f];
        }
      }
    }
  }
  return out;
}

ConvBackward conv_backward(const ConvLayerSpec& spec, const Tensor& kernels, const Tensor& input,
                           const Tensor& upstream) {
  const ImageDims in = image_dims(input, "conv_backward");
  check_conv(spec, kernels, in);
  const ConvGeometry& g = spec.geometry;
  const OutShape o = out_shape(in.rows, in.cols, g);
  const ImageDims od{o.rows, o.cols, spec.filters, in.batch, in.single};
  require_same_shape(upstream.shape(), od.shape(), "conv_backward upstream");

  const Tensor padded = pad_zero(input, g.padding);
  const ImageDims pd{in.rows + 2 * g.padding, in.cols + 2 * g.padding, in.depth, in.batch, false};
  Tensor d_padded(padded.shape());
  ConvBackward grads{Tensor(kernels.shape()), Tensor({spec.filters}), Tensor()};
  const std::size_t m = g.kernel;
  for (std::size_t s = 0; s < in.batch; ++s) {
    for (std::size_t f = 0; f < spec.filters; ++f) {
      for (std::size_t i = 0; i < o.rows; ++i) {
        for (std::size_t j = 0; j < o.cols; ++j) {
          const double up = upstream[od.offset(i, j, f, s)];
          grads.bias[f] += up;
          if (up == 0.0) continue;
          for (std::size_t c = 0; c < in.depth; ++c) {
            for (std::size_t a = 0; a < m; ++a) {
              for (std::size_t b = 0; b < m; ++b) {
                const std::size_t k = ((f * m + a) * m + b) * in.depth + c;
                const std::size_t p = pd.offset(i * g.stride + a, j * g.stride + b, c, s);
                grads.kernels[k] += up * padded[p];
                d_padded[p] += up * kernels[k];
              }
            }
          }
        }
      }
    }
  }
  grads.input = Tensor(input.shape());
  for (std::size_t i = 0; i < in.rows; ++i)
    for (std::size_t j = 0; j < in.cols; ++j)
      for (std::size_t c = 0; c < in.depth; ++c)
        for (std::size_t s = 0; s < in.batch; ++s)
          grads.input[in.offset(i, j, c, s)] =
              d_padded[pd.offset(i + g.padding, j + g.padding, c, s)];
  return grads;
}

Tensor detector_forward(const Activation& act, const Tensor& t) {
  if (act.kind == ActivationKind::softmax) {
    throw std::invalid_argument("detector: softmax is not a componentwise activation");
  }
  return activate(act, t);
}

Tensor detector_backward(const Activation& act, const Tensor& t, const Tensor& upstream) {
  require_same_shape(t.shape(), upstream.shape(), "detector_backward");
  return hadamard(upstream, activate_prime(act, t));
}

PoolForward pool_forward(const PoolSpec& spec, const Tensor& input) {
  const ImageDims in = image_dims(input, "pool_forward");
  const ConvGeometry g{spec.m, spec.s, spec.p};
  const OutShape o = out_shape(in.rows, in.cols, g);
  if (o.inexact) warn("pool: stride does not divide the padded extent; ragged edge dropped");
  const ImageDims od{o.rows, o.cols, in.depth, in.batch, in.single};
  PoolForward result{Tensor(od.shape()), {}};
  if (spec.kind == PoolKind::max) result.argmax.assign(result.output.size(), kPadSource);
  const double inv_area = 1.0 / static_cast<double>(spec.m * spec.m);

  for (std::size_t i = 0; i < o.rows; ++i) {
    for (std::size_t j = 0; j < o.cols; ++j) {
      for (std::size_t c = 0; c < in.depth; ++c) {
        for (std::size_t s = 0; s < in.batch; ++s) {
          double best = 0.0, total = 0.0;
          std::size_t best_src = kPadSource;
          bool first = true;
          for (std::size_t a = 0; a < spec.m; ++a) {
            for (std::size_t b = 0; b < spec.m; ++b) {
              // Position in padded coordinates; outside the input reads 0.
              const std::size_t pi = i * spec.s + a, pj = j * spec.s + b;
              const bool inside = pi >= spec.p && pj >= spec.p && pi - spec.p < in.rows &&
                                  pj - spec.p < in.cols;
              const std::size_t src = inside ? in.offset(pi - spec.p, pj - spec.p, c, s) : kPadSource;
              const double v = inside ? input[src] : 0.0;
              total += v;
              if (first || v > best) {
                best = v;
                best_src = src;
                first = false;
              }
            }
          }
          const std::size_t dst = od.offset(i, j, c, s);
          if (spec.kind == PoolKind::max) {
            result.output[dst] = best;
            result.argmax[dst] = best_src;
          } else {
            result.output[dst] = total * inv_area;
          }
        }
      }
    }
  }
  return result;
}

Tensor pool_backward(const PoolSpec& spec, const Shape& input_shape, const PoolForward& cache,
                     const Tensor& upstream) {
  require_same_shape(upstream.shape(), cache.output.shape(), "pool_backward upstream");
  Tensor grad(input_shape);
  if (spec.kind == PoolKind::max) {
    for (std::size_t k = 0; k < upstream.size(); ++k) {
      if (cache.argmax[k] != kPadSource) grad[cache.argmax[k]] += upstream[k];
    }
    return grad;
  }
  const Tensor probe(input_shape);
  const ImageDims in = image_dims(probe, "pool_backward");
  const ImageDims od = image_dims(upstream, "pool_backward");
  const double inv_area = 1.0 / static_cast<double>(spec.m * spec.m);
  for (std::size_t i = 0; i < od.rows; ++i)
    for (std::size_t j = 0; j < od.cols; ++j)
      for (std::size_t c = 0; c < od.depth; ++c)
        for (std::size_t s = 0; s < od.batch; ++s) {
          const double share = upstream[od.offset(i, j, c, s)] * inv_area;
          for (std::size_t a = 0; a < spec.m; ++a)
            for (std::size_t b = 0; b < spec.m; ++b) {
              const std::size_t pi = i * spec.s + a, pj = j * spec.s + b;
              if (pi < spec.p || pj < spec.p || pi - spec.p >= in.rows || pj - spec.p >= in.cols)
                continue;
              grad[in.offset(pi - spec.p, pj - spec.p, c, s)] += share;
            }
        }
  return grad;
}

BatchNormCache batchnorm_forward(const BatchNormSpec& spec, const Tensor& W, const Tensor& bias,
                                 const Tensor& batch) {
  if (batch.rank() != 2 || batch.extent(0) != spec.n_in) {
    throw ShapeError("batchnorm: input " + to_string(batch.shape()) + " does not have " +
                     std::to_string(spec.n_in) + " rows");
  }
  require_same_shape(W.shape(), {spec.n_out, spec.n_in}, "batchnorm weights");
  require_same_shape(bias.shape(), {spec.n_out}, "batchnorm bias");
  if (spec.eps < 0) throw std::invalid_argument("batchnorm: eps must be >= 0");
  const std::size_t n = spec.n_in, b = batch.extent(1);
  const double inv_b = 1.0 / static_cast<double>(b);

  BatchNormCache cache;
  cache.mu = scale(sum_columns(batch), inv_b);
  Tensor dev = batch;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b; ++j) dev(i, j) -= cache.mu[i];

  auto normalize = [&](double var, double d) {
    const double denom = var + spec.eps;
    return denom > 0 ? d / std::sqrt(denom) : 0.0;
  };
  cache.y_hat = Tensor(batch.shape());
  if (spec.per_component) {
    cache.variance = Tensor({n});
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < b; ++j) acc += dev(i, j) * dev(i, j);
      cache.variance[i] = acc * inv_b;
      for (std::size_t j = 0; j < b; ++j) cache.y_hat(i, j) = normalize(cache.variance[i], dev(i, j));
    }
  } else {
    double acc = 0.0;
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t i = 0; i < n; ++i) acc += dev(i, j) * dev(i, j);
    cache.variance = Tensor({1}, acc * inv_b);
    for (std::size_t k = 0; k < dev.size(); ++k) cache.y_hat[k] = normalize(cache.variance[0], dev[k]);
  }
  cache.output = add_column(matmul(W, cache.y_hat), bias);
  return cache;
}

BatchNormBackward batchnorm_backward(const BatchNormSpec& spec, const Tensor& W,
                                     const BatchNormCache& cache, const Tensor& upstream) {
  require_same_shape(upstream.shape(), cache.output.shape(), "batchnorm_backward upstream");
  const std::size_t n = spec.n_in, b = cache.y_hat.extent(1);
  const double inv_b = 1.0 / static_cast<double>(b);
  BatchNormBackward g;
  g.W = matmul(upstream, transpose(cache.y_hat));
  g.bias = sum_columns(upstream);
  const Tensor yhat_bar = matmul(transpose(W), upstream);

  // yhat = dev * r with r = (var + eps)^(-1/2), var = (1/b) sum dev^2.
  // dev_bar = r yhat_bar + (2/b) var_bar dev,  var_bar = -1/2 r^3 sum(yhat_bar * dev).
  // Expressed through yhat (= dev r): dev_bar = r (yhat_bar - (1/b) yhat * sum(yhat_bar * yhat)).
  Tensor dev_bar(cache.y_hat.shape());
  auto rate = [&](double var) {
    const double denom = var + spec.eps;
    return denom > 0 ? 1.0 / std::sqrt(denom) : 0.0;
  };
  if (spec.per_component) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = rate(cache.variance[i]);
      double proj = 0.0;
      for (std::size_t j = 0; j < b; ++j) proj += yhat_bar(i, j) * cache.y_hat(i, j);
      for (std::size_t j = 0; j < b; ++j)
        dev_bar(i, j) = r * (yhat_bar(i, j) - inv_b * cache.y_hat(i, j) * proj);
    }
  } else {
    const double r = rate(cache.variance[0]);
    double proj = 0.0;
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t i = 0; i < n; ++i) proj += yhat_bar(i, j) * cache.y_hat(i, j);
    for (std::size_t k = 0; k < dev_bar.size(); ++k)
      dev_bar[k] = r * (yhat_bar[k] - inv_b * cache.y_hat[k] * proj);
  }
  // dev = y - mu: subtract the column mean of dev_bar.
  const Tensor mean_bar = scale(sum_columns(dev_bar), inv_b);
  g.input = dev_bar;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b; ++j) g.input(i, j) -= mean_bar[i];
  return g;
}

namespace {

struct LrnWindow {
  std::size_t lo, hi;  // inclusive
};

LrnWindow clamp_window(std::size_t center, std::size_t half, std::size_t extent) {
  return {center >= half ? center - half : 0, std::min(extent - 1, center + half)};
}

void check_lrn(const LrnSpec& spec) {
  if (spec.n == 0) throw std::invalid_argument("lrn: window n must be positive");
}

// Denominator base kappa + gamma * sum of squares for every entry.
Tensor lrn_base(const LrnSpec& spec, const Tensor& input, const ImageDims& d) {
  Tensor base(input.shape());
  const std::size_t half = spec.n / 2;
  for (std::size_t i = 0; i < d.rows; ++i)
    for (std::size_t j = 0; j < d.cols; ++j)
      for (std::size_t k = 0; k < d.depth; ++k)
        for (std::size_t s = 0; s < d.batch; ++s) {
          double acc = 0.0;
          if (spec.mode == LrnMode::inter_channel) {
            const LrnWindow w = clamp_window(k, half, d.depth);
            for (std::size_t m = w.lo; m <= w.hi; ++m) {
              const double v = input[d.offset(i, j, m, s)];
              acc += v * v;
            }
          } else {
            const LrnWindow wr = clamp_window(i, half, d.rows);
            const LrnWindow wc = clamp_window(j, half, d.cols);
            for (std::size_t p = wr.lo; p <= wr.hi; ++p)
              for (std::size_t q = wc.lo; q <= wc.hi; ++q) {
                const double v = input[d.offset(p, q, k, s)];
                acc += v * v;
              }
          }
          base[d.offset(i, j, k, s)] = spec.kappa + spec.gamma * acc;
        }
  return base;
}

}  // namespace

Tensor lrn_forward(const LrnSpec& spec, const Tensor& input) {
  check_lrn(spec);
  const ImageDims d = image_dims(input, "lrn_forward");
  const Tensor base = lrn_base(spec, input, d);
  Tensor out(input.shape());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = input[k] / std::pow(base[k], spec.beta);
  return out;
}

Tensor lrn_backward(const LrnSpec& spec, const Tensor& input, const Tensor& upstream) {
  check_lrn(spec);
  require_same_shape(input.shape(), upstream.shape(), "lrn_backward");
  const ImageDims d = image_dims(input, "lrn_backward");
  const Tensor base = lrn_base(spec, input, d);
  // coef_k = upstream_k * Y_k * base_k^(-beta-1); the window relation is
  // symmetric, so entry l collects coef over its own window.
  Tensor coef(input.shape());
  Tensor grad(input.shape());
  for (std::size_t k = 0; k < input.size(); ++k) {
    coef[k] = upstream[k] * input[k] * std::pow(base[k], -spec.beta - 1.0);
    grad[k] = upstream[k] * std::pow(base[k], -spec.beta);
  }
  const std::size_t half = spec.n / 2;
  const double factor = 2.0 * spec.beta * spec.gamma;
  for (std::size_t i = 0; i < d.rows; ++i)
    for (std::size_t j = 0; j < d.cols; ++j)
      for (std::size_t k = 0; k < d.depth; ++k)
        for (std::size_t s = 0; s < d.batch; ++s) {
          double acc = 0.0;
          if (spec.mode == LrnMode::inter_channel) {
            const LrnWindow w = clamp_window(k, half, d.depth);
            for (std::size_t m = w.lo; m <= w.hi; ++m) acc += coef[d.offset(i, j, m, s)];
          } else {
            const LrnWindow wr = clamp_window(i, half, d.rows);
            const LrnWindow wc = clamp_window(j, half, d.cols);
            for (std::size_t p = wr.lo; p <= wr.hi; ++p)
              for (std::size_t q = wc.lo; q <= wc.hi; ++q) acc += coef[d.offset(p, q, k, s)];
          }
          const std::size_t off = d.offset(i, j, k, s);
          grad[off] -= factor * input[off] * acc;
        }
  return grad;
}

DropoutForward dropout_forward(double p, Mode mode, Rng& rng, const Tensor& input) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("dropout: probability must lie in [0,1), got " + std::to_string(p));
  }
  if (mode == Mode::eval || p == 0.0) return {input, Tensor::ones(input.shape())};
  const double keep_scale = 1.0 / (1.0 - p);
  DropoutForward out{Tensor(input.shape()), Tensor(input.shape())};
  for (std::size_t k = 0; k < input.size(); ++k) {
    out.mask[k] = rng.bernoulli(1.0 - p) ? keep_scale : 0.0;
    out.output[k] = input[k] * out.mask[k];
  }
  return out;
}

Tensor dropout_backward(const Tensor& mask, const Tensor& upstream) {
  return hadamard(upstream, mask);
}

Tensor flatten(const Tensor& batch) {
  if (batch.rank() < 2) throw ShapeError("flatten: need a batch axis, got " + to_string(batch.shape()));
  const std::size_t n = batch.shape().back();
  return batch.reshaped({batch.size() / n, n});
}

Tensor unflatten(const Tensor& flat, const Shape& sample_shape) {
  if (flat.rank() != 2) throw ShapeError("unflatten: expected (features, N), got " + to_string(flat.shape()));
  Shape shape = sample_shape;
  shape.push_back(flat.extent(1));
  return flat.reshaped(shape);
}

std::size_t receptive_field(std::span<const ConvGeometry> layers) {
  std::size_t r = 1, jump = 1;
  for (const auto& g : layers) {
    r += (g.kernel - 1) * jump;
    jump *= g.stride;
  }
  return r;
}

}  // namespace nnl
