#include "nnl/conv.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "nnl/optim.hpp"
#include "test_util.hpp"

using namespace nnl;
using nnl::test::random_tensor;

namespace {

const Tensor kPoolInput = Tensor::matrix({{1, 3, 0, -7}, {-2, 4, 1, -1}, {0, 1, 8, -3}, {2, 0, 4, 5}});

Tensor as_image(const Tensor& m) { return m.reshaped({m.extent(0), m.extent(1), 1}); }
Tensor as_matrix(const Tensor& img) { return img.reshaped({img.extent(0), img.extent(1)}); }

// Direct evaluation of the LRN formula with nested loops.
Tensor naive_lrn(const LrnSpec& spec, const Tensor& y) {
  const std::size_t R = y.extent(0), C = y.extent(1), M = y.extent(2);
  const long h = static_cast<long>(spec.n / 2);
  Tensor out(y.shape());
  for (long i = 0; i < static_cast<long>(R); ++i)
    for (long j = 0; j < static_cast<long>(C); ++j)
      for (long k = 0; k < static_cast<long>(M); ++k) {
        double acc = 0.0;
        if (spec.mode == LrnMode::inter_channel) {
          for (long m = k - h; m <= k + h; ++m)
            if (m >= 0 && m < static_cast<long>(M)) acc += y.at({std::size_t(i), std::size_t(j), std::size_t(m)}) * y.at({std::size_t(i), std::size_t(j), std::size_t(m)});
        } else {
          for (long p = i - h; p <= i + h; ++p)
            for (long q = j - h; q <= j + h; ++q)
              if (p >= 0 && q >= 0 && p < static_cast<long>(R) && q < static_cast<long>(C))
                acc += y.at({std::size_t(p), std::size_t(q), std::size_t(k)}) * y.at({std::size_t(p), std::size_t(q), std::size_t(k)});
        }
        const double v = y.at({std::size_t(i), std::size_t(j), std::size_t(k)});
        out.at({std::size_t(i), std::size_t(j), std::size_t(k)}) = v / std::pow(spec.kappa + spec.gamma * acc, spec.beta);
      }
  return out;
}

}  // namespace

TEST_CASE("conv layer on the worked example") {
  const Tensor Y = Tensor::matrix({{1, 5, -2, 0, 2}, {3, 8, 7, 1, 0}, {-1, 0, 1, 2, 3}, {4, 2, 1, -1, 2}});
  const Tensor K = Tensor::matrix({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  const ConvLayerSpec spec{4, 5, 1, 1, {3, 1, 0}};
  const Tensor out = conv_forward(spec, K.reshaped({1, 3, 3, 1}), Tensor::vector({0.5}), as_image(Y));
  CHECK(out.shape() == Shape{2, 3, 1});
  CHECK(as_matrix(out) == add_scalar(Tensor::matrix({{101, 100, 87}, {95, 55, 58}}), 0.5));
}

TEST_CASE("conv layer sums cross-correlations over depth") {
  const ConvLayerSpec spec{5, 6, 3, 2, {3, 2, 1}};
  const Tensor x = random_tensor({5, 6, 3}, 1);
  const Tensor k = random_tensor(spec.kernel_shape(), 2);
  const Tensor b = random_tensor({2}, 3);
  const Tensor out = conv_forward(spec, k, b, x);
  CHECK(out.shape() == spec.output_shape());
  for (std::size_t f = 0; f < 2; ++f) {
    Tensor expect({3, 3}, b[f]);
    for (std::size_t c = 0; c < 3; ++c) {
      Tensor channel({5, 6}), kernel({3, 3});
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 6; ++j) channel(i, j) = x.at({i, j, c});
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) kernel(i, j) = k.at({f, i, j, c});
      add_into(expect, cross_correlate(channel, kernel, 2, 1));
    }
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(out.at({i, j, f}) == doctest::Approx(expect(i, j)).epsilon(1e-14));
  }
}

TEST_CASE("LeNet first convolution") {
  const ConvLayerSpec spec{28, 28, 1, 6, {5, 1, 2}};
  CHECK(spec.parameter_count() == 156);
  CHECK(spec.output_shape() == Shape{28, 28, 6});
  const Tensor out = conv_forward(spec, random_tensor(spec.kernel_shape(), 4), Tensor({6}), random_tensor({28, 28, 1}, 5));
  CHECK(out.shape() == Shape{28, 28, 6});
}

TEST_CASE("1x1 identity kernel passes a channel through") {
  const ConvLayerSpec spec{4, 4, 1, 1, {1, 1, 0}};
  const Tensor x = random_tensor({4, 4, 1}, 6);
  CHECK(conv_forward(spec, Tensor::ones({1, 1, 1, 1}), Tensor({1}), x) == x);
}

TEST_CASE("conv backward") {
  const ConvLayerSpec spec{5, 5, 1, 2, {3, 1, 0}};
  ParamSet theta;
  theta.insert("K", random_tensor(spec.kernel_shape(), 7));
  theta.insert("b", random_tensor({2}, 8));
  theta.insert("x", random_tensor({5, 5, 1, 2}, 9));
  const Tensor c = random_tensor({3, 3, 2, 2}, 10);
  auto loss = [&](const ParamSet& p) { return sum(hadamard(conv_forward(spec, p["K"], p["b"], p["x"]), c)); };
  const ConvBackward g = conv_backward(spec, theta["K"], theta["x"], c);
  GradSet analytic;
  analytic.insert("K", g.kernels);
  analytic.insert("b", g.bias);
  analytic.insert("x", g.input);
  CHECK(gradient_check(loss, theta, analytic).max_rel_error < 1e-6);

  const ConvBackward zero = conv_backward(spec, theta["K"], theta["x"], Tensor(c.shape()));
  CHECK(l2_norm(zero.kernels) == 0.0);
  CHECK(l2_norm(zero.bias) == 0.0);
  CHECK(l2_norm(zero.input) == 0.0);
}

TEST_CASE("detector stage") {
  const Tensor t = Tensor::matrix({{-1, 2}, {3, -4}});
  CHECK(detector_forward({ActivationKind::relu}, t) == Tensor::matrix({{0, 2}, {3, 0}}));
  CHECK(detector_forward({ActivationKind::identity}, t) == t);
  CHECK(detector_backward({ActivationKind::relu}, t, Tensor::ones({2, 2})) == Tensor::matrix({{0, 1}, {1, 0}}));
}

TEST_CASE("pooling on the worked example") {
  const PoolForward mx = pool_forward({PoolKind::max, 2, 2, 0}, as_image(kPoolInput));
  CHECK(as_matrix(mx.output) == Tensor::matrix({{4, 1}, {2, 8}}));
  const PoolForward av = pool_forward({PoolKind::avg, 2, 2, 0}, as_image(kPoolInput));
  CHECK(as_matrix(av.output) == Tensor::matrix({{1.5, -1.75}, {0.75, 3.5}}));
  CHECK(pool_forward({PoolKind::max, 1, 1, 0}, as_image(kPoolInput)).output == as_image(kPoolInput));
  CHECK(pool_forward({PoolKind::avg, 1, 1, 0}, as_image(kPoolInput)).output == as_image(kPoolInput));
}

TEST_CASE("pool backward") {
  const PoolSpec max_spec{PoolKind::max, 2, 2, 0};
  const Tensor x = as_image(kPoolInput);
  const PoolForward mx = pool_forward(max_spec, x);
  Tensor up({2, 2, 1});
  up.at({1, 1, 0}) = 1.0;
  const Tensor g = pool_backward(max_spec, x.shape(), mx, up);
  CHECK(g.at({2, 2, 0}) == 1.0);  // the 8
  CHECK(sum(g) == 1.0);

  const PoolSpec avg_spec{PoolKind::avg, 2, 2, 0};
  const PoolForward av = pool_forward(avg_spec, x);
  CHECK(pool_backward(avg_spec, x.shape(), av, Tensor::ones({2, 2, 1})) == Tensor({4, 4, 1}, 0.25));
  CHECK(l2_norm(pool_backward(avg_spec, x.shape(), av, Tensor({2, 2, 1}))) == 0.0);

  // Ties route to the first entry in row-major window order.
  const Tensor flat = Tensor({2, 2, 1}, 3.0);
  const PoolForward tie = pool_forward(max_spec, flat);
  const Tensor tg = pool_backward(max_spec, flat.shape(), tie, Tensor::ones({1, 1, 1}));
  CHECK(tg.at({0, 0, 0}) == 1.0);
  CHECK(sum(tg) == 1.0);
}

TEST_CASE("batch normalization") {
  const BatchNormSpec spec{1, 1, 0.0};
  const BatchNormCache c = batchnorm_forward(spec, Tensor::identity(1), Tensor({1}), Tensor::matrix({{0, 2}}));
  CHECK(c.mu[0] == 1.0);
  CHECK(c.variance[0] == 1.0);
  CHECK(c.y_hat == Tensor::matrix({{-1, 1}}));

  const BatchNormSpec s3{3, 3};
  const Tensor constant = add_column(Tensor({3, 4}), Tensor::vector({1, 2, 3}));
  const Tensor bias = Tensor::vector({0.5, -1, 2});
  const BatchNormCache cc = batchnorm_forward(s3, random_tensor({3, 3}, 1), bias, constant);
  CHECK(l2_norm(cc.y_hat) == 0.0);
  for (std::size_t j = 0; j < 4; ++j) CHECK(column(cc.output, j) == bias);

  const BatchNormSpec zero_eps{3, 3, 0.0};
  CHECK(l2_norm(batchnorm_forward(zero_eps, Tensor::identity(3), Tensor({3}), constant).y_hat) == 0.0);

  for (bool per : {false, true}) {
    const BatchNormSpec sp{3, 3, 1e-5, per};
    const BatchNormCache r = batchnorm_forward(sp, Tensor::identity(3), Tensor({3}), random_tensor({3, 6}, 2, -5, 5));
    const Tensor sums = sum_columns(r.output);
    for (double m : sums.values()) CHECK(std::abs(m) < 1e-12);
  }
}

TEST_CASE("batch norm backward") {
  for (bool per : {false, true}) {
    const BatchNormSpec spec{3, 2, 1e-5, per};
    ParamSet theta;
    theta.insert("W", random_tensor({2, 3}, 3));
    theta.insert("b", random_tensor({2}, 4));
    theta.insert("x", random_tensor({3, 5}, 5));
    const Tensor c = random_tensor({2, 5}, 6);
    auto loss = [&](const ParamSet& p) { return sum(hadamard(batchnorm_forward(spec, p["W"], p["b"], p["x"]).output, c)); };
    const BatchNormCache cache = batchnorm_forward(spec, theta["W"], theta["b"], theta["x"]);
    const BatchNormBackward g = batchnorm_backward(spec, theta["W"], cache, c);
    GradSet analytic;
    analytic.insert("W", g.W);
    analytic.insert("b", g.bias);
    analytic.insert("x", g.input);
    CHECK(gradient_check(loss, theta, analytic).max_rel_error < 1e-6);
  }
}

TEST_CASE("local response normalization") {
  const Tensor y = random_tensor({4, 4, 6}, 7, -3, 3);
  for (LrnMode mode : {LrnMode::inter_channel, LrnMode::intra_channel}) {
    const LrnSpec spec{mode, 2, 2.0, 1e-4, 0.75};
    CHECK(lrn_forward(spec, y) == naive_lrn(spec, y));
    const LrnSpec wide{mode, 5, 1.0, 0.3, 0.6};
    CHECK(lrn_forward(wide, y) == naive_lrn(wide, y));
  }
  const LrnSpec flat{LrnMode::inter_channel, 3, 2.0, 0.0, 0.75};
  CHECK_TENSOR_NEAR(lrn_forward(flat, y), scale(y, std::pow(2.0, -0.75)), 1e-15);
}

TEST_CASE("lrn backward") {
  for (LrnMode mode : {LrnMode::inter_channel, LrnMode::intra_channel}) {
    const LrnSpec spec{mode, 3, 1.0, 0.2, 0.75};
    ParamSet theta;
    theta.insert("x", random_tensor({3, 3, 4}, 8, -2, 2));
    const Tensor c = random_tensor({3, 3, 4}, 9);
    auto loss = [&](const ParamSet& p) { return sum(hadamard(lrn_forward(spec, p["x"]), c)); };
    GradSet analytic;
    analytic.insert("x", lrn_backward(spec, theta["x"], c));
    CHECK(gradient_check(loss, theta, analytic).max_rel_error < 1e-6);
  }
}

TEST_CASE("dropout") {
  Rng rng(1);
  const Tensor x = random_tensor({5, 4}, 10);
  CHECK(dropout_forward(0.0, Mode::train, rng, x).output == x);
  CHECK(dropout_forward(0.0, Mode::eval, rng, x).output == x);
  CHECK(dropout_forward(0.7, Mode::eval, rng, x).output == x);

  const DropoutForward d = dropout_forward(0.5, Mode::train, rng, Tensor::ones({100000}));
  CHECK(mean(d.output) == doctest::Approx(1.0).epsilon(0.02));
  for (double m : d.mask.values()) CHECK((m == 0.0 || m == 2.0));
  CHECK(dropout_backward(d.mask, Tensor::ones({100000})) == d.mask);
  CHECK_THROWS(dropout_forward(1.0, Mode::train, rng, x));
}

TEST_CASE("flatten") {
  const Tensor img = Tensor::matrix({{1, 2}, {3, 4}}).reshaped({2, 2, 1, 1});
  const Tensor flat = flatten(img);
  CHECK(flat.shape() == Shape{4, 1});
  CHECK(flat == Tensor::matrix({{1}, {2}, {3}, {4}}));
  CHECK(unflatten(flat, {2, 2, 1}) == img);
  CHECK(flatten(Tensor({28, 28, 1, 3})).shape() == Shape{784, 3});
}

TEST_CASE("receptive fields") {
  const std::vector<ConvGeometry> one{{3, 1, 0}};
  CHECK(receptive_field(one) == 3);
  const std::vector<ConvGeometry> two{{3, 1, 0}, {3, 1, 0}};
  CHECK(receptive_field(two) == 5);

  // Trace which inputs of a 1-D chain reach output 0.
  auto traced = [](const std::vector<ConvGeometry>& layers) {
    std::set<std::size_t> reach{0};
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
      std::set<std::size_t> prev;
      for (std::size_t i : reach)
        for (std::size_t k = 0; k < it->kernel; ++k) prev.insert(i * it->stride + k);
      reach = prev;
    }
    return reach.size();
  };
  const std::vector<ConvGeometry> strided{{3, 2, 0}, {3, 1, 0}};
  CHECK(receptive_field(strided) == 7);
  CHECK(traced(strided) == 7);
  const std::vector<ConvGeometry> mixed{{5, 1, 0}, {2, 2, 0}, {3, 1, 0}, {2, 2, 0}, {3, 1, 0}};
  CHECK(receptive_field(mixed) == traced(mixed));
}
