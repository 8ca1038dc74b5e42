#include "nnl/optim.hpp"

#include <cmath>
#include <vector>

#include "nnl/classic.hpp"
#include "test_util.hpp"

using namespace nnl;
using nnl::test::random_tensor;

namespace {

ParamSet single(double v) {
  ParamSet p;
  p.insert("w", Tensor::vector({v}));
  return p;
}

// Example least-squares problem: L(w) = 1/2 ||U w - s||^2.
struct Quadratic {
  Tensor U = random_tensor({8, 3}, 41);
  Tensor s = random_tensor({8}, 42);

  double loss(const Tensor& w) const {
    const Tensor r = subtract(matvec(U, w), s);
    return 0.5 * dot(r, r);
  }
  Tensor grad(const Tensor& w) const { return matvec(transpose(U), subtract(matvec(U, w), s)); }
};

}  // namespace

TEST_CASE("gradient descent step") {
  ParamSet p = single(5);
  gd_step(p, single(2), 0.1);
  CHECK(p["w"][0] == doctest::Approx(4.8).epsilon(1e-15));

  ParamSet q = single(5);
  gd_step(q, single(0), 0.1);
  CHECK(q["w"][0] == 5.0);

  ParamSet r = single(5);
  gd_step(r, single(2), 0.1, {"w"});
  CHECK(r["w"][0] == 5.0);
  CHECK_THROWS_AS(gd_step(r, ParamSet{}, 0.1), ShapeError);
}

TEST_CASE("gradient descent contracts on a scalar quadratic") {
  for (double tau : {0.1, 1.0, 1.9}) {
    ParamSet p = single(3.0);
    double prev = 3.0;
    for (int i = 0; i < 20; ++i) {
      const ParamSet grad = p;  // gradient of theta^2 / 2 is theta
      gd_step(p, grad, tau);
      CHECK(p["w"][0] == doctest::Approx((1.0 - tau) * prev).epsilon(1e-14));
      CHECK(std::abs(p["w"][0]) <= std::abs(prev));
      prev = p["w"][0];
    }
    CHECK(std::abs(prev) <= 3.0 * std::pow(std::abs(1.0 - tau), 20) + 1e-300);
  }
}

TEST_CASE("sgd sampling") {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(sgd_sample(1, rng) == 0);

  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(sgd_sample(13, a) == sgd_sample(13, b));

  // Pearson chi-square against the uniform distribution on 10 cells; the
  // 0.999 quantile with 9 degrees of freedom is 27.88.
  Rng c(3);
  std::vector<double> counts(10, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[sgd_sample(10, c)] += 1.0;
  double chi2 = 0.0;
  for (double k : counts) chi2 += (k - draws / 10.0) * (k - draws / 10.0) / (draws / 10.0);
  CHECK(chi2 < 27.88);
}

TEST_CASE("mini-batch step averages per-sample gradients") {
  ParamSet theta;
  theta.insert("W", random_tensor({2, 3}, 1));
  std::vector<GradSet> grads;
  Tensor mean_grad({2, 3});
  for (int i = 0; i < 4; ++i) {
    GradSet g;
    g.insert("W", random_tensor({2, 3}, 10 + i));
    axpy_into(mean_grad, 0.25, g["W"]);
    grads.push_back(g);
  }
  ParamSet expected = theta;
  axpy_into(expected["W"], -0.5, mean_grad);
  minibatch_step(theta, grads, 0.5);
  CHECK_TENSOR_NEAR(theta["W"], expected["W"], 1e-15);

  // b = 1 is a plain gradient step.
  ParamSet one = single(5);
  minibatch_step(one, {single(2)}, 0.1);
  CHECK(one["w"][0] == doctest::Approx(4.8).epsilon(1e-15));
}

TEST_CASE("adam first step moves every entry by about tau") {
  ParamSet theta;
  theta.insert("W", random_tensor({3, 4}, 5));
  const ParamSet before = theta;
  GradSet g;
  g.insert("W", random_tensor({3, 4}, 6, -10, 10));
  AdamState state = AdamState::init(theta);
  adam_step(state, theta, g);
  CHECK(state.t == 1);
  for (std::size_t i = 0; i < 12; ++i) {
    const double sign = g["W"][i] > 0 ? 1.0 : -1.0;
    CHECK(std::abs(theta["W"][i] - (before["W"][i] - 0.001 * sign)) < 1e-6);
  }
  // Stored moments are the raw averages, not the corrected ones.
  CHECK_TENSOR_NEAR(state.m1["W"], scale(g["W"], 0.1), 1e-15);
  CHECK_TENSOR_NEAR(state.m2["W"], scale(hadamard(g["W"], g["W"]), 0.001), 1e-12);
}

TEST_CASE("adam matches a hand-rolled reference over several steps") {
  const AdamConfig cfg{0.01, 0.8, 0.95, 1e-8};
  ParamSet theta = single(1.0);
  AdamState state = AdamState::init(theta, cfg);
  double w = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 5; ++t) {
    const double g = 2.0 * w - 0.5;
    adam_step(state, theta, single(g));
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mh = m / (1 - std::pow(cfg.beta1, t));
    const double vh = v / (1 - std::pow(cfg.beta2, t));
    w -= cfg.step * mh / (std::sqrt(vh) + cfg.eps);
    CHECK(theta["w"][0] == doctest::Approx(w).epsilon(1e-14));
  }
}

TEST_CASE("adam leaves zero-gradient and frozen parameters alone") {
  ParamSet theta;
  theta.insert("a", random_tensor({3}, 1));
  theta.insert("b", random_tensor({3}, 2));
  const ParamSet before = theta;
  AdamState state = AdamState::init(theta);
  GradSet g = theta.zeros_like();
  for (int i = 0; i < 10; ++i) adam_step(state, theta, g);
  CHECK(theta == before);

  g["a"] = Tensor::vector({1, 1, 1});
  g["b"] = Tensor::vector({1, 1, 1});
  adam_step(state, theta, g, {"b"});
  CHECK(theta["b"] == before["b"]);
  CHECK(l2_norm(state.m1["b"]) == 0.0);
  CHECK(theta["a"] != before["a"]);
}

TEST_CASE("gradient clipping") {
  const Tensor clipped = clip_gradient(Tensor::vector({3, 4}), 1.0);
  CHECK(clipped[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(clipped[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(l2_norm(clipped) - 1.0) <= 1e-12);
  CHECK(clip_gradient(Tensor::vector({0.3, 0.4}), 1.0) == Tensor::vector({0.3, 0.4}));
  CHECK(clip_gradient(Tensor::vector({0, 0}), 1.0) == Tensor::vector({0, 0}));

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Tensor g = random_tensor({7}, seed, -5, 5);
    const double c = 0.5 + static_cast<double>(seed % 7);
    CHECK(std::abs(l2_norm(clip_gradient(g, c)) - std::min(l2_norm(g), c)) <= 1e-12);
  }
}

TEST_CASE("gradient descent reaches the least-squares solution") {
  const Quadratic q;
  const Tensor closed = linreg_fit(q.U, q.s);
  ParamSet theta;
  theta.insert("w", Tensor({3}));
  auto gradient = [&](const ParamSet& p) {
    GradSet g;
    g.insert("w", q.grad(p["w"]));
    return g;
  };
  StopCriterion stop;
  stop.max_iterations = 100000;
  stop.grad_norm_tolerance = 1e-12;
  const DescentResult r = gradient_descent(theta, gradient, 0.05, stop);
  CHECK(r.final_grad_norm < 1e-12);
  CHECK_TENSOR_NEAR(theta["w"], closed.reshaped({3}), 1e-8);
  CHECK_THROWS(StopCriterion{}.validate());
}

TEST_CASE("gradient check") {
  const Quadratic q;
  ParamSet theta;
  theta.insert("w", random_tensor({3}, 43));
  auto loss = [&](const ParamSet& p) { return q.loss(p["w"]); };
  GradSet exact;
  exact.insert("w", q.grad(theta["w"]));
  const GradCheckReport ok = gradient_check(loss, theta, exact);
  CHECK(ok.max_rel_error < 1e-8);
  CHECK(ok.checked == 3);

  GradSet doubled;
  doubled.insert("w", scale(exact["w"], 2.0));
  const GradCheckReport bad = gradient_check(loss, theta, doubled);
  CHECK(bad.max_rel_error == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  CHECK(bad.mean_rel_error == doctest::Approx(1.0 / 3.0).epsilon(1e-5));

  ParamSet big;
  big.insert("w", random_tensor({1000}, 44));
  auto sq = [](const ParamSet& p) { return 0.5 * dot(p["w"], p["w"]); };
  CHECK(gradient_check(sq, big, big, 1e-6, 50).checked == 50);
}

TEST_CASE("optimizer names") {
  for (auto k : {OptimizerKind::gd, OptimizerKind::sgd, OptimizerKind::minibatch, OptimizerKind::adam})
    CHECK(parse_optimizer(to_string(k)) == k);
  CHECK_THROWS(parse_optimizer("rmsprop"));
}
