#include "nnl/network.hpp"

#include "nnl/gradcheck.hpp"
#include "test_util.hpp"

using namespace nnl;
using nnl::test::random_tensor;

TEST_CASE("architecture text round trips") {
  const char* canonical[] = {
      "dense 784 128 relu; dense 128 10 softmax",
      "conv 28 28 1 6 5 1 2; detector relu; maxpool 2 2 0; flatten; dense 1176 10 identity",
      "conv 6 6 1 2 3 1 1; avgpool 2 2 1; lrn intra 3 2 0.0001 0.75",
      "dense 3 4 tanh; batchnorm 4 3 0.00001 percomp; dropout 0.25; dense 3 2 leaky_relu(0.1)",
      "residual 3 4 tanh 0.5 learn_tau; resblock preact 4 0.00001",
      "rnn lstm 5 16 5",
  };
  for (const char* text : canonical) {
    const NetworkSpec spec = parse_network(text);
    CHECK(parse_network(format_network(spec)) == spec);
    CHECK(format_network(parse_network(format_network(spec))) == format_network(spec));
  }
  CHECK_THROWS(parse_network("dense 3"));
  CHECK_THROWS(parse_network("dense 3 4 relu; wobble 2"));
  CHECK_THROWS(parse_network("rnn gru 3 4 2; dense 2 2 relu"));
}

TEST_CASE("shape inference") {
  const NetworkSpec lenet = parse_network("conv 28 28 1 6 5 1 2; detector relu; maxpool 2 2; flatten; dense 1176 10 softmax");
  const auto shapes = infer_shapes(lenet);
  CHECK(shapes.front() == Shape{28, 28, 1});
  CHECK(shapes[1] == Shape{28, 28, 6});
  CHECK(shapes[3] == Shape{14, 14, 6});
  CHECK(shapes[4] == Shape{1176});
  CHECK(shapes.back() == Shape{10});
  CHECK(param_count(lenet) == 156 + 1176 * 10 + 10);

  CHECK_THROWS_AS(infer_shapes(parse_network("dense 3 4 relu; dense 5 2 relu")), ShapeError);
  CHECK_THROWS_AS(infer_shapes(parse_network("maxpool 2 2; dense 4 2 relu")), ShapeError);
  CHECK(param_count(parse_network("dense 3 5 relu; dense 5 5 relu; dense 5 5 relu; dense 5 1 sigmoid")) == 86);
}

TEST_CASE("the hand-built XOR network reproduces the truth table") {
  const NetworkSpec spec = parse_network("dense 2 2 heaviside; dense 2 1 heaviside");
  ParamSet p;
  p.insert("0.W", Tensor::matrix({{1, 1}, {-1, -1}}));
  p.insert("0.b", Tensor::vector({-1, 1}));
  p.insert("1.W", Tensor::matrix({{1, 1}}));
  p.insert("1.b", Tensor::vector({-2}));
  const ForwardCache c = network_forward(spec, p, Tensor::matrix({{0, 1, 0, 1}, {0, 0, 1, 1}}));
  CHECK(c.y[1] == Tensor::matrix({{0, 1, 1, 1}, {1, 1, 1, 0}}));
  CHECK(c.output() == Tensor::matrix({{0, 1, 1, 0}}));
}

TEST_CASE("an empty network is rejected") {
  const Tensor x = random_tensor({3, 2}, 1);
  CHECK_THROWS_AS(network_forward(NetworkSpec{}, ParamSet{}, x), ShapeError);
}

TEST_CASE("parameters follow the documented naming and initial values") {
  const NetworkSpec spec = parse_network("dense 3 4 relu; batchnorm 4 4; residual 4 2 tanh 0.3 learn_tau");
  const ParamSet p = init_params(spec, {InitKind::he}, 7);
  std::vector<std::string> names;
  for (const auto& e : p) names.push_back(e.name);
  CHECK(names == std::vector<std::string>{"0.W", "0.b", "1.W", "1.b", "2.W", "2.b", "2.P", "2.tau"});
  CHECK(p["1.W"] == Tensor::identity(4));
  CHECK(l2_norm(p["0.b"]) == 0.0);
  CHECK(p["2.tau"][0] == 0.3);
  CHECK(init_params(spec, {InitKind::he}, 7) == p);
  CHECK(init_params(spec, {InitKind::he}, 8) != p);
}

TEST_CASE("softmax heads take the fused logit gradient") {
  const NetworkSpec spec = parse_network("dense 3 4 tanh; dense 4 3 softmax");
  const ParamSet p = init_params(spec, {InitKind::xavier}, 1);
  const ForwardCache c = network_forward(spec, p, random_tensor({3, 5}, 2));
  const std::vector<std::size_t> labels{0, 2, 1, 1, 0};
  const LossAndGrad lg = network_loss(spec, c, LossKind::softmax_nll, Targets{{}, labels});
  CHECK(lg.loss == doctest::Approx(softmax_nll(c.layers.back().z, labels)).epsilon(1e-15));
  CHECK(lg.output_grad == softmax_nll_grad(c.layers.back().z, labels));
  CHECK_THROWS(network_loss(spec, c, LossKind::mse, Targets{Tensor({3, 5}), {}}));
}

TEST_CASE("random three-layer tanh network against finite differences") {
  const NetworkSpec spec = parse_network("dense 4 6 tanh; dense 6 5 tanh; dense 5 3 tanh");
  GradcheckOptions o;
  o.seed = 3;
  o.batch = 5;
  CHECK(gradcheck_network(spec, o).report.max_rel_error < 1e-6);
}

TEST_CASE("the gradient check suite covers every layer family") {
  const auto cases = gradcheck_suite({});
  CHECK(cases.size() == gradcheck_suite_specs().size());
  for (const auto& c : cases) {
    INFO(c.name);
    CHECK(c.report.max_rel_error < 1e-6);
    CHECK(c.report.checked > 0);
  }
}

TEST_CASE("a sign-flipped gradient is caught") {
  GradcheckOptions o;
  o.corrupt = true;
  CHECK(gradcheck_network(parse_network("dense 3 4 tanh; dense 4 2 sigmoid"), o).report.max_rel_error > 0.5);
  CHECK(gradcheck_network(parse_network("rnn gru 3 4 2"), o).report.max_rel_error > 0.5);
  CHECK_THROWS(gradcheck_network(NetworkSpec{}, {}));
}

TEST_CASE("dropout is the identity at eval time") {
  const NetworkSpec spec = parse_network("dense 3 5 tanh; dropout 0.5; dense 5 2 identity");
  const ParamSet p = init_params(spec, {InitKind::xavier}, 4);
  const Tensor x = random_tensor({3, 4}, 5);
  const NetworkSpec plain = parse_network("dense 3 5 tanh; dense 5 2 identity");
  ParamSet q;
  q.insert("0.W", p["0.W"]);
  q.insert("0.b", p["0.b"]);
  q.insert("1.W", p["2.W"]);
  q.insert("1.b", p["2.b"]);
  CHECK(network_forward(spec, p, x).output() == network_forward(plain, q, x).output());
  CHECK_THROWS(network_forward(spec, p, x, Mode::train, nullptr));
}
