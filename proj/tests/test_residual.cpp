#include "nnl/residual.hpp"

#include "nnl/network.hpp"
#include "nnl/optim.hpp"
#include "test_util.hpp"

using namespace nnl;
using nnl::test::random_tensor;

namespace {

ParamSet block_params(const ResidualBlockSpec& spec, std::uint64_t seed) {
  const NetworkSpec net{{spec}};
  ParamSet p = select_prefix(init_params(net, {InitKind::xavier}, seed), "0.");
  Rng rng(seed + 100);
  for (auto& e : p)
    for (auto& v : e.value.values()) v += 0.3 * rng.normal();
  return p;
}

}  // namespace

TEST_CASE("residual layer reduces to the skip path") {
  const ResidualLayerSpec spec{4, 4, {ActivationKind::relu}, 1.0};
  const Tensor W({4, 4}), b({4});
  const Tensor x = random_tensor({4, 3}, 1);
  CHECK(res_layer_forward(spec, {W, b}, x).y == x);

  const ResidualLayerSpec still{4, 4, {ActivationKind::tanh}, 0.0};
  const Tensor W2 = random_tensor({4, 4}, 2), b2 = random_tensor({4}, 3);
  CHECK(res_layer_forward(still, {W2, b2, nullptr, 0.0}, x).y == x);

  // sigma'(0) = 0 for relu, so only the identity path carries gradient.
  const Tensor up = random_tensor({4, 3}, 4);
  const ResidualForward f = res_layer_forward(spec, {W, b}, x);
  CHECK(res_layer_backward(spec, {W, b}, x, f, up).input == up);
}

TEST_CASE("residual layer gradients") {
  for (bool learn : {false, true}) {
    for (std::size_t n_out : {3, 5}) {
      const ResidualLayerSpec spec{3, n_out, {ActivationKind::tanh}, 0.7, learn};
      ParamSet theta;
      theta.insert("W", random_tensor({n_out, 3}, 5));
      theta.insert("b", random_tensor({n_out}, 6));
      if (spec.needs_projection()) theta.insert("P", random_tensor({n_out, 3}, 7));
      theta.insert("tau", Tensor::vector({0.7}));
      theta.insert("x", random_tensor({3, 4}, 8));
      const Tensor c = random_tensor({n_out, 4}, 9);
      auto params_of = [&](const ParamSet& p) {
        return ResidualParams{p["W"], p["b"], spec.needs_projection() ? &p["P"] : nullptr, p["tau"][0]};
      };
      auto loss = [&](const ParamSet& p) { return sum(hadamard(res_layer_forward(spec, params_of(p), p["x"]).y, c)); };
      const ResidualForward f = res_layer_forward(spec, params_of(theta), theta["x"]);
      const ResidualBackward g = res_layer_backward(spec, params_of(theta), theta["x"], f, c);
      GradSet analytic;
      analytic.insert("W", g.W);
      analytic.insert("b", g.b);
      if (spec.needs_projection()) analytic.insert("P", g.P);
      analytic.insert("tau", Tensor::vector({g.tau}));
      analytic.insert("x", g.input);
      CHECK(gradient_check(loss, theta, analytic).max_rel_error < 1e-6);
    }
  }
}

TEST_CASE("residual blocks with zero parameters") {
  const Tensor x = random_tensor({4, 5}, 10);
  const Tensor constant = add_column(Tensor({4, 5}), Tensor::vector({1, -2, 0.5, -0.1}));
  for (const Tensor& batch : {x, constant}) {
    const ResidualBlockSpec orig{BlockVariant::original, 4};
    const ParamSet zo = block_params(orig, 1).zeros_like();
    CHECK(block_forward(orig, zo, batch).y == activate({ActivationKind::relu}, batch));

    const ResidualBlockSpec pre{BlockVariant::pre_activation, 4};
    const ParamSet zp = block_params(pre, 1).zeros_like();
    CHECK(block_forward(pre, zp, batch).y == batch);
  }
}

TEST_CASE("residual block gradients on an 8-wide block") {
  for (BlockVariant v : {BlockVariant::original, BlockVariant::pre_activation}) {
    const ResidualBlockSpec spec{v, 8};
    const ParamSet params = block_params(spec, 3);
    ParamSet theta = params;
    theta.insert("x", random_tensor({8, 4}, 11));
    const Tensor c = random_tensor({8, 4}, 12);
    auto strip = [](const ParamSet& th) {
      ParamSet p;
      for (const auto& e : th)
        if (e.name != "x") p.insert(e.name, e.value);
      return p;
    };
    auto loss = [&](const ParamSet& th) { return sum(hadamard(block_forward(spec, strip(th), th["x"]).y, c)); };
    const BlockForward f = block_forward(spec, params, theta["x"]);
    const BlockBackward g = block_backward(spec, params, theta["x"], f, c);
    GradSet analytic = g.grads;
    analytic.insert("x", g.input);
    // A unit that relu silences across the whole batch has an exactly zero
    // gradient, which the relative error alone would compare against round-off.
    CHECK(nnl::test::fd_disagreements(gradient_check(loss, theta, analytic), loss(theta)) == 0);
  }
}

TEST_CASE("block variants and parameter counts") {
  CHECK(parse_block_variant(to_string(BlockVariant::original)) == BlockVariant::original);
  CHECK(parse_block_variant(to_string(BlockVariant::pre_activation)) == BlockVariant::pre_activation);
  CHECK_THROWS(parse_block_variant("bottleneck"));
  const ResidualBlockSpec orig{BlockVariant::original, 8};
  const ResidualBlockSpec pre{BlockVariant::pre_activation, 8};
  CHECK(orig.parameter_count() == 4 * 64 + 2 * 8);
  CHECK(pre.parameter_count() == 4 * 64 + 3 * 8);
  CHECK(ResidualLayerSpec{3, 5, {}, 1.0, true}.parameter_count() == 15 + 5 + 15 + 1);
}
