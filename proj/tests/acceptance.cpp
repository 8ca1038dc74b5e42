// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nnl/classic.hpp"
#include "nnl/config.hpp"
#include "nnl/gradcheck.hpp"
#include "nnl/modelio.hpp"
#include "nnl/network.hpp"
#include "nnl/optim.hpp"
#include "nnl/text.hpp"
#include "nnl/trainer.hpp"

using namespace nnl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Tensor image(const Tensor& m) { return m.reshaped({m.extent(0), m.extent(1), 1}); }

Tensor uniform_tensor(Shape shape, Rng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome conv_goldens() {
  const Tensor Y = Tensor::matrix({{1, 5, -2, 0, 2}, {3, 8, 7, 1, 0}, {-1, 0, 1, 2, 3}, {4, 2, 1, -1, 2}});
  const Tensor K = Tensor::matrix({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  const bool conv = convolve(Y, K) == Tensor::matrix({{119, 120, 53}, {155, 155, 102}});
  const bool xcorr = cross_correlate(Y, K) == Tensor::matrix({{101, 100, 87}, {95, 55, 58}});
  return {conv && xcorr, std::string("convolution ") + (conv ? "exact" : "WRONG") + ", cross-correlation " +
                             (xcorr ? "exact" : "WRONG")};
}

Outcome pool_goldens() {
  const Tensor x = image(Tensor::matrix({{1, 3, 0, -7}, {-2, 4, 1, -1}, {0, 1, 8, -3}, {2, 0, 4, 5}}));
  const bool mx = pool_forward({PoolKind::max, 2, 2, 0}, x).output == image(Tensor::matrix({{4, 1}, {2, 8}}));
  const bool av = pool_forward({PoolKind::avg, 2, 2, 0}, x).output == image(Tensor::matrix({{1.5, -1.75}, {0.75, 3.5}}));
  return {mx && av, std::string("max ") + (mx ? "exact" : "WRONG") + ", avg " + (av ? "exact" : "WRONG")};
}

Outcome xor_table_and_training() {
  const NetworkSpec table_net = parse_network("dense 2 2 heaviside; dense 2 1 heaviside");
  ParamSet p;
  p.insert("0.W", Tensor::matrix({{1, 1}, {-1, -1}}));
  p.insert("0.b", Tensor::vector({-1, 1}));
  p.insert("1.W", Tensor::matrix({{1, 1}}));
  p.insert("1.b", Tensor::vector({-2}));
  // Rows (u1, u2, y1, y2, out).
  const double table[4][5] = {{0, 0, 0, 1, 0}, {1, 0, 1, 1, 1}, {0, 1, 1, 1, 1}, {1, 1, 1, 0, 0}};
  Tensor u({2, 4});
  for (std::size_t j = 0; j < 4; ++j) {
    u(0, j) = table[j][0];
    u(1, j) = table[j][1];
  }
  const ForwardCache c = network_forward(table_net, p, u);
  bool table_ok = true;
  for (std::size_t j = 0; j < 4; ++j)
    table_ok = table_ok && c.y[1](0, j) == table[j][2] && c.y[1](1, j) == table[j][3] && c.y[2](0, j) == table[j][4];

  RunConfig cfg;
  cfg.architecture = "dense 2 2 sigmoid; dense 2 1 sigmoid";
  cfg.dataset = "xor";
  cfg.loss = "mse";
  cfg.optimizer = "adam";  // default step, betas and eps
  cfg.init = "xavier";
  cfg.batch_size = 4;
  cfg.epochs = 5000;  // one full-batch step per epoch
  cfg.seed = 0;
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult r = train(cfg, load_training_data(cfg, parse_network(cfg.architecture)));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t reached = 0;
  for (const auto& m : r.metrics)
    if (m.train_loss < 0.01) {
      reached = m.epoch;
      break;
    }
  const double final_loss = r.metrics.back().train_loss;
  const bool train_ok = reached > 0 && secs < 5.0;
  return {table_ok && train_ok, std::string("table ") + (table_ok ? "exact" : "WRONG") + "; adam loss " +
                                    fmt(final_loss) + " after 5000 steps, < 0.01 from step " +
                                    (reached ? std::to_string(reached) : "never") + ", " + fmt(secs) + " s"};
}

Outcome gradcheck_all() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cases = gradcheck_suite({});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : cases)
    if (c.report.max_rel_error >= worst) {
      worst = c.report.max_rel_error;
      worst_name = c.name;
    }
  return {worst < 1e-6 && secs < 60.0, std::to_string(cases.size()) + " cases, max rel error " + fmt(worst) + " (" +
                                           worst_name + "), " + fmt(secs) + " s"};
}

Outcome optimizer_contracts() {
  Rng rng(5);
  // Adam's first step.
  ParamSet theta;
  theta.insert("w", uniform_tensor({50}, rng, -1, 1));
  GradSet g;
  g.insert("w", uniform_tensor({50}, rng, -5, 5));
  const ParamSet before = theta;
  AdamState state = AdamState::init(theta);
  adam_step(state, theta, g);
  double adam_dev = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const double expect = before["w"][i] - 0.001 * (g["w"][i] > 0 ? 1.0 : -1.0);
    adam_dev = std::max(adam_dev, std::abs(theta["w"][i] - expect));
  }

  // Clipping.
  double clip_dev = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Tensor v = uniform_tensor({1 + rng.index(20)}, rng, -10, 10);
    const double c = 0.1 + 10.0 * rng.uniform();
    clip_dev = std::max(clip_dev, std::abs(l2_norm(clip_gradient(v, c)) - std::min(l2_norm(v), c)));
  }

  // Gradient descent on the least-squares loss 1/2 ||U w - s||^2.
  const Tensor U = uniform_tensor({10, 3}, rng, -1, 1);
  const Tensor s = uniform_tensor({10}, rng, -1, 1);
  const Tensor closed = linreg_fit(U, s).reshaped({3});
  ParamSet w;
  w.insert("w", Tensor({3}));
  StopCriterion stop;
  stop.max_iterations = 200000;
  stop.grad_norm_tolerance = 1e-13;
  gradient_descent(w, [&](const ParamSet& q) {
    GradSet gr;
    gr.insert("w", matvec(transpose(U), subtract(matvec(U, q["w"]), s)));
    return gr;
  }, 0.05, stop);
  double gd_dev = 0.0;
  for (std::size_t i = 0; i < 3; ++i) gd_dev = std::max(gd_dev, std::abs(w["w"][i] - closed[i]));

  return {adam_dev <= 1e-6 && clip_dev <= 1e-12 && gd_dev <= 1e-8,
          "adam |dev| " + fmt(adam_dev) + ", clip |dev| " + fmt(clip_dev) + ", gd |dev| " + fmt(gd_dev)};
}

Outcome kmeans_properties() {
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(mix_seed(seed, 77));
    const Tensor pts = uniform_tensor({80, 2}, rng, -3, 3);
    const KMeansResult r = kmeans(pts, 5, seed, {2, 500});
    for (const auto& run : r.runs)
      for (std::size_t i = 1; i < run.distortion.size(); ++i) monotone = monotone && run.distortion[i] <= run.distortion[i - 1];
  }

  // Two blobs of std sigma whose means are 10 sigma apart.
  const double sigma = 1.0;
  const double means[2][2] = {{0.0, 0.0}, {10.0 * sigma, 0.0}};
  Rng rng(3);
  const std::size_t per = 2000;
  Tensor pts({2 * per, 2});
  for (std::size_t i = 0; i < 2 * per; ++i)
    for (std::size_t d = 0; d < 2; ++d) pts(i, d) = means[i / per][d] + sigma * rng.normal();
  const KMeansResult r = kmeans(pts, 2, 0, {5, 500});
  const std::size_t left = r.centroids(0, 0) < r.centroids(1, 0) ? 0 : 1;
  double blob_dev = 0.0;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t d = 0; d < 2; ++d)
      blob_dev = std::max(blob_dev, std::abs(r.centroids(c == 0 ? left : 1 - left, d) - means[c][d]));

  Rng rng2(4);
  const Tensor few = uniform_tensor({12, 3}, rng2, -1, 1);
  const double own = kmeans(few, 12, 1).distortion;

  return {monotone && blob_dev < 0.1 && own == 0.0, std::string("monotone over 100 seeds ") + (monotone ? "yes" : "NO") +
                                                       ", blob mean error " + fmt(blob_dev) + ", k=N distortion " + fmt(own)};
}

Outcome overfitting_pattern() {
  Rng rng(0);
  const Samples1d train = noisy_sine(15, 0.25, rng);
  const Samples1d test = noisy_sine(15, 0.25, rng);
  auto target = [](const Samples1d& d) { return Tensor(Shape{d.s.size()}, std::vector<double>(d.s)); };
  auto errors = [&](std::size_t degree, double lambda) {
    const Tensor W = ridge_fit(poly_features(train.u, degree), target(train), lambda);
    return std::pair{fit_loss(poly_features(train.u, degree), target(train), W),
                     fit_loss(poly_features(test.u, degree), target(test), W)};
  };
  const auto [tr3, te3] = errors(3, 0.0);
  const auto [tr9, te9] = errors(9, 0.0);
  const auto [tr9d, te9d] = errors(9, 0.01);
  (void)tr9d;
  const bool ok = tr9 < tr3 && te9 > te3 && te9d < te9;
  return {ok, "train deg3 " + fmt(tr3) + " deg9 " + fmt(tr9) + "; test deg3 " + fmt(te3) + " deg9 " + fmt(te9) +
                  " deg9+decay " + fmt(te9d)};
}

Outcome bias_variance() {
  Rng rng(8);
  std::vector<double> est(1000);
  for (auto& e : est) e = rng.normal(1.3, 0.7);
  const double truth = 1.0;
  // Independent evaluation straight from the definitions.
  double m = 0.0, m2 = 0.0, sq = 0.0;
  for (double e : est) {
    m += e;
    m2 += e * e;
    sq += (e - truth) * (e - truth);
  }
  m /= 1000.0;
  m2 /= 1000.0;
  sq /= 1000.0;
  const double direct_gap = std::abs(sq - ((m2 - m * m) + (m - truth) * (m - truth)));
  const EstimatorStats s = estimator_stats(est, truth);
  const double lib_gap = std::abs(s.mse - (s.variance + s.bias * s.bias));
  const double agree = std::abs(s.mse - sq);
  return {direct_gap <= 1e-10 && lib_gap <= 1e-10 && agree <= 1e-10,
          "|mse - var - bias^2| " + fmt(lib_gap) + " (library), " + fmt(direct_gap) + " (direct)"};
}

Outcome vanishing_contrast() {
  const std::size_t depth = 40, width = 8;
  std::string plain_text, res_text;
  for (std::size_t i = 0; i < depth; ++i) {
    plain_text += (i ? "; " : "") + std::string("dense 8 8 sigmoid");
    res_text += (i ? "; " : "") + std::string("residual 8 8 sigmoid");
  }
  const NetworkSpec plain = parse_network(plain_text), res = parse_network(res_text);
  const InitScheme init{InitKind::gaussian, 0.01};
  const ParamSet pp = init_params(plain, init, 0), rp = init_params(res, init, 0);
  Rng rng(mix_seed(0, 9));
  const Tensor x = uniform_tensor({width, 4}, rng, -1, 1);
  const Tensor up = uniform_tensor({width, 4}, rng, -1, 1);
  const Backprop gp = backprop(plain, pp, network_forward(plain, pp, x), up);
  const Backprop gr = backprop(res, rp, network_forward(res, rp, x), up);
  const double np = l2_norm(gp.grads["0.W"]), nr = l2_norm(gr.grads["0.W"]);
  const double ratio = nr / np;
  return {ratio > 1e3, "first-layer gradient norm plain " + fmt(np) + ", residual " + fmt(nr) + ", ratio " + fmt(ratio)};
}

Outcome mnist_small() {
  const RunConfig cfg = preset_config("mnist-small");
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult r = train(cfg, load_training_data(cfg, parse_network(cfg.architecture)));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double acc = r.metrics.back().val_acc.value_or(0.0);
  return {acc > 0.85 && secs < 120.0, "val accuracy " + fmt(acc) + " after " + std::to_string(r.metrics.size()) +
                                          " epochs, " + fmt(secs) + " s"};
}

Outcome persistence() {
  const NetworkSpec spec = parse_network("dense 4 8 relu; batchnorm 8 8; resblock preact 8; dense 8 10 softmax");
  const Model m{spec, init_params(spec, {InitKind::he}, 11), {}};
  const auto bytes = save_model(m);
  const Model back = load_model(bytes);
  const bool round = back.spec == spec && back.params == m.params && save_model(back) == bytes;

  // Golden fixture: "dense 2 1 identity" with W = (1.5, -2) and b = 0.25.
  const std::vector<std::uint8_t> golden{
      'N', 'N', 'L', 'N', 1, 0, 0, 0, 18, 0, 0, 0, 'd', 'e', 'n', 's', 'e', ' ', '2', ' ', '1', ' ', 'i', 'd', 'e',
      'n', 't', 'i', 't', 'y', 2, 0, 0, 0, 3, 0, 0, 0, '0', '.', 'W', 2, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0,
      0, 0, 0, 0, 0, 0, 0xF8, 0x3F, 0, 0, 0, 0, 0, 0, 0, 0xC0, 3, 0, 0, 0, '0', '.', 'b', 1, 0, 0, 0, 1, 0, 0, 0,
      0, 0, 0, 0, 0, 0, 0xD0, 0x3F};
  Model g;
  g.spec = parse_network("dense 2 1 identity");
  g.params.insert("0.W", Tensor::matrix({{1.5, -2.0}}));
  g.params.insert("0.b", Tensor::vector({0.25}));
  bool golden_ok = save_model(g) == golden;
  try {
    golden_ok = golden_ok && load_model(golden).params == g.params;
  } catch (const std::exception&) {
    golden_ok = false;
  }

  const Model cut = surgery(m, std::nullopt, LayerSpec{DenseLayerSpec{8, 5, {ActivationKind::softmax}}}, true, 3);
  bool kept = save_model(m) == bytes;
  for (const auto& e : m.params)
    if (!e.name.starts_with("3.")) kept = kept && cut.params[e.name] == e.value;

  return {round && golden_ok && kept, std::string("round trip ") + (round ? "bit-exact" : "DIFFERS") + ", golden bytes " +
                                          (golden_ok ? "match" : "DIFFER") + ", surgery " +
                                          (kept ? "preserves untouched tensors" : "CHANGED tensors")};
}

std::string metrics_without_timing(const fs::path& path) {
  std::ifstream in(path);
  std::string out, line;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

Outcome determinism() {
  const fs::path root = fs::current_path() / "acceptance_runs";
  fs::remove_all(root);
  fs::create_directories(root);
  std::vector<std::string> csvs;
  for (const char* name : {"a", "b"}) {
    const fs::path out = root / name;
    const std::string cmd = std::string("\"") + NNL_CLI_PATH + "\" train --preset mnist-small --seed 7 --out \"" +
                            out.string() + "\" > \"" + (root / (std::string(name) + ".log")).string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (status != 0) return {false, "train exited with status " + std::to_string(status)};
    csvs.push_back(metrics_without_timing(out / "metrics.csv"));
  }
  const std::size_t rows = std::count(csvs[0].begin(), csvs[0].end(), '\n');
  const bool same = csvs[0] == csvs[1] && rows == 11;
  return {same, std::to_string(rows - 1) + " metric rows, " + (csvs[0] == csvs[1] ? "identical" : "DIFFERENT") +
                    " without the timing column"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"convolution golden values", conv_goldens},
      {"pooling golden values", pool_goldens},
      {"XOR truth table and Adam training", xor_table_and_training},
      {"gradient-check suite", gradcheck_all},
      {"optimizer contracts", optimizer_contracts},
      {"k-means properties", kmeans_properties},
      {"overfitting pattern", overfitting_pattern},
      {"bias/variance identity", bias_variance},
      {"plain vs residual gradient contrast", vanishing_contrast},
      {"desk-scale MNIST", mnist_small},
      {"persistence", persistence},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail << " ["
              << fmt(secs) << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
