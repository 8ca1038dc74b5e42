#include <CLI11.hpp>

#include <iostream>

#include "nnl/commands.hpp"
#include "nnl/text.hpp"

namespace {

void add_config_flags(CLI::App* cmd, nnl::ConfigSource& source, std::uint64_t& seed) {
  cmd->add_option("--config", source.config_path, "key = value config file");
  cmd->add_option("--preset", source.preset, "built-in config: xor, mnist-small, resnet-toy, rnn-echo");
  cmd->add_option("--seed", seed, "override the seed");
  cmd->add_option("--out", source.out, "output directory");
  cmd->add_option("--set", source.settings, "extra key=value settings, applied last")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nnl: small neural networks, k-means and polynomial fits"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  nnl::ConfigSource train_source;
  auto* train = app.add_subcommand("train", "train a network and write config.txt, metrics.csv, model.nnl");
  add_config_flags(train, train_source, seed);

  nnl::EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "loss and accuracy of a saved model");
  eval->add_option("--model", eval_opts.model, "model file")->required();
  eval->add_option("--part", eval_opts.part, "train, val, test or all");
  eval->add_option("--csv", eval_opts.csv, "labelled CSV to evaluate on (first column is the target)");
  add_config_flags(eval, eval_opts.source, seed);

  nnl::PredictOptions predict_opts;
  auto* predict = app.add_subcommand("predict", "outputs and classes of a saved model");
  predict->add_option("--model", predict_opts.model, "model file")->required();
  predict->add_option("--csv", predict_opts.csv, "feature rows");
  predict->add_option("--row", predict_opts.row, "one comma separated sample");

  nnl::GradcheckOptionsCli gc_opts;
  std::string gc_arch;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite differences against backprop");
  gradcheck->add_option("--arch", gc_arch, "architecture text to check instead of the built-in suite");
  gradcheck->add_flag("--corrupt", gc_opts.corrupt, "flip the sign of one analytic gradient");
  gradcheck->add_option("--tolerance", gc_opts.tolerance, "largest accepted relative error");
  gradcheck->add_option("--max-entries", gc_opts.max_per_tensor, "entries probed per tensor of a configured net");
  add_config_flags(gradcheck, gc_opts.source, seed);

  nnl::KMeansCommand km_opts;
  auto* km = app.add_subcommand("kmeans", "k-means clustering of CSV rows");
  km->add_option("--csv", km_opts.csv, "points, one per row")->required();
  km->add_option("--k", km_opts.k, "number of clusters")->required();
  km->add_option("--restarts", km_opts.restarts, "random restarts");
  km->add_option("--seed", km_opts.seed, "seed");
  km->add_option("--out", km_opts.out, "output directory");

  nnl::PolyfitCommand pf_opts;
  auto* pf = app.add_subcommand("polyfit", "least-squares polynomial fit with optional weight decay");
  pf->add_option("--csv", pf_opts.csv, "training rows s,u (default: noisy-sine fixture)");
  pf->add_option("--test", pf_opts.test, "held-out rows s,u");
  pf->add_option("--degree", pf_opts.degree, "polynomial degree");
  pf->add_option("--lambda", pf_opts.lambda, "weight decay");
  pf->add_option("--sweep", pf_opts.sweep, "degrees to sweep, one output row each")->delimiter(',');
  pf->add_option("--seed", pf_opts.seed, "fixture seed");
  pf->add_option("--points", pf_opts.points, "fixture points per part");
  pf->add_option("--noise", pf_opts.noise, "fixture noise std");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "print a model file header");
  inspect->add_option("model", inspect_path, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? nnl::kExitOk : nnl::kExitUsage;
  }

  auto seed_given = [&](CLI::App* cmd) { return cmd->count("--seed") > 0; };
  return nnl::guarded(
      [&]() -> int {
        if (train->parsed()) {
          if (seed_given(train)) train_source.seed = seed;
          return nnl::cmd_train(train_source, std::cout);
        }
        if (eval->parsed()) {
          if (seed_given(eval)) eval_opts.source.seed = seed;
          return nnl::cmd_eval(eval_opts, std::cout);
        }
        if (predict->parsed()) return nnl::cmd_predict(predict_opts, std::cout);
        if (gradcheck->parsed()) {
          if (seed_given(gradcheck)) gc_opts.seed = seed;
          if (gradcheck->count("--arch") > 0) gc_opts.architecture = gc_arch;
          return nnl::cmd_gradcheck(gc_opts, std::cout);
        }
        if (km->parsed()) return nnl::cmd_kmeans(km_opts, std::cout);
        if (pf->parsed()) return nnl::cmd_polyfit(pf_opts, std::cout);
        return nnl::cmd_inspect(inspect_path, std::cout);
      },
      std::cerr);
}
