// fracdiff command-line entry point: train, sample, eval, inspect, noise-sim.
#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <optional>
#include <string>

#include "fracdiff/error.hpp"
#include "fracdiff/pipeline.hpp"

using namespace fracdiff;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Parse:
    case ErrorKind::InvalidArgument: return 2;
    case ErrorKind::Unsupported: return 3;
    case ErrorKind::Numerical: return 4;
    case ErrorKind::Io: return 5;
  }
  return 1;
}

void report(const std::string& category, std::string what) {
  std::replace(what.begin(), what.end(), '\n', ' ');
  std::cerr << "error: " << category << ": " << what << std::endl;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "key=value run config");
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--threads", c.threads, "worker threads (default 1, bit-reproducible)");
  cmd->add_option("--out", c.out, "output directory");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) cfg = RunConfig::load(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (!c.out.empty()) cfg.out = c.out;
  cfg.finalize();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional diffusion models: training, sampling and diagnostics"};
  app.require_subcommand(1);

  Common train_opts;
  auto* train = app.add_subcommand("train", "train a score model and write model.ckpt");
  add_common(train, train_opts, true);

  Common sample_opts;
  std::string sample_ckpt, method;
  std::optional<std::size_t> n_samples;
  std::optional<int> n_steps;
  auto* sample = app.add_subcommand("sample", "draw samples from a checkpoint");
  add_common(sample, sample_opts, false);
  sample->add_option("--checkpoint", sample_ckpt, "checkpoint file")->required();
  sample->add_option("--method", method, "SDE, gSDE, nODE or ODE");
  sample->add_option("--n", n_samples, "number of samples");
  sample->add_option("--steps", n_steps, "reverse steps");

  Common eval_opts;
  std::string real_csv, gen_csv;
  auto* eval = app.add_subcommand("eval", "compare generated points with real points");
  add_common(eval, eval_opts, false);
  eval->add_option("--real", real_csv, "reference CSV")->required();
  eval->add_option("--gen", gen_csv, "generated CSV")->required();

  Common inspect_opts;
  std::string inspect_ckpt;
  auto* inspect = app.add_subcommand("inspect", "dump kernel tables of a checkpoint as CSV");
  add_common(inspect, inspect_opts, false);
  inspect->add_option("--checkpoint", inspect_ckpt, "checkpoint file")->required();

  Common noise_opts;
  auto* noise = app.add_subcommand("noise-sim", "simulate approximate FBM paths to CSV");
  add_common(noise, noise_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("usage", e.what());
    return 2;
  }

  try {
    if (*train) {
      const RunConfig cfg = resolve(train_opts);
      std::cout << cmd_train(cfg, &std::cerr) << '\n';
    } else if (*sample) {
      RunConfig cfg = resolve(sample_opts);
      if (!method.empty()) cfg.sampler.method = parse_method(method);
      if (n_samples) cfg.sampler.n_samples = *n_samples;
      if (n_steps) cfg.sampler.n_steps = *n_steps;
      std::cout << cmd_sample(sample_ckpt, cfg) << '\n';
    } else if (*eval) {
      const RunConfig cfg = resolve(eval_opts);
      std::cout << cmd_eval(real_csv, gen_csv, cfg).to_text();
    } else if (*inspect) {
      const RunConfig cfg = resolve(inspect_opts);
      std::cout << cmd_inspect(inspect_ckpt, cfg.out) << '\n';
    } else if (*noise) {
      const RunConfig cfg = resolve(noise_opts);
      std::cout << cmd_noise_sim(cfg) << '\n';
    }
  } catch (const Error& e) {
    report(to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report("internal", e.what());
    return 1;
  }
  return 0;
}
