#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fracdiff/checkpoint.hpp"
#include "fracdiff/metrics.hpp"
#include "fracdiff/run_config.hpp"

namespace fracdiff {

/// Grid, normalized schedule and tables for a config.
struct Prepared {
  SpaceGrid grid;
  Schedule schedule;
  KernelTables tables;
};
Prepared prepare(const RunConfig& cfg);

/// Dataset selected by cfg.dataset (n points, given seed).
Dataset load_dataset(const RunConfig& cfg, std::size_t n, std::uint64_t seed);

/// Trains and returns the checkpoint; log receives progress lines and
/// losses (if given) the per-step loss.
Checkpoint train_checkpoint(const RunConfig& cfg, std::ostream* log = nullptr,
                            std::vector<double>* losses = nullptr);

/// Samples from a checkpoint with its EMA weights, in original coordinates
/// (rows are samples).
Eigen::MatrixXd sample_checkpoint(const Checkpoint& ckpt, const SamplerConfig& sampler);

// Commands. Each writes into cfg.out and returns the main artifact path.
std::string cmd_train(const RunConfig& cfg, std::ostream* log = nullptr);
std::string cmd_sample(const std::string& checkpoint_path, const RunConfig& cfg);
MetricReport cmd_eval(const std::string& real_csv, const std::string& gen_csv, const RunConfig& cfg);
std::string cmd_inspect(const std::string& checkpoint_path, const std::string& out_dir);
std::string cmd_noise_sim(const RunConfig& cfg);

}  // namespace fracdiff
