#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "fracdiff/metrics.hpp"
#include "fracdiff/reverse_sampler.hpp"
#include "fracdiff/schedule.hpp"
#include "fracdiff/score_model.hpp"

namespace fracdiff {

/// Flat key=value run description. Lines starting with '#' are comments.
/// Unknown keys are rejected by name; H is required.
struct RunConfig {
  double H = 0.5;
  Schedule schedule;
  int m = 40;
  double r = 1.35;
  std::size_t K = 10000;
  std::size_t output_stride = 10;

  TrainConfig train;

  SamplerConfig sampler;

  std::string dataset = "half_moons";  // half_moons | gaussian | csv
  std::string data_path;               // for dataset = csv
  std::size_t n_train = 10000;
  std::size_t n_eval = 5000;
  double noise_std = 0.08;

  std::size_t noise_paths = 100;
  std::size_t noise_K = 10000;
  int noise_dims = 1;
  std::size_t noise_record_stride = 100;

  MetricConfig metrics;

  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = ".";

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  /// Canonical form; parse(to_text()) reproduces the config.
  std::string to_text() const;

  /// Propagates seed and threads into the sub-configs.
  void finalize();
  /// Learned scores are only supported for H <= 1/2.
  void validate_for_training() const;
};

}  // namespace fracdiff
