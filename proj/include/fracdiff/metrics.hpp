#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "fracdiff/rng.hpp"

namespace fracdiff {

// Point sets are row-major: one point per row.

/// Mean over random unit directions of the 1D 2-Wasserstein distance between
/// the projected sets. The larger set is subsampled to the smaller size.
double sliced_wasserstein(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen, int n_slices,
                          Engine& engine);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// k-NN manifold precision and recall, brute force.
PrecisionRecall improved_precision_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen,
                                          int k = 3);

enum class VendiKernel { Cosine, Rbf };

struct VendiOptions {
  VendiKernel kernel = VendiKernel::Cosine;
  double bandwidth = 0.0;          // RBF only; <= 0 selects the median heuristic
  std::size_t max_points = 2000;   // RBF only; larger sets are subsampled
  std::uint64_t seed = 0;
};

/// exp of the eigenvalue entropy of K / n for a unit-diagonal kernel K.
double vendi_score(const Eigen::MatrixXd& gen, const VendiOptions& options = {});

/// Median pairwise Euclidean distance.
double median_pairwise_distance(const Eigen::MatrixXd& points);

struct MetricConfig {
  int n_slices = 256;
  int k = 3;
  VendiOptions vendi;
  std::uint64_t seed = 0;
};

struct MetricReport {
  double wsd = 0.0, ip = 0.0, ir = 0.0, vs = 0.0;
  std::size_t n_real = 0, n_gen = 0;
  MetricConfig config;

  std::string to_text() const;
};

MetricReport evaluate(const Eigen::MatrixXd& real, const Eigen::MatrixXd& gen,
                      const MetricConfig& config = {});

}  // namespace fracdiff
