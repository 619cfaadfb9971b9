#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fracdiff/kernel_tables.hpp"
#include "fracdiff/rng.hpp"
#include "fracdiff/schedule.hpp"
#include "fracdiff/space_grid.hpp"

namespace fracdiff {

inline constexpr double kTimeEpsilon = 1e-5;

/// Rows are samples: x_t = c(t) x0 + sigma_t xi.
struct ForwardBatch {
  Eigen::MatrixXd x_t;
  Eigen::MatrixXd xi;
  Eigen::VectorXd t;
  Eigen::VectorXd sigma;  // sigma_t per row
};

ForwardBatch sample_marginal(const KernelTables& tables, const Eigen::MatrixXd& x0,
                             const Eigen::VectorXd& t, Engine& engine);

struct ForwardOptions {
  std::vector<double> record_times;  // must lie on the time grid
  bool components = false;           // also integrate the X^i split
  int threads = 1;
};

/// One recorded snapshot of a simulated path. Component arrays are [i * d + k].
struct ForwardSnapshot {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> y, z;
  std::vector<double> x_i;
};

/// Euler-Maruyama of dX = [mu X - sigma S] dt + C_H sigma dW together with the
/// OU family, shared increments. Path p uses substream (seed, p).
std::vector<std::vector<ForwardSnapshot>> simulate_forward_em(
    const Coefficients& coeffs, const SpaceGrid& grid, const std::vector<double>& x0,
    const std::vector<double>& time_grid, std::size_t n_paths, std::uint64_t seed,
    const ForwardOptions& options);

}  // namespace fracdiff
