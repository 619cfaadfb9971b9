#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fracdiff/hurst.hpp"
#include "fracdiff/space_grid.hpp"

namespace fracdiff {

/// rho_H(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(HurstIndex H, double s, double t);

/// Cov(W^{H,m}_s, W^{H,m}_t) of the finite-sum approximation, closed form.
double approx_covariance(const SpaceGrid& grid, double s, double t);

struct OuState {
  double t = 0.0;
  std::vector<double> y;  // [dim * m + i]
  std::vector<double> z;  // empty unless H > 1/2
};

struct NoisePath {
  std::vector<double> times;  // recorded times
  std::vector<double> w_hm;   // [record * dims + dim]
  std::vector<OuState> ou;    // parallel to times when keep_ou is set
  int dims = 1;

  double w(std::size_t record, int dim) const { return w_hm[record * dims + dim]; }
};

struct NoiseOptions {
  int dims = 1;
  /// Record every stride-th step. Step 0 and the final step are always kept.
  std::size_t record_stride = 1;
  bool keep_ou = false;
  int threads = 1;
};

/// Largest step for which the explicit scheme stays inside its margin.
double max_stable_step(const SpaceGrid& grid);

/// Euler-Maruyama for all OU components under one shared Brownian increment
/// per step and dimension. Path p draws from substream (seed, p).
std::vector<NoisePath> simulate_noise(const SpaceGrid& grid, const std::vector<double>& time_grid,
                                      std::size_t n_paths, std::uint64_t seed,
                                      const NoiseOptions& options = {});

/// Columns: time, dim, path_id, w_hm.
void write_noise_csv(std::ostream& out, const std::vector<NoisePath>& paths);

/// 0, T/K, ..., T.
std::vector<double> uniform_time_grid(double T, std::size_t K);

}  // namespace fracdiff
