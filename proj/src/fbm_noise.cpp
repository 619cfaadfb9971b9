#include "fracdiff/fbm_noise.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/numerics.hpp"
#include "fracdiff/parallel.hpp"
#include "fracdiff/rng.hpp"

namespace fracdiff {

namespace {
constexpr double kStabilityMargin = 0.5;
}

double fbm_covariance(HurstIndex H, double s, double t) {
  require(s >= 0.0 && t >= 0.0, "fbm_covariance needs non-negative times");
  const double h2 = 2.0 * H.value();
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double approx_covariance(const SpaceGrid& grid, double s, double t) {
  require(s >= 0.0 && t >= 0.0, "approx_covariance needs non-negative times");
  if (s > t) std::swap(s, t);
  const double delta = t - s;
  const bool smooth = grid.H > 0.5;
  const std::size_t m = grid.size();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      // kernels K(s,u) for node i and K(t,u) for node j, with v = s - u
      const double a = grid.x[i] + grid.x[j];
      double k = numerics::exp_moment(0, a, s);
      if (smooth) k = numerics::exp_moment(2, a, s) + delta * numerics::exp_moment(1, a, s);
      total += grid.q[i] * grid.q[j] * std::exp(-grid.x[j] * delta) * k;
    }
  }
  return total;
}

double max_stable_step(const SpaceGrid& grid) {
  double xmax = 0.0;
  for (double v : grid.x) xmax = std::max(xmax, v);
  return xmax > 0.0 ? kStabilityMargin / xmax : INFINITY;
}

std::vector<double> uniform_time_grid(double T, std::size_t K) {
  require(K >= 1 && T > 0.0, "uniform_time_grid needs K >= 1 and T > 0");
  std::vector<double> t(K + 1);
  for (std::size_t k = 0; k <= K; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(K);
  return t;
}

std::vector<NoisePath> simulate_noise(const SpaceGrid& grid, const std::vector<double>& time_grid,
                                      std::size_t n_paths, std::uint64_t seed,
                                      const NoiseOptions& options) {
  require(time_grid.size() >= 2, "time grid needs at least two points");
  require(time_grid.front() == 0.0, "time grid must start at 0");
  require(options.dims >= 1, "dims must be positive");
  const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
  double dt_max = 0.0;
  for (std::size_t k = 1; k < time_grid.size(); ++k) {
    const double dt = time_grid[k] - time_grid[k - 1];
    require(dt > 0.0, "time grid must be strictly increasing");
    dt_max = std::max(dt_max, dt);
  }
  const double limit = max_stable_step(grid);
  if (dt_max > limit) {
    std::ostringstream msg;
    msg << "time step " << dt_max << " violates x_max*dt <= " << kStabilityMargin
        << "; use dt <= " << limit;
    fail(ErrorKind::InvalidArgument, msg.str());
  }

  const std::size_t K = time_grid.size() - 1;
  std::vector<std::size_t> records;
  for (std::size_t k = 0; k <= K; k += stride) records.push_back(k);
  if (records.back() != K) records.push_back(K);

  std::vector<double> steps(K);
  for (std::size_t k = 0; k < K; ++k) steps[k] = time_grid[k + 1] - time_grid[k];

  const std::size_t m = grid.size();
  const int dims = options.dims;
  const bool smooth = grid.H > 0.5;
  const auto& x = grid.x;
  const auto& q = grid.q;

  std::vector<NoisePath> out(n_paths);
  parallel_for(n_paths, options.threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> y(dims * m), z(smooth ? dims * m : 0);
    std::vector<double> decay(m);
    constexpr std::size_t kBlock = 256;
    std::vector<double> draws(kBlock * dims);
    double last_dt = -1.0, sd = 0.0;
    StandardNormal normal;
    for (std::size_t p = lo; p < hi; ++p) {
      Engine engine = make_engine(seed, p);
      std::fill(y.begin(), y.end(), 0.0);
      std::fill(z.begin(), z.end(), 0.0);
      NoisePath& path = out[p];
      path.dims = dims;
      path.times.reserve(records.size());
      path.w_hm.reserve(records.size() * dims);
      std::size_t next = 0;
      auto record = [&](std::size_t k) {
        path.times.push_back(time_grid[k]);
        for (int d = 0; d < dims; ++d) {
          const double* src = smooth ? &z[d * m] : &y[d * m];
          double w = 0.0;
          for (std::size_t i = 0; i < m; ++i) w += q[i] * src[i];
          path.w_hm.push_back(w);
        }
        if (options.keep_ou) path.ou.push_back({time_grid[k], y, z});
        ++next;
      };
      record(0);
      for (std::size_t k0 = 1; k0 <= K; k0 += kBlock) {
        const std::size_t k1 = std::min(K + 1, k0 + kBlock);
        // same order as drawing inside the step loop
        for (std::size_t j = 0; j < (k1 - k0) * dims; ++j) draws[j] = normal(engine);
        for (std::size_t k = k0; k < k1; ++k) {
          const double dt = steps[k - 1];
          if (dt != last_dt) {
            for (std::size_t i = 0; i < m; ++i) decay[i] = 1.0 - x[i] * dt;
            sd = std::sqrt(dt);
            last_dt = dt;
          }
          const double* __restrict a = decay.data();
          for (int d = 0; d < dims; ++d) {
            const double dw = sd * draws[(k - k0) * dims + d];
            double* __restrict yd = &y[d * m];
            if (smooth) {
              double* __restrict zd = &z[d * m];
              for (std::size_t i = 0; i < m; ++i) zd[i] = a[i] * zd[i] + dt * yd[i];
            }
            for (std::size_t i = 0; i < m; ++i) yd[i] = a[i] * yd[i] + dw;
          }
          if (next < records.size() && records[next] == k) record(k);
        }
      }
    }
  });
  return out;
}

void write_noise_csv(std::ostream& out, const std::vector<NoisePath>& paths) {
  out << "time,dim,path_id,w_hm\n";
  out << std::setprecision(17);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    for (std::size_t k = 0; k < path.times.size(); ++k) {
      for (int d = 0; d < path.dims; ++d) {
        out << path.times[k] << ',' << d << ',' << p << ',' << path.w(k, d) << '\n';
      }
    }
  }
}

}  // namespace fracdiff
