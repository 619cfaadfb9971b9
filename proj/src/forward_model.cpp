#include "fracdiff/forward_model.hpp"

#include <cmath>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/fbm_noise.hpp"
#include "fracdiff/parallel.hpp"

namespace fracdiff {

ForwardBatch sample_marginal(const KernelTables& tables, const Eigen::MatrixXd& x0,
                             const Eigen::VectorXd& t, Engine& engine) {
  require(x0.rows() == t.size(), "x0 and t batch sizes differ");
  const Eigen::Index n = x0.rows(), d = x0.cols();
  ForwardBatch b;
  b.t = t;
  b.xi.resize(n, d);
  b.x_t.resize(n, d);
  b.sigma.resize(n);
  StandardNormal normal;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double tr = t[r];
    if (!(tr > kTimeEpsilon && tr <= tables.T * (1.0 + 1e-12))) {
      std::ostringstream msg;
      msg << "sample time " << tr << " outside (" << kTimeEpsilon << ", T]";
      fail(ErrorKind::InvalidArgument, msg.str());
    }
    const double c = tables.c(tr);
    const double sd = tables.std_dev(tr);
    b.sigma[r] = sd;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double xi = normal(engine);
      b.xi(r, k) = xi;
      b.x_t(r, k) = c * x0(r, k) + sd * xi;
    }
  }
  return b;
}

std::vector<std::vector<ForwardSnapshot>> simulate_forward_em(
    const Coefficients& coeffs, const SpaceGrid& grid, const std::vector<double>& x0,
    const std::vector<double>& time_grid, std::size_t n_paths, std::uint64_t seed,
    const ForwardOptions& options) {
  require(!x0.empty(), "x0 must be non-empty");
  require(time_grid.size() >= 2 && time_grid.front() == 0.0, "time grid must start at 0");
  double dt_max = 0.0;
  for (std::size_t k = 1; k < time_grid.size(); ++k) {
    dt_max = std::max(dt_max, time_grid[k] - time_grid[k - 1]);
  }
  if (dt_max > max_stable_step(grid)) {
    std::ostringstream msg;
    msg << "time step " << dt_max << " too large; use dt <= " << max_stable_step(grid);
    fail(ErrorKind::InvalidArgument, msg.str());
  }
  // map record times onto step indices
  std::vector<std::size_t> rec;
  for (double tr : options.record_times) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < time_grid.size(); ++k) {
      if (std::abs(time_grid[k] - tr) < std::abs(time_grid[best] - tr)) best = k;
    }
    require(std::abs(time_grid[best] - tr) <= 1e-9, "record time not on the time grid");
    rec.push_back(best);
  }

  const std::size_t d = x0.size();
  const std::size_t m = grid.size();
  const bool smooth = grid.H > 0.5;
  const double c_h = grid.c_h();
  const auto& xs = grid.x;
  const auto& q = grid.q;
  const std::size_t K = time_grid.size() - 1;
  std::vector<double> mu(K), sig(K);
  for (std::size_t k = 0; k < K; ++k) {
    mu[k] = coeffs.mu(time_grid[k]);
    sig[k] = coeffs.sigma(time_grid[k]);
  }

  std::vector<std::vector<ForwardSnapshot>> out(n_paths);
  parallel_for(n_paths, options.threads, [&](std::size_t lo, std::size_t hi) {
    StandardNormal normal;
    std::vector<double> X(d), Y(m * d), Z(smooth ? m * d : 0), Xi(options.components ? m * d : 0);
    for (std::size_t p = lo; p < hi; ++p) {
      Engine engine = make_engine(seed, p);
      X = x0;
      std::fill(Y.begin(), Y.end(), 0.0);
      std::fill(Z.begin(), Z.end(), 0.0);
      for (std::size_t i = 0; i < Xi.size(); ++i) Xi[i] = x0[i % d] / static_cast<double>(m);
      auto& snaps = out[p];
      snaps.reserve(rec.size());
      auto snapshot = [&](std::size_t k) {
        for (std::size_t r = 0; r < rec.size(); ++r) {
          if (rec[r] == k) snaps.push_back({time_grid[k], X, Y, Z, Xi});
        }
      };
      snapshot(0);
      for (std::size_t k = 0; k < K; ++k) {
        const double dt = time_grid[k + 1] - time_grid[k];
        const double sd = std::sqrt(dt);
        for (std::size_t a = 0; a < d; ++a) {
          const double dw = sd * normal(engine);
          double S = 0.0;
          for (std::size_t i = 0; i < m; ++i) {
            const std::size_t ix = i * d + a;
            const double si = smooth ? q[i] * (xs[i] * Z[ix] - Y[ix]) : q[i] * xs[i] * Y[ix];
            S += si;
            if (!Xi.empty()) {
              const double direct = smooth ? 0.0 : q[i] * sig[k] * dw;
              Xi[ix] += (mu[k] * Xi[ix] - sig[k] * si) * dt + direct;
            }
          }
          X[a] += (mu[k] * X[a] - sig[k] * S) * dt + c_h * sig[k] * dw;
          for (std::size_t i = 0; i < m; ++i) {
            const std::size_t ix = i * d + a;
            if (smooth) Z[ix] += (Y[ix] - xs[i] * Z[ix]) * dt;
            Y[ix] += dw - xs[i] * Y[ix] * dt;
          }
        }
        snapshot(k + 1);
      }
    }
  });
  return out;
}

}  // namespace fracdiff
