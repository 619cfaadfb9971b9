#include "fracdiff/kernel_tables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/numerics.hpp"

namespace fracdiff {

namespace {

// Exponentially fitted cell integrals over a cell of length L with g linear
// inside it: int g(u) (u-a)^n e^{-x(u-a)} du, n = 0, 1.
struct Cell {
  double decay, e0, e1, e2;
};

Cell make_cell(double x, double L) {
  const double z = x * L;
  return {std::exp(-z), L * numerics::phi(1, z), L * L * numerics::phi(2, z),
          L * L * L * numerics::phi(3, z)};
}

// Walks s backwards from t to s_stop, maintaining for every node
//   J0_i(s) = int_s^t g(u) e^{-x_i(u-s)} du
//   J1_i(s) = int_s^t g(u) (u-s) e^{-x_i(u-s)} du
//   D_i(s)  = e^{-x_i(t-s)}
// and calls visit(s, g(s), L) at t, at every inner lattice point strictly
// between, and at s_stop. L is the length of the cell just crossed.
class Sweeper {
 public:
  explicit Sweeper(const KernelTables& tb) : tb_(tb), m_(tb.m()), dt_(tb.dt_inner()) {
    full_.reserve(m_);
    for (std::size_t i = 0; i < m_; ++i) full_.push_back(make_cell(tb.x[i], dt_));
    j0.resize(m_);
    j1.resize(m_);
    d.resize(m_);
  }

  std::vector<double> j0, j1, d;

  template <class Visit>
  void run(double t, double s_stop, Visit&& visit) {
    std::fill(j0.begin(), j0.end(), 0.0);
    std::fill(j1.begin(), j1.end(), 0.0);
    std::fill(d.begin(), d.end(), 1.0);
    const double eps = 1e-9 * dt_;
    double cur = t;
    double g_cur = tb_.g(t);
    visit(cur, g_cur, 0.0);
    auto k = static_cast<long long>(std::floor(t / dt_ + 1e-9));
    if (std::abs(static_cast<double>(k) * dt_ - t) <= eps) --k;
    for (; k >= 0; --k) {
      const double s = static_cast<double>(k) * dt_;
      if (s <= s_stop + eps) break;
      g_cur = step(cur, g_cur, s, tb_.g_inner[static_cast<std::size_t>(k)]);
      visit(s, g_cur, cur_len_);
      cur = s;
    }
    if (cur - s_stop > eps) {
      g_cur = step(cur, g_cur, s_stop, tb_.g(s_stop));
      visit(s_stop, g_cur, cur_len_);
    }
  }

 private:
  double step(double hi, double g_hi, double lo, double g_lo) {
    const double L = hi - lo;
    cur_len_ = L;
    const double slope = (g_hi - g_lo) / L;
    const bool full = std::abs(L - dt_) <= 1e-9 * dt_;
    for (std::size_t i = 0; i < m_; ++i) {
      const Cell c = full ? full_[i] : make_cell(tb_.x[i], L);
      const double a0 = g_lo * c.e0 + slope * c.e1;
      const double a1 = g_lo * c.e1 + slope * c.e2;
      j1[i] = a1 + c.decay * (j1[i] + L * j0[i]);
      j0[i] = a0 + c.decay * j0[i];
      d[i] *= c.decay;
    }
    return g_lo;
  }

  const KernelTables& tb_;
  std::size_t m_;
  double dt_;
  double cur_len_ = 0.0;
  std::vector<Cell> full_;
};

// alpha_i from the sweep state.
inline double alpha_component(const KernelTables& tb, const Sweeper& sw, std::size_t i,
                              double g_s) {
  if (tb.smooth()) return -tb.q[i] * (tb.x[i] * sw.j1[i] - sw.j0[i]);
  return tb.q[i] * (g_s - tb.x[i] * sw.j0[i]);
}

double interp_out(const KernelTables& tb, const std::vector<double>& v, std::size_t stride_v,
                  std::size_t i, double t) {
  return numerics::interp_uniform(t, tb.dt_out(), tb.n_out(),
                                  [&](std::size_t n) { return v[n * stride_v + i]; });
}

}  // namespace

void KernelTables::rescale(double kappa) {
  require(kappa > 0.0, "rescale factor must be positive");
  const double k2 = kappa * kappa;
  for (auto& v : g_inner) v *= kappa;
  for (auto& v : sigma2) v *= k2;
  for (auto& v : sigma2_i) v *= k2;
  for (auto& v : xcov_i) v *= kappa;
  for (auto& v : xzcov_i) v *= kappa;
}

double KernelTables::c(double t) const {
  return numerics::interp_uniform(t, dt_inner(), c_inner.size(),
                                  [&](std::size_t k) { return c_inner[k]; });
}

double KernelTables::g(double t) const {
  return numerics::interp_uniform(t, dt_inner(), g_inner.size(),
                                  [&](std::size_t k) { return g_inner[k]; });
}

double KernelTables::var(double t) const { return interp_out(*this, sigma2, 1, 0, t); }
double KernelTables::std_dev(double t) const { return std::sqrt(std::max(0.0, var(t))); }
double KernelTables::var_i(std::size_t i, double t) const {
  return interp_out(*this, sigma2_i, m(), i, t);
}
double KernelTables::xcov(std::size_t i, double t) const {
  return interp_out(*this, xcov_i, m(), i, t);
}
double KernelTables::rho(std::size_t i, double t) const {
  return interp_out(*this, rho_i, m(), i, t);
}
double KernelTables::tau2(std::size_t i, double t) const {
  return numerics::exp_moment(0, 2.0 * x[i], t);
}
double KernelTables::tau2_tilde(std::size_t i, double t) const {
  return numerics::exp_moment(2, 2.0 * x[i], t);
}
double KernelTables::yz_cov(std::size_t i, double t) const {
  return numerics::exp_moment(1, 2.0 * x[i], t);
}

KernelTables build_tables(const Coefficients& coeffs, const SpaceGrid& grid,
                          const TableOptions& options) {
  require(options.K >= 1000, "K must be at least 1000");
  require(options.output_stride >= 1 && options.K % options.output_stride == 0,
          "output_stride must divide K");
  require(coeffs.T > 0.0, "horizon must be positive");
  KernelTables tb;
  tb.H = grid.H;
  tb.x = grid.x;
  tb.q = grid.q;
  tb.c_h = grid.c_h();
  tb.T = coeffs.T;
  tb.K = options.K;
  tb.stride = options.output_stride;
  const std::size_t K = tb.K;
  const std::size_t m = tb.m();
  const double dt = tb.dt_inner();

  tb.g_inner.resize(K + 1);
  tb.c_inner.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const double t = (k == K) ? tb.T : static_cast<double>(k) * dt;
    const double c = coeffs.c(t);
    if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorKind::Numerical, "c(t) must be positive");
    tb.c_inner[k] = c;
    tb.g_inner[k] = coeffs.sigma(t) / c;
    if (!std::isfinite(tb.g_inner[k])) fail(ErrorKind::Numerical, "sigma(t)/c(t) not finite");
  }

  const std::size_t n_out = K / tb.stride + 1;
  tb.times.resize(n_out);
  tb.c_vals.resize(n_out);
  tb.sigma2.assign(n_out, 0.0);
  tb.sigma2_i.assign(n_out * m, 0.0);
  tb.tau2_i.resize(n_out * m);
  tb.xcov_i.assign(n_out * m, 0.0);
  tb.rho_i.assign(n_out * m, 0.0);
  if (tb.smooth()) {
    tb.tau2_tilde_i.resize(n_out * m);
    tb.yz_cov_i.resize(n_out * m);
    tb.xzcov_i.assign(n_out * m, 0.0);
  }

  Sweeper sw(tb);
  std::vector<double> a(m), prev_a2(m), prev_xc(m), prev_xz(m);
  std::vector<double> acc_a2(m), acc_xc(m), acc_xz(m);
  for (std::size_t n = 0; n < n_out; ++n) {
    const std::size_t kn = n * tb.stride;
    const double t = (kn == K) ? tb.T : static_cast<double>(kn) * dt;
    tb.times[n] = t;
    tb.c_vals[n] = tb.c_inner[kn];
    std::fill(acc_a2.begin(), acc_a2.end(), 0.0);
    std::fill(acc_xc.begin(), acc_xc.end(), 0.0);
    std::fill(acc_xz.begin(), acc_xz.end(), 0.0);
    double acc_all = 0.0, prev_all = 0.0;
    if (kn > 0) {
      sw.run(t, 0.0, [&](double s, double g_s, double L) {
        double total = 0.0;
        const double lag = t - s;
        for (std::size_t i = 0; i < m; ++i) {
          const double ai = alpha_component(tb, sw, i, g_s);
          total += ai;
          const double a2 = ai * ai;
          const double xc = ai * sw.d[i];
          const double xz = xc * lag;
          if (L > 0.0) {
            acc_a2[i] += 0.5 * L * (a2 + prev_a2[i]);
            acc_xc[i] += 0.5 * L * (xc + prev_xc[i]);
            acc_xz[i] += 0.5 * L * (xz + prev_xz[i]);
          }
          prev_a2[i] = a2;
          prev_xc[i] = xc;
          prev_xz[i] = xz;
        }
        const double all = total * total;
        if (L > 0.0) acc_all += 0.5 * L * (all + prev_all);
        prev_all = all;
      });
    }
    const double c = tb.c_vals[n];
    tb.sigma2[n] = c * c * acc_all;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t idx = n * m + i;
      tb.sigma2_i[idx] = c * c * acc_a2[i];
      tb.xcov_i[idx] = c * acc_xc[i];
      tb.tau2_i[idx] = tb.tau2(i, t);
      if (tb.smooth()) {
        tb.xzcov_i[idx] = c * acc_xz[i];
        tb.tau2_tilde_i[idx] = tb.tau2_tilde(i, t);
        tb.yz_cov_i[idx] = tb.yz_cov(i, t);
      }
      const double den = std::sqrt(tb.sigma2_i[idx] * tb.tau2_i[idx]);
      tb.rho_i[idx] = den > 0.0 ? std::clamp(tb.xcov_i[idx] / den, -1.0, 1.0) : 0.0;
    }
    if (!std::isfinite(tb.sigma2[n])) {
      fail(ErrorKind::Numerical, "kernel variance is not finite at t=" + std::to_string(t));
    }
  }
  return tb;
}

std::pair<Schedule, KernelTables> build_normalized_tables(const Schedule& schedule,
                                                          const SpaceGrid& grid,
                                                          const TableOptions& options) {
  schedule.validate();
  Schedule base = schedule;
  base.norm_factor = 1.0;
  KernelTables tb = build_tables(base.coefficients(), grid, options);
  Schedule normalized =
      normalize_terminal_variance(base, [&](const Schedule&) { return tb.sigma2.back(); });
  tb.rescale(normalized.norm_factor);
  return {normalized, std::move(tb)};
}

double alpha_at(const KernelTables& tables, double t, double s) {
  require(s >= 0.0 && t <= tables.T * (1.0 + 1e-12), "alpha_at needs 0 <= s <= t <= T");
  if (s > t) fail(ErrorKind::InvalidArgument, "alpha_at needs s <= t");
  Sweeper sw(tables);
  double out = 0.0;
  sw.run(t, s, [&](double u, double g_u, double) {
    if (u != s) return;
    out = 0.0;
    for (std::size_t i = 0; i < tables.m(); ++i) out += alpha_component(tables, sw, i, g_u);
  });
  return out;
}

AlphaProfile alpha_profile(const KernelTables& tables, double t) {
  require(t >= 0.0 && t <= tables.T * (1.0 + 1e-12), "alpha_profile needs t in [0, T]");
  const std::size_t m = tables.m();
  AlphaProfile p;
  Sweeper sw(tables);
  sw.run(t, 0.0, [&](double s, double g_s, double) {
    p.s.push_back(s);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double ai = alpha_component(tables, sw, i, g_s);
      p.alpha_i.push_back(ai);
      total += ai;
    }
    p.alpha.push_back(total);
  });
  // ascending in s
  const std::size_t n = p.s.size();
  std::reverse(p.s.begin(), p.s.end());
  std::reverse(p.alpha.begin(), p.alpha.end());
  for (std::size_t j = 0; j < n / 2; ++j) {
    std::swap_ranges(p.alpha_i.begin() + j * m, p.alpha_i.begin() + (j + 1) * m,
                     p.alpha_i.begin() + (n - 1 - j) * m);
  }
  return p;
}

ComponentCovariance component_covariance(const KernelTables& tables, std::size_t i, double t) {
  require(i < tables.m(), "component index out of range");
  require(t >= 0.0 && t <= tables.T * (1.0 + 1e-12), "component_covariance needs t in [0, T]");
  const bool smooth = tables.smooth();
  const int n = smooth ? 3 : 2;
  Eigen::MatrixXd cov(n, n);
  cov(0, 0) = tables.var_i(i, t);
  cov(0, 1) = cov(1, 0) = tables.xcov(i, t);
  cov(1, 1) = tables.tau2(i, t);
  if (smooth) {
    cov(0, 2) = cov(2, 0) = interp_out(tables, tables.xzcov_i, tables.m(), i, t);
    cov(1, 2) = cov(2, 1) = tables.yz_cov(i, t);
    cov(2, 2) = tables.tau2_tilde(i, t);
  }
  ComponentCovariance out{cov, false};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double lo = eig.eigenvalues().minCoeff();
  const double scale = std::max(1.0, cov.trace());
  if (lo < 0.0) {
    if (lo < -1e-10 * scale) {
      std::ostringstream msg;
      msg << "component covariance is not PSD (min eigenvalue " << lo << ")";
      fail(ErrorKind::Numerical, msg.str());
    }
    Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    out.cov = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
    out.clamped = true;
  }
  return out;
}

MarginalMoments marginal_moments(const KernelTables& tables, double t,
                                 const std::vector<double>& x0) {
  require(t >= 0.0 && t <= tables.T * (1.0 + 1e-12), "marginal_moments needs t in [0, T]");
  MarginalMoments mm;
  const double c = tables.c(t);
  mm.mean.reserve(x0.size());
  for (double v : x0) mm.mean.push_back(c * v);
  mm.std_dev = tables.std_dev(t);
  return mm;
}

}  // namespace fracdiff
