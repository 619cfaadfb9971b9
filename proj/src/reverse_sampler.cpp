#include "fracdiff/reverse_sampler.hpp"

#include <cmath>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/parallel.hpp"

namespace fracdiff {

using Eigen::MatrixXd;

std::string to_string(SamplerMethod method) {
  switch (method) {
    case SamplerMethod::SDE: return "SDE";
    case SamplerMethod::gSDE: return "gSDE";
    case SamplerMethod::nODE: return "nODE";
    case SamplerMethod::ODE: return "ODE";
  }
  return "?";
}

SamplerMethod parse_method(const std::string& name) {
  if (name == "SDE" || name == "sde") return SamplerMethod::SDE;
  if (name == "gSDE" || name == "gsde") return SamplerMethod::gSDE;
  if (name == "nODE" || name == "node") return SamplerMethod::nODE;
  if (name == "ODE" || name == "ode") return SamplerMethod::ODE;
  fail(ErrorKind::Config, "unknown sampler method '" + name + "'");
}

void check_method(SamplerMethod method, HurstIndex H) {
  if (H.is_brownian() && (method == SamplerMethod::gSDE || method == SamplerMethod::nODE)) {
    fail(ErrorKind::Unsupported,
         to_string(method) + " is not defined for H = 0.5; use SDE or ODE");
  }
}

void SamplerConfig::validate(double T) const {
  require(n_steps >= 1, "n_steps must be >= 1");
  require(n_samples >= 1, "n_samples must be >= 1");
  require(t_end > 0.0 && t_end < T, "t_end must lie in (0, T)");
}

MatrixXd ReverseState::s_h(const KernelTables& tables) const {
  MatrixXd s = MatrixXd::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < tables.m(); ++i) {
    if (tables.smooth()) {
      s += tables.q[i] * (tables.x[i] * z[i] - y[i]);
    } else {
      s += (tables.q[i] * tables.x[i]) * y[i];
    }
  }
  return s;
}

ReverseState init_reverse_state(const KernelTables& tables, int dim, std::vector<Engine>& engines) {
  const auto n = static_cast<Eigen::Index>(engines.size());
  StandardNormal normal;
  MatrixXd xi(dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int k = 0; k < dim; ++k) xi(k, j) = normal(engines[j]);
  }
  ReverseState s;
  s.t = tables.T;
  s.x = tables.std_dev(tables.T) * xi;
  for (std::size_t i = 0; i < tables.m(); ++i) {
    s.y.push_back(std::sqrt(tables.tau2(i, tables.T)) * xi);
    if (tables.smooth()) s.z.push_back(std::sqrt(tables.tau2_tilde(i, tables.T)) * xi);
  }
  return s;
}

ComponentScores rescaled_component_scores(const KernelTables& tables, std::size_t i, double t,
                                          const MatrixXd& score) {
  require(i < tables.m(), "component index out of range");
  const double rho = tables.rho(i, t);
  if (1.0 + rho <= 1e-6) {
    std::ostringstream msg;
    msg << "score rescale is singular: 1 + rho_" << i << "(" << t << ") = " << 1.0 + rho;
    fail(ErrorKind::Numerical, msg.str());
  }
  const double sig = tables.std_dev(t);
  const double sig_i = std::sqrt(std::max(0.0, tables.var_i(i, t)));
  const double tau_i = std::sqrt(tables.tau2(i, t));
  if (!(sig_i > 0.0) || !(tau_i > 0.0)) {
    fail(ErrorKind::Numerical, "component standard deviation vanishes at t=" + std::to_string(t));
  }
  return {(sig / ((1.0 + rho) * sig_i)) * score, (sig / ((1.0 + rho) * tau_i)) * score};
}

ReverseDrift reverse_drift(const ReverseState& state, const KernelTables& tables, double mu,
                           const MatrixXd& score) {
  const double t = state.t;
  const double sig = tables.g(t) * tables.c(t);
  const std::size_t m = tables.m();
  ReverseDrift d;
  d.x_base = mu * state.x - sig * state.s_h(tables);
  if (tables.H == 0.5) {
    // Y^1 is the driving Brownian motion itself; X reverses as the standard
    // reverse SDE and the Y layer carries no score.
    d.x_score = sig * sig * score;
    d.y_base.push_back(MatrixXd::Zero(state.x.rows(), state.x.cols()));
    d.y_score.push_back(MatrixXd::Zero(state.x.rows(), state.x.cols()));
    return d;
  }
  d.x_score = MatrixXd::Zero(state.x.rows(), state.x.cols());
  for (std::size_t i = 0; i < m; ++i) {
    const ComponentScores cs = rescaled_component_scores(tables, i, t, score);
    const double qs = tables.q[i] * sig;
    d.x_score += qs * qs * cs.sx + qs * cs.sy;
    d.y_base.push_back(-tables.x[i] * state.y[i]);
    d.y_score.push_back(qs * cs.sx + cs.sy);
    if (tables.smooth()) d.z_base.push_back(state.y[i] - tables.x[i] * state.z[i]);
  }
  return d;
}

void reverse_step(ReverseState& state, const KernelTables& tables, double mu, double h,
                  SamplerMethod method, const MatrixXd& score, const MatrixXd& noise) {
  const ReverseDrift d = reverse_drift(state, tables, mu, score);
  const bool x_sde = method == SamplerMethod::SDE || method == SamplerMethod::gSDE;
  const bool y_sde = method == SamplerMethod::SDE || method == SamplerMethod::nODE;
  const double sig = tables.g(state.t) * tables.c(state.t);
  const double sq = std::sqrt(h);
  const double x_w = x_sde ? 1.0 : 0.5;
  const double y_w = y_sde ? 1.0 : 0.5;
  state.x -= h * (d.x_base - x_w * d.x_score);
  if (x_sde) state.x += (tables.c_h * sig * sq) * noise;
  if (tables.H != 0.5) {
    for (std::size_t i = 0; i < tables.m(); ++i) {
      if (tables.smooth()) state.z[i] -= h * d.z_base[i];
      state.y[i] -= h * (d.y_base[i] - y_w * d.y_score[i]);
      if (y_sde) state.y[i] += sq * noise;
    }
  }
  state.t -= h;
}

MatrixXd sample(const KernelTables& tables, const std::function<double(double)>& mu_fn,
                const ScoreFn& score, ScoreSource source, int dim, const SamplerConfig& config) {
  config.validate(tables.T);
  const HurstIndex H(tables.H);
  check_method(config.method, H);
  if (source == ScoreSource::Learned && tables.smooth()) {
    fail(ErrorKind::Unsupported,
         "learned-score sampling requires H <= 0.5; score rescaling is only derived there");
  }
  const std::size_t n = config.n_samples;
  MatrixXd out(dim, static_cast<Eigen::Index>(n));
  const double h = (tables.T - config.t_end) / config.n_steps;
  parallel_for(n, config.threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<Engine> engines;
    engines.reserve(hi - lo);
    for (std::size_t j = lo; j < hi; ++j) engines.push_back(make_engine(config.seed, j));
    ReverseState st = init_reverse_state(tables, dim, engines);
    StandardNormal normal;
    const auto cols = static_cast<Eigen::Index>(hi - lo);
    MatrixXd noise(dim, cols);
    for (int k = 0; k < config.n_steps; ++k) {
      st.t = tables.T - k * h;
      for (Eigen::Index j = 0; j < cols; ++j) {
        for (int a = 0; a < dim; ++a) noise(a, j) = normal(engines[j]);
      }
      const MatrixXd sc = score(st.x, st.t);
      reverse_step(st, tables, mu_fn(st.t), h, config.method, sc, noise);
      if (!st.x.allFinite()) {
        fail(ErrorKind::Numerical, "reverse sampler produced a non-finite state at step " +
                                       std::to_string(k) + " (t=" + std::to_string(st.t) + ")");
      }
    }
    out.middleCols(static_cast<Eigen::Index>(lo), cols) = st.x;
  });
  return out;
}

}  // namespace fracdiff
