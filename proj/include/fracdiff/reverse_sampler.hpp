#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracdiff/hurst.hpp"
#include "fracdiff/kernel_tables.hpp"
#include "fracdiff/rng.hpp"

namespace fracdiff {

enum class SamplerMethod { SDE, gSDE, nODE, ODE };

std::string to_string(SamplerMethod method);
SamplerMethod parse_method(const std::string& name);

/// Throws Unsupported for gSDE / nODE at H = 0.5.
void check_method(SamplerMethod method, HurstIndex H);

/// grad_x log p_t at the columns of x (forward time t).
using ScoreFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& x, double t)>;

enum class ScoreSource { Analytic, Learned };

struct SamplerConfig {
  SamplerMethod method = SamplerMethod::SDE;
  int n_steps = 1000;
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  double t_end = 1e-3;
  int threads = 1;

  void validate(double T) const;
};

/// Coupled reverse state. Columns are chains; y[i], z[i] are d x n.
struct ReverseState {
  Eigen::MatrixXd x;
  std::vector<Eigen::MatrixXd> y;
  std::vector<Eigen::MatrixXd> z;  // empty unless H > 1/2
  double t = 0.0;                  // forward time

  /// S^H: sum q_i x_i y_i, or sum q_i (x_i z_i - y_i) for H > 1/2.
  Eigen::MatrixXd s_h(const KernelTables& tables) const;
};

/// One shared xi per chain: x = sigma_T xi, y_i = tau_{T,i} xi, z_i = tau~_{T,i} xi.
/// engines[j] drives chain j.
ReverseState init_reverse_state(const KernelTables& tables, int dim, std::vector<Engine>& engines);

struct ComponentScores {
  Eigen::MatrixXd sx, sy;
};

/// sx = sigma_t / ((1 + rho_i) sigma_{t,i}) score, sy = sigma_t / ((1 + rho_i) tau_{t,i}) score.
ComponentScores rescaled_component_scores(const KernelTables& tables, std::size_t i, double t,
                                          const Eigen::MatrixXd& score);

/// Forward-time drift split into the base part f and the score part G grad log p.
/// The reverse step moves by -h (f - G grad log p).
struct ReverseDrift {
  Eigen::MatrixXd x_base, x_score;
  std::vector<Eigen::MatrixXd> y_base, y_score;
  std::vector<Eigen::MatrixXd> z_base;
};

ReverseDrift reverse_drift(const ReverseState& state, const KernelTables& tables, double mu,
                           const Eigen::MatrixXd& score);

/// One step from state.t to state.t - h. noise is d x n standard normal
/// (ignored by ODE parts). mu is the forward drift coefficient at state.t.
void reverse_step(ReverseState& state, const KernelTables& tables, double mu, double h,
                  SamplerMethod method, const Eigen::MatrixXd& score, const Eigen::MatrixXd& noise);

/// Integrates from T to t_end. mu_fn gives the forward drift coefficient.
/// Returns d x n_samples in the tables' (standardized) coordinates.
Eigen::MatrixXd sample(const KernelTables& tables, const std::function<double(double)>& mu_fn,
                       const ScoreFn& score, ScoreSource source, int dim,
                       const SamplerConfig& config);

}  // namespace fracdiff
