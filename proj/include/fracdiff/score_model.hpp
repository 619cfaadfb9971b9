#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracdiff/forward_model.hpp"
#include "fracdiff/kernel_tables.hpp"
#include "fracdiff/rng.hpp"

namespace fracdiff {

/// MLP s_theta(x, t) ~ xi / sigma_t, i.e. minus the score of p_t.
///
/// Input: x * c_in(t) with c_in = 1 / sqrt(c(t)^2 + sigma_t^2), concatenated
/// with Gaussian Fourier features of t. Hidden layers use SiLU. The raw
/// network output is divided by sigma_t.
class ScoreNet {
 public:
  static constexpr int kFourierPairs = 64;
  static constexpr double kFourierScale = 16.0;

  ScoreNet() = default;
  ScoreNet(int dim, std::vector<int> hidden, Engine& engine);
  /// Default 2 x 128 architecture.
  static ScoreNet make(int dim, Engine& engine) { return ScoreNet(dim, {128, 128}, engine); }

  int dim() const { return dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  const std::vector<double>& frequencies() const { return freqs_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t n_params() const { return params_.size(); }

  /// Rebuilds a network from persisted parts.
  static ScoreNet from_parts(int dim, std::vector<int> hidden, std::vector<double> freqs,
                             std::vector<double> params);

  /// Network output before the 1/sigma scaling. Columns are samples.
  /// cin[j] multiplies x.col(j).
  Eigen::MatrixXd raw_forward(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                              const Eigen::VectorXd& cin) const;

  /// s_theta for columns of x at times t, using the tables for sigma_t, c(t).
  Eigen::MatrixXd forward(const KernelTables& tables, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& t) const;

  /// Loss sum_j w[j] ||target.col(j) - raw(x.col(j))||^2 and its gradient.
  double loss_and_grad(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                       const Eigen::VectorXd& cin, const Eigen::MatrixXd& target,
                       const Eigen::VectorXd& w, std::vector<double>* grad) const;

 private:
  struct Layer {
    std::size_t w_off, b_off;
    int in, out;
  };
  void layout();
  Eigen::MatrixXd input_block(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                              const Eigen::VectorXd& cin) const;

  int dim_ = 0;
  std::vector<int> hidden_;
  std::vector<double> freqs_;
  std::vector<double> params_;
  std::vector<Layer> layers_;
};

enum class LossWeighting { SigmaSquared, Unit };

struct TrainConfig {
  int batch_size = 512;
  int steps = 20000;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double ema_decay = 0.999;
  double eps_t = kTimeEpsilon;
  std::uint64_t seed = 0;
  LossWeighting weighting = LossWeighting::SigmaSquared;

  void validate() const;
};

/// Loss for fixed draws (x0 rows, t, xi rows). Gradient w.r.t. params.
double dsm_loss_fixed(const ScoreNet& net, const KernelTables& tables, const Eigen::MatrixXd& x0,
                      const Eigen::VectorXd& t, const Eigen::MatrixXd& xi,
                      LossWeighting weighting, std::vector<double>* grad);

struct LossSample {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Draws t ~ U[eps_t, T] and xi ~ N(0, I) per row of x0 and evaluates the
/// weighted denoising loss.
LossSample dsm_loss(const ScoreNet& net, const KernelTables& tables, const Eigen::MatrixXd& x0,
                    Engine& engine, const TrainConfig& config);

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double beta1, double beta2, double eps);
  void step(std::vector<double>& params, const std::vector<double>& grad);
  std::int64_t steps() const { return t_; }
  const std::vector<double>& m() const { return m_; }
  const std::vector<double>& v() const { return v_; }
  void restore(std::int64_t t, std::vector<double> m, std::vector<double> v);

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainResult {
  ScoreNet net;                 // raw weights
  std::vector<double> ema;      // EMA weights, same layout
  std::vector<double> losses;   // per step
  double final_loss = 0.0;
  std::string rng_state;        // engine state after training
};

using TrainProgress = std::function<void(int step, double loss)>;

/// data rows are standardized points.
TrainResult train(ScoreNet net, const TrainConfig& config, const Eigen::MatrixXd& data,
                  const KernelTables& tables, const TrainProgress& progress = {});

}  // namespace fracdiff
