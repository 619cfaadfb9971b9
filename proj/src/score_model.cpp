#include "fracdiff/score_model.hpp"

#include <algorithm>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracdiff/error.hpp"

namespace fracdiff {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMat = Eigen::Map<const MatrixXd>;
using ConstVec = Eigen::Map<const VectorXd>;

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void check_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) fail(ErrorKind::Numerical, std::string("non-finite ") + what);
}

}  // namespace

ScoreNet::ScoreNet(int dim, std::vector<int> hidden, Engine& engine)
    : dim_(dim), hidden_(std::move(hidden)) {
  require(dim >= 1, "data dimension must be positive");
  for (int h : hidden_) require(h >= 1, "hidden widths must be positive");
  StandardNormal normal;
  freqs_.resize(kFourierPairs);
  for (auto& f : freqs_) f = kFourierScale * normal(engine);
  layout();
  for (const auto& l : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (int k = 0; k < l.in * l.out; ++k) params_[l.w_off + k] = uniform(engine, -bound, bound);
  }
}

ScoreNet ScoreNet::from_parts(int dim, std::vector<int> hidden, std::vector<double> freqs,
                              std::vector<double> params) {
  ScoreNet net;
  net.dim_ = dim;
  net.hidden_ = std::move(hidden);
  if (freqs.size() != static_cast<std::size_t>(kFourierPairs)) {
    fail(ErrorKind::Parse, "wrong number of Fourier frequencies");
  }
  net.freqs_ = std::move(freqs);
  net.layout();
  if (params.size() != net.params_.size()) fail(ErrorKind::Parse, "parameter count mismatch");
  net.params_ = std::move(params);
  return net;
}

void ScoreNet::layout() {
  layers_.clear();
  std::size_t off = 0;
  int in = dim_ + 2 * kFourierPairs;
  std::vector<int> outs = hidden_;
  outs.push_back(dim_);
  for (int out : outs) {
    Layer l{off, off + static_cast<std::size_t>(in) * out, in, out};
    off = l.b_off + out;
    layers_.push_back(l);
    in = out;
  }
  params_.assign(off, 0.0);
}

MatrixXd ScoreNet::input_block(const MatrixXd& x, const VectorXd& t, const VectorXd& cin) const {
  const Eigen::Index n = x.cols();
  MatrixXd a(dim_ + 2 * kFourierPairs, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    a.col(j).head(dim_) = x.col(j) * cin[j];
    for (int k = 0; k < kFourierPairs; ++k) {
      const double arg = 2.0 * std::numbers::pi * freqs_[k] * t[j];
      a(dim_ + k, j) = std::sin(arg);
      a(dim_ + kFourierPairs + k, j) = std::cos(arg);
    }
  }
  return a;
}

MatrixXd ScoreNet::raw_forward(const MatrixXd& x, const VectorXd& t, const VectorXd& cin) const {
  require(x.rows() == dim_, "input dimension mismatch");
  require(x.cols() == t.size() && t.size() == cin.size(), "batch size mismatch");
  check_finite(x, "network input");
  MatrixXd a = input_block(x, t, cin);
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    ConstMat W(params_.data() + l.w_off, l.out, l.in);
    ConstVec b(params_.data() + l.b_off, l.out);
    MatrixXd h = W * a;
    h.colwise() += b;
    if (li + 1 < layers_.size()) {
      a = h.unaryExpr([](double v) { return v * sigmoid(v); });
    } else {
      a = std::move(h);
    }
  }
  return a;
}

MatrixXd ScoreNet::forward(const KernelTables& tables, const MatrixXd& x, const VectorXd& t) const {
  VectorXd cin(t.size()), sig(t.size());
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    const double c = tables.c(t[j]);
    sig[j] = tables.std_dev(t[j]);
    if (!(sig[j] > 0.0)) fail(ErrorKind::Numerical, "sigma_t is zero at the requested time");
    cin[j] = 1.0 / std::sqrt(c * c + sig[j] * sig[j]);
  }
  MatrixXd out = raw_forward(x, t, cin);
  for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) /= sig[j];
  return out;
}

double ScoreNet::loss_and_grad(const MatrixXd& x, const VectorXd& t, const VectorXd& cin,
                               const MatrixXd& target, const VectorXd& w,
                               std::vector<double>* grad) const {
  require(x.rows() == dim_ && target.rows() == dim_, "dimension mismatch");
  require(x.cols() == target.cols() && x.cols() == w.size(), "batch size mismatch");
  check_finite(x, "network input");
  const std::size_t L = layers_.size();
  std::vector<MatrixXd> acts(L + 1), pre(L);
  acts[0] = input_block(x, t, cin);
  for (std::size_t li = 0; li < L; ++li) {
    const auto& l = layers_[li];
    ConstMat W(params_.data() + l.w_off, l.out, l.in);
    ConstVec b(params_.data() + l.b_off, l.out);
    pre[li] = W * acts[li];
    pre[li].colwise() += b;
    if (li + 1 < L) {
      acts[li + 1] = pre[li].unaryExpr([](double v) { return v * sigmoid(v); });
    } else {
      acts[li + 1] = pre[li];
    }
  }
  const MatrixXd resid = acts[L] - target;
  const double loss = (resid.colwise().squaredNorm().transpose().array() * w.array()).sum();
  if (!grad) return loss;

  grad->assign(params_.size(), 0.0);
  MatrixXd delta = 2.0 * resid * w.asDiagonal();
  for (std::size_t li = L; li-- > 0;) {
    const auto& l = layers_[li];
    if (li + 1 < L) {
      delta.array() *= pre[li].unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
      }).array();
    }
    Eigen::Map<MatrixXd> gW(grad->data() + l.w_off, l.out, l.in);
    gW.noalias() = delta * acts[li].transpose();
    // reduce into aligned storage first; a partial reduction straight into a
    // Map peels by address and the sum order would depend on the allocation
    const VectorXd gb = delta.rowwise().sum();
    std::copy(gb.data(), gb.data() + l.out, grad->data() + l.b_off);
    if (li > 0) {
      ConstMat W(params_.data() + l.w_off, l.out, l.in);
      delta = W.transpose() * delta;
    }
  }
  return loss;
}

void TrainConfig::validate() const {
  require(batch_size >= 1, "batch_size must be positive");
  require(steps >= 0, "steps must be non-negative");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, "Adam betas must lie in (0,1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(ema_decay > 0.0 && ema_decay < 1.0, "ema_decay must lie in (0,1)");
  require(eps_t > 0.0, "eps_t must be positive");
}

double dsm_loss_fixed(const ScoreNet& net, const KernelTables& tables, const MatrixXd& x0,
                      const VectorXd& t, const MatrixXd& xi, LossWeighting weighting,
                      std::vector<double>* grad) {
  const Eigen::Index n = x0.rows();
  require(n >= 1, "empty batch");
  require(xi.rows() == n && t.size() == n && xi.cols() == x0.cols(), "batch shape mismatch");
  MatrixXd xt(x0.cols(), n);
  VectorXd cin(n), w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c = tables.c(t[j]);
    const double s = tables.std_dev(t[j]);
    xt.col(j) = c * x0.row(j).transpose() + s * xi.row(j).transpose();
    cin[j] = 1.0 / std::sqrt(c * c + s * s);
    // lambda ||xi/s - raw/s||^2 with lambda = s^2 or 1
    w[j] = (weighting == LossWeighting::SigmaSquared ? 1.0 : 1.0 / (s * s)) / n;
  }
  return net.loss_and_grad(xt, t, cin, xi.transpose(), w, grad);
}

LossSample dsm_loss(const ScoreNet& net, const KernelTables& tables, const MatrixXd& x0,
                    Engine& engine, const TrainConfig& config) {
  const Eigen::Index n = x0.rows();
  require(n >= 1, "empty batch");
  VectorXd t(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // resample the rare draw whose sigma_t underflows
    for (int tries = 0;; ++tries) {
      t[j] = uniform(engine, config.eps_t, tables.T);
      if (t[j] > kTimeEpsilon && tables.std_dev(t[j]) > 1e-12) break;
      if (tries > 100) fail(ErrorKind::Numerical, "sigma_t vanishes on the training interval");
    }
  }
  const ForwardBatch fb = sample_marginal(tables, x0, t, engine);
  LossSample out;
  out.loss = dsm_loss_fixed(net, tables, x0, t, fb.xi, config.weighting, &out.grad);
  return out;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  require(params.size() == m_.size() && grad.size() == m_.size(), "Adam size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
    params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

void Adam::restore(std::int64_t t, std::vector<double> m, std::vector<double> v) {
  require(m.size() == m_.size() && v.size() == v_.size(), "Adam state size mismatch");
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

TrainResult train(ScoreNet net, const TrainConfig& config, const MatrixXd& data,
                  const KernelTables& tables, const TrainProgress& progress) {
  config.validate();
  require(data.rows() >= 1, "training data is empty");
  require(data.cols() == net.dim(), "data dimension does not match the network");
  Engine engine = make_engine(config.seed, 0x7a11);
  Adam adam(net.n_params(), config.learning_rate, config.beta1, config.beta2, config.adam_eps);
  TrainResult res;
  res.ema = net.params();
  res.losses.reserve(config.steps);
  boost::random::uniform_int_distribution<Eigen::Index> pick(0, data.rows() - 1);
  MatrixXd batch(config.batch_size, data.cols());
  for (int step = 0; step < config.steps; ++step) {
    for (int j = 0; j < config.batch_size; ++j) batch.row(j) = data.row(pick(engine));
    LossSample ls = dsm_loss(net, tables, batch, engine, config);
    if (!std::isfinite(ls.loss)) {
      fail(ErrorKind::Numerical, "training diverged: loss is not finite at step " +
                                     std::to_string(step));
    }
    adam.step(net.params(), ls.grad);
    const auto& p = net.params();
    for (std::size_t k = 0; k < p.size(); ++k) {
      res.ema[k] = config.ema_decay * res.ema[k] + (1.0 - config.ema_decay) * p[k];
    }
    res.losses.push_back(ls.loss);
    if (progress) progress(step, ls.loss);
  }
  res.final_loss = res.losses.empty() ? 0.0 : res.losses.back();
  std::ostringstream st;
  st << engine;
  res.rng_state = st.str();
  res.net = std::move(net);
  return res;
}

}  // namespace fracdiff
