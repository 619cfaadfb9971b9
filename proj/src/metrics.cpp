#include "fracdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>

#include "fracdiff/error.hpp"

namespace fracdiff {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// n rows drawn without replacement (partial Fisher-Yates).
MatrixXd subsample(const MatrixXd& p, Eigen::Index n, Engine& engine) {
  if (n >= p.rows()) return p;
  std::vector<Eigen::Index> idx(p.rows());
  std::iota(idx.begin(), idx.end(), 0);
  for (Eigen::Index j = 0; j < n; ++j) {
    boost::random::uniform_int_distribution<Eigen::Index> pick(j, p.rows() - 1);
    std::swap(idx[j], idx[pick(engine)]);
  }
  MatrixXd out(n, p.cols());
  for (Eigen::Index j = 0; j < n; ++j) out.row(j) = p.row(idx[j]);
  return out;
}

// squared distances between rows of a and rows of b
MatrixXd sq_dists(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd d = (-2.0 * a) * b.transpose();
  d.colwise() += a.rowwise().squaredNorm();
  d.rowwise() += b.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

// distance from each row to its k-th nearest other row
VectorXd knn_radius(const MatrixXd& p, int k) {
  const MatrixXd d = sq_dists(p, p);
  const Eigen::Index n = p.rows();
  VectorXd r(n);
  std::vector<double> row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) row[j] = d(i, j);
    row[i] = 0.0;  // self sits at index 0 after sorting
    std::nth_element(row.begin(), row.begin() + k, row.end());
    r[i] = row[k];
  }
  return r;
}

// fraction of rows of probe within the k-NN ball of some row of support
double coverage(const MatrixXd& support, const VectorXd& radius2, const MatrixXd& probe) {
  const MatrixXd d = sq_dists(probe, support);
  std::size_t hit = 0;
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    for (Eigen::Index j = 0; j < support.rows(); ++j) {
      if (d(i, j) <= radius2[j]) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(probe.rows());
}

double entropy_exp(const VectorXd& eig) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    const double v = eig[k];
    if (!std::isfinite(v)) fail(ErrorKind::Numerical, "non-finite kernel eigenvalue");
    if (v > 0.0) h -= v * std::log(v);
  }
  return std::exp(h);
}

}  // namespace

double sliced_wasserstein(const MatrixXd& real, const MatrixXd& gen, int n_slices, Engine& engine) {
  require(real.rows() >= 1 && gen.rows() >= 1, "point sets must be non-empty");
  require(real.cols() == gen.cols(), "point sets have different dimensions");
  require(n_slices >= 1, "n_slices must be positive");
  const Eigen::Index n = std::min(real.rows(), gen.rows());
  const MatrixXd a = subsample(real, n, engine);
  const MatrixXd b = subsample(gen, n, engine);
  StandardNormal normal;
  VectorXd dir(a.cols());
  std::vector<double> pa(n), pb(n);
  double total = 0.0;
  for (int s = 0; s < n_slices; ++s) {
    for (Eigen::Index k = 0; k < dir.size(); ++k) dir[k] = normal(engine);
    dir.normalize();
    const VectorXd va = a * dir, vb = b * dir;
    for (Eigen::Index j = 0; j < n; ++j) {
      pa[j] = va[j];
      pb[j] = vb[j];
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += (pa[j] - pb[j]) * (pa[j] - pb[j]);
    total += std::sqrt(acc / static_cast<double>(n));
  }
  return total / n_slices;
}

PrecisionRecall improved_precision_recall(const MatrixXd& real, const MatrixXd& gen, int k) {
  require(k >= 1, "k must be positive");
  require(real.cols() == gen.cols(), "point sets have different dimensions");
  if (real.rows() <= k || gen.rows() <= k) {
    fail(ErrorKind::InvalidArgument, "precision/recall needs more than k points in each set");
  }
  const VectorXd r_real = knn_radius(real, k);
  const VectorXd r_gen = knn_radius(gen, k);
  return {coverage(real, r_real, gen), coverage(gen, r_gen, real)};
}

double median_pairwise_distance(const MatrixXd& points) {
  const MatrixXd d = sq_dists(points, points);
  std::vector<double> v;
  v.reserve(points.rows() * (points.rows() - 1) / 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) v.push_back(d(i, j));
  }
  require(!v.empty(), "need at least two points");
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return std::sqrt(v[v.size() / 2]);
}

double vendi_score(const MatrixXd& gen, const VendiOptions& options) {
  require(gen.rows() >= 2, "vendi score needs at least two points");
  if (options.kernel == VendiKernel::Cosine) {
    // nonzero spectrum of K/n equals that of Xn^T Xn / n
    MatrixXd xn = gen;
    for (Eigen::Index j = 0; j < xn.rows(); ++j) {
      const double norm = xn.row(j).norm();
      if (!(norm > 0.0)) fail(ErrorKind::InvalidArgument, "cosine kernel undefined at the origin");
      xn.row(j) /= norm;
    }
    const MatrixXd g = xn.transpose() * xn / static_cast<double>(xn.rows());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(g, Eigen::EigenvaluesOnly);
    return entropy_exp(eig.eigenvalues());
  }
  Engine engine = make_engine(options.seed, 0x7e9d1);
  const MatrixXd p = subsample(gen, static_cast<Eigen::Index>(options.max_points), engine);
  const double bw = options.bandwidth > 0.0 ? options.bandwidth : median_pairwise_distance(p);
  if (!(bw > 0.0)) return 1.0;  // all points coincide
  MatrixXd kmat = (-sq_dists(p, p) / (2.0 * bw * bw)).array().exp();
  kmat /= static_cast<double>(p.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(kmat, Eigen::EigenvaluesOnly);
  return entropy_exp(eig.eigenvalues());
}

std::string MetricReport::to_text() const {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "wsd=" << wsd << "\nip=" << ip << "\nir=" << ir << "\nvs=" << vs << "\nn_real=" << n_real
      << "\nn_gen=" << n_gen << "\nk=" << config.k << "\nn_slices=" << config.n_slices
      << "\nvendi_kernel=" << (config.vendi.kernel == VendiKernel::Cosine ? "cosine" : "rbf");
  if (config.vendi.kernel == VendiKernel::Rbf) {
    out << "\nvendi_bandwidth="
        << (config.vendi.bandwidth > 0.0 ? std::to_string(config.vendi.bandwidth) : "median");
  }
  out << "\nrow=WSD " << wsd << " | IP " << ip << " | IR " << ir << " | VS " << vs << '\n';
  return out.str();
}

MetricReport evaluate(const MatrixXd& real, const MatrixXd& gen, const MetricConfig& config) {
  MetricReport r;
  r.config = config;
  r.n_real = static_cast<std::size_t>(real.rows());
  r.n_gen = static_cast<std::size_t>(gen.rows());
  Engine engine = make_engine(config.seed, 0x5117);
  r.wsd = sliced_wasserstein(real, gen, config.n_slices, engine);
  const PrecisionRecall pr = improved_precision_recall(real, gen, config.k);
  r.ip = pr.precision;
  r.ir = pr.recall;
  r.vs = vendi_score(gen, config.vendi);
  return r;
}

}  // namespace fracdiff
