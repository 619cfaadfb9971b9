#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "fracdiff/schedule.hpp"
#include "fracdiff/space_grid.hpp"

namespace fracdiff {

struct TableOptions {
  std::size_t K = 10000;            // inner quadrature cells on [0, T]
  std::size_t output_stride = 10;   // output lattice = every stride-th inner point
};

/// Moments of the forward kernel on a fixed time lattice.
///
/// Per-component arrays are stored row-major as [n * m + i] with n the output
/// index. Every quantity below is linear (x, cross terms) or quadratic
/// (variances) in the diffusion scale, so normalization is a rescale.
struct KernelTables {
  // grid data
  double H = 0.5;
  std::vector<double> x, q;
  double c_h = 1.0;
  double T = 1.0;
  std::size_t K = 0;
  std::size_t stride = 1;

  // inner lattice, K + 1 points
  std::vector<double> g_inner;  // sigma(t) / c(t)
  std::vector<double> c_inner;  // c(t)

  // output lattice, n_out = K / stride + 1 points
  std::vector<double> times;
  std::vector<double> c_vals;
  std::vector<double> sigma2;
  std::vector<double> sigma2_i;
  std::vector<double> tau2_i;
  std::vector<double> tau2_tilde_i;  // H > 1/2 only
  std::vector<double> yz_cov_i;      // H > 1/2 only
  std::vector<double> xcov_i;        // Cov(X^i, Y^i)
  std::vector<double> xzcov_i;       // Cov(X^i, Z^i), H > 1/2 only
  std::vector<double> rho_i;

  std::size_t m() const { return x.size(); }
  std::size_t n_out() const { return times.size(); }
  bool smooth() const { return H > 0.5; }
  double dt_inner() const { return T / static_cast<double>(K); }
  double dt_out() const { return T / static_cast<double>(K / stride); }

  /// Multiply the diffusion scale by kappa.
  void rescale(double kappa);

  // Interpolated accessors (linear on the output lattice; c and g use the
  // inner lattice). t is clamped to [0, T].
  double c(double t) const;
  double g(double t) const;
  double var(double t) const;
  double std_dev(double t) const;
  double var_i(std::size_t i, double t) const;
  double xcov(std::size_t i, double t) const;
  double rho(std::size_t i, double t) const;
  /// Closed forms.
  double tau2(std::size_t i, double t) const;
  double tau2_tilde(std::size_t i, double t) const;
  double yz_cov(std::size_t i, double t) const;
};

/// Builds the tables for arbitrary coefficients. Only sigma and c are used.
KernelTables build_tables(const Coefficients& coeffs, const SpaceGrid& grid,
                          const TableOptions& options = {});

/// Normalizes the schedule's terminal variance and returns the matching tables.
std::pair<Schedule, KernelTables> build_normalized_tables(const Schedule& schedule,
                                                          const SpaceGrid& grid,
                                                          const TableOptions& options = {});

/// alpha(t, s) for 0 <= s <= t <= T.
double alpha_at(const KernelTables& tables, double t, double s);

/// alpha(t, s_j) and its components at the inner lattice points s_j <= t.
struct AlphaProfile {
  std::vector<double> s;
  std::vector<double> alpha;
  std::vector<double> alpha_i;  // [j * m + i]
};
AlphaProfile alpha_profile(const KernelTables& tables, double t);

struct ComponentCovariance {
  Eigen::MatrixXd cov;  // order (X^i, Y^i) or (X^i, Y^i, Z^i)
  bool clamped = false;
};

/// Covariance block of component i at time t. Negative eigenvalues above
/// -1e-10 (relative to the trace) are clamped to zero; below that it throws.
ComponentCovariance component_covariance(const KernelTables& tables, std::size_t i, double t);

struct MarginalMoments {
  std::vector<double> mean;
  double std_dev = 0.0;
};
MarginalMoments marginal_moments(const KernelTables& tables, double t,
                                 const std::vector<double>& x0);

}  // namespace fracdiff
