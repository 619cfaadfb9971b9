#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracdiff/hurst.hpp"

namespace fracdiff {

/// Geometric points eta_j = r^{j - m/2}, j = 0..m.
std::vector<double> build_geometric_grid(int m, double r);

struct NodeWeight {
  double x;      // mean of nu over the interval
  double q_raw;  // nu-mass of the interval
};

/// Node speed and raw weight of the density nu on [eta_lo, eta_hi].
/// For H < 1/2 nu(dx) = x^{-(H+1/2)} / (Gamma(H+1/2) Gamma(1/2-H)) dx,
/// for H > 1/2 the exponent drops by one (Gamma(3/2-H) in the constant).
NodeWeight node_and_weight(HurstIndex H, double eta_lo, double eta_hi);

/// Finite measure nu^m = sum_i q_i delta_{x_i} approximating FBM.
struct SpaceGrid {
  double H = 0.5;
  int m = 1;
  double r = 1.0;
  double horizon_T = 1.0;
  std::vector<double> eta;
  std::vector<double> x;
  std::vector<double> q_raw;
  std::vector<double> q;
  double rescale_a = 1.0;

  HurstIndex hurst() const { return HurstIndex(H); }
  std::size_t size() const { return x.size(); }
  /// sum_i q_i for H <= 1/2 (coefficient of dW in the forward SDE), else 0.
  double c_h() const;

  std::string to_text() const;
  static SpaceGrid from_text(const std::string& text);
  /// FNV-1a over the serialized form; stored next to tables in checkpoints.
  std::uint64_t hash() const;
};

/// Var W^{H,m}_T for weights q in closed form (double sum over node pairs).
double terminal_variance(HurstIndex H, const std::vector<double>& x,
                         const std::vector<double>& q, double T);

SpaceGrid build_space_grid(HurstIndex H, int m = 40, double r = 1.35, double horizon_T = 1.0);

}  // namespace fracdiff
