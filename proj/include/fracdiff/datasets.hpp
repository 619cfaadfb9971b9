#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracdiff/kernel_tables.hpp"
#include "fracdiff/rng.hpp"

namespace fracdiff {

/// Per-coordinate affine map to zero mean and unit (population) std.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static Standardizer fit(const Eigen::MatrixXd& points);
  static Standardizer identity(int dim);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& points) const;
};

/// Rows are points in standardized coordinates.
struct Dataset {
  std::string name;
  Eigen::MatrixXd points;
  Standardizer standardizer;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(points.cols()); }
  /// Points in original coordinates.
  Eigen::MatrixXd raw() const { return standardizer.invert(points); }
};

inline constexpr double kDefaultMoonNoise = 0.08;

/// Unit half circle (cos a, sin a) and its mirror (1 - cos a, 0.5 - sin a),
/// alternating, angles uniform in [0, pi], plus isotropic jitter.
Eigen::MatrixXd half_moons_raw(std::size_t n, double noise_std, Engine& engine);
Dataset half_moons(std::size_t n, double noise_std, std::uint64_t seed);

/// Standard normal points, left unstandardized so the marginal score stays
/// exact: grad log p_t(x) = -x / (c(t)^2 + sigma_t^2).
Dataset gaussian_reference(std::size_t n, int dim, std::uint64_t seed);

struct GaussianScore {
  const KernelTables* tables;
  /// grad_x log p_t; columns are points.
  Eigen::MatrixXd score(const Eigen::MatrixXd& x, double t) const;
  double log_density(const Eigen::VectorXd& x, double t) const;
};

/// CSV of points. A leading sample_id column is dropped on read. Parse
/// errors name the line.
Eigen::MatrixXd read_points_csv(const std::string& path);
Eigen::MatrixXd parse_points_csv(std::istream& in, const std::string& source);
void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points, bool with_id);

}  // namespace fracdiff
