#include "fracdiff/datasets.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "fracdiff/error.hpp"

namespace fracdiff {

Standardizer Standardizer::fit(const Eigen::MatrixXd& points) {
  require(points.rows() >= 2, "need at least two points to standardize");
  Standardizer s;
  s.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - s.mean.transpose();
  s.std = (centered.colwise().squaredNorm() / static_cast<double>(points.rows()))
              .cwiseSqrt()
              .transpose();
  for (Eigen::Index k = 0; k < s.std.size(); ++k) {
    if (!(s.std[k] > 0.0)) fail(ErrorKind::InvalidArgument, "coordinate has zero spread");
  }
  return s;
}

Standardizer Standardizer::identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& points) const {
  require(points.cols() == mean.size(), "standardizer dimension mismatch");
  return (points.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& points) const {
  require(points.cols() == mean.size(), "standardizer dimension mismatch");
  Eigen::MatrixXd out = points.array().rowwise() * std.transpose().array();
  return out.rowwise() + mean.transpose();
}

Eigen::MatrixXd half_moons_raw(std::size_t n, double noise_std, Engine& engine) {
  require(n >= 1, "half_moons needs n >= 1");
  require(noise_std >= 0.0, "noise_std must be non-negative");
  StandardNormal normal;
  Eigen::MatrixXd p(n, 2);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = uniform(engine, 0.0, std::numbers::pi);
    if (j % 2 == 0) {
      p(j, 0) = std::cos(a);
      p(j, 1) = std::sin(a);
    } else {
      p(j, 0) = 1.0 - std::cos(a);
      p(j, 1) = 0.5 - std::sin(a);
    }
    if (noise_std > 0.0) {
      p(j, 0) += noise_std * normal(engine);
      p(j, 1) += noise_std * normal(engine);
    }
  }
  return p;
}

Dataset half_moons(std::size_t n, double noise_std, std::uint64_t seed) {
  Engine engine = make_engine(seed, 0xda7a);
  const Eigen::MatrixXd raw = half_moons_raw(n, noise_std, engine);
  Dataset ds;
  ds.name = "half_moons";
  ds.seed = seed;
  ds.standardizer = Standardizer::fit(raw);
  ds.points = ds.standardizer.apply(raw);
  return ds;
}

Dataset gaussian_reference(std::size_t n, int dim, std::uint64_t seed) {
  require(n >= 1 && dim >= 1, "gaussian_reference needs n, dim >= 1");
  Engine engine = make_engine(seed, 0x9a55);
  StandardNormal normal;
  Dataset ds;
  ds.name = "gaussian";
  ds.seed = seed;
  ds.points.resize(n, dim);
  for (std::size_t j = 0; j < n; ++j) {
    for (int k = 0; k < dim; ++k) ds.points(j, k) = normal(engine);
  }
  ds.standardizer = Standardizer::identity(dim);
  return ds;
}

Eigen::MatrixXd GaussianScore::score(const Eigen::MatrixXd& x, double t) const {
  const double c = tables->c(t);
  return -x / (c * c + tables->var(t));
}

double GaussianScore::log_density(const Eigen::VectorXd& x, double t) const {
  const double c = tables->c(t);
  const double v = c * c + tables->var(t);
  const double d = static_cast<double>(x.size());
  return -0.5 * x.squaredNorm() / v - 0.5 * d * std::log(2.0 * std::numbers::pi * v);
}

Eigen::MatrixXd parse_points_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  auto parse_error = [&](const std::string& what) {
    fail(ErrorKind::Parse, source + ":" + std::to_string(lineno) + ": " + what);
  };
  if (!std::getline(in, line)) {
    lineno = 1;
    parse_error("missing header");
  }
  ++lineno;
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty()) parse_error("empty header");
  const bool skip_id = header.front() == "sample_id";
  const std::size_t dims = header.size() - (skip_id ? 1 : 0);
  if (dims == 0) parse_error("no data columns");
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col == 0 && skip_id) {
        ++col;
        continue;
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) parse_error("bad number '" + cell + "'");
        values.push_back(v);
      } catch (const std::logic_error&) {
        parse_error("bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != header.size()) {
      parse_error("expected " + std::to_string(header.size()) + " columns, got " +
                  std::to_string(col));
    }
  }
  const auto rows = static_cast<Eigen::Index>(values.size() / dims);
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(dims));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < dims; ++k) out(r, k) = values[r * dims + k];
  }
  return out;
}

Eigen::MatrixXd read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  return parse_points_csv(in, path);
}

void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points, bool with_id) {
  if (with_id) out << "sample_id,";
  for (Eigen::Index k = 0; k < points.cols(); ++k) out << (k ? "," : "") << "dim_" << k;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    if (with_id) out << r << ',';
    for (Eigen::Index k = 0; k < points.cols(); ++k) out << (k ? "," : "") << points(r, k);
    out << '\n';
  }
}

}  // namespace fracdiff
