#include "fracdiff/space_grid.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/numerics.hpp"

namespace fracdiff {

std::vector<double> build_geometric_grid(int m, double r) {
  require(m >= 2 && m % 2 == 0, "grid size m must be even and >= 2, got " + std::to_string(m));
  require(r > 1.0 && r < 2.0, "geometric ratio r must lie in (1, 2), got " + std::to_string(r));
  std::vector<double> eta(m + 1);
  for (int j = 0; j <= m; ++j) eta[j] = std::pow(r, j - m / 2);
  return eta;
}

NodeWeight node_and_weight(HurstIndex H, double eta_lo, double eta_hi) {
  if (H.is_brownian()) {
    fail(ErrorKind::InvalidArgument, "node_and_weight is undefined for H = 0.5");
  }
  require(eta_lo > 0.0 && eta_lo < eta_hi, "interval must satisfy 0 < eta_lo < eta_hi");
  const double h = H.value();
  // density x^{p-1} / C
  const double p = h < 0.5 ? 0.5 - h : 1.5 - h;
  const double C = std::tgamma(h + 0.5) * std::tgamma(p);
  const double mass = std::pow(eta_hi, p) - std::pow(eta_lo, p);
  const double moment = std::pow(eta_hi, p + 1.0) - std::pow(eta_lo, p + 1.0);
  return {p / (p + 1.0) * moment / mass, mass / (p * C)};
}

double SpaceGrid::c_h() const {
  if (H > 0.5) return 0.0;
  double s = 0.0;
  for (double v : q) s += v;
  return s;
}

double terminal_variance(HurstIndex H, const std::vector<double>& x,
                         const std::vector<double>& q, double T) {
  const std::size_t m = x.size();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double a = x[i] + x[j];
      // int_0^T v^n e^{-a v} dv, n = 0 (Y-kernel) or 2 (Z-kernel)
      const double k = H.value() > 0.5 ? numerics::exp_moment(2, a, T)
                                       : numerics::exp_moment(0, a, T);
      total += q[i] * q[j] * k;
    }
  }
  return total;
}

SpaceGrid build_space_grid(HurstIndex H, int m, double r, double horizon_T) {
  require(horizon_T > 0.0, "horizon_T must be positive");
  SpaceGrid g;
  g.H = H.value();
  g.horizon_T = horizon_T;
  if (H.is_brownian()) {
    g.m = 1;
    g.r = r;
    g.eta = {};
    g.x = {0.0};
    g.q_raw = {1.0};
    g.q = {1.0};
    g.rescale_a = 1.0;
    return g;
  }
  g.m = m;
  g.r = r;
  g.eta = build_geometric_grid(m, r);
  g.x.resize(m);
  g.q_raw.resize(m);
  for (int i = 0; i < m; ++i) {
    const auto nw = node_and_weight(H, g.eta[i], g.eta[i + 1]);
    g.x[i] = nw.x;
    g.q_raw[i] = nw.q_raw;
  }
  const double var = terminal_variance(H, g.x, g.q_raw, horizon_T);
  if (!(var > 0.0) || !std::isfinite(var)) {
    fail(ErrorKind::Numerical, "raw terminal variance is not positive and finite");
  }
  g.rescale_a = std::sqrt(var);
  g.q.resize(m);
  for (int i = 0; i < m; ++i) g.q[i] = g.q_raw[i] / g.rescale_a;
  return g;
}

std::string SpaceGrid::to_text() const {
  nlohmann::json j;
  j["H"] = H;
  j["m"] = m;
  j["r"] = r;
  j["horizon_T"] = horizon_T;
  j["eta"] = eta;
  j["x"] = x;
  j["q_raw"] = q_raw;
  j["q"] = q;
  j["rescale_a"] = rescale_a;
  return j.dump();
}

SpaceGrid SpaceGrid::from_text(const std::string& text) {
  SpaceGrid g;
  try {
    const auto j = nlohmann::json::parse(text);
    g.H = j.at("H").get<double>();
    g.m = j.at("m").get<int>();
    g.r = j.at("r").get<double>();
    g.horizon_T = j.at("horizon_T").get<double>();
    g.eta = j.at("eta").get<std::vector<double>>();
    g.x = j.at("x").get<std::vector<double>>();
    g.q_raw = j.at("q_raw").get<std::vector<double>>();
    g.q = j.at("q").get<std::vector<double>>();
    g.rescale_a = j.at("rescale_a").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("bad space grid document: ") + e.what());
  }
  if (g.x.size() != static_cast<std::size_t>(g.m) || g.q.size() != g.x.size()) {
    fail(ErrorKind::Parse, "space grid arrays do not match m");
  }
  return g;
}

std::uint64_t SpaceGrid::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace fracdiff
