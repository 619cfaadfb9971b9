#include <doctest.h>

#include <cmath>

#include "fracdiff/error.hpp"
#include "fracdiff/kernel_tables.hpp"
#include "oracles.hpp"

using namespace fracdiff;

namespace {

Coefficients linear_schedule() {
  return {[](double) { return 0.0; }, [](double t) { return t; }, [](double) { return 1.0; }, 1.0};
}

// alpha(t, s) from its definition with nested quadrature of sigma/c.
double quad_alpha(const SpaceGrid& g, const Coefficients& co, double t, double s) {
  auto gfun = [&](double u) { return co.sigma(u) / co.c(u); };
  double a = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x[i];
    std::vector<double> near_s;
    for (double w = 1.0 / (x > 0 ? x : 1.0); w < t - s; w *= 2.0) near_s.push_back(s + w);
    if (g.H <= 0.5) {
      const double j0 =
          oracle::integrate([&](double u) { return gfun(u) * std::exp(-x * (u - s)); }, s, t, near_s);
      a += g.q[i] * (gfun(s) - x * j0);
    } else {
      const double j =
          oracle::integrate([&](double u) { return gfun(u) * (x * (u - s) - 1.0) * std::exp(-x * (u - s)); },
                            s, t, near_s);
      a -= g.q[i] * j;
    }
  }
  return a;
}

}  // namespace

TEST_SUITE("kernel_tables") {
  TEST_CASE("Brownian FVP closed forms") {
    const auto grid = build_space_grid(HurstIndex(0.5));
    const auto fvp = Schedule::make(Dynamics::FVP);
    const auto tb = build_tables(fvp.coefficients(), grid);
    double err = 0.0;
    for (std::size_t n = 0; n < tb.n_out(); ++n) {
      err = std::max(err, std::abs(tb.sigma2[n] + std::expm1(-fvp.beta_integral(tb.times[n]))));
    }
    CHECK(err <= 1e-3);
    for (double s : {0.0, 0.2, 0.55}) {
      const double expect = std::sqrt(fvp.beta(s)) * std::exp(0.5 * fvp.beta_integral(s));
      CHECK(alpha_at(tb, 0.9, s) == doctest::Approx(expect).epsilon(1e-6));
      CHECK(alpha_at(tb, 0.6, s) == doctest::Approx(expect).epsilon(1e-6));
    }
  }

  TEST_CASE("linear schedule matches the closed form") {
    for (double H : {0.1, 0.25}) {
      const auto grid = build_space_grid(HurstIndex(H));
      const auto tb = build_tables(linear_schedule(), grid);
      const auto p = alpha_profile(tb, 1.0);
      double err = 0.0;
      for (std::size_t j = 0; j < p.s.size(); ++j) err = std::max(err, std::abs(p.alpha[j] - oracle::linear_alpha(grid, p.s[j])));
      CAPTURE(H);
      CHECK(err <= 1e-3);
      CHECK(alpha_at(tb, 1.0, 0.123456) == doctest::Approx(oracle::linear_alpha(grid, 0.123456)).epsilon(1e-6));
    }
  }

  TEST_CASE("alpha agrees with nested quadrature") {
    const auto fvp = Schedule::make(Dynamics::FVP);
    for (double H : {0.1, 0.3, 0.75}) {
      const auto grid = build_space_grid(HurstIndex(H));
      const auto tb = build_tables(fvp.coefficients(), grid);
      for (auto [t, s] : {std::pair{1.0, 0.2}, std::pair{0.5, 0.49}, std::pair{0.731, 0.0}}) {
        const double ref = quad_alpha(grid, fvp.coefficients(), t, s);
        CAPTURE(H);
        CAPTURE(s);
        CHECK(std::abs(alpha_at(tb, t, s) - ref) <= 1e-5 * std::max(1.0, std::abs(ref)));
      }
    }
  }

  TEST_CASE("alpha on the diagonal and argument checks") {
    const auto fvp = Schedule::make(Dynamics::FVP);
    const auto rough = build_tables(fvp.coefficients(), build_space_grid(HurstIndex(0.25)), {2000, 10});
    const auto smooth = build_tables(fvp.coefficients(), build_space_grid(HurstIndex(0.75)), {2000, 10});
    CHECK(alpha_at(rough, 0.4, 0.4) == doctest::Approx(rough.c_h * rough.g(0.4)).epsilon(1e-14));
    CHECK(alpha_at(smooth, 0.4, 0.4) == 0.0);
    CHECK_THROWS_AS(alpha_at(rough, 0.3, 0.4), Error);
    // exact at grid points: profile and point evaluation agree
    const auto p = alpha_profile(rough, 0.6);
    CHECK(alpha_at(rough, 0.6, p.s[300]) == doctest::Approx(p.alpha[300]).epsilon(1e-12));
  }

  TEST_CASE("table invariants") {
    for (auto kind : {Dynamics::FVE, Dynamics::FVP, Dynamics::SubFVP}) {
      for (double H : {0.1, 0.5, 0.8}) {
        const auto grid = build_space_grid(HurstIndex(H));
        const auto [s, tb] = build_normalized_tables(Schedule::make(kind), grid, {2000, 10});
        CHECK(tb.sigma2[0] == 0.0);
        bool finite = true, bounded = true, tau_ok = true;
        for (std::size_t n = 0; n < tb.n_out(); ++n) {
          finite = finite && std::isfinite(tb.sigma2[n]) && tb.sigma2[n] >= 0.0;
          for (std::size_t i = 0; i < tb.m(); ++i) {
            const std::size_t k = n * tb.m() + i;
            bounded = bounded && std::abs(tb.rho_i[k]) <= 1.0;
            const double x = grid.x[i];
            const double t = tb.times[n];
            const double closed = x > 0 ? -std::expm1(-2 * x * t) / (2 * x) : t;
            tau_ok = tau_ok && std::abs(tb.tau2_i[k] - closed) <= 1e-10;
          }
        }
        CHECK(finite);
        CHECK(bounded);
        CHECK(tau_ok);
        CHECK(tb.rho(0, 0.0) == 0.0);
      }
    }
  }

  TEST_CASE("grid refinement changes the terminal variance little") {
    for (double H : {0.1, 0.75}) {
      const auto grid = build_space_grid(HurstIndex(H));
      const auto fvp = Schedule::make(Dynamics::FVP);
      const auto a = build_tables(fvp.coefficients(), grid, {10000, 10});
      const auto b = build_tables(fvp.coefficients(), grid, {20000, 20});
      CHECK(std::abs(a.sigma2.back() / b.sigma2.back() - 1.0) <= 1e-4);
    }
  }

  TEST_CASE("linearity in the diffusion scale") {
    const auto grid = build_space_grid(HurstIndex(0.2));
    auto s = Schedule::make(Dynamics::SubFVP);
    const auto a = build_tables(s.coefficients(), grid, {2000, 10});
    s.norm_factor = 1.7;
    const auto b = build_tables(s.coefficients(), grid, {2000, 10});
    auto c = a;
    c.rescale(1.7);
    for (std::size_t n = 0; n < a.n_out(); n += 37) {
      CHECK(b.sigma2[n] == doctest::Approx(1.7 * 1.7 * a.sigma2[n]).epsilon(1e-12));
      CHECK(c.sigma2[n] == doctest::Approx(b.sigma2[n]).epsilon(1e-12));
      CHECK(c.rho_i[n * a.m() + 5] == doctest::Approx(b.rho_i[n * a.m() + 5]).epsilon(1e-10));
    }
  }

  TEST_CASE("FVP variance is nondecreasing") {
    for (auto kind : {Dynamics::FVP, Dynamics::SubFVP}) {
      const auto [s, tb] = build_normalized_tables(Schedule::make(kind), build_space_grid(HurstIndex(0.5)));
      bool mono = true;
      for (std::size_t n = 1; n < tb.n_out(); ++n) mono = mono && tb.sigma2[n] >= tb.sigma2[n - 1] - 1e-12;
      CHECK(mono);
    }
  }

  TEST_CASE("terminal variances agree across Hurst indices") {
    const auto a = build_normalized_tables(Schedule::make(Dynamics::FVP), build_space_grid(HurstIndex(0.1)));
    const auto b = build_normalized_tables(Schedule::make(Dynamics::FVP), build_space_grid(HurstIndex(0.5)));
    CHECK(a.second.sigma2.back() == doctest::Approx(b.second.sigma2.back()).epsilon(1e-10));
  }

  TEST_CASE("component covariance") {
    const auto [s, tb] = build_normalized_tables(Schedule::make(Dynamics::FVP), build_space_grid(HurstIndex(0.25)));
    const auto zero = component_covariance(tb, 3, 0.0);
    CHECK(zero.cov.norm() == 0.0);
    for (std::size_t i : {0u, 19u, 39u}) {
      const auto c = component_covariance(tb, i, 0.5);
      const double x = tb.x[i];
      CHECK(c.cov(1, 1) == doctest::Approx(-std::expm1(-x) / (2 * x)).epsilon(1e-10));
      CHECK(c.cov(0, 1) == c.cov(1, 0));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e(c.cov);
      CHECK(e.eigenvalues().minCoeff() >= 0.0);
    }
    const auto [s2, smooth] = build_normalized_tables(Schedule::make(Dynamics::FVE), build_space_grid(HurstIndex(0.75)));
    const auto c3 = component_covariance(smooth, 10, 1.0);
    CHECK(c3.cov.rows() == 3);
    const double x = smooth.x[10];
    CHECK(c3.cov(2, 2) == doctest::Approx((1.0 - (2 * x * x + 2 * x + 1) * std::exp(-2 * x)) / (4 * x * x * x)).epsilon(1e-10));
    CHECK_THROWS_AS(component_covariance(tb, 40, 0.5), Error);
  }

  TEST_CASE("marginal moments") {
    const auto [s, tb] = build_normalized_tables(Schedule::make(Dynamics::FVP), build_space_grid(HurstIndex(0.5)));
    const auto m0 = marginal_moments(tb, 0.0, {1.0, -2.0});
    CHECK(m0.mean == std::vector<double>{1.0, -2.0});
    CHECK(m0.std_dev == 0.0);
    const auto m1 = marginal_moments(tb, 1.0, {1.0, 0.0});
    CHECK(m1.mean[0] == doctest::Approx(std::exp(-5.025)).epsilon(1e-12));
    CHECK(m1.mean[1] == 0.0);
    // normalized: unit terminal variance
    CHECK(m1.std_dev == doctest::Approx(1.0).epsilon(1e-4));
    const auto unnorm = build_tables(Schedule::make(Dynamics::FVP).coefficients(), build_space_grid(HurstIndex(0.5)));
    CHECK(marginal_moments(unnorm, 1.0, {1.0}).std_dev ==
          doctest::Approx(std::sqrt(-std::expm1(-10.05))).epsilon(1e-5));
    const auto [f, fve] = build_normalized_tables(Schedule::make(Dynamics::FVE), build_space_grid(HurstIndex(0.3)), {2000, 10});
    CHECK(marginal_moments(fve, 0.7, {0.3}).mean[0] == 0.3);
  }
}
