#include <doctest.h>

#include <cmath>

#include "fracdiff/error.hpp"
#include "fracdiff/kernel_tables.hpp"
#include "fracdiff/schedule.hpp"

using namespace fracdiff;

TEST_SUITE("schedule") {
  TEST_CASE("drift examples") {
    const auto fve = Schedule::make(Dynamics::FVE);
    const auto fvp = Schedule::make(Dynamics::FVP);
    const auto sub = Schedule::make(Dynamics::SubFVP);
    CHECK(drift_mu(fve, 0.3) == 0.0);
    CHECK(drift_mu(fvp, 0.0) == doctest::Approx(-0.05).epsilon(1e-15));
    CHECK(drift_mu(fvp, 1.0) == doctest::Approx(-10.0).epsilon(1e-15));
    CHECK(drift_mu(sub, 1.0) == doctest::Approx(-10.0).epsilon(1e-15));
    CHECK_THROWS_AS(drift_mu(fvp, 1.5), Error);
    CHECK_THROWS_AS(drift_mu(fvp, -0.1), Error);
  }

  TEST_CASE("diffusion examples") {
    const auto fve = Schedule::make(Dynamics::FVE);
    const auto fvp = Schedule::make(Dynamics::FVP);
    const auto sub = Schedule::make(Dynamics::SubFVP);
    CHECK(diffusion_sigma(sub, 0.0) == 0.0);
    CHECK(diffusion_sigma(fvp, 0.0) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-15));
    CHECK(diffusion_sigma(fve, 1.0) ==
          doctest::Approx(50.0 * std::sqrt(2.0 * std::log(5000.0))).epsilon(1e-13));
    // sigma^2 = d/dt [sigma_min^2 (sigma_max/sigma_min)^{2t}] for FVE
    const double t = 0.37, h = 1e-6;
    auto var = [](double u) { return 1e-4 * std::pow(5000.0, 2.0 * u); };
    CHECK(diffusion_sigma(fve, t) ==
          doctest::Approx(std::sqrt((var(t + h) - var(t - h)) / (2 * h))).epsilon(1e-8));
    auto scaled = fvp;
    scaled.norm_factor = 2.0;
    CHECK(diffusion_sigma(scaled, 0.4) == 2.0 * diffusion_sigma(fvp, 0.4));
  }

  TEST_CASE("drift integral") {
    const auto fvp = Schedule::make(Dynamics::FVP);
    for (auto kind : {Dynamics::FVE, Dynamics::FVP, Dynamics::SubFVP}) {
      CHECK(drift_integral_c(Schedule::make(kind), 0.0) == 1.0);
    }
    CHECK(drift_integral_c(fvp, 1.0) == doctest::Approx(std::exp(-5.025)).epsilon(1e-14));
    CHECK(drift_integral_c(Schedule::make(Dynamics::FVE), 0.7) == 1.0);
    // c = exp(int mu), by trapezoid on a fine grid
    double integral = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
      const double a = 0.6 * k / n, b = 0.6 * (k + 1) / n;
      integral += 0.5 * (b - a) * (drift_mu(fvp, a) + drift_mu(fvp, b));
    }
    CHECK(drift_integral_c(fvp, 0.6) == doctest::Approx(std::exp(integral)).epsilon(1e-9));
  }

  TEST_CASE("validation") {
    auto s = Schedule::make(Dynamics::FVE);
    s.sigma_min = 60.0;
    CHECK_THROWS_AS(s.validate(), Error);
    CHECK_THROWS_AS(parse_dynamics("VE"), Error);
    CHECK(parse_dynamics("SubFVP") == Dynamics::SubFVP);
  }

  TEST_CASE("normalization hits the target for every dynamics") {
    for (double H : {0.1, 0.5}) {
      const auto grid = build_space_grid(HurstIndex(H));
      for (auto kind : {Dynamics::FVE, Dynamics::FVP, Dynamics::SubFVP}) {
        const auto [s, tb] = build_normalized_tables(Schedule::make(kind), grid, {2000, 10});
        const double target = s.target_std() * s.target_std();
        CAPTURE(H);
        CHECK(std::abs(tb.sigma2.back() / target - 1.0) <= 1e-4);
        // rebuilding with the normalized factor agrees with the rescaled tables
        const auto direct = build_tables(s.coefficients(), grid, {2000, 10});
        CHECK(std::abs(direct.sigma2.back() / target - 1.0) <= 1e-4);
      }
    }
  }

  TEST_CASE("Brownian FVP needs almost no normalization") {
    const auto grid = build_space_grid(HurstIndex(0.5));
    const auto [s, tb] = build_normalized_tables(Schedule::make(Dynamics::FVP), grid);
    CHECK(s.norm_factor == doctest::Approx(1.0 / std::sqrt(-std::expm1(-10.05))).epsilon(1e-5));
  }

  TEST_CASE("normalization rejects a degenerate schedule") {
    CHECK_THROWS_AS(normalize_terminal_variance(Schedule::make(Dynamics::FVP),
                                                [](const Schedule&) { return 0.0; }),
                    Error);
  }
}
