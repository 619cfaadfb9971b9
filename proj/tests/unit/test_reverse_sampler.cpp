#include <doctest.h>

#include <cmath>

#include "fracdiff/datasets.hpp"
#include "fracdiff/error.hpp"
#include "fracdiff/reverse_sampler.hpp"
#include "fracdiff/schedule.hpp"
#include "oracles.hpp"

using namespace fracdiff;

namespace {

std::pair<Schedule, KernelTables> fvp_tables(double H, std::size_t K = 10000) {
  return build_normalized_tables(Schedule::make(Dynamics::FVP), build_space_grid(HurstIndex(H)), {K, 10});
}

std::vector<Engine> engines(std::size_t n, std::uint64_t seed) {
  std::vector<Engine> e;
  for (std::size_t j = 0; j < n; ++j) e.push_back(make_engine(seed, j));
  return e;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

}  // namespace

TEST_SUITE("reverse_sampler") {
  TEST_CASE("method validity") {
    for (auto m : {SamplerMethod::gSDE, SamplerMethod::nODE}) {
      CHECK(kind_of([&] { check_method(m, HurstIndex(0.5)); }) == ErrorKind::Unsupported);
      CHECK_NOTHROW(check_method(m, HurstIndex(0.25)));
    }
    CHECK_NOTHROW(check_method(SamplerMethod::SDE, HurstIndex(0.5)));
    CHECK_NOTHROW(check_method(SamplerMethod::ODE, HurstIndex(0.5)));
    CHECK(parse_method("nODE") == SamplerMethod::nODE);
    CHECK(kind_of([] { parse_method("euler"); }) == ErrorKind::Config);
    SamplerConfig cfg;
    cfg.n_steps = 0;
    CHECK_THROWS_AS(cfg.validate(1.0), Error);
    cfg = SamplerConfig{};
    cfg.t_end = 1.0;
    CHECK_THROWS_AS(cfg.validate(1.0), Error);
  }

  TEST_CASE("initialization shares one draw") {
    const auto [s, tb] = fvp_tables(0.5, 2000);
    auto eng = engines(4, 1);
    const auto st = init_reverse_state(tb, 2, eng);
    REQUIRE(st.y.size() == 1);
    CHECK(st.z.empty());
    CHECK(st.t == tb.T);
    for (Eigen::Index j = 0; j < 4; ++j) {
      for (int k = 0; k < 2; ++k) {
        CHECK(st.y[0](k, j) / st.x(k, j) == doctest::Approx(std::sqrt(tb.T) / tb.std_dev(tb.T)).epsilon(1e-12));
      }
    }

    const auto [s2, smooth] = fvp_tables(0.75, 2000);
    auto eng2 = engines(3, 2);
    const auto st2 = init_reverse_state(smooth, 1, eng2);
    REQUIRE(st2.z.size() == smooth.m());
    const double T = smooth.T;
    for (std::size_t i = 0; i < smooth.m(); i += 13) {
      const double x = smooth.x[i];
      const double tau2 = -std::expm1(-2 * x * T) / (2 * x);
      const double tt2 = 1 / (4 * x * x * x) - (2 * T * T * x * x + 2 * T * x + 1) * std::exp(-2 * x * T) / (4 * x * x * x);
      const double xi = st2.x(0, 1) / smooth.std_dev(T);
      CHECK(st2.y[i](0, 1) == doctest::Approx(std::sqrt(tau2) * xi).epsilon(1e-9));
      CHECK(st2.z[i](0, 1) == doctest::Approx(std::sqrt(tt2) * xi).epsilon(1e-7));
    }
  }

  TEST_CASE("initial marginal std") {
    const auto [s, tb] = fvp_tables(0.25, 2000);
    const std::size_t n = 100000;
    auto eng = engines(n, 3);
    const auto st = init_reverse_state(tb, 1, eng);
    std::vector<double> v(st.x.data(), st.x.data() + n);
    const double sd = std::sqrt(oracle::variance(v));
    // delta method: se(sd) = se(var) / (2 sd)
    CHECK(std::abs(sd - tb.std_dev(tb.T)) <= 3.0 * oracle::variance_se(v) / (2 * sd));
  }

  TEST_CASE("S^H accessor") {
    for (double H : {0.25, 0.75}) {
      const auto [s, tb] = fvp_tables(H, 2000);
      auto eng = engines(2, 4);
      auto st = init_reverse_state(tb, 2, eng);
      for (std::size_t i = 0; i < tb.m(); ++i) st.y[i] *= 1.0 + 0.01 * i;
      const Eigen::MatrixXd sh = st.s_h(tb);
      for (Eigen::Index j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          double ref = 0.0;
          for (std::size_t i = 0; i < tb.m(); ++i) {
            ref += H > 0.5 ? tb.q[i] * (tb.x[i] * st.z[i](k, j) - st.y[i](k, j)) : tb.q[i] * tb.x[i] * st.y[i](k, j);
          }
          CHECK(sh(k, j) == doctest::Approx(ref).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("score rescaling") {
    auto [s, tb] = fvp_tables(0.5, 2000);
    Eigen::MatrixXd score(2, 1);
    score << 0.3, -1.7;
    // degenerate Brownian component: finite positive factors
    for (double t : {0.01, 0.5, 1.0}) {
      const auto cs = rescaled_component_scores(tb, 0, t, score);
      const double fx = cs.sx(0, 0) / score(0, 0), fy = cs.sy(0, 0) / score(0, 0);
      CHECK(std::isfinite(fx));
      CHECK(fx > 0.0);
      CHECK(std::isfinite(fy));
      CHECK(fy > 0.0);
    }
    // rho = 0 and sigma_i = sigma give the identity
    auto id = tb;
    id.sigma2_i = id.sigma2;
    std::fill(id.rho_i.begin(), id.rho_i.end(), 0.0);
    const auto cs = rescaled_component_scores(id, 0, 0.4, score);
    CHECK(cs.sx(0, 0) == doctest::Approx(score(0, 0)).epsilon(1e-12));
    CHECK(cs.sx(1, 0) == doctest::Approx(score(1, 0)).epsilon(1e-12));
    CHECK(cs.sy(1, 0) == doctest::Approx(tb.std_dev(0.4) / std::sqrt(tb.tau2(0, 0.4)) * score(1, 0)).epsilon(1e-12));

    std::fill(id.rho_i.begin(), id.rho_i.end(), -1.0);
    CHECK(kind_of([&] { rescaled_component_scores(id, 0, 0.4, score); }) == ErrorKind::Numerical);
  }

  TEST_CASE("one step with zero score") {
    const auto [s, tb] = fvp_tables(0.25, 2000);
    auto eng = engines(3, 5);
    const auto st0 = init_reverse_state(tb, 2, eng);
    auto st = st0;
    Eigen::MatrixXd noise(2, 3);
    noise << 0.1, -0.4, 1.2, 0.8, 0.0, -2.0;
    const double h = 1e-4, mu = -3.0;
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 3);
    reverse_step(st, tb, mu, h, SamplerMethod::SDE, zero, noise);
    const double sig = tb.g(tb.T) * tb.c(tb.T);
    const Eigen::MatrixXd ex = st0.x - h * (mu * st0.x - sig * st0.s_h(tb)) + tb.c_h * sig * std::sqrt(h) * noise;
    CHECK((st.x - ex).cwiseAbs().maxCoeff() <= 1e-12);
    for (std::size_t i = 0; i < tb.m(); ++i) {
      const Eigen::MatrixXd ey = st0.y[i] + h * tb.x[i] * st0.y[i] + std::sqrt(h) * noise;
      CHECK((st.y[i] - ey).cwiseAbs().maxCoeff() <= 1e-12 * (1 + ey.cwiseAbs().maxCoeff()));
    }
    CHECK(st.t == doctest::Approx(tb.T - h));

    // sample() with a single step and a zero score takes the same Euler step
    SamplerConfig cfg;
    cfg.n_steps = 1;
    cfg.n_samples = 3;
    cfg.seed = 5;
    cfg.t_end = 0.5;
    cfg.method = SamplerMethod::ODE;
    const auto out = sample(tb, [](double) { return 0.0; }, [](const Eigen::MatrixXd& x, double) { return Eigen::MatrixXd::Zero(x.rows(), x.cols()); }, ScoreSource::Analytic, 2, cfg);
    const Eigen::MatrixXd e1 = st0.x + 0.5 * sig * st0.s_h(tb);
    CHECK((out - e1).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("ODE step equals noiseless SDE step with halved score") {
    for (double H : {0.25, 0.5, 0.75}) {
      const auto [s, tb] = fvp_tables(H, 2000);
      auto eng = engines(2, 6);
      auto a = init_reverse_state(tb, 2, eng);
      auto b = a;
      a.t = b.t = 0.6;
      Eigen::MatrixXd score(2, 2);
      score << 0.5, -0.2, 1.0, 0.3;
      const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
      reverse_step(a, tb, -1.0, 1e-3, SamplerMethod::SDE, 0.5 * score, zero);
      Eigen::MatrixXd noise = Eigen::MatrixXd::Constant(2, 2, 7.0);
      reverse_step(b, tb, -1.0, 1e-3, SamplerMethod::ODE, score, noise);
      CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-13 * (1 + a.x.cwiseAbs().maxCoeff()));
      for (std::size_t i = 0; i < a.y.size(); ++i) {
        CHECK((a.y[i] - b.y[i]).cwiseAbs().maxCoeff() <= 1e-13 * (1 + a.y[i].cwiseAbs().maxCoeff()));
      }
    }
  }

  TEST_CASE("learned score needs H <= 1/2") {
    const auto [s, tb] = fvp_tables(0.75, 2000);
    SamplerConfig cfg;
    cfg.n_samples = 2;
    GaussianScore gs{&tb};
    auto fn = [&](const Eigen::MatrixXd& x, double t) { return gs.score(x, t); };
    CHECK(kind_of([&] { sample(tb, [](double) { return 0.0; }, fn, ScoreSource::Learned, 1, cfg); }) ==
          ErrorKind::Unsupported);
  }

  TEST_CASE("Brownian Gaussian recovery") {
    const auto [sched, tb] = fvp_tables(0.5);
    const auto coeffs = sched.coefficients();
    GaussianScore gs{&tb};
    auto fn = [&](const Eigen::MatrixXd& x, double t) { return gs.score(x, t); };
    for (auto m : {SamplerMethod::SDE, SamplerMethod::ODE}) {
      SamplerConfig cfg;
      cfg.method = m;
      cfg.n_samples = 5000;
      cfg.seed = 8;
      const auto out = sample(tb, coeffs.mu, fn, ScoreSource::Analytic, 1, cfg);
      std::vector<double> v(out.data(), out.data() + out.size());
      INFO(to_string(m));
      CHECK(std::abs(oracle::mean(v)) <= 0.05);
      CHECK(std::abs(oracle::variance(v) - 1.0) <= 0.1);
    }
  }

  TEST_CASE("sampling is deterministic and thread independent") {
    const auto [sched, tb] = fvp_tables(0.5, 2000);
    GaussianScore gs{&tb};
    auto fn = [&](const Eigen::MatrixXd& x, double t) { return gs.score(x, t); };
    SamplerConfig cfg;
    cfg.n_samples = 64;
    cfg.n_steps = 50;
    cfg.seed = 3;
    const auto a = sample(tb, sched.coefficients().mu, fn, ScoreSource::Analytic, 2, cfg);
    const auto b = sample(tb, sched.coefficients().mu, fn, ScoreSource::Analytic, 2, cfg);
    cfg.threads = 3;
    const auto c = sample(tb, sched.coefficients().mu, fn, ScoreSource::Analytic, 2, cfg);
    CHECK(a == b);
    CHECK(a == c);
  }
}
