#include "fracdiff/schedule.hpp"

#include <cmath>

#include "fracdiff/error.hpp"

namespace fracdiff {

std::string to_string(Dynamics kind) {
  switch (kind) {
    case Dynamics::FVE: return "FVE";
    case Dynamics::FVP: return "FVP";
    case Dynamics::SubFVP: return "SubFVP";
  }
  return "?";
}

Dynamics parse_dynamics(const std::string& name) {
  if (name == "FVE" || name == "fve") return Dynamics::FVE;
  if (name == "FVP" || name == "fvp") return Dynamics::FVP;
  if (name == "SubFVP" || name == "subfvp" || name == "sub-FVP" || name == "sub_fvp") {
    return Dynamics::SubFVP;
  }
  fail(ErrorKind::Config, "unknown dynamics kind '" + name + "'");
}

Schedule Schedule::make(Dynamics kind) {
  Schedule s;
  s.kind = kind;
  return s;
}

void Schedule::validate() const {
  require(horizon_T > 0.0, "horizon_T must be positive");
  require(norm_factor > 0.0, "norm_factor must be positive");
  if (kind == Dynamics::FVE) {
    require(sigma_min > 0.0 && sigma_min < sigma_max, "FVE needs 0 < sigma_min < sigma_max");
  } else {
    require(beta_min > 0.0 && beta_max > 0.0, "beta_min and beta_max must be positive");
  }
}

namespace {
void check_time(const Schedule& s, double t) {
  if (!(t >= 0.0 && t <= s.horizon_T * (1.0 + 1e-12))) {
    fail(ErrorKind::InvalidArgument, "time " + std::to_string(t) + " outside [0, T]");
  }
}
}  // namespace

double Schedule::beta(double t) const { return beta_min + t * (beta_max - beta_min); }

double Schedule::beta_integral(double t) const {
  return beta_min * t + 0.5 * t * t * (beta_max - beta_min);
}

double Schedule::target_std() const { return kind == Dynamics::FVE ? sigma_max : 1.0; }

double drift_mu(const Schedule& s, double t) {
  check_time(s, t);
  if (s.kind == Dynamics::FVE) return 0.0;
  return -0.5 * s.beta(t);
}

double diffusion_sigma(const Schedule& s, double t) {
  check_time(s, t);
  double base = 0.0;
  switch (s.kind) {
    case Dynamics::FVE: {
      const double ratio = s.sigma_max / s.sigma_min;
      base = s.sigma_min * std::pow(ratio, t) * std::sqrt(2.0 * std::log(ratio));
      break;
    }
    case Dynamics::FVP:
      base = std::sqrt(s.beta(t));
      break;
    case Dynamics::SubFVP:
      base = std::sqrt(s.beta(t) * -std::expm1(-2.0 * s.beta_integral(t)));
      break;
  }
  return s.norm_factor * base;
}

double drift_integral_c(const Schedule& s, double t) {
  check_time(s, t);
  if (s.kind == Dynamics::FVE) return 1.0;
  return std::exp(-0.25 * t * t * (s.beta_max - s.beta_min) - 0.5 * t * s.beta_min);
}

Coefficients Schedule::coefficients() const {
  Schedule s = *this;
  return {[s](double t) { return drift_mu(s, t); },
          [s](double t) { return diffusion_sigma(s, t); },
          [s](double t) { return drift_integral_c(s, t); }, s.horizon_T};
}

Schedule normalize_terminal_variance(const Schedule& s,
                                     const std::function<double(const Schedule&)>& terminal_variance) {
  Schedule base = s;
  base.norm_factor = 1.0;
  const double var = terminal_variance(base);
  if (!(var > 0.0) || !std::isfinite(var)) {
    fail(ErrorKind::Numerical, "base terminal variance is zero or not finite");
  }
  base.norm_factor = base.target_std() / std::sqrt(var);
  return base;
}

}  // namespace fracdiff
