#pragma once

#include <functional>
#include <string>

#include "fracdiff/hurst.hpp"

namespace fracdiff {

enum class Dynamics { FVE, FVP, SubFVP };

std::string to_string(Dynamics kind);
Dynamics parse_dynamics(const std::string& name);

/// Time-dependent coefficients of dX = mu(t) X dt + sigma(t) dW^H.
/// c(t) = exp(int_0^t mu). Anything that provides these can drive the kernel
/// tables and the forward simulator, including ad-hoc test schedules.
struct Coefficients {
  std::function<double(double)> mu;
  std::function<double(double)> sigma;
  std::function<double(double)> c;
  double T = 1.0;
};

struct Schedule {
  Dynamics kind = Dynamics::FVP;
  double sigma_min = 0.01;
  double sigma_max = 50.0;
  double beta_min = 0.1;
  double beta_max = 20.0;
  double horizon_T = 1.0;
  double norm_factor = 1.0;

  static Schedule make(Dynamics kind);
  void validate() const;

  double beta(double t) const;
  /// int_0^t beta(u) du
  double beta_integral(double t) const;
  /// Terminal standard deviation the normalization aims for.
  double target_std() const;

  Coefficients coefficients() const;
};

double drift_mu(const Schedule& s, double t);
/// Includes norm_factor.
double diffusion_sigma(const Schedule& s, double t);
double drift_integral_c(const Schedule& s, double t);

/// Sets norm_factor = target_std / sigma_T(base) where terminal_variance
/// returns the kernel variance sigma^2_T for a schedule.
Schedule normalize_terminal_variance(const Schedule& s,
                                     const std::function<double(const Schedule&)>& terminal_variance);

}  // namespace fracdiff
