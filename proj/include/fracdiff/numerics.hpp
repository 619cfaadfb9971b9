#pragma once

#include <cmath>
#include <cstddef>

namespace fracdiff::numerics {

/// phi_k(z) = int_0^1 w^{k-1} e^{-z w} dw for k in {1, 2, 3} and z >= 0.
///
/// These are the building blocks of every exponential moment used here:
/// int_0^L v^{k-1} e^{-x v} dv = L^k phi_k(x L). The closed forms cancel
/// badly for small z, so a power series takes over there.
inline double phi(int k, double z) {
  if (z < 0.5) {
    // sum_n (-z)^n / (n! (n + k))
    double term = 1.0;
    double sum = 1.0 / k;
    for (int n = 1; n < 30; ++n) {
      term *= -z / n;
      const double add = term / (n + k);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  const double e = std::exp(-z);
  switch (k) {
    case 1: return -std::expm1(-z) / z;
    case 2: return (1.0 - e * (1.0 + z)) / (z * z);
    default: return (2.0 - e * (z * z + 2.0 * z + 2.0)) / (z * z * z);
  }
}

/// int_0^L v^n e^{-a v} dv for n in {0, 1, 2}, a >= 0.
inline double exp_moment(int n, double a, double L) {
  if (L <= 0.0) return 0.0;
  return std::pow(L, n + 1) * phi(n + 1, a * L);
}

/// Linear interpolation on a uniform lattice t_k = k * dt, clamped at the ends.
template <class Getter>
double interp_uniform(double t, double dt, std::size_t count, Getter&& at) {
  if (t <= 0.0) return at(0);
  const double pos = t / dt;
  auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= count) return at(count - 1);
  const double w = pos - static_cast<double>(k);
  return (1.0 - w) * at(k) + w * at(k + 1);
}

}  // namespace fracdiff::numerics
