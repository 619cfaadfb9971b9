#pragma once

#include <string>

#include "fracdiff/error.hpp"

namespace fracdiff {

enum class Roughness { Rough, Brownian, Smooth };

/// Hurst index H in (0, 1). H = 0.5 is Brownian motion; the fractional
/// representation degenerates to a single node at speed zero.
class HurstIndex {
 public:
  explicit HurstIndex(double value) : value_(value) {
    require(value > 0.0 && value < 1.0,
            "Hurst index must lie in (0, 1), got " + std::to_string(value));
  }

  double value() const noexcept { return value_; }

  Roughness roughness() const noexcept {
    if (value_ < 0.5) return Roughness::Rough;
    if (value_ > 0.5) return Roughness::Smooth;
    return Roughness::Brownian;
  }

  bool is_brownian() const noexcept { return value_ == 0.5; }
  /// H <= 1/2: the noise is the Y-combination and carries a direct dW term.
  bool at_most_half() const noexcept { return value_ <= 0.5; }

  friend bool operator==(HurstIndex a, HurstIndex b) { return a.value_ == b.value_; }

 private:
  double value_;
};

}  // namespace fracdiff
