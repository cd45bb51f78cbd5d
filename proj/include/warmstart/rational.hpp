// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <numeric>
#include <string>

namespace warmstart {

/// Non-negative fraction kept in lowest terms, for exact ratio reporting.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static constexpr Rational of(std::uint64_t n, std::uint64_t d) {
    if (d == 0) return {0, 1};
    auto g = std::gcd(n, d);
    if (g == 0) return {0, 1};
    return {n / g, d / g};
  }

  constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  constexpr bool operator==(const Rational&) const = default;

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

}  // namespace warmstart
