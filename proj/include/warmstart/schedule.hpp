// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>

#include "warmstart/error.hpp"

namespace warmstart {

enum class WarmupShape {
  Linear,       // rises from 0 to peak over the warmup steps
  InverseSqrt,  // held at peak during warmup, the plateau of 1/sqrt(max(step, warmup))
};

/// Warmup to `peak`, then linear decay reaching exactly zero at total_steps.
struct LrSchedule {
  double peak = 4e-3;
  std::uint64_t warmup_steps = 5000;
  std::uint64_t total_steps = 0;
  WarmupShape warmup = WarmupShape::Linear;

  void validate() const;
};

/// Throws StepOutOfRange for step > total_steps.
double lr_at(const LrSchedule& schedule, std::uint64_t step);

/// Optimizer steps for `epochs` passes over `sequences` at `effective_batch`
/// sequences per step, rounding the last partial batch up.
std::uint64_t total_steps_for(std::uint64_t epochs, std::uint64_t sequences,
                              std::uint64_t effective_batch);

}  // namespace warmstart
