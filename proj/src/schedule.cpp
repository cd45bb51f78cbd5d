// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/schedule.hpp"

#include <cmath>
#include <string>

#include "warmstart/error.hpp"

namespace warmstart {

void LrSchedule::validate() const {
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw Error(ErrorCode::InvalidArgument, "peak learning rate must be positive");
  }
  if (warmup_steps == 0 || warmup_steps >= total_steps) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < warmup steps (" + std::to_string(warmup_steps) +
                                                ") < total steps (" + std::to_string(total_steps) + ")");
  }
}

double lr_at(const LrSchedule& s, std::uint64_t step) {
  s.validate();
  if (step > s.total_steps) {
    throw Error(ErrorCode::StepOutOfRange, "step " + std::to_string(step) + " beyond total steps " +
                                               std::to_string(s.total_steps));
  }
  if (step <= s.warmup_steps) {
    if (s.warmup == WarmupShape::InverseSqrt) return s.peak;
    return s.peak * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  return s.peak * static_cast<double>(s.total_steps - step) /
         static_cast<double>(s.total_steps - s.warmup_steps);
}

std::uint64_t total_steps_for(std::uint64_t epochs, std::uint64_t sequences,
                              std::uint64_t effective_batch) {
  if (effective_batch == 0) throw Error(ErrorCode::InvalidArgument, "effective batch must be positive");
  return (epochs * sequences + effective_batch - 1) / effective_batch;
}

}  // namespace warmstart
