// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace warmstart {

enum class ErrorCode {
  Io,
  DuplicateToken,
  InvalidSpecialIds,
  InvalidArgument,
  IdOutOfRange,
  CorruptFile,
  IndexOutOfRange,
  DimensionMismatch,
  MissingTranslation,
  SentinelMismatch,
  SentinelBudgetExceeded,
  NonDivisible,
  StepOutOfRange,
  CachePersist,
  Config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a stable code so the CLI can
/// print a machine-parsable error line.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace warmstart
