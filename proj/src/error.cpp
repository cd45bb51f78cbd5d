// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/error.hpp"

namespace warmstart {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::DuplicateToken: return "DuplicateToken";
    case ErrorCode::InvalidSpecialIds: return "InvalidSpecialIds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IdOutOfRange: return "IdOutOfRange";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingTranslation: return "MissingTranslation";
    case ErrorCode::SentinelMismatch: return "SentinelMismatch";
    case ErrorCode::SentinelBudgetExceeded: return "SentinelBudgetExceeded";
    case ErrorCode::NonDivisible: return "NonDivisible";
    case ErrorCode::StepOutOfRange: return "StepOutOfRange";
    case ErrorCode::CachePersist: return "CachePersist";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace warmstart
