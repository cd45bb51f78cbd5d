// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "warmstart/error.hpp"
#include "warmstart/masking.hpp"
#include "warmstart/rational.hpp"
#include "warmstart/vocab.hpp"

namespace warmstart {

struct AccumulationPlan {
  std::size_t micro_batch_size = 0;
  std::size_t accumulation_steps = 0;
  std::size_t effective_batch = 0;
};

/// Forward passes per optimizer step: effective / micro, which must divide.
AccumulationPlan plan_accumulation(std::size_t effective = 128, std::size_t micro = 16);

/// Row-major id blocks padded to the longest member of this batch only.
/// Presence masks hold 1 for real tokens and 0 for padding.
struct PaddedBatch {
  std::size_t rows = 0;
  std::size_t width_in = 0;
  std::size_t width_tgt = 0;
  std::vector<TokenId> inputs;
  std::vector<TokenId> targets;
  std::vector<std::uint8_t> input_mask;
  std::vector<std::uint8_t> target_mask;

  std::span<const TokenId> input_row(std::size_t r) const { return {inputs.data() + r * width_in, width_in}; }
  std::span<const TokenId> target_row(std::size_t r) const { return {targets.data() + r * width_tgt, width_tgt}; }
};

/// Examples keep their order, one per row. Requires 1 <= size <= micro.
PaddedBatch assemble(std::span<const MaskedExample> examples, std::size_t micro, TokenId pad_id);

struct PaddingEfficiency {
  Rational input;
  Rational target;
  Rational combined;  // real cells of both blocks over all cells of both blocks
};

PaddingEfficiency padding_efficiency(const PaddedBatch& batch);

/// Splits example indices into consecutive micro-batches. With
/// sort_by_length the indices are first stably ordered by length.
std::vector<std::vector<std::size_t>> group_batches(std::span<const std::size_t> lengths,
                                                    std::size_t micro, bool sort_by_length = false);

}  // namespace warmstart
