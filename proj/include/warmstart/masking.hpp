// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "warmstart/error.hpp"
#include "warmstart/vocab.hpp"

namespace warmstart {

enum class MaskMode {
  Span,  // contiguous runs, mean length `mean_span`
  Iid,   // unit-length runs
};

struct MaskSpec {
  double rate = 0.15;
  double mean_span = 3.0;
  MaskMode mode = MaskMode::Span;
};

/// (seed, epoch, sequence) fully determines a mask, so any worker can
/// regenerate the epoch-e corruption of a sequence without storing it.
struct MaskKey {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t seq_index = 0;
};

struct MaskCounts {
  std::size_t num_masked = 0;
  std::size_t num_spans = 0;
  bool operator==(const MaskCounts&) const = default;
};

/// Masked run [start, start + length).
struct Span {
  std::uint32_t start = 0;
  std::uint32_t length = 0;
  std::uint32_t end() const noexcept { return start + length; }
  bool operator==(const Span&) const = default;
};

struct MaskedExample {
  std::vector<TokenId> input_ids;
  std::vector<TokenId> target_ids;
  bool operator==(const MaskedExample&) const = default;
};

void validate(const MaskSpec& spec);

/// num_masked = clamp(round(rate*len), 1, len-1);
/// num_spans = clamp(round(num_masked/mean_span), 1, num_masked), or
/// num_masked in Iid mode. Requires len >= 2.
MaskCounts mask_counts(std::size_t len, const MaskSpec& spec);

/// 64-bit generator seed derived from a mask key.
std::uint64_t mask_stream_seed(const MaskKey& key);

/// Sorted, disjoint, non-adjacent runs covering exactly num_masked positions.
/// Position 0 is never masked. When num_spans runs cannot fit with gaps
/// between them the run count drops to the largest count that fits. The
/// layout is drawn uniformly over all valid layouts.
std::vector<Span> draw_mask(std::size_t len, const MaskSpec& spec, const MaskKey& key);

/// True when spans are non-empty, sorted, in range and separated by at least
/// one unmasked position.
bool spans_valid(std::size_t len, std::span<const Span> spans) noexcept;

/// Replaces run k with sentinel k in the input and lists (sentinel k, run k)
/// in the target, closed by the vocabulary's last sentinel. Both sides end
/// with eos. Needs spans + 1 <= sentinel_count so the closing sentinel never
/// names a run.
MaskedExample apply_span_corruption(std::span<const TokenId> seq, std::span<const Span> spans,
                                    const Vocabulary& vocab);

}  // namespace warmstart
