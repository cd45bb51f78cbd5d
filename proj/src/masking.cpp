// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/masking.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_set>

#include "warmstart/error.hpp"

namespace warmstart {

void validate(const MaskSpec& spec) {
  if (!(spec.rate > 0.0 && spec.rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "mask rate must lie in (0, 1)");
  }
  if (!(spec.mean_span >= 1.0) || !std::isfinite(spec.mean_span)) {
    throw Error(ErrorCode::InvalidArgument, "mean span length must be at least 1");
  }
}

MaskCounts mask_counts(std::size_t len, const MaskSpec& spec) {
  validate(spec);
  if (len < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "cannot mask a sequence of length " + std::to_string(len));
  }
  auto masked = static_cast<std::size_t>(
      std::clamp<long long>(std::llround(spec.rate * static_cast<double>(len)), 1,
                            static_cast<long long>(len) - 1));
  if (spec.mode == MaskMode::Iid) return {masked, masked};
  auto spans = static_cast<std::size_t>(
      std::clamp<long long>(std::llround(static_cast<double>(masked) / spec.mean_span), 1,
                            static_cast<long long>(masked)));
  return {masked, spans};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Sorted uniform k-subset of {0, ..., n-1} (Floyd's algorithm).
std::vector<std::uint32_t> sample_subset(std::uint32_t n, std::uint32_t k, std::mt19937_64& rng) {
  std::unordered_set<std::uint32_t> chosen;
  chosen.reserve(k * 2);
  for (std::uint32_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::uint32_t> pick(0, j);
    std::uint32_t t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint32_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::uint64_t mask_stream_seed(const MaskKey& key) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ key.epoch);
  return splitmix64(h ^ key.seq_index);
}

std::vector<Span> draw_mask(std::size_t len, const MaskSpec& spec, const MaskKey& key) {
  const auto counts = mask_counts(len, spec);
  const auto masked = static_cast<std::uint32_t>(counts.num_masked);
  const auto unmasked = static_cast<std::uint32_t>(len - counts.num_masked);
  // Leading gap and the gaps between runs each need an unmasked position.
  const auto runs = static_cast<std::uint32_t>(std::min<std::size_t>(counts.num_spans, unmasked));

  std::mt19937_64 rng(mask_stream_seed(key));

  // Run lengths: composition of `masked` into `runs` positive parts.
  auto cuts = sample_subset(masked - 1, runs - 1, rng);
  std::vector<std::uint32_t> lengths;
  lengths.reserve(runs);
  std::uint32_t prev = 0;
  for (auto c : cuts) {
    lengths.push_back(c + 1 - prev);
    prev = c + 1;
  }
  lengths.push_back(masked - prev);

  // Gaps: runs+1 parts summing to `unmasked`, all but the last at least 1.
  auto marks = sample_subset(unmasked, runs, rng);
  std::vector<Span> spans;
  spans.reserve(runs);
  std::uint32_t pos = marks[0] + 1;
  for (std::uint32_t i = 0; i < runs; ++i) {
    spans.push_back({pos, lengths[i]});
    pos += lengths[i];
    if (i + 1 < runs) pos += marks[i + 1] - marks[i];
  }
  return spans;
}

bool spans_valid(std::size_t len, std::span<const Span> spans) noexcept {
  std::size_t min_start = 0;
  for (const auto& s : spans) {
    if (s.length == 0 || s.start < min_start) return false;
    if (static_cast<std::size_t>(s.start) + s.length > len) return false;
    min_start = static_cast<std::size_t>(s.end()) + 1;
  }
  return true;
}

MaskedExample apply_span_corruption(std::span<const TokenId> seq, std::span<const Span> spans,
                                    const Vocabulary& vocab) {
  if (spans.empty()) throw Error(ErrorCode::InvalidArgument, "span corruption needs at least one span");
  if (!spans_valid(seq.size(), spans)) {
    throw Error(ErrorCode::InvalidArgument, "spans are not valid for a sequence of length " +
                                                std::to_string(seq.size()));
  }
  if (spans.size() + 1 > vocab.sentinel_count()) {
    throw Error(ErrorCode::SentinelBudgetExceeded,
                std::to_string(spans.size()) + " spans need " + std::to_string(spans.size() + 1) +
                    " sentinels but the vocabulary has " + std::to_string(vocab.sentinel_count()));
  }

  MaskedExample ex;
  ex.input_ids.reserve(seq.size() - spans.size() + 1);
  ex.target_ids.reserve(seq.size() / 4 + 2 * spans.size() + 2);
  std::size_t pos = 0;
  for (std::uint32_t k = 0; k < spans.size(); ++k) {
    const auto& s = spans[k];
    const TokenId sentinel = vocab.sentinel_id(k);
    ex.input_ids.insert(ex.input_ids.end(), seq.begin() + pos, seq.begin() + s.start);
    ex.input_ids.push_back(sentinel);
    ex.target_ids.push_back(sentinel);
    ex.target_ids.insert(ex.target_ids.end(), seq.begin() + s.start, seq.begin() + s.end());
    pos = s.end();
  }
  ex.input_ids.insert(ex.input_ids.end(), seq.begin() + pos, seq.end());
  ex.input_ids.push_back(vocab.eos_id());
  ex.target_ids.push_back(vocab.sentinel_id(vocab.sentinel_count() - 1));
  ex.target_ids.push_back(vocab.eos_id());
  return ex;
}

}  // namespace warmstart
