// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/batcher.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "warmstart/error.hpp"

namespace warmstart {

AccumulationPlan plan_accumulation(std::size_t effective, std::size_t micro) {
  if (micro == 0 || effective == 0) {
    throw Error(ErrorCode::InvalidArgument, "batch sizes must be positive");
  }
  if (effective % micro != 0) {
    throw Error(ErrorCode::NonDivisible, "micro-batch " + std::to_string(micro) +
                                             " does not divide effective batch " +
                                             std::to_string(effective));
  }
  return {micro, effective / micro, effective};
}

PaddedBatch assemble(std::span<const MaskedExample> examples, std::size_t micro, TokenId pad_id) {
  if (examples.empty()) throw Error(ErrorCode::InvalidArgument, "cannot assemble an empty batch");
  if (examples.size() > micro) {
    throw Error(ErrorCode::InvalidArgument, std::to_string(examples.size()) +
                                                " examples exceed micro-batch size " +
                                                std::to_string(micro));
  }

  PaddedBatch batch;
  batch.rows = examples.size();
  for (const auto& ex : examples) {
    batch.width_in = std::max(batch.width_in, ex.input_ids.size());
    batch.width_tgt = std::max(batch.width_tgt, ex.target_ids.size());
  }
  batch.inputs.assign(batch.rows * batch.width_in, pad_id);
  batch.targets.assign(batch.rows * batch.width_tgt, pad_id);
  batch.input_mask.assign(batch.inputs.size(), 0);
  batch.target_mask.assign(batch.targets.size(), 0);

  for (std::size_t r = 0; r < batch.rows; ++r) {
    const auto& ex = examples[r];
    std::copy(ex.input_ids.begin(), ex.input_ids.end(), batch.inputs.begin() + r * batch.width_in);
    std::fill_n(batch.input_mask.begin() + r * batch.width_in, ex.input_ids.size(), 1);
    std::copy(ex.target_ids.begin(), ex.target_ids.end(), batch.targets.begin() + r * batch.width_tgt);
    std::fill_n(batch.target_mask.begin() + r * batch.width_tgt, ex.target_ids.size(), 1);
  }
  return batch;
}

PaddingEfficiency padding_efficiency(const PaddedBatch& batch) {
  auto real = [](const std::vector<std::uint8_t>& mask) {
    return static_cast<std::uint64_t>(std::count(mask.begin(), mask.end(), 1));
  };
  const std::uint64_t in_real = real(batch.input_mask);
  const std::uint64_t tgt_real = real(batch.target_mask);
  const std::uint64_t in_cells = batch.input_mask.size();
  const std::uint64_t tgt_cells = batch.target_mask.size();
  return {Rational::of(in_real, in_cells), Rational::of(tgt_real, tgt_cells),
          Rational::of(in_real + tgt_real, in_cells + tgt_cells)};
}

std::vector<std::vector<std::size_t>> group_batches(std::span<const std::size_t> lengths,
                                                    std::size_t micro, bool sort_by_length) {
  if (micro == 0) throw Error(ErrorCode::InvalidArgument, "micro-batch size must be positive");
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (sort_by_length) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += micro) {
    batches.emplace_back(order.begin() + i, order.begin() + std::min(order.size(), i + micro));
  }
  return batches;
}

}  // namespace warmstart
