// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "warmstart/rational.hpp"
#include "warmstart/translate.hpp"
#include "warmstart/vocab.hpp"

namespace warmstart {

/// Dense row-major float32 matrix, one row per token id. Since input and
/// output embeddings are tied, one matrix stands for both.
class EmbeddingMatrix {
public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
  std::span<float> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }
  std::span<const float> data() const noexcept { return data_; }

  /// Bitwise comparison of shape and values.
  bool bit_equal(const EmbeddingMatrix& other) const noexcept;
  bool all_finite() const noexcept;

private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

// EMBT file layout (all little-endian):
//   "EMBT" | u32 version (=1) | u32 rows | u32 dim | rows*dim f32 row-major
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

EmbeddingMatrix read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);

/// Source-vocabulary pieces whose mean initializes `target_token`.
///
/// A translated token is tokenized as a phrase. A failed one falls back to its
/// own piece text, tokenized as-is so that word-initial and continuation
/// pieces keep their form. Results that are empty or all-unk collapse to [unk].
std::vector<TokenId> map_token(std::string_view target_token, const TranslationOutcome& outcome,
                               const Vocabulary& src);

struct TransplantReport {
  std::uint64_t total_tokens = 0;
  std::uint64_t translated_count = 0;
  std::uint64_t failed_count = 0;
  std::uint64_t bypassed_count = 0;
  std::uint64_t specials_copied = 0;
  std::uint64_t total_pieces = 0;  // over non-special tokens
  Rational mean_pieces_per_token;
  std::uint64_t unk_only_count = 0;
  std::uint64_t single_piece_count = 0;
  std::vector<std::string> notes;
};

struct TransplantResult {
  EmbeddingMatrix embeddings;
  TransplantReport report;
};

/// Builds the warm-start matrix for `tgt`. Specials are copied by role
/// (pad, eos, unk, sentinel k); every other row is the plain mean of the
/// source rows listed by map_token. The table must already hold an entry for
/// every non-special token that needs translation.
TransplantResult transplant(const EmbeddingMatrix& src_emb, const Vocabulary& src,
                            const Vocabulary& tgt, const TranslationTable& table);

}  // namespace warmstart
