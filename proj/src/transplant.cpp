// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/transplant.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "byte_io.hpp"

namespace warmstart {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedding data has " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(rows_) + "x" + std::to_string(dim_));
  }
}

bool EmbeddingMatrix::bit_equal(const EmbeddingMatrix& other) const noexcept {
  return rows_ == other.rows_ && dim_ == other.dim_ &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

bool EmbeddingMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open embedding file " + path.string());
  io::expect_magic(in, "EMBT", path.string());
  auto version = io::get<std::uint32_t>(in, "version");
  if (version != kEmbeddingFormatVersion) {
    throw Error(ErrorCode::CorruptFile,
                path.string() + ": unsupported embedding format version " + std::to_string(version));
  }
  auto rows = io::get<std::uint32_t>(in, "rows");
  auto dim = io::get<std::uint32_t>(in, "dim");
  std::vector<float> data(static_cast<std::size_t>(rows) * dim);
  io::get_array(in, std::span<float>(data), "embedding values");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": trailing bytes after embedding values");
  }
  EmbeddingMatrix matrix(rows, dim, std::move(data));
  if (!matrix.all_finite()) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": embedding contains NaN or Inf");
  }
  return matrix;
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (matrix.rows() > kMax || matrix.dim() > kMax) {
    throw Error(ErrorCode::InvalidArgument, "embedding shape does not fit the EMBT header");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot create embedding file " + path.string());
  out.write("EMBT", 4);
  io::put<std::uint32_t>(out, kEmbeddingFormatVersion);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.rows()));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  io::put_array(out, matrix.data());
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failure on " + path.string());
}

std::vector<TokenId> map_token(std::string_view target_token, const TranslationOutcome& outcome,
                               const Vocabulary& src) {
  auto pieces = outcome.ok() ? tokenize_greedy(src, outcome.text)
                             : tokenize_pieces(src, target_token);
  bool useful = std::any_of(pieces.begin(), pieces.end(),
                            [&](TokenId id) { return id != src.unk_id(); });
  if (!useful) return {src.unk_id()};
  return pieces;
}

namespace {

void mean_of_rows(const EmbeddingMatrix& src, std::span<const TokenId> ids, std::span<float> out) {
  if (ids.size() == 1) {
    auto row = src.row(ids[0]);
    std::copy(row.begin(), row.end(), out.begin());
    return;
  }
  std::vector<double> acc(out.size(), 0.0);
  for (TokenId id : ids) {
    auto row = src.row(id);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += row[j];
  }
  const auto n = static_cast<double>(ids.size());
  for (std::size_t j = 0; j < acc.size(); ++j) out[j] = static_cast<float>(acc[j] / n);
}

}  // namespace

TransplantResult transplant(const EmbeddingMatrix& src_emb, const Vocabulary& src,
                            const Vocabulary& tgt, const TranslationTable& table) {
  if (src_emb.rows() != src.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "source embedding has " + std::to_string(src_emb.rows()) +
                    " rows but the source vocabulary has " + std::to_string(src.size()) + " tokens");
  }
  if (tgt.sentinel_count() > src.sentinel_count()) {
    throw Error(ErrorCode::SentinelMismatch,
                "target vocabulary has " + std::to_string(tgt.sentinel_count()) +
                    " sentinels but the source has only " + std::to_string(src.sentinel_count()));
  }

  TransplantResult result{EmbeddingMatrix(tgt.size(), src_emb.dim()), {}};
  auto& report = result.report;
  report.total_tokens = tgt.size();
  const std::string& marker = tgt.boundary_marker();

  for (TokenId t = 0; t < tgt.size(); ++t) {
    auto out = result.embeddings.row(t);

    if (tgt.is_special(t)) {
      TokenId from = t == tgt.pad_id()   ? src.pad_id()
                     : t == tgt.eos_id() ? src.eos_id()
                     : t == tgt.unk_id() ? src.unk_id()
                                         : src.sentinel_id(static_cast<std::uint32_t>(tgt.size() - 1 - t));
      auto row = src_emb.row(from);
      std::copy(row.begin(), row.end(), out.begin());
      ++report.specials_copied;
      continue;
    }

    const std::string& token = tgt.token(t);
    std::string key = normalize_token(token, marker);
    TranslationOutcome outcome;
    if (!needs_translation(key, marker)) {
      outcome = TranslationOutcome::failed(key);
      ++report.bypassed_count;
    } else {
      auto entry = table.find(key);
      if (!entry) {
        throw Error(ErrorCode::MissingTranslation,
                    "no translation entry for target token " + std::to_string(t) + " \"" + token + "\"");
      }
      outcome = entry->outcome;
      ++(outcome.ok() ? report.translated_count : report.failed_count);
    }

    auto pieces = map_token(token, outcome, src);
    if (pieces.size() == 1) {
      ++report.single_piece_count;
      if (pieces[0] == src.unk_id()) ++report.unk_only_count;
    }
    report.total_pieces += pieces.size();
    mean_of_rows(src_emb, pieces, out);
  }

  report.mean_pieces_per_token =
      Rational::of(report.total_pieces, report.total_tokens - report.specials_copied);
  report.notes.push_back("special and sentinel rows copied from the source by role");
  if (report.unk_only_count > 0) {
    report.notes.push_back(std::to_string(report.unk_only_count) +
                           " token(s) fell back to the unknown-token embedding");
  }
  return result;
}

}  // namespace warmstart
