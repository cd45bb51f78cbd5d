// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "warmstart/error.hpp"
#include "warmstart/vocab.hpp"

namespace warmstart {

struct TokenSequence {
  std::vector<TokenId> ids;
  std::optional<std::uint64_t> source_doc;  // unknown for sequences read back from a store
  std::uint64_t seq_index = 0;

  bool operator==(const TokenSequence&) const = default;
};

struct ChunkOptions {
  std::size_t seq_len = 512;
  std::size_t min_tail = 16;
};

/// Streams documents into fixed-length sequences. Each document is cut into
/// consecutive chunks of seq_len; the remainder is kept only when it holds at
/// least min_tail ids. Chunks never span two documents.
class CorpusChunker {
public:
  using Sink = std::function<void(TokenSequence&&)>;

  explicit CorpusChunker(ChunkOptions options);

  void add_document(std::span<const TokenId> doc, const Sink& sink);

  std::uint64_t documents() const noexcept { return documents_; }
  std::uint64_t sequences() const noexcept { return next_index_; }
  std::uint64_t dropped_tokens() const noexcept { return dropped_; }

private:
  ChunkOptions options_;
  std::uint64_t documents_ = 0;
  std::uint64_t next_index_ = 0;
  std::uint64_t dropped_ = 0;
};

std::vector<TokenSequence> chunk_corpus(std::span<const std::vector<TokenId>> docs,
                                        ChunkOptions options = {});

// SEQS store layout (little-endian):
//   "SEQS" | u32 version (=1) | u64 count | count x (u32 length | length x u32 id)
// SEQI side index:
//   "SEQI" | u32 version (=1) | u64 count | count x u64 byte offset of each record
inline constexpr std::uint32_t kStoreFormatVersion = 1;

/// Path of the side index that accompanies a store.
std::filesystem::path index_path_for(const std::filesystem::path& store);

class SequenceStoreWriter {
public:
  explicit SequenceStoreWriter(const std::filesystem::path& path, bool write_index = true);
  ~SequenceStoreWriter();
  SequenceStoreWriter(const SequenceStoreWriter&) = delete;
  SequenceStoreWriter& operator=(const SequenceStoreWriter&) = delete;

  void append(std::span<const TokenId> ids);
  /// Patches the header and writes the index; returns the sequence count.
  std::uint64_t finish();

private:
  std::filesystem::path path_;
  bool write_index_;
  std::ofstream out_;
  std::vector<std::uint64_t> offsets_;
  std::uint64_t position_ = 0;
  bool finished_ = false;
};

/// Random-access reader. Uses the side index when it is present and agrees
/// with the store, otherwise scans the record lengths once on open.
class SequenceStoreReader {
public:
  explicit SequenceStoreReader(const std::filesystem::path& path);

  std::uint64_t count() const noexcept { return offsets_.size(); }
  std::uint32_t length(std::uint64_t index) const;
  TokenSequence read(std::uint64_t index) const;

private:
  void check_index(std::uint64_t index) const;

  std::filesystem::path path_;
  mutable std::ifstream in_;
  mutable std::mutex mutex_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> lengths_;
};

void write_store(const std::filesystem::path& path, std::span<const TokenSequence> seqs,
                 bool write_index = true);
TokenSequence read_store(const std::filesystem::path& path, std::uint64_t index);

struct StoreStats {
  std::uint64_t count = 0;
  std::uint64_t total_tokens = 0;
  std::map<std::uint32_t, std::uint64_t> length_histogram;
};

StoreStats compute_stats(const SequenceStoreReader& reader);

/// Calls `fn` for every document under `dir`: regular `*.txt` files, visited
/// in path order, split on blank lines. Lines of one document are joined with
/// single spaces.
void for_each_text_document(const std::filesystem::path& dir,
                            const std::function<void(std::string_view)>& fn);

}  // namespace warmstart
