// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/corpus.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "byte_io.hpp"
#include "warmstart/error.hpp"

namespace warmstart {

CorpusChunker::CorpusChunker(ChunkOptions options) : options_(options) {
  if (options_.seq_len < 2) throw Error(ErrorCode::InvalidArgument, "sequence length must be at least 2");
  if (options_.min_tail > options_.seq_len) {
    throw Error(ErrorCode::InvalidArgument, "min_tail cannot exceed the sequence length");
  }
  if (options_.seq_len > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "sequence length too large");
  }
}

void CorpusChunker::add_document(std::span<const TokenId> doc, const Sink& sink) {
  const std::uint64_t doc_id = documents_++;
  const std::size_t L = options_.seq_len;
  std::size_t pos = 0;
  for (; pos + L <= doc.size(); pos += L) {
    sink(TokenSequence{{doc.begin() + pos, doc.begin() + pos + L}, doc_id, next_index_++});
  }
  const std::size_t tail = doc.size() - pos;
  if (tail == 0) return;
  if (tail >= options_.min_tail) {
    sink(TokenSequence{{doc.begin() + pos, doc.end()}, doc_id, next_index_++});
  } else {
    dropped_ += tail;
  }
}

std::vector<TokenSequence> chunk_corpus(std::span<const std::vector<TokenId>> docs,
                                        ChunkOptions options) {
  CorpusChunker chunker(options);
  std::vector<TokenSequence> out;
  for (const auto& doc : docs) {
    chunker.add_document(doc, [&](TokenSequence&& seq) { out.push_back(std::move(seq)); });
  }
  return out;
}

// ---------------------------------------------------------------------------

std::filesystem::path index_path_for(const std::filesystem::path& store) {
  auto p = store;
  p += ".idx";
  return p;
}

namespace {
constexpr std::uint64_t kHeaderBytes = 4 + 4 + 8;
}

SequenceStoreWriter::SequenceStoreWriter(const std::filesystem::path& path, bool write_index)
    : path_(path), write_index_(write_index), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::Io, "cannot create sequence store " + path.string());
  out_.write("SEQS", 4);
  io::put<std::uint32_t>(out_, kStoreFormatVersion);
  io::put<std::uint64_t>(out_, 0);
  position_ = kHeaderBytes;
}

SequenceStoreWriter::~SequenceStoreWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void SequenceStoreWriter::append(std::span<const TokenId> ids) {
  if (finished_) throw Error(ErrorCode::InvalidArgument, "append after finish");
  if (ids.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "sequence too long for the store format");
  }
  offsets_.push_back(position_);
  io::put<std::uint32_t>(out_, static_cast<std::uint32_t>(ids.size()));
  io::put_array(out_, ids);
  position_ += 4 + 4 * static_cast<std::uint64_t>(ids.size());
  if (!out_) throw Error(ErrorCode::Io, "write failure on " + path_.string());
}

std::uint64_t SequenceStoreWriter::finish() {
  if (finished_) return offsets_.size();
  finished_ = true;
  out_.seekp(8);
  io::put<std::uint64_t>(out_, offsets_.size());
  out_.flush();
  if (!out_) throw Error(ErrorCode::Io, "write failure on " + path_.string());
  out_.close();

  if (write_index_) {
    auto idx = index_path_for(path_);
    std::ofstream index(idx, std::ios::binary | std::ios::trunc);
    if (!index) throw Error(ErrorCode::Io, "cannot create store index " + idx.string());
    index.write("SEQI", 4);
    io::put<std::uint32_t>(index, kStoreFormatVersion);
    io::put<std::uint64_t>(index, offsets_.size());
    io::put_array(index, std::span<const std::uint64_t>(offsets_));
    index.flush();
    if (!index) throw Error(ErrorCode::Io, "write failure on " + idx.string());
  }
  return offsets_.size();
}

SequenceStoreReader::SequenceStoreReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::Io, "cannot open sequence store " + path.string());
  const std::string name = path.string();
  io::expect_magic(in_, "SEQS", name);
  auto version = io::get<std::uint32_t>(in_, "store version");
  if (version != kStoreFormatVersion) {
    throw Error(ErrorCode::CorruptFile, name + ": unsupported store version " + std::to_string(version));
  }
  const auto count = io::get<std::uint64_t>(in_, "store count");
  const auto file_size = std::filesystem::file_size(path);

  std::vector<std::uint64_t> offsets;
  auto idx = index_path_for(path);
  if (std::filesystem::exists(idx)) {
    std::ifstream index(idx, std::ios::binary);
    try {
      io::expect_magic(index, "SEQI", idx.string());
      if (io::get<std::uint32_t>(index, "index version") == kStoreFormatVersion &&
          io::get<std::uint64_t>(index, "index count") == count &&
          count <= (file_size - kHeaderBytes) / 4) {
        offsets.resize(count);
        io::get_array(index, std::span<std::uint64_t>(offsets), "index offsets");
      }
    } catch (const Error&) {
      offsets.clear();
    }
  }

  // With a consistent index the record lengths follow from offset gaps.
  if (offsets.size() == count && count > 0 && offsets.front() == kHeaderBytes) {
    lengths_.reserve(count);
    for (std::uint64_t i = 0; i < count && !offsets.empty(); ++i) {
      const std::uint64_t end = i + 1 < count ? offsets[i + 1] : file_size;
      if (end < offsets[i] + 4 || (end - offsets[i] - 4) % 4 != 0) {
        offsets.clear();
        lengths_.clear();
        break;
      }
      lengths_.push_back(static_cast<std::uint32_t>((end - offsets[i] - 4) / 4));
    }
    if (!offsets.empty()) {
      in_.seekg(static_cast<std::streamoff>(offsets.back()));
      if (io::get<std::uint32_t>(in_, "sequence length") == lengths_.back()) {
        offsets_ = std::move(offsets);
        return;
      }
      lengths_.clear();
    }
  }

  lengths_.reserve(count);
  std::uint64_t pos = kHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (pos + 4 > file_size) throw Error(ErrorCode::CorruptFile, name + ": truncated store");
    in_.seekg(static_cast<std::streamoff>(pos));
    auto len = io::get<std::uint32_t>(in_, "sequence length");
    lengths_.push_back(len);
    offsets_.push_back(pos);
    pos += 4 + 4 * static_cast<std::uint64_t>(len);
  }
  if (pos != file_size) {
    throw Error(ErrorCode::CorruptFile, name + ": store size does not match its header count");
  }
}

void SequenceStoreReader::check_index(std::uint64_t index) const {
  if (index >= offsets_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "sequence index " + std::to_string(index) +
                                                " out of range for store of " +
                                                std::to_string(offsets_.size()));
  }
}

std::uint32_t SequenceStoreReader::length(std::uint64_t index) const {
  check_index(index);
  return lengths_[index];
}

TokenSequence SequenceStoreReader::read(std::uint64_t index) const {
  check_index(index);
  TokenSequence seq;
  seq.seq_index = index;
  seq.ids.resize(lengths_[index]);
  std::lock_guard lock(mutex_);
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(offsets_[index] + 4));
  io::get_array(in_, std::span<TokenId>(seq.ids), "sequence ids");
  return seq;
}

void write_store(const std::filesystem::path& path, std::span<const TokenSequence> seqs,
                 bool write_index) {
  SequenceStoreWriter writer(path, write_index);
  for (const auto& seq : seqs) writer.append(seq.ids);
  writer.finish();
}

TokenSequence read_store(const std::filesystem::path& path, std::uint64_t index) {
  return SequenceStoreReader(path).read(index);
}

StoreStats compute_stats(const SequenceStoreReader& reader) {
  StoreStats stats;
  stats.count = reader.count();
  for (std::uint64_t i = 0; i < stats.count; ++i) {
    auto len = reader.length(i);
    stats.total_tokens += len;
    ++stats.length_histogram[len];
  }
  return stats;
}

void for_each_text_document(const std::filesystem::path& dir,
                            const std::function<void(std::string_view)>& fn) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::Io, "corpus directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open corpus file " + file.string());
    std::string doc;
    std::string line;
    auto flush = [&] {
      if (!doc.empty()) fn(doc);
      doc.clear();
    };
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) {
        flush();
        continue;
      }
      auto last = line.find_last_not_of(" \t");
      if (!doc.empty()) doc.push_back(' ');
      doc.append(line, first, last - first + 1);
    }
    flush();
  }
}

}  // namespace warmstart
