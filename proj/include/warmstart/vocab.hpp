// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace warmstart {

/// Index into a specific Vocabulary; meaningless on its own.
using TokenId = std::uint32_t;

/// U+2581 LOWER ONE EIGHTH BLOCK, the sentencepiece word-start marker.
inline constexpr std::string_view kBoundaryMarker = "\xE2\x96\x81";

struct SpecialIds {
  TokenId pad = 0;
  TokenId eos = 1;
  TokenId unk = 2;
  std::uint32_t sentinel_count = 100;
};

namespace detail {

// Byte trie over the matchable tokens, used for greedy longest match.
class TokenTrie {
public:
  static constexpr std::uint32_t kNoToken = UINT32_MAX;

  void insert(std::string_view bytes, TokenId id);

  // Length in bytes and id of the longest token that prefixes `text`.
  std::optional<std::pair<std::size_t, TokenId>> longest_prefix(std::string_view text) const;

private:
  struct Node {
    std::vector<std::pair<unsigned char, std::uint32_t>> children;  // sorted by byte
    std::uint32_t token = kNoToken;
  };

  std::uint32_t child(std::uint32_t node, unsigned char byte) const;

  std::vector<Node> nodes_{Node{}};
};

}  // namespace detail

/// Ordered subword inventory. Sentinel k has id size()-1-k. Immutable once
/// constructed, so it can be shared freely across threads.
class Vocabulary {
public:
  Vocabulary(std::vector<std::string> tokens, SpecialIds specials,
             std::string boundary_marker = std::string(kBoundaryMarker));

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::optional<TokenId> find(std::string_view token) const;

  TokenId pad_id() const noexcept { return specials_.pad; }
  TokenId eos_id() const noexcept { return specials_.eos; }
  TokenId unk_id() const noexcept { return specials_.unk; }
  std::uint32_t sentinel_count() const noexcept { return specials_.sentinel_count; }
  const SpecialIds& specials() const noexcept { return specials_; }
  const std::string& boundary_marker() const noexcept { return marker_; }

  /// Id of sentinel k (k < sentinel_count()).
  TokenId sentinel_id(std::uint32_t k) const;
  bool is_sentinel(TokenId id) const noexcept;
  /// pad, eos, unk, or a sentinel.
  bool is_special(TokenId id) const noexcept;

  const detail::TokenTrie& trie() const noexcept { return trie_; }

private:
  std::vector<std::string> tokens_;
  std::map<std::string, TokenId, std::less<>> index_;
  SpecialIds specials_;
  std::string marker_;
  detail::TokenTrie trie_;
};

/// One token per line, id = 0-based line index. Anything after the first tab
/// on a line (typically a score) is discarded.
Vocabulary load_vocab(const std::filesystem::path& path, SpecialIds specials = {},
                      std::string boundary_marker = std::string(kBoundaryMarker));

/// Greedy left-to-right longest match over `text` after replacing spaces with
/// the boundary marker and prepending one marker. Unmatched input consumes one
/// Unicode scalar and yields unk; an unmatched marker is folded into the
/// unmatched scalar that follows it. Never yields pad, eos, or sentinel ids.
std::vector<TokenId> tokenize_greedy(const Vocabulary& vocab, std::string_view text);

/// Same matcher applied to text that is already in piece form: spaces become
/// markers but no leading marker is added.
std::vector<TokenId> tokenize_pieces(const Vocabulary& vocab, std::string_view pieces);

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids);

/// Byte length of the UTF-8 scalar starting at text[0] (1 for invalid input).
std::size_t utf8_scalar_length(std::string_view text) noexcept;

}  // namespace warmstart
