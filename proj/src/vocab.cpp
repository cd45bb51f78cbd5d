// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/vocab.hpp"

#include <algorithm>
#include <fstream>

#include "warmstart/error.hpp"

namespace warmstart {

namespace detail {

std::uint32_t TokenTrie::child(std::uint32_t node, unsigned char byte) const {
  const auto& kids = nodes_[node].children;
  auto it = std::lower_bound(kids.begin(), kids.end(), byte,
                             [](const auto& kid, unsigned char b) { return kid.first < b; });
  if (it == kids.end() || it->first != byte) return kNoToken;
  return it->second;
}

void TokenTrie::insert(std::string_view bytes, TokenId id) {
  std::uint32_t node = 0;
  for (char c : bytes) {
    auto byte = static_cast<unsigned char>(c);
    std::uint32_t next = child(node, byte);
    if (next == kNoToken) {
      next = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
      auto& kids = nodes_[node].children;
      auto it = std::lower_bound(kids.begin(), kids.end(), byte,
                                 [](const auto& kid, unsigned char b) { return kid.first < b; });
      kids.insert(it, {byte, next});
    }
    node = next;
  }
  nodes_[node].token = id;
}

std::optional<std::pair<std::size_t, TokenId>> TokenTrie::longest_prefix(
    std::string_view text) const {
  std::optional<std::pair<std::size_t, TokenId>> best;
  std::uint32_t node = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    node = child(node, static_cast<unsigned char>(text[i]));
    if (node == kNoToken) break;
    if (nodes_[node].token != kNoToken) best = {{i + 1, nodes_[node].token}};
  }
  return best;
}

}  // namespace detail

Vocabulary::Vocabulary(std::vector<std::string> tokens, SpecialIds specials,
                       std::string boundary_marker)
    : tokens_(std::move(tokens)), specials_(specials), marker_(std::move(boundary_marker)) {
  const std::size_t n = tokens_.size();
  if (marker_.empty() || utf8_scalar_length(marker_) != marker_.size()) {
    throw Error(ErrorCode::InvalidArgument, "boundary marker must be a single character");
  }
  if (n < 3 + static_cast<std::size_t>(specials_.sentinel_count)) {
    throw Error(ErrorCode::InvalidSpecialIds,
                "vocabulary of size " + std::to_string(n) + " cannot hold 3 special ids and " +
                    std::to_string(specials_.sentinel_count) + " sentinels");
  }
  const TokenId ids[] = {specials_.pad, specials_.eos, specials_.unk};
  for (TokenId id : ids) {
    if (id >= n) {
      throw Error(ErrorCode::InvalidSpecialIds,
                  "special id " + std::to_string(id) + " out of range for size " + std::to_string(n));
    }
    if (is_sentinel(id)) {
      throw Error(ErrorCode::InvalidSpecialIds,
                  "special id " + std::to_string(id) + " collides with the sentinel range");
    }
  }
  if (specials_.pad == specials_.eos || specials_.pad == specials_.unk ||
      specials_.eos == specials_.unk) {
    throw Error(ErrorCode::InvalidSpecialIds, "pad, eos and unk ids must be distinct");
  }

  for (TokenId id = 0; id < n; ++id) {
    auto [it, inserted] = index_.emplace(tokens_[id], id);
    if (!inserted) {
      throw Error(ErrorCode::DuplicateToken, "duplicate token \"" + tokens_[id] + "\" at ids " +
                                                 std::to_string(it->second) + " and " +
                                                 std::to_string(id));
    }
    if (!is_special(id) && !tokens_[id].empty()) trie_.insert(tokens_[id], id);
  }
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw Error(ErrorCode::IdOutOfRange, "token id " + std::to_string(id) +
                                             " out of range for size " +
                                             std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::sentinel_id(std::uint32_t k) const {
  if (k >= specials_.sentinel_count) {
    throw Error(ErrorCode::SentinelBudgetExceeded,
                "sentinel " + std::to_string(k) + " requested but vocabulary has " +
                    std::to_string(specials_.sentinel_count));
  }
  return static_cast<TokenId>(tokens_.size() - 1 - k);
}

bool Vocabulary::is_sentinel(TokenId id) const noexcept {
  return id < tokens_.size() && id >= tokens_.size() - specials_.sentinel_count;
}

bool Vocabulary::is_special(TokenId id) const noexcept {
  return id == specials_.pad || id == specials_.eos || id == specials_.unk || is_sentinel(id);
}

Vocabulary load_vocab(const std::filesystem::path& path, SpecialIds specials,
                      std::string boundary_marker) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open vocabulary file " + path.string());

  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto tab = line.find('\t'); tab != std::string::npos) line.resize(tab);
    tokens.push_back(std::move(line));
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read failure on " + path.string());
  return Vocabulary(std::move(tokens), specials, std::move(boundary_marker));
}

std::size_t utf8_scalar_length(std::string_view text) noexcept {
  if (text.empty()) return 0;
  auto lead = static_cast<unsigned char>(text[0]);
  std::size_t len = 1;
  if (lead >= 0xF0 && lead <= 0xF4) len = 4;
  else if (lead >= 0xE0) len = lead <= 0xEF ? 3 : 1;
  else if (lead >= 0xC2) len = 2;
  if (len > text.size()) return 1;
  for (std::size_t i = 1; i < len; ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) return 1;
  }
  return len;
}

namespace {

std::string spaces_to_markers(std::string_view text, std::string_view marker) {
  std::string out;
  out.reserve(text.size() + marker.size() * 4);
  for (char c : text) {
    if (c == ' ') out.append(marker);
    else out.push_back(c);
  }
  return out;
}

std::vector<TokenId> greedy_match(const Vocabulary& vocab, std::string_view s) {
  std::vector<TokenId> ids;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto rest = s.substr(pos);
    if (auto hit = vocab.trie().longest_prefix(rest)) {
      ids.push_back(hit->second);
      pos += hit->first;
    } else {
      // An unmatched marker joins the unmatched scalar after it in one unk.
      std::size_t len = utf8_scalar_length(rest);
      const std::string& marker = vocab.boundary_marker();
      if (rest.starts_with(marker) && len < rest.size() &&
          !vocab.trie().longest_prefix(rest.substr(len))) {
        len += utf8_scalar_length(rest.substr(len));
      }
      ids.push_back(vocab.unk_id());
      pos += len;
    }
  }
  return ids;
}

}  // namespace

std::vector<TokenId> tokenize_greedy(const Vocabulary& vocab, std::string_view text) {
  if (text.empty()) return {};
  std::string s(vocab.boundary_marker());
  s += spaces_to_markers(text, vocab.boundary_marker());
  return greedy_match(vocab, s);
}

std::vector<TokenId> tokenize_pieces(const Vocabulary& vocab, std::string_view pieces) {
  return greedy_match(vocab, spaces_to_markers(pieces, vocab.boundary_marker()));
}

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string joined;
  for (TokenId id : ids) joined += vocab.token(id);

  const std::string& marker = vocab.boundary_marker();
  std::string out;
  out.reserve(joined.size());
  for (std::size_t pos = 0; pos < joined.size();) {
    if (joined.compare(pos, marker.size(), marker) == 0) {
      out.push_back(' ');
      pos += marker.size();
    } else {
      out.push_back(joined[pos++]);
    }
  }
  if (!out.empty() && out.front() == ' ') out.erase(0, 1);
  return out;
}

}  // namespace warmstart
