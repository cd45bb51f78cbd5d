// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <atomic>
#include <map>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "warmstart/masking.hpp"
#include "warmstart/transplant.hpp"
#include "warmstart/translate.hpp"
#include "warmstart/vocab.hpp"

namespace warmstart::testing {

inline const std::string kMarker(kBoundaryMarker);

/// Ten-token toy vocabulary used throughout the tests (no sentinels).
inline std::vector<std::string> toy_tokens() {
  return {"<pad>", "</s>", "<unk>", kMarker + "here", kMarker + "you", kMarker + "go",
          kMarker + "doc", "tor", kMarker + "the", kMarker + "document"};
}

inline Vocabulary toy_vocab() { return Vocabulary(toy_tokens(), SpecialIds{0, 1, 2, 0}); }

/// Longest-match oracle that scans the whole token list at every position.
/// `s` already carries its markers; specials and empty tokens never match.
inline std::vector<TokenId> brute_greedy(const Vocabulary& v, const std::string& s) {
  auto longest_at = [&](std::size_t pos) {
    std::size_t best_len = 0;
    TokenId best = 0;
    for (TokenId id = 0; id < v.size(); ++id) {
      const auto& t = v.token(id);
      if (v.is_special(id) || t.empty() || t.size() <= best_len) continue;
      if (s.compare(pos, t.size(), t) == 0) {
        best_len = t.size();
        best = id;
      }
    }
    return std::pair{best_len, best};
  };
  std::vector<TokenId> ids;
  for (std::size_t pos = 0; pos < s.size();) {
    auto [len, id] = longest_at(pos);
    if (len > 0) {
      ids.push_back(id);
      pos += len;
      continue;
    }
    std::size_t step = utf8_scalar_length(std::string_view(s).substr(pos));
    if (s.compare(pos, kMarker.size(), kMarker) == 0 && pos + step < s.size() &&
        longest_at(pos + step).first == 0) {
      step += utf8_scalar_length(std::string_view(s).substr(pos + step));
    }
    ids.push_back(v.unk_id());
    pos += step;
  }
  return ids;
}

/// Small random transplant problem: source and target vocabularies over a
/// tiny alphabet, a random source embedding and a fully populated table.
struct RandomTransplantCase {
  Vocabulary src;
  Vocabulary tgt;
  EmbeddingMatrix emb;
  TranslationTable table;
};

inline std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t count,
                                              std::uint32_t sentinels) {
  static const std::vector<std::string> alphabet = {"a", "b", "c", "\xC3\xA6", "1"};
  std::vector<std::string> tokens = {"<pad>", "</s>", "<unk>"};
  std::set<std::string> seen(tokens.begin(), tokens.end());
  while (tokens.size() + sentinels < count) {
    std::string t = rng() % 2 ? kMarker : "";
    for (auto n = 1 + rng() % 3; n > 0; --n) t += alphabet[rng() % alphabet.size()];
    if (seen.insert(t).second) tokens.push_back(t);
  }
  for (std::uint32_t k = sentinels; k > 0; --k) tokens.push_back("<extra_id_" + std::to_string(k - 1) + ">");
  return tokens;
}

inline RandomTransplantCase random_transplant_case(std::mt19937_64& rng) {
  auto src_sentinels = static_cast<std::uint32_t>(rng() % 4);
  auto tgt_sentinels = static_cast<std::uint32_t>(rng() % (src_sentinels + 1));
  Vocabulary src(random_tokens(rng, 8 + rng() % 57, src_sentinels), SpecialIds{0, 1, 2, src_sentinels});
  Vocabulary tgt(random_tokens(rng, 8 + rng() % 57, tgt_sentinels), SpecialIds{0, 1, 2, tgt_sentinels});
  std::size_t dim = 1 + rng() % 8;
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> data(src.size() * dim);
  for (auto& x : data) x = normal(rng);
  EmbeddingMatrix emb(src.size(), dim, std::move(data));

  static const std::vector<std::string> words = {"a", "b", "c", "ab", "ca", "\xC3\xA6" "b", "zz"};
  TranslationTable table;
  for (TokenId t = 0; t < tgt.size(); ++t) {
    if (tgt.is_special(t)) continue;
    auto key = normalize_token(tgt.token(t));
    if (!needs_translation(key) || table.find(key)) continue;
    if (rng() % 3 == 0) {
      table.insert(key, TranslationOutcome::failed(key), "random");
    } else {
      std::string text = words[rng() % words.size()];
      for (auto n = rng() % 3; n > 0; --n) text += " " + words[rng() % words.size()];
      table.insert(key, TranslationOutcome::translated(text), "random");
    }
  }
  return {std::move(src), std::move(tgt), std::move(emb), std::move(table)};
}

/// Source pieces for one target token, computed with brute_greedy.
inline std::vector<TokenId> oracle_pieces(const Vocabulary& src, const std::string& token,
                                          const std::optional<TranslationOutcome>& outcome) {
  auto with_markers = [](const std::string& text) {
    std::string out;
    for (char c : text) {
      if (c == ' ') out += kMarker;
      else out.push_back(c);
    }
    return out;
  };
  std::vector<TokenId> pieces;
  if (outcome && outcome->ok()) {
    pieces = outcome->text.empty() ? std::vector<TokenId>{} : brute_greedy(src, kMarker + with_markers(outcome->text));
  } else {
    pieces = brute_greedy(src, with_markers(token));
  }
  for (TokenId id : pieces) {
    if (id != src.unk_id()) return pieces;
  }
  return {src.unk_id()};
}

/// Rebuilds the original sequence from a corrupted (input, target) pair.
inline std::vector<TokenId> reconstruct(const MaskedExample& ex, const Vocabulary& v) {
  std::map<TokenId, std::vector<TokenId>> runs;
  TokenId current = 0;
  for (std::size_t i = 0; i + 1 < ex.target_ids.size(); ++i) {
    TokenId id = ex.target_ids[i];
    if (v.is_sentinel(id)) current = id;
    else runs[current].push_back(id);
  }
  std::vector<TokenId> out;
  for (std::size_t i = 0; i + 1 < ex.input_ids.size(); ++i) {
    TokenId id = ex.input_ids[i];
    if (v.is_sentinel(id)) out.insert(out.end(), runs[id].begin(), runs[id].end());
    else out.push_back(id);
  }
  return out;
}

class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("warmstart-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& line : lines) text += line + "\n";
  write_text(path, text);
}

}  // namespace warmstart::testing
