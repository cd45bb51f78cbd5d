// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "warmstart/error.hpp"
#include "warmstart/vocab.hpp"

using namespace warmstart;
using namespace warmstart::testing;

TEST_SUITE("vocab") {

TEST_CASE("load assigns line ids and descending sentinels") {
  TempDir dir;
  std::vector<std::string> lines = {"<pad>", "</s>", "<unk>", "a", "b", "c", "d", "e", "<x1>", "<x0>"};
  write_lines(dir / "v.txt", lines);
  auto v = load_vocab(dir / "v.txt", SpecialIds{0, 1, 2, 2});
  CHECK(v.size() == 10);
  CHECK(v.sentinel_id(0) == 9);
  CHECK(v.sentinel_id(1) == 8);
  CHECK(v.is_sentinel(8));
  CHECK_FALSE(v.is_sentinel(7));
  CHECK(v.token(3) == "a");
  CHECK_THROWS_AS(v.sentinel_id(2), Error);
}

TEST_CASE("score after tab is discarded") {
  TempDir dir;
  write_lines(dir / "v.txt", {"<pad>\t0", "</s>\t0", "<unk>\t0", "tor\t-3.2"});
  auto v = load_vocab(dir / "v.txt", SpecialIds{0, 1, 2, 0});
  CHECK(v.token(3) == "tor");
  CHECK(v.find("tor") == TokenId{3});
}

TEST_CASE("duplicate token is rejected") {
  TempDir dir;
  write_lines(dir / "v.txt", {"<pad>", "</s>", "<unk>", kMarker + "go", kMarker + "go"});
  try {
    load_vocab(dir / "v.txt", SpecialIds{0, 1, 2, 0});
    FAIL("expected DuplicateToken");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateToken);
  }
}

TEST_CASE("special id validation") {
  auto tokens = toy_tokens();
  auto code_of = [&](SpecialIds ids) {
    try {
      Vocabulary v(tokens, ids);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;  // sentinel for "no error"
  };
  CHECK(code_of({0, 1, 10, 0}) == ErrorCode::InvalidSpecialIds);
  CHECK(code_of({0, 0, 2, 0}) == ErrorCode::InvalidSpecialIds);
  CHECK(code_of({0, 1, 2, 8}) == ErrorCode::InvalidSpecialIds);  // size < 3 + sentinels
  CHECK(code_of({0, 1, 9, 1}) == ErrorCode::InvalidSpecialIds);  // unk inside sentinel range
  CHECK(code_of({0, 1, 2, 7}) == ErrorCode::Io);
  CHECK_THROWS_AS(load_vocab("/nonexistent/vocab.txt"), Error);
}

TEST_CASE("greedy tokenization of toy examples") {
  auto v = toy_vocab();
  CHECK(tokenize_greedy(v, "here you go") == std::vector<TokenId>{3, 4, 5});
  CHECK(tokenize_greedy(v, "doctor") == std::vector<TokenId>{6, 7});
  CHECK(tokenize_greedy(v, "the document") == std::vector<TokenId>{8, 9});
  CHECK(tokenize_greedy(v, "").empty());
  CHECK(tokenize_greedy(v, "\xCE\xB6") == std::vector<TokenId>{2});
  CHECK(tokenize_greedy(v, "\xCE\xB6\xCE\xB6") == std::vector<TokenId>{2, 2});
  CHECK(tokenize_greedy(v, "\xCE\xB6 go") == std::vector<TokenId>{2, 5});
}

TEST_CASE("unknown scalar consumes exactly one code point") {
  // With a bare marker token the marker matches on its own.
  auto tokens = toy_tokens();
  tokens.push_back(kMarker);
  Vocabulary v(tokens, SpecialIds{0, 1, 2, 0});
  CHECK(tokenize_greedy(v, "\xCE\xB6") == std::vector<TokenId>{10, 2});
  CHECK(tokenize_greedy(v, "\xF0\x9F\x98\x80go") == std::vector<TokenId>{10, 2, 2, 2});
  CHECK(tokenize_pieces(v, "tor") == std::vector<TokenId>{7});
}

TEST_CASE("detokenize") {
  auto v = toy_vocab();
  CHECK(detokenize(v, std::vector<TokenId>{3, 4, 5}) == "here you go");
  CHECK(detokenize(v, std::vector<TokenId>{}) == "");
  CHECK(detokenize(v, std::vector<TokenId>{6, 7}) == "doctor");
  CHECK_THROWS_AS(detokenize(v, std::vector<TokenId>{10}), Error);
}

TEST_CASE("round trip over in-vocabulary words") {
  // Single characters guarantee every word can always be covered.
  std::vector<std::string> tokens = {"<pad>", "</s>", "<unk>"};
  const std::string alphabet = "abcdefghij";
  for (char c : alphabet) tokens.push_back(std::string(1, c));
  for (char c : alphabet) tokens.push_back(kMarker + c);
  std::vector<std::string> words;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> letter(0, 9), wlen(2, 7);
  while (tokens.size() < 200) {
    std::string w;
    for (int i = wlen(rng); i > 0; --i) w.push_back(alphabet[letter(rng)]);
    std::string piece = (rng() % 2 ? kMarker : std::string()) + w;
    if (std::find(tokens.begin(), tokens.end(), piece) == tokens.end()) {
      tokens.push_back(piece);
      if (piece.starts_with(kMarker)) words.push_back(w);
    }
  }
  Vocabulary v(tokens, SpecialIds{0, 1, 2, 0});
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), count(1, 12);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    for (std::size_t i = count(rng); i > 0; --i) {
      if (!text.empty()) text.push_back(' ');
      text += words[pick(rng)];
    }
    auto ids = tokenize_greedy(v, text);
    CHECK(detokenize(v, ids) == text);
    CHECK(tokenize_greedy(v, text) == ids);
  }
}

TEST_CASE("never emits pad, eos or sentinel ids") {
  std::vector<std::string> tokens = {"<pad>", "</s>", "<unk>", "a", "b", kMarker + "a", "ab", "<x1>", "<x0>"};
  Vocabulary v(tokens, SpecialIds{0, 1, 2, 2});
  const std::vector<std::string> pieces = {"a", "b", "c", " ", "<pad>", "</s>", "<x0>", "<x1>", "\xC3\xA6", "\xE2\x96\x81", "\xFF"};
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(0, 16);
  for (int trial = 0; trial < 10000; ++trial) {
    std::string text;
    for (std::size_t i = len(rng); i > 0; --i) text += pieces[pick(rng)];
    for (TokenId id : tokenize_greedy(v, text)) {
      REQUIRE(id != v.pad_id());
      REQUIRE(id != v.eos_id());
      REQUIRE_FALSE(v.is_sentinel(id));
    }
  }
}

TEST_CASE("utf8 scalar length") {
  CHECK(utf8_scalar_length("a") == 1);
  CHECK(utf8_scalar_length("\xC3\xA6") == 2);
  CHECK(utf8_scalar_length(kMarker) == 3);
  CHECK(utf8_scalar_length("\xF0\x9F\x98\x80") == 4);
  CHECK(utf8_scalar_length("\xE2\x96") == 1);  // truncated
  CHECK(utf8_scalar_length("\x80") == 1);
}

}
