// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "test_util.hpp"
#include "warmstart/transplant.hpp"

using namespace warmstart;
using namespace warmstart::testing;

namespace {

EmbeddingMatrix toy_embedding() {
  std::vector<float> data;
  for (int r = 0; r < 10; ++r) {
    if (r == 6) data.insert(data.end(), {1.0f, 0.0f, 3.0f});
    else if (r == 7) data.insert(data.end(), {3.0f, 2.0f, 1.0f});
    else data.insert(data.end(), {static_cast<float>(r), -static_cast<float>(r), 0.5f * r});
  }
  return EmbeddingMatrix(10, 3, std::move(data));
}

Vocabulary danish_vocab() {
  return Vocabulary({"<pad>", "</s>", "<unk>", kMarker + "doktor", kMarker + "Aarhus", kMarker + "v\xC3\xA6rsgo",
                     kMarker + "dokumentet", "2022"},
                    SpecialIds{0, 1, 2, 0});
}

DictionaryProvider danish_dictionary() {
  return DictionaryProvider({{"doktor", "doctor"}, {"dokumentet", "the document"}, {"v\xC3\xA6rsgo", "here you go"}});
}

std::vector<float> row_vec(const EmbeddingMatrix& m, std::size_t r) {
  auto row = m.row(r);
  return {row.begin(), row.end()};
}

}  // namespace

TEST_SUITE("transplant") {

TEST_CASE("map_token examples") {
  auto src = toy_vocab();
  CHECK(map_token(kMarker + "doktor", TranslationOutcome::translated("doctor"), src) == std::vector<TokenId>{6, 7});
  CHECK(map_token(kMarker + "v\xC3\xA6rsgo", TranslationOutcome::translated("here you go"), src) ==
        std::vector<TokenId>{3, 4, 5});
  CHECK(map_token(kMarker + "\xCE\xB6\xCE\xB6", TranslationOutcome::failed("\xCE\xB6\xCE\xB6"), src) ==
        std::vector<TokenId>{2});
  CHECK(map_token(kMarker + "dokumentet", TranslationOutcome::translated("the document"), src) ==
        std::vector<TokenId>{8, 9});
  CHECK(map_token(kMarker + "Aarhus", TranslationOutcome::failed("Aarhus"), src) == std::vector<TokenId>{2});
  // Failed continuation pieces are matched without a leading marker.
  CHECK(map_token("tor", TranslationOutcome::failed("tor"), src) == std::vector<TokenId>{7});
  CHECK(map_token(kMarker + "go", TranslationOutcome::failed("go"), src) == std::vector<TokenId>{5});
}

TEST_CASE("multi-piece rows are the mean of the source rows") {
  auto src = toy_vocab();
  auto tgt = danish_vocab();
  auto emb = toy_embedding();
  TranslationTable table;
  auto dict = danish_dictionary();
  std::vector<std::string> tokens(tgt.tokens().begin() + 3, tgt.tokens().end());
  fill_table(table, dict, tokens);

  auto [out, report] = transplant(emb, src, tgt, table);
  CHECK(out.rows() == tgt.size());
  CHECK(out.dim() == 3);
  CHECK(row_vec(out, 3) == std::vector<float>{2.0f, 1.0f, 2.0f});
  CHECK(row_vec(out, 4) == row_vec(emb, 2));  // Aarhus falls back to <unk>
  CHECK(row_vec(out, 5) == std::vector<float>{4.0f, -4.0f, 2.0f});  // mean of rows 3, 4, 5
  CHECK(row_vec(out, 6) == std::vector<float>{8.5f, -8.5f, 4.25f});  // mean of rows 8, 9
  for (TokenId s = 0; s < 3; ++s) CHECK(row_vec(out, s) == row_vec(emb, s));

  CHECK(report.total_tokens == 8);
  CHECK(report.specials_copied == 3);
  CHECK(report.translated_count == 3);
  CHECK(report.failed_count == 1);
  CHECK(report.bypassed_count == 1);
  CHECK(report.translated_count + report.failed_count + report.bypassed_count + report.specials_copied ==
        report.total_tokens);
  CHECK(report.unk_only_count == 2);  // Aarhus and 2022
  CHECK(report.total_pieces == 2 + 1 + 3 + 2 + 1);
  CHECK(report.mean_pieces_per_token == Rational::of(9, 5));
}

TEST_CASE("identity transplant reproduces the source exactly") {
  std::vector<std::string> tokens = toy_tokens();
  tokens.push_back("<extra_id_1>");
  tokens.push_back("<extra_id_0>");
  Vocabulary v(tokens, SpecialIds{0, 1, 2, 2});
  std::mt19937_64 rng(11);
  std::normal_distribution<float> normal;
  std::vector<float> data(v.size() * 5);
  for (auto& x : data) x = normal(rng);
  EmbeddingMatrix emb(v.size(), 5, data);

  TranslationTable table;
  IdentityProvider identity;
  fill_table(table, identity, v.tokens());
  auto [out, report] = transplant(emb, v, v, table);
  CHECK(out.bit_equal(emb));
  CHECK(report.specials_copied == 5);
  CHECK(report.single_piece_count == v.size() - 5);
}

TEST_CASE("specials and sentinels are copied by role") {
  Vocabulary src({"<unk>", "<pad>", "</s>", "a", "b", "<s1>", "<s0>"}, SpecialIds{1, 2, 0, 2});
  Vocabulary tgt({"<pad>", "</s>", "<unk>", "x", "<s0>"}, SpecialIds{0, 1, 2, 1});
  EmbeddingMatrix emb(7, 1, {10, 11, 12, 13, 14, 15, 16});
  TranslationTable table;
  table.insert("x", TranslationOutcome::translated("a"), "t");
  auto [out, report] = transplant(emb, src, tgt, table);
  CHECK(out.row(0)[0] == 11);  // pad
  CHECK(out.row(1)[0] == 12);  // eos
  CHECK(out.row(2)[0] == 10);  // unk
  CHECK(out.row(4)[0] == 16);  // sentinel 0
  CHECK(report.specials_copied == 4);
}

TEST_CASE("transplant error cases") {
  auto src = toy_vocab();
  auto tgt = danish_vocab();
  TranslationTable empty;
  SUBCASE("row count must match the source vocabulary") {
    EmbeddingMatrix wrong(9, 3);
    CHECK_THROWS_AS(transplant(wrong, src, tgt, empty), Error);
    try {
      transplant(wrong, src, tgt, empty);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }
  SUBCASE("missing table entry") {
    try {
      transplant(toy_embedding(), src, tgt, empty);
      FAIL("expected MissingTranslation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingTranslation);
    }
  }
  SUBCASE("target needs more sentinels than the source has") {
    Vocabulary with_sentinel({"<pad>", "</s>", "<unk>", "x", "<s0>"}, SpecialIds{0, 1, 2, 1});
    try {
      transplant(toy_embedding(), src, with_sentinel, empty);
      FAIL("expected SentinelMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SentinelMismatch);
    }
  }
}

TEST_CASE("random transplants match the brute-force mean oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = random_transplant_case(rng);
    auto [out, report] = transplant(c.emb, c.src, c.tgt, c.table);
    REQUIRE(out.all_finite());
    for (TokenId t = 0; t < c.tgt.size(); ++t) {
      if (c.tgt.is_special(t)) continue;
      auto key = normalize_token(c.tgt.token(t));
      std::optional<TranslationOutcome> outcome;
      if (auto e = c.table.find(key)) outcome = e->outcome;
      auto pieces = oracle_pieces(c.src, c.tgt.token(t), outcome);
      CHECK(map_token(c.tgt.token(t), outcome.value_or(TranslationOutcome::failed(key)), c.src) == pieces);

      auto row = out.row(t);
      double row_norm = 0, max_norm = 0;
      for (std::size_t j = 0; j < c.emb.dim(); ++j) {
        long double sum = 0;
        float lo = INFINITY, hi = -INFINITY;
        for (TokenId p : pieces) {
          sum += c.emb.row(p)[j];
          lo = std::min(lo, c.emb.row(p)[j]);
          hi = std::max(hi, c.emb.row(p)[j]);
        }
        if (pieces.size() == 1) CHECK(row[j] == c.emb.row(pieces[0])[j]);
        CHECK(row[j] >= lo);
        CHECK(row[j] <= hi);
        CHECK(std::abs(static_cast<long double>(row[j]) - sum / pieces.size()) <= 1e-6L * (1 + std::abs(sum)));
        row_norm += static_cast<double>(row[j]) * row[j];
      }
      for (TokenId p : pieces) {
        double n = 0;
        for (float x : c.emb.row(p)) n += static_cast<double>(x) * x;
        max_norm = std::max(max_norm, n);
      }
      CHECK(std::sqrt(row_norm) <= std::sqrt(max_norm) * (1 + 1e-6));
    }
  }
}

TEST_CASE("permuting target tokens permutes output rows") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = random_transplant_case(rng);
    auto tokens = c.tgt.tokens();
    // Shuffle the regular tokens, keeping special ids in place.
    std::vector<std::size_t> regular;
    for (TokenId t = 0; t < c.tgt.size(); ++t) {
      if (!c.tgt.is_special(t)) regular.push_back(t);
    }
    auto shuffled = regular;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto permuted_tokens = tokens;
    for (std::size_t i = 0; i < regular.size(); ++i) permuted_tokens[shuffled[i]] = tokens[regular[i]];
    Vocabulary permuted(permuted_tokens, c.tgt.specials());

    auto a = transplant(c.emb, c.src, c.tgt, c.table).embeddings;
    auto b = transplant(c.emb, c.src, permuted, c.table).embeddings;
    for (std::size_t i = 0; i < regular.size(); ++i) {
      CHECK(row_vec(a, regular[i]) == row_vec(b, shuffled[i]));
    }
  }
}

TEST_CASE("EMBT files") {
  TempDir dir;
  auto emb = toy_embedding();
  write_embeddings(emb, dir / "e.embt");
  auto bytes = read_bytes(dir / "e.embt");
  REQUIRE(bytes.size() == 16 + 10 * 3 * 4);
  CHECK(bytes.substr(0, 4) == "EMBT");
  CHECK(bytes.substr(4, 4) == std::string("\x01\x00\x00\x00", 4));
  CHECK(bytes.substr(8, 4) == std::string("\x0A\x00\x00\x00", 4));
  CHECK(bytes.substr(12, 4) == std::string("\x03\x00\x00\x00", 4));
  CHECK(read_embeddings(dir / "e.embt").bit_equal(emb));

  auto expect_code = [&](const std::string& content, ErrorCode code) {
    write_text(dir / "bad.embt", content);
    try {
      read_embeddings(dir / "bad.embt");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };
  expect_code("XXXX", ErrorCode::CorruptFile);
  expect_code(bytes.substr(0, bytes.size() - 1), ErrorCode::CorruptFile);
  expect_code(bytes + "x", ErrorCode::CorruptFile);
  auto nan = bytes;
  nan.replace(16, 4, std::string("\x00\x00\xC0\x7F", 4));
  expect_code(nan, ErrorCode::CorruptFile);
  CHECK_THROWS_AS(read_embeddings(dir / "missing.embt"), Error);
}

}
