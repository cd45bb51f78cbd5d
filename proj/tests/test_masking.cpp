// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "test_util.hpp"
#include "warmstart/masking.hpp"

using namespace warmstart;
using namespace warmstart::testing;

namespace {

Vocabulary sized_vocab(std::size_t size, std::uint32_t sentinels) {
  std::vector<std::string> tokens = {"<pad>", "</s>", "<unk>"};
  for (std::size_t i = 3; i < size; ++i) tokens.push_back("t" + std::to_string(i));
  return Vocabulary(tokens, SpecialIds{0, 1, 2, sentinels});
}

std::uint64_t as_bits(const std::vector<Span>& spans) {
  std::uint64_t bits = 0;
  for (const auto& s : spans) {
    for (auto p = s.start; p < s.end(); ++p) bits |= 1ULL << p;
  }
  return bits;
}

/// Every mask of `len` with position 0 clear, `masked` set bits and `runs` runs.
std::set<std::uint64_t> enumerate_layouts(std::size_t len, std::size_t masked, std::size_t runs) {
  std::set<std::uint64_t> out;
  for (std::uint64_t bits = 0; bits < (1ULL << len); bits += 2) {
    if (static_cast<std::size_t>(__builtin_popcountll(bits)) != masked) continue;
    std::size_t count = 0;
    for (std::size_t p = 0; p < len; ++p) {
      if ((bits >> p & 1) && (p == 0 || !(bits >> (p - 1) & 1))) ++count;
    }
    if (count == runs) out.insert(bits);
  }
  return out;
}

}  // namespace

TEST_SUITE("masking") {

TEST_CASE("mask counts") {
  CHECK(mask_counts(512, {}) == MaskCounts{77, 26});
  CHECK(mask_counts(3, {}) == MaskCounts{1, 1});
  CHECK(mask_counts(512, {0.15, 3.0, MaskMode::Iid}) == MaskCounts{77, 77});
  CHECK(mask_counts(2, {0.99, 1.0, MaskMode::Span}) == MaskCounts{1, 1});
  CHECK_THROWS_AS(mask_counts(1, {}), Error);
  CHECK_THROWS_AS(mask_counts(10, {0.0, 3.0, MaskMode::Span}), Error);
  CHECK_THROWS_AS(mask_counts(10, {1.0, 3.0, MaskMode::Span}), Error);
  CHECK_THROWS_AS(mask_counts(10, {0.15, 0.5, MaskMode::Span}), Error);
}

TEST_CASE("span and iid modes mask the same number of positions") {
  for (std::size_t len = 2; len < 600; ++len) {
    for (double rate : {0.05, 0.15, 0.5, 0.9}) {
      auto span = mask_counts(len, {rate, 3.0, MaskMode::Span});
      auto iid = mask_counts(len, {rate, 3.0, MaskMode::Iid});
      CHECK(span.num_masked == iid.num_masked);
      auto expected = std::clamp<long long>(std::llround(rate * len), 1, static_cast<long long>(len) - 1);
      CHECK(span.num_masked == static_cast<std::size_t>(expected));
    }
  }
}

TEST_CASE("draw_mask is a pure function of the key") {
  MaskSpec spec;
  MaskKey key{42, 3, 17};
  CHECK(draw_mask(512, spec, key) == draw_mask(512, spec, key));
  CHECK(mask_stream_seed(key) == mask_stream_seed(key));
  CHECK(mask_stream_seed({1, 0, 0}) != mask_stream_seed({0, 1, 0}));
  CHECK(mask_stream_seed({0, 1, 0}) != mask_stream_seed({0, 0, 1}));
}

TEST_CASE("masks are valid and exact") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3000; ++trial) {
    std::size_t len = 2 + rng() % 600;
    MaskSpec spec{0.01 + (rng() % 90) / 100.0, 1.0 + (rng() % 50) / 10.0,
                  rng() % 4 == 0 ? MaskMode::Iid : MaskMode::Span};
    auto counts = mask_counts(len, spec);
    auto spans = draw_mask(len, spec, {rng(), rng() % 10, rng() % 1000});
    REQUIRE(spans_valid(len, spans));
    CHECK(spans.front().start >= 1);
    std::size_t masked = 0;
    for (const auto& s : spans) masked += s.length;
    CHECK(masked == counts.num_masked);
    CHECK(spans.size() == std::min(counts.num_spans, len - counts.num_masked));
    if (spec.mode == MaskMode::Iid && spans.size() == masked) {
      for (const auto& s : spans) CHECK(s.length == 1);
    }
  }
}

TEST_CASE("infeasible geometry reduces the run count") {
  // Three masked positions in a length-4 sequence fit as a single run only.
  auto spans = draw_mask(4, {0.75, 1.0, MaskMode::Iid}, {1, 0, 0});
  CHECK(spans == std::vector<Span>{{1, 3}});
  auto two = draw_mask(4, {0.5, 1.0, MaskMode::Iid}, {1, 0, 0});
  CHECK(two == std::vector<Span>{{1, 1}, {3, 1}});
  auto forced = draw_mask(10, {0.2, 2.0, MaskMode::Span}, {9, 9, 9});
  REQUIRE(forced.size() == 1);
  CHECK(forced[0].length == 2);
  CHECK(spans_valid(10, forced));
}

TEST_CASE("layouts are drawn uniformly") {
  struct Case {
    std::size_t len;
    MaskSpec spec;
  };
  for (auto c : {Case{8, {0.25, 1.0, MaskMode::Span}}, Case{8, {0.25, 2.0, MaskMode::Span}},
                 Case{12, {0.25, 1.5, MaskMode::Span}}, Case{10, {0.5, 1.0, MaskMode::Iid}}}) {
    auto counts = mask_counts(c.len, c.spec);
    auto runs = std::min(counts.num_spans, c.len - counts.num_masked);
    auto layouts = enumerate_layouts(c.len, counts.num_masked, runs);
    REQUIRE(!layouts.empty());
    const int draws = 400 * static_cast<int>(layouts.size());
    std::map<std::uint64_t, int> seen;
    for (int i = 0; i < draws; ++i) ++seen[as_bits(draw_mask(c.len, c.spec, {7, 0, static_cast<std::uint64_t>(i)}))];
    CHECK(seen.size() == layouts.size());
    double chi2 = 0;
    for (auto bits : layouts) {
      double diff = seen[bits] - 400.0;
      chi2 += diff * diff / 400.0;
    }
    // Far above the 99.99th percentile of chi-square for these degrees of freedom.
    const double dof = static_cast<double>(layouts.size() - 1);
    CHECK(chi2 < dof + 8.0 * std::sqrt(2.0 * dof) + 10.0);
  }
}

TEST_CASE("epochs give different masks") {
  MaskSpec spec;
  int differing = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    auto a = draw_mask(512, spec, {1, 0, static_cast<std::uint64_t>(i)});
    auto b = draw_mask(512, spec, {1, 1, static_cast<std::uint64_t>(i)});
    if (a != b) ++differing;
  }
  CHECK(differing >= 0.999 * trials);
}

TEST_CASE("span corruption examples") {
  auto v = sized_vocab(30, 3);
  REQUIRE(v.sentinel_id(0) == 29);
  std::vector<TokenId> seq = {11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  std::vector<Span> spans = {{3, 2}, {8, 1}};
  auto ex = apply_span_corruption(seq, spans, v);
  CHECK(ex.input_ids == std::vector<TokenId>{11, 12, 13, 29, 16, 17, 18, 28, 20, 1});
  CHECK(ex.target_ids == std::vector<TokenId>{29, 14, 15, 28, 19, 27, 1});

  std::vector<TokenId> small = {5, 6, 7};
  std::vector<Span> one = {{1, 1}};
  auto ex2 = apply_span_corruption(small, one, v);
  CHECK(ex2.input_ids == std::vector<TokenId>{5, 29, 7, 1});
  CHECK(ex2.target_ids == std::vector<TokenId>{29, 6, 27, 1});
}

TEST_CASE("span corruption rejects bad input") {
  auto v = sized_vocab(30, 3);
  std::vector<TokenId> seq = {5, 6, 7, 8, 9, 10, 11};
  CHECK_THROWS_AS(apply_span_corruption(seq, std::vector<Span>{}, v), Error);
  CHECK_THROWS_AS(apply_span_corruption(seq, std::vector<Span>{{1, 2}, {3, 1}}, v), Error);  // adjacent
  CHECK_THROWS_AS(apply_span_corruption(seq, std::vector<Span>{{6, 2}}, v), Error);          // past the end
  try {
    apply_span_corruption(seq, std::vector<Span>{{1, 1}, {3, 1}, {5, 1}}, v);
    FAIL("expected SentinelBudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SentinelBudgetExceeded);
  }
}

TEST_CASE("reconstruction and sentinel order") {
  auto v = sized_vocab(200, 100);
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<TokenId> seq(2 + rng() % 300);
    for (auto& id : seq) id = 3 + static_cast<TokenId>(rng() % 97);
    MaskSpec spec{0.15, 3.0, trial % 5 == 0 ? MaskMode::Iid : MaskMode::Span};
    auto spans = draw_mask(seq.size(), spec, {rng(), 0, static_cast<std::uint64_t>(trial)});
    if (spans.size() + 1 > v.sentinel_count()) continue;
    auto ex = apply_span_corruption(seq, spans, v);
    REQUIRE(reconstruct(ex, v) == seq);
    CHECK(ex.input_ids.back() == v.eos_id());
    CHECK(ex.target_ids.back() == v.eos_id());
    CHECK(ex.target_ids.front() == v.sentinel_id(0));
    TokenId last = std::numeric_limits<TokenId>::max();
    for (TokenId id : ex.input_ids) {
      if (!v.is_sentinel(id)) continue;
      CHECK(id < last);
      last = id;
    }
  }
}

}
