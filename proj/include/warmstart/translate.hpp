// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "warmstart/error.hpp"
#include "warmstart/vocab.hpp"

namespace warmstart {

enum class TranslationStatus { Translated, Failed };

/// When Failed, `text` is the normalized source token itself.
struct TranslationOutcome {
  TranslationStatus status = TranslationStatus::Failed;
  std::string text;

  static TranslationOutcome translated(std::string text) {
    return {TranslationStatus::Translated, std::move(text)};
  }
  static TranslationOutcome failed(std::string source) {
    return {TranslationStatus::Failed, std::move(source)};
  }
  bool ok() const noexcept { return status == TranslationStatus::Translated; }
  bool operator==(const TranslationOutcome&) const = default;
};

/// Strips one leading boundary marker; everything else (including case) is kept.
std::string normalize_token(std::string_view token, std::string_view marker = kBoundaryMarker);

/// False for strings made only of digits, punctuation, whitespace and markers.
bool needs_translation(std::string_view normalized, std::string_view marker = kBoundaryMarker);

// ---------------------------------------------------------------------------
// Providers

/// Batch in, one result per item out. std::nullopt marks a per-item failure;
/// throwing fails the whole batch.
class TranslationProvider {
public:
  virtual ~TranslationProvider() = default;

  virtual std::string name() const = 0;
  virtual std::vector<std::optional<std::string>> translate_batch(
      std::span<const std::string> texts) = 0;

  virtual std::size_t max_batch() const { return 1; }
  /// Concurrent translate_batch calls the adapter tolerates.
  virtual std::size_t max_in_flight() const { return 1; }
};

/// Looks translations up in a fixed dictionary. Dictionary files hold
/// `source<TAB>translation` lines; `#` starts a comment line.
class DictionaryProvider final : public TranslationProvider {
public:
  explicit DictionaryProvider(std::unordered_map<std::string, std::string> entries)
      : entries_(std::move(entries)) {}

  static DictionaryProvider from_file(const std::filesystem::path& path);

  std::string name() const override { return "dict"; }
  std::vector<std::optional<std::string>> translate_batch(
      std::span<const std::string> texts) override;
  std::size_t max_batch() const override { return 4096; }
  std::size_t max_in_flight() const override { return 8; }

private:
  std::unordered_map<std::string, std::string> entries_;
};

/// Never translates; every token falls back to its own text.
class IdentityProvider final : public TranslationProvider {
public:
  std::string name() const override { return "identity"; }
  std::vector<std::optional<std::string>> translate_batch(
      std::span<const std::string> texts) override {
    return std::vector<std::optional<std::string>>(texts.size());
  }
  std::size_t max_batch() const override { return 4096; }
  std::size_t max_in_flight() const override { return 8; }
};

/// Client for a batched machine-translation HTTP service.
///
/// Wire protocol: POST a JSON body
///   {"source": "<lang>", "target": "<lang>", "q": ["text", ...]}
/// and expect HTTP 200 with
///   {"translations": ["text" | null, ...]}
/// holding one element per query, in order. A null or empty element is a
/// per-item failure. Any other response (non-200, bad JSON, wrong length,
/// transport exception) is retried with exponential backoff; once retries are
/// exhausted every item of the batch fails.
class RemoteProvider final : public TranslationProvider {
public:
  struct Response {
    int status = 0;
    std::string body;
  };
  /// Sends one request body and returns the raw response. May throw.
  using Transport = std::function<Response(const std::string& body, std::chrono::milliseconds timeout)>;
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  struct Options {
    std::string url;  // http://host[:port]/path
    std::string source_lang = "da";
    std::string target_lang = "en";
    double rate_limit_per_s = 0.0;  // requests per second, 0 disables
    std::chrono::milliseconds timeout{10000};
    std::chrono::milliseconds initial_backoff{250};
    int max_retries = 3;
    std::size_t batch_size = 64;
    std::size_t in_flight = 1;
  };

  /// Uses an HTTP transport built from `options.url`.
  explicit RemoteProvider(Options options);
  RemoteProvider(Options options, Transport transport, Sleeper sleeper = {});

  std::string name() const override { return "remote"; }
  std::vector<std::optional<std::string>> translate_batch(
      std::span<const std::string> texts) override;
  std::size_t max_batch() const override { return options_.batch_size; }
  std::size_t max_in_flight() const override { return options_.in_flight; }

  /// Requests sent so far, retries included.
  std::size_t requests_sent() const;

  static std::string encode_request(const Options& options, std::span<const std::string> texts);
  /// Returns std::nullopt when the body is not a well-formed reply for `count` items.
  static std::optional<std::vector<std::optional<std::string>>> decode_response(
      std::string_view body, std::size_t count);

private:
  void throttle();

  Options options_;
  Transport transport_;
  Sleeper sleeper_;
  mutable std::mutex mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
  std::size_t requests_ = 0;
};

// ---------------------------------------------------------------------------
// Cache

struct TableEntry {
  TranslationOutcome outcome;
  std::string provider;
};

/// Thrown when a fetched outcome could not be written to the cache file. The
/// outcomes are already in the in-memory table and are also carried here.
class CachePersistError : public Error {
public:
  CachePersistError(const std::string& message,
                    std::vector<std::pair<std::string, TranslationOutcome>> undelivered)
      : Error(ErrorCode::CachePersist, message), undelivered_(std::move(undelivered)) {}

  const std::vector<std::pair<std::string, TranslationOutcome>>& undelivered() const noexcept {
    return undelivered_;
  }

private:
  std::vector<std::pair<std::string, TranslationOutcome>> undelivered_;
};

/// Normalized token -> outcome, with the provider that produced it.
///
/// Persisted form: one `token<TAB>OK|FAIL<TAB>text` record per line, with
/// backslash, tab, newline and carriage return escaped as \\ \t \n \r. When a
/// journal file is attached every insert is appended to it immediately, and
/// when reading a file a later record for the same token wins. Readers run
/// concurrently; fetches for the same key are serialized.
class TranslationTable {
public:
  TranslationTable();
  TranslationTable(TranslationTable&&) noexcept;
  TranslationTable& operator=(TranslationTable&&) noexcept;
  ~TranslationTable();

  static TranslationTable parse(std::string_view text);
  static TranslationTable load(const std::filesystem::path& path);

  /// Appends each subsequent insert to `path` (created if missing).
  void attach_journal(std::filesystem::path path);

  std::optional<TableEntry> find(std::string_view normalized) const;
  std::size_t size() const;
  std::vector<std::pair<std::string, TableEntry>> entries() const;

  /// Throws CachePersistError if the journal append fails; the entry is kept
  /// in memory either way.
  void insert(const std::string& normalized, TranslationOutcome outcome, std::string provider);

  /// Records sorted by token, so equal tables serialize to equal bytes.
  std::string serialize() const;
  /// Atomic rewrite through a temporary file.
  void save(const std::filesystem::path& path) const;

  /// Holds the per-key fetch lock for its lifetime.
  class KeyLock {
  public:
    KeyLock(const TranslationTable& table, std::string key);
    ~KeyLock();
    KeyLock(const KeyLock&) = delete;
    KeyLock& operator=(const KeyLock&) = delete;

  private:
    const TranslationTable& table_;
    std::string key_;
  };

private:
  struct Sync;

  std::map<std::string, TableEntry, std::less<>> entries_;
  std::optional<std::filesystem::path> journal_;
  std::unique_ptr<Sync> sync_;
};

struct FetchOptions {
  bool retry_failed = false;
  std::string boundary_marker = std::string(kBoundaryMarker);
};

/// Cache hit returns the stored outcome without touching the provider. A miss
/// (or a cached failure under retry_failed) queries the provider; any provider
/// error, timeout or empty answer becomes a Failed outcome, which is cached too.
TranslationOutcome lookup_or_fetch(TranslationTable& table, TranslationProvider& provider,
                                   std::string_view token, const FetchOptions& options = {});

struct FillStats {
  std::size_t requested = 0;  // distinct normalized tokens
  std::size_t cache_hits = 0;
  std::size_t bypassed = 0;
  std::size_t fetched = 0;
  std::size_t translated = 0;
  std::size_t failed = 0;
};

/// Batched lookup_or_fetch over many tokens, honouring the provider's batch
/// size and in-flight limit.
FillStats fill_table(TranslationTable& table, TranslationProvider& provider,
                     std::span<const std::string> tokens, const FetchOptions& options = {});

std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);

}  // namespace warmstart
