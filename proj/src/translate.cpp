// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/translate.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

namespace warmstart {

std::string normalize_token(std::string_view token, std::string_view marker) {
  if (!marker.empty() && token.starts_with(marker)) token.remove_prefix(marker.size());
  return std::string(token);
}

bool needs_translation(std::string_view normalized, std::string_view marker) {
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    auto rest = normalized.substr(pos);
    if (!marker.empty() && rest.starts_with(marker)) {
      pos += marker.size();
      continue;
    }
    auto byte = static_cast<unsigned char>(rest[0]);
    if (byte < 0x80) {
      if (!(std::isdigit(byte) || std::ispunct(byte) || std::isspace(byte))) return true;
      ++pos;
      continue;
    }
    // U+2000..U+206F general punctuation counts as punctuation; any other
    // non-ASCII scalar is assumed to carry meaning.
    std::size_t len = utf8_scalar_length(rest);
    if (len == 3 && byte == 0xE2 && (static_cast<unsigned char>(rest[1]) == 0x80 ||
                                     static_cast<unsigned char>(rest[1]) == 0x81)) {
      pos += len;
      continue;
    }
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

DictionaryProvider DictionaryProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open dictionary file " + path.string());
  std::unordered_map<std::string, std::string> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::CorruptFile, path.string() + ":" + std::to_string(lineno) +
                                              ": expected source<TAB>translation");
    }
    entries[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return DictionaryProvider(std::move(entries));
}

std::vector<std::optional<std::string>> DictionaryProvider::translate_batch(
    std::span<const std::string> texts) {
  std::vector<std::optional<std::string>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    auto it = entries_.find(text);
    if (it == entries_.end()) out.emplace_back();
    else out.emplace_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\' || i + 1 == text.size()) {
      out.push_back(text[i]);
      continue;
    }
    switch (text[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      default:
        out.push_back('\\');
        out.push_back(text[i]);
    }
  }
  return out;
}

struct TranslationTable::Sync {
  mutable std::shared_mutex rw;
  std::mutex journal;
  std::mutex inflight_mutex;
  std::condition_variable inflight_cv;
  std::set<std::string, std::less<>> inflight;
};

TranslationTable::TranslationTable() : sync_(std::make_unique<Sync>()) {}
TranslationTable::TranslationTable(TranslationTable&&) noexcept = default;
TranslationTable& TranslationTable::operator=(TranslationTable&&) noexcept = default;
TranslationTable::~TranslationTable() = default;

namespace {

std::string record_line(const std::string& key, const TranslationOutcome& outcome) {
  std::string line = escape_field(key);
  line += outcome.ok() ? "\tOK\t" : "\tFAIL\t";
  line += escape_field(outcome.text);
  line += '\n';
  return line;
}

}  // namespace

TranslationTable TranslationTable::parse(std::string_view text) {
  TranslationTable table;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.empty()) continue;

    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos) {
      throw Error(ErrorCode::CorruptFile,
                  "translation cache line " + std::to_string(lineno) + ": expected 3 fields");
    }
    auto status = line.substr(t1 + 1, t2 - t1 - 1);
    TranslationOutcome outcome;
    if (status == "OK") outcome.status = TranslationStatus::Translated;
    else if (status == "FAIL") outcome.status = TranslationStatus::Failed;
    else {
      throw Error(ErrorCode::CorruptFile, "translation cache line " + std::to_string(lineno) +
                                              ": bad status \"" + std::string(status) + "\"");
    }
    outcome.text = unescape_field(line.substr(t2 + 1));
    table.entries_[unescape_field(line.substr(0, t1))] = TableEntry{std::move(outcome), "cache"};
  }
  return table;
}

TranslationTable TranslationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open translation cache " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void TranslationTable::attach_journal(std::filesystem::path path) {
  std::lock_guard lock(sync_->journal);
  journal_ = std::move(path);
}

std::optional<TableEntry> TranslationTable::find(std::string_view normalized) const {
  std::shared_lock lock(sync_->rw);
  auto it = entries_.find(normalized);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t TranslationTable::size() const {
  std::shared_lock lock(sync_->rw);
  return entries_.size();
}

std::vector<std::pair<std::string, TableEntry>> TranslationTable::entries() const {
  std::shared_lock lock(sync_->rw);
  return {entries_.begin(), entries_.end()};
}

void TranslationTable::insert(const std::string& normalized, TranslationOutcome outcome,
                              std::string provider) {
  const std::string line = record_line(normalized, outcome);
  {
    std::unique_lock lock(sync_->rw);
    entries_[normalized] = TableEntry{outcome, std::move(provider)};
  }
  std::lock_guard lock(sync_->journal);
  if (!journal_) return;
  std::ofstream out(*journal_, std::ios::binary | std::ios::app);
  if (out) {
    out << line;
    out.flush();
  }
  if (!out) {
    throw CachePersistError("cannot append to translation cache " + journal_->string(),
                            {{normalized, std::move(outcome)}});
  }
}

std::string TranslationTable::serialize() const {
  std::shared_lock lock(sync_->rw);
  std::string out;
  for (const auto& [key, entry] : entries_) out += record_line(key, entry.outcome);
  return out;
}

void TranslationTable::save(const std::filesystem::path& path) const {
  const std::string text = serialize();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "cannot write translation cache " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace " + path.string() + ": " + ec.message());
}

TranslationTable::KeyLock::KeyLock(const TranslationTable& table, std::string key)
    : table_(table), key_(std::move(key)) {
  auto& sync = *table_.sync_;
  std::unique_lock lock(sync.inflight_mutex);
  sync.inflight_cv.wait(lock, [&] { return !sync.inflight.contains(key_); });
  sync.inflight.insert(key_);
}

TranslationTable::KeyLock::~KeyLock() {
  auto& sync = *table_.sync_;
  {
    std::lock_guard lock(sync.inflight_mutex);
    sync.inflight.erase(key_);
  }
  sync.inflight_cv.notify_all();
}

// ---------------------------------------------------------------------------

namespace {

bool cached_is_final(const std::optional<TableEntry>& entry, const FetchOptions& options) {
  return entry && !(options.retry_failed && !entry->outcome.ok() && entry->provider != "bypass");
}

TranslationOutcome to_outcome(const std::optional<std::string>& answer, const std::string& source) {
  if (answer && !answer->empty()) return TranslationOutcome::translated(*answer);
  return TranslationOutcome::failed(source);
}

}  // namespace

TranslationOutcome lookup_or_fetch(TranslationTable& table, TranslationProvider& provider,
                                   std::string_view token, const FetchOptions& options) {
  std::string key = normalize_token(token, options.boundary_marker);
  TranslationTable::KeyLock guard(table, key);

  auto cached = table.find(key);
  if (!needs_translation(key, options.boundary_marker)) {
    if (cached) return cached->outcome;
    auto outcome = TranslationOutcome::failed(key);
    table.insert(key, outcome, "bypass");
    return outcome;
  }
  if (cached_is_final(cached, options)) return cached->outcome;

  TranslationOutcome outcome;
  try {
    const std::string query[] = {key};
    auto answers = provider.translate_batch(query);
    outcome = answers.size() == 1 ? to_outcome(answers[0], key) : TranslationOutcome::failed(key);
  } catch (const std::exception&) {
    outcome = TranslationOutcome::failed(key);
  }
  table.insert(key, outcome, provider.name());
  return outcome;
}

FillStats fill_table(TranslationTable& table, TranslationProvider& provider,
                     std::span<const std::string> tokens, const FetchOptions& options) {
  FillStats stats;
  std::set<std::string> distinct;
  for (const auto& token : tokens) distinct.insert(normalize_token(token, options.boundary_marker));
  stats.requested = distinct.size();

  std::vector<std::pair<std::string, TranslationOutcome>> undelivered;
  auto record = [&](const std::string& key, TranslationOutcome outcome, std::string name) {
    try {
      table.insert(key, std::move(outcome), std::move(name));
    } catch (const CachePersistError& e) {
      undelivered.insert(undelivered.end(), e.undelivered().begin(), e.undelivered().end());
    }
  };

  std::vector<std::string> misses;
  for (const auto& key : distinct) {
    auto cached = table.find(key);
    if (!needs_translation(key, options.boundary_marker)) {
      ++stats.bypassed;
      if (!cached) record(key, TranslationOutcome::failed(key), "bypass");
      continue;
    }
    if (cached_is_final(cached, options)) {
      ++stats.cache_hits;
      continue;
    }
    misses.push_back(key);
  }

  const std::size_t batch = std::max<std::size_t>(1, provider.max_batch());
  const std::size_t chunks = (misses.size() + batch - 1) / batch;
  std::vector<std::vector<TranslationOutcome>> results(chunks);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      auto first = misses.begin() + static_cast<std::ptrdiff_t>(c * batch);
      auto last = misses.begin() + static_cast<std::ptrdiff_t>(std::min(misses.size(), (c + 1) * batch));
      std::span<const std::string> queries(&*first, static_cast<std::size_t>(last - first));
      std::vector<std::optional<std::string>> answers;
      try {
        answers = provider.translate_batch(queries);
      } catch (const std::exception&) {
        answers.clear();
      }
      if (answers.size() != queries.size()) answers.assign(queries.size(), std::nullopt);
      auto& out = results[c];
      for (std::size_t i = 0; i < queries.size(); ++i) out.push_back(to_outcome(answers[i], queries[i]));
    }
  };

  const std::size_t threads = std::min(chunks, std::max<std::size_t>(1, provider.max_in_flight()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Inserted in key order so the journal is deterministic.
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t i = 0; i < results[c].size(); ++i) {
      auto& outcome = results[c][i];
      ++stats.fetched;
      ++(outcome.ok() ? stats.translated : stats.failed);
      record(misses[c * batch + i], std::move(outcome), provider.name());
    }
  }

  if (!undelivered.empty()) {
    throw CachePersistError(std::to_string(undelivered.size()) +
                                " translation(s) could not be written to the cache file",
                            std::move(undelivered));
  }
  return stats;
}

}  // namespace warmstart
