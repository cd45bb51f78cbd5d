// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "warmstart/translate.hpp"

namespace warmstart {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host:port
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorCode::InvalidArgument, "remote provider needs an http:// url, got \"" + url + "\"");
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/translate"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

RemoteProvider::Transport http_transport(const std::string& url) {
  auto parsed = split_url(url);
  return [parsed](const std::string& body, std::chrono::milliseconds timeout) {
    httplib::Client client(parsed.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto result = client.Post(parsed.path, body, "application/json");
    if (!result) {
      throw Error(ErrorCode::Io, "translation request failed: " + httplib::to_string(result.error()));
    }
    return RemoteProvider::Response{result->status, result->body};
  };
}

}  // namespace

RemoteProvider::RemoteProvider(Options options)
    : RemoteProvider(options, http_transport(options.url)) {}

RemoteProvider::RemoteProvider(Options options, Transport transport, Sleeper sleeper)
    : options_(std::move(options)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (options_.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be positive");
  if (options_.in_flight == 0) options_.in_flight = 1;
}

std::size_t RemoteProvider::requests_sent() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::string RemoteProvider::encode_request(const Options& options,
                                           std::span<const std::string> texts) {
  nlohmann::json body;
  body["source"] = options.source_lang;
  body["target"] = options.target_lang;
  body["q"] = nlohmann::json::array();
  for (const auto& text : texts) body["q"].push_back(text);
  return body.dump();
}

std::optional<std::vector<std::optional<std::string>>> RemoteProvider::decode_response(
    std::string_view body, std::size_t count) {
  auto parsed = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
  auto it = parsed.find("translations");
  if (it == parsed.end() || !it->is_array() || it->size() != count) return std::nullopt;

  std::vector<std::optional<std::string>> out;
  out.reserve(count);
  for (const auto& item : *it) {
    if (item.is_string() && !item.get_ref<const std::string&>().empty()) {
      out.emplace_back(item.get<std::string>());
    } else {
      out.emplace_back();
    }
  }
  return out;
}

void RemoteProvider::throttle() {
  if (options_.rate_limit_per_s <= 0.0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options_.rate_limit_per_s));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  auto wait = slot - std::chrono::steady_clock::now();
  if (wait > std::chrono::steady_clock::duration::zero()) {
    sleeper_(std::chrono::ceil<std::chrono::milliseconds>(wait));
  }
}

std::vector<std::optional<std::string>> RemoteProvider::translate_batch(
    std::span<const std::string> texts) {
  if (texts.empty()) return {};
  const std::string body = encode_request(options_, texts);
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleeper_(backoff);
      backoff *= 2;
    }
    throttle();
    {
      std::lock_guard lock(mutex_);
      ++requests_;
    }
    try {
      auto response = transport_(body, options_.timeout);
      if (response.status == 200) {
        if (auto decoded = decode_response(response.body, texts.size())) return *decoded;
      }
    } catch (const std::exception&) {
      // retried below
    }
  }
  return std::vector<std::optional<std::string>>(texts.size());
}

}  // namespace warmstart
