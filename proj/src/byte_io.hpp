// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

// Little-endian primitives shared by the binary file formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "warmstart/error.hpp"

namespace warmstart::io {

template <typename T>
T byteswap_if_big(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <typename T>
void put(std::ostream& out, T value) {
  value = byteswap_if_big(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, std::span<const T> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (T v : values) put(out, v);
  }
}

template <typename T>
T get(std::istream& in, std::string_view what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorCode::CorruptFile, "truncated file while reading " + std::string(what));
  }
  return byteswap_if_big(value);
}

template <typename T>
void get_array(std::istream& in, std::span<T> values, std::string_view what) {
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()))) {
    throw Error(ErrorCode::CorruptFile, "truncated file while reading " + std::string(what));
  }
  if constexpr (std::endian::native != std::endian::little) {
    for (T& v : values) v = byteswap_if_big(v);
  }
}

inline void expect_magic(std::istream& in, std::string_view magic, const std::string& file) {
  char buf[4] = {};
  if (!in.read(buf, 4) || std::string_view(buf, 4) != magic) {
    throw Error(ErrorCode::CorruptFile,
                file + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

}  // namespace warmstart::io
