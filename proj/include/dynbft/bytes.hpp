/*
 * Copyright (c) 2026, The dynbft Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DYNBFT_BYTES_HPP_
#define DYNBFT_BYTES_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dynbft {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

/// Raised by Reader on truncated or otherwise malformed input. Protocol
/// handlers catch it and drop the offending message.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Big-endian, length-prefixed writer used for every canonical encoding.
class Writer {
 public:
  Writer& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  Writer& u32(std::uint32_t v);
  Writer& u64(std::uint64_t v);
  /// u32 length followed by the raw bytes.
  Writer& bytes(ByteView v);
  Writer& str(std::string_view v);
  /// Appends without a length prefix.
  Writer& raw(ByteView v) {
    buf_.insert(buf_.end(), v.begin(), v.end());
    return *this;
  }

  const Bytes& view() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  Bytes bytes();
  std::string str();
  ByteView bytes_view();
  ByteView rest() const { return data_.subspan(pos_); }
  ByteView take_rest() {
    auto v = data_.subspan(pos_);
    pos_ = data_.size();
    return v;
  }

  bool done() const { return pos_ == data_.size(); }
  void expect_done() const {
    if (!done()) throw DecodeError("trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw DecodeError("truncated input");
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

/// BLAKE2b-256.
Digest hash(ByteView data);
/// Keyed BLAKE2b-256 (MAC).
Digest keyed_hash(ByteView key, ByteView data);

inline std::string hex_digest(ByteView data) {
  auto d = hash(data);
  return to_hex(d);
}

}  // namespace dynbft

#endif  // DYNBFT_BYTES_HPP_
