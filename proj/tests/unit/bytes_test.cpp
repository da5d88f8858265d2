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

#include "dynbft/bytes.hpp"

#include <gtest/gtest.h>

namespace dynbft {
namespace {

TEST(Bytes, WriterIsBigEndian) {
  Writer w;
  w.u8(0x01).u32(0x02030405).u64(0x060708090a0b0c0dULL);
  EXPECT_EQ(to_hex(w.view()), "0102030405060708090a0b0c0d");
}

TEST(Bytes, RoundTrip) {
  Writer w;
  w.u32(7).str("hello").bytes(Bytes{1, 2, 3}).u64(1ULL << 40);
  Reader r(w.view());
  EXPECT_EQ(r.u32(), 7u);
  EXPECT_EQ(r.str(), "hello");
  EXPECT_EQ(r.bytes(), (Bytes{1, 2, 3}));
  EXPECT_EQ(r.u64(), 1ULL << 40);
  EXPECT_TRUE(r.done());
}

TEST(Bytes, TruncatedInputThrows) {
  Writer w;
  w.str("abcdef");
  auto data = w.take();
  data.pop_back();
  Reader r(data);
  EXPECT_THROW(r.str(), DecodeError);
  Reader r2(ByteView(data.data(), 2));
  EXPECT_THROW(r2.u32(), DecodeError);
}

TEST(Bytes, HexRoundTrip) {
  Bytes b{0x00, 0xff, 0x10, 0xab};
  EXPECT_EQ(to_hex(b), "00ff10ab");
  EXPECT_EQ(from_hex("00ff10ab"), b);
  EXPECT_THROW(from_hex("abc"), DecodeError);
}

TEST(Bytes, Blake2bKnownAnswer) {
  // BLAKE2b-256 of the empty string.
  EXPECT_EQ(to_hex(hash(ByteView{})), "0e5751c026e543b2e8ab2eb06099daa1d1e5df47778f7787faab45cdf12fe3a8");
}

TEST(Bytes, KeyedHashDependsOnKey) {
  Bytes k1(32, 1), k2(32, 2);
  auto m = as_bytes("message");
  EXPECT_NE(keyed_hash(k1, m), keyed_hash(k2, m));
  EXPECT_EQ(keyed_hash(k1, m), keyed_hash(k1, m));
  EXPECT_NE(keyed_hash(k1, m), hash(m));
}

}  // namespace
}  // namespace dynbft
