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

#include "dynbft/fscrypto.hpp"

#include <gtest/gtest.h>

namespace dynbft::crypto {
namespace {

class FsSchemeTest : public ::testing::TestWithParam<FsBackend> {
 protected:
  std::unique_ptr<FsScheme> scheme_ = make_fs_scheme(GetParam(), 42);
};

TEST_P(FsSchemeTest, SignVerify) {
  auto m = as_bytes("hello");
  auto s = scheme_->fs_sign("r1", m, 3);
  ASSERT_TRUE(s);
  EXPECT_TRUE(scheme_->fs_verify(m, "r1", *s, 3));
  EXPECT_FALSE(scheme_->fs_verify(as_bytes("hellp"), "r1", *s, 3));
  EXPECT_FALSE(scheme_->fs_verify(m, "r2", *s, 3));
  EXPECT_FALSE(scheme_->fs_verify(m, "r1", *s, 4));
  auto tampered = *s;
  tampered.bytes[0] ^= 1;
  EXPECT_FALSE(scheme_->fs_verify(m, "r1", tampered, 3));
}

TEST_P(FsSchemeTest, UpdateRefusesOlderTimestamps) {
  auto m = as_bytes("x");
  EXPECT_EQ(scheme_->key_timestamp("r1"), 0u);
  scheme_->update_fs_keys("r1", 5);
  EXPECT_EQ(scheme_->key_timestamp("r1"), 5u);
  for (Timestamp t = 0; t < 5; ++t) EXPECT_FALSE(scheme_->fs_sign("r1", m, t)) << t;
  EXPECT_TRUE(scheme_->fs_sign("r1", m, 5));
  EXPECT_TRUE(scheme_->fs_sign("r1", m, 9));
  // Never moves backwards.
  scheme_->update_fs_keys("r1", 2);
  EXPECT_EQ(scheme_->key_timestamp("r1"), 5u);
  // Other processes are unaffected.
  EXPECT_TRUE(scheme_->fs_sign("r2", m, 0));
}

TEST_P(FsSchemeTest, SignaturesBeforeUpdateStillVerify) {
  auto m = as_bytes("old");
  auto s = scheme_->fs_sign("r1", m, 1);
  ASSERT_TRUE(s);
  scheme_->update_fs_keys("r1", 10);
  EXPECT_TRUE(scheme_->fs_verify(m, "r1", *s, 1));
}

TEST_P(FsSchemeTest, TimestampBound) {
  EXPECT_FALSE(scheme_->fs_sign("r1", as_bytes("x"), kMaxTimestamp));
  EXPECT_TRUE(scheme_->fs_sign("r1", as_bytes("x"), kMaxTimestamp - 1));
}

TEST_P(FsSchemeTest, LedgerRecordsIssuance) {
  std::uint64_t clock = 17;
  scheme_->set_clock([&] { return clock; });
  auto m = as_bytes("m");
  scheme_->fs_sign("r1", m, 2);
  ASSERT_EQ(scheme_->ledger().size(), 1u);
  const auto& rec = scheme_->ledger()[0];
  EXPECT_EQ(rec.signer, "r1");
  EXPECT_EQ(rec.timestamp, 2u);
  EXPECT_EQ(rec.message, hash(m));
  EXPECT_EQ(rec.step, 17u);
}

TEST_P(FsSchemeTest, SignatureEncodingRoundTrip) {
  auto s = *scheme_->fs_sign("r7", as_bytes("z"), 4);
  Writer w;
  s.encode(w);
  Reader r(w.view());
  EXPECT_EQ(FsSignature::decode(r), s);
}

INSTANTIATE_TEST_SUITE_P(Backends, FsSchemeTest, ::testing::Values(FsBackend::TrustedOracle, FsBackend::KeyChain),
                         [](const auto& info) { return to_string(info.param); });

TEST(TrustedOracleTest, UnissuedMacRejected) {
  TrustedOracle a(1), b(1);
  auto s = *a.fs_sign("r1", as_bytes("m"), 0);
  // Same key, but b never issued the signature.
  EXPECT_FALSE(b.fs_verify(as_bytes("m"), "r1", s, 0));
  b.restore(a.ledger());
  EXPECT_TRUE(b.fs_verify(as_bytes("m"), "r1", s, 0));
}

TEST(KeyChainTest, DifferentSeedsDifferentKeys) {
  KeyChain a(1), b(2);
  auto s = *a.fs_sign("r1", as_bytes("m"), 0);
  EXPECT_FALSE(b.fs_verify(as_bytes("m"), "r1", s, 0));
}

TEST(PlainSchemeTest, SignVerify) {
  PlainScheme p(3);
  auto sig = p.plain_sign("c1", as_bytes("cert"));
  EXPECT_TRUE(p.plain_verify(as_bytes("cert"), "c1", sig));
  EXPECT_FALSE(p.plain_verify(as_bytes("cert"), "c2", sig));
  EXPECT_FALSE(p.plain_verify(as_bytes("cerx"), "c1", sig));
  PlainScheme q(3);
  EXPECT_FALSE(q.plain_verify(as_bytes("cert"), "c1", sig));
}

TEST(Backend, NamesRoundTrip) {
  EXPECT_EQ(fs_backend_from_string(to_string(FsBackend::KeyChain)), FsBackend::KeyChain);
  EXPECT_EQ(fs_backend_from_string("oracle"), FsBackend::TrustedOracle);
  EXPECT_THROW(fs_backend_from_string("rsa"), std::invalid_argument);
}

}  // namespace
}  // namespace dynbft::crypto
