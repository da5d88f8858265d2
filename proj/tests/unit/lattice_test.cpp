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

#include "dynbft/lattice.hpp"

#include <gtest/gtest.h>

#include <random>

namespace dynbft::lattice {
namespace {

// Universe of four updates; a configuration is a 4-bit mask over it.
const std::vector<Update> kUniverse = {
    {Polarity::Add, "r1"}, {Polarity::Add, "r2"}, {Polarity::Remove, "r1"}, {Polarity::Add, "r3"}};

Configuration from_mask(unsigned mask) {
  std::vector<Update> ups;
  for (unsigned i = 0; i < kUniverse.size(); ++i)
    if (mask & (1u << i)) ups.push_back(kUniverse[i]);
  return Configuration(ups);
}

// Oracle: members are ids with an Add bit and no matching Remove bit.
std::set<std::string> oracle_members(unsigned mask) {
  std::set<std::string> adds, removes;
  for (unsigned i = 0; i < kUniverse.size(); ++i) {
    if (!(mask & (1u << i))) continue;
    (kUniverse[i].polarity == Polarity::Add ? adds : removes).insert(kUniverse[i].replica);
  }
  std::set<std::string> out;
  for (const auto& a : adds)
    if (!removes.contains(a)) out.insert(a);
  return out;
}

TEST(Configuration, JoinLeqExhaustive) {
  for (unsigned a = 0; a < 16; ++a) {
    for (unsigned b = 0; b < 16; ++b) {
      const auto ca = from_mask(a), cb = from_mask(b);
      EXPECT_EQ(ca.join(cb), from_mask(a | b)) << a << "," << b;
      EXPECT_EQ(ca.leq(cb), (a & ~b) == 0) << a << "," << b;
      EXPECT_EQ(ca == cb, a == b);
      EXPECT_EQ(ca.comparable(cb), (a & ~b) == 0 || (b & ~a) == 0);
    }
    const auto c = from_mask(a);
    EXPECT_EQ(c.height(), static_cast<std::size_t>(__builtin_popcount(a)));
    const auto members = oracle_members(a);
    EXPECT_EQ(std::set<std::string>(c.replicas().begin(), c.replicas().end()), members);
  }
}

TEST(Configuration, LatticeLaws) {
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = 0; b < 16; ++b)
      for (unsigned c = 0; c < 16; ++c) {
        const auto x = from_mask(a), y = from_mask(b), z = from_mask(c);
        EXPECT_EQ(x.join(y), y.join(x));
        EXPECT_EQ(x.join(y).join(z), x.join(y.join(z)));
        EXPECT_EQ(x.join(x), x);
        EXPECT_TRUE(x.leq(x.join(y)));
        if (x.leq(y) && y.leq(z)) {
          EXPECT_TRUE(x.leq(z));
        }
        if (x.leq(y) && y.leq(x)) {
          EXPECT_EQ(x, y);
        }
      }
}

TEST(Configuration, QuorumExhaustiveOverSevenReplicas) {
  std::vector<ProcessId> ids;
  for (int i = 1; i <= 7; ++i) ids.push_back("r" + std::to_string(i));
  const auto c = Configuration::of_replicas(ids);
  // Oracle: compare fractions in floating point with a margin; |S|/n > 2/3.
  for (unsigned mask = 0; mask < 128; ++mask) {
    ProcessSet s;
    for (int i = 0; i < 7; ++i)
      if (mask & (1u << i)) s.insert(ids[i]);
    const bool expected = static_cast<double>(s.size()) / 7.0 > 2.0 / 3.0 + 1e-12;
    EXPECT_EQ(c.is_quorum(s), expected) << mask;
  }
  EXPECT_EQ(c.quorum_size(), 5u);
  EXPECT_EQ(c.max_faulty(), 2u);
  EXPECT_FALSE(c.is_quorum({"r1", "r2", "r3", "r4", "x"}));
}

TEST(Configuration, QuorumSizeMatchesDefinition) {
  for (std::size_t n = 1; n <= 20; ++n) {
    std::vector<ProcessId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
    const auto c = Configuration::of_replicas(ids);
    std::size_t q = 0;
    while (!(3 * q > 2 * n)) ++q;
    EXPECT_EQ(c.quorum_size(), q);
    std::size_t b = 0;
    while (3 * (b + 1) + 1 <= n) ++b;
    EXPECT_EQ(c.max_faulty(), b);
  }
}

TEST(Configuration, RemovedReplicaNeverReturns) {
  Configuration c({{Polarity::Add, "a"}, {Polarity::Remove, "a"}});
  EXPECT_FALSE(c.is_member("a"));
  EXPECT_FALSE(c.join(Configuration::of_replicas({"a"})).is_member("a"));
  EXPECT_EQ(c.removed(), std::vector<ProcessId>{"a"});
}

TEST(Encoding, CanonicalAndRoundTrips) {
  for (unsigned a = 0; a < 16; ++a) {
    const LatticeValue v = from_mask(a);
    const auto bytes = canonical_bytes(v);
    EXPECT_EQ(bytes[0], kEncodingVersion);
    EXPECT_EQ(from_canonical_bytes(bytes), v);
  }
  // Insertion order does not matter.
  Configuration x({{Polarity::Add, "b"}, {Polarity::Add, "a"}});
  Configuration y({{Polarity::Add, "a"}, {Polarity::Add, "b"}, {Polarity::Add, "a"}});
  EXPECT_EQ(x.encode(), y.encode());

  const LatticeValue f = FinSet{5, 1, 9};
  EXPECT_EQ(from_canonical_bytes(canonical_bytes(f)), f);
  const LatticeValue h = HistValue({from_mask(1), from_mask(3)});
  EXPECT_EQ(from_canonical_bytes(canonical_bytes(h)), h);
}

TEST(Encoding, KnownBytes) {
  const LatticeValue v = FinSet{2};
  // version, tag, count=1, len=8, id=2
  EXPECT_EQ(to_hex(canonical_bytes(v)), "010100000001000000080000000000000002");
}

TEST(Encoding, RejectsMalformed) {
  auto bytes = canonical_bytes(LatticeValue{FinSet{1, 2}});
  EXPECT_THROW(from_canonical_bytes(ByteView(bytes.data(), bytes.size() - 1)), DecodeError);
  auto wrong_version = bytes;
  wrong_version[0] = 9;
  EXPECT_THROW(from_canonical_bytes(wrong_version), DecodeError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(from_canonical_bytes(trailing), DecodeError);

  // Out-of-order elements are rejected.
  Writer w;
  w.u8(kEncodingVersion).u8(static_cast<std::uint8_t>(Tag::FinSet)).u32(2);
  Writer e1, e2;
  e1.u64(2);
  e2.u64(1);
  w.bytes(e1.view()).bytes(e2.view());
  EXPECT_THROW(from_canonical_bytes(w.view()), DecodeError);
}

TEST(Lattice, MixedLatticesRejected) {
  EXPECT_THROW(join(LatticeValue{FinSet{1}}, LatticeValue{from_mask(1)}), std::invalid_argument);
  EXPECT_THROW(leq(LatticeValue{FinSet{1}}, LatticeValue{HistValue{}}), std::invalid_argument);
}

TEST(FinSetLattice, RandomAgainstStdSet) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    std::set<std::uint64_t> a, b;
    for (int i = 0; i < 5; ++i) {
      if (rng() % 2) a.insert(rng() % 8);
      if (rng() % 2) b.insert(rng() % 8);
    }
    FinSet fa(std::vector<std::uint64_t>(a.begin(), a.end()));
    FinSet fb(std::vector<std::uint64_t>(b.begin(), b.end()));
    std::set<std::uint64_t> u = a;
    u.insert(b.begin(), b.end());
    EXPECT_EQ(fa.join(fb).ids(), std::vector<std::uint64_t>(u.begin(), u.end()));
    EXPECT_EQ(fa.leq(fb), std::includes(b.begin(), b.end(), a.begin(), a.end()));
  }
}

TEST(HistoryTest, ValidationMatchesPairwiseComparability) {
  for (unsigned sel = 0; sel < (1u << 8); ++sel) {
    std::vector<Configuration> cs;
    std::vector<unsigned> masks;
    for (unsigned i = 0; i < 8; ++i)
      if (sel & (1u << i)) {
        cs.push_back(from_mask(i * 2 + 1));
        masks.push_back(i * 2 + 1);
      }
    bool chain = true;
    for (auto x : masks)
      for (auto y : masks)
        if ((x & ~y) && (y & ~x)) chain = false;
    auto h = History::make(cs);
    EXPECT_EQ(h.has_value(), chain) << sel;
    if (h && !h->empty()) {
      for (std::size_t i = 1; i < h->size(); ++i) EXPECT_TRUE(h->configs()[i - 1].lt(h->configs()[i]));
      for (const auto& c : cs) EXPECT_TRUE(c.leq(max_element(*h)));
      Writer w;
      h->encode(w);
      Reader r(w.view());
      EXPECT_EQ(History::decode(r), *h);
    }
  }
}

TEST(HistoryTest, SubsetAndMax) {
  auto h1 = *History::make({from_mask(1)});
  auto h2 = *History::make({from_mask(3), from_mask(1)});
  EXPECT_TRUE(h1.strict_subset_of(h2));
  EXPECT_FALSE(h2.subset_of(h1));
  EXPECT_EQ(max_element(h2), from_mask(3));
  EXPECT_THROW(max_element(History{}), std::invalid_argument);
}

}  // namespace
}  // namespace dynbft::lattice
