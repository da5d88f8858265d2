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

#include "dynbft/dbla.hpp"

#include <gtest/gtest.h>

#include "dynbft/maxreg.hpp"

namespace dynbft {
namespace {

using lattice::Configuration;
using lattice::FinSet;

constexpr std::uint8_t kObj = 3;

// Four static replicas, a few clients, client-signed inputs.
struct StaticFixture {
  explicit StaticFixture(std::uint64_t seed, bool maxreg = false, int clients = 2)
      : sim({crypto::FsBackend::TrustedOracle, seed, 200000, wire::describe},
            std::make_unique<sim::SeededScheduler>(seed)) {
    std::vector<std::string> reps{"r1", "r2", "r3", "r4"};
    c0 = Configuration::of_replicas(reps);
    verifier = std::make_shared<Verifier>(sim.fs(), sim.plain(), c0);
    verifier->set_input_check(kObj, [](Verifier& v, const wire::InputValue& iv) {
      return check_client_input_cert(v.plain(), kObj, iv);
    });
    for (const auto& r : reps) {
      auto node = std::make_unique<dyn::Node>(verifier, true);
      if (maxreg) {
        node->core().add_object(std::make_unique<maxreg::MaxRegState>(kObj));
      } else {
        node->core().add_object(std::make_unique<dbla::DblaState>(kObj));
      }
      sim.spawn(r, std::move(node));
    }
    for (int i = 1; i <= clients; ++i) {
      const auto id = "c" + std::to_string(i);
      auto node = std::make_unique<dyn::Node>(verifier, false);
      if (maxreg) {
        node->add_client(std::make_shared<maxreg::MaxRegClient>(*node, kObj));
      } else {
        node->add_client(std::make_shared<dbla::DblaClient>(*node, kObj, std::nullopt, true));
      }
      sim.spawn(id, std::move(node));
    }
  }

  std::vector<sim::json> results(const std::string& op) const {
    std::vector<sim::json> out;
    for (const auto& e : sim.trace())
      if (e.kind == sim::EventKind::ClientReturn && e.descriptor == op) out.push_back(e.detail["result"]);
    return out;
  }

  sim::Simulator sim;
  Configuration c0;
  std::shared_ptr<Verifier> verifier;
};

FinSet ids_of(const sim::json& result) { return FinSet(result["ids"].get<std::vector<std::uint64_t>>()); }

TEST(Dbla, SingleProposeReturnsItsValue) {
  StaticFixture f(1, false, 1);
  f.sim.invoke("c1", {1, "propose", {"7"}});
  EXPECT_EQ(f.sim.run(), sim::RunStatus::Quiescent);
  const auto rs = f.results("propose");
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(ids_of(rs[0]), FinSet({7}));
  EXPECT_TRUE(rs[0]["verified"].get<bool>());
}

TEST(Dbla, ConcurrentProposesAreComparable) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    StaticFixture f(seed, false, 3);
    f.sim.invoke("c1", {1, "propose", {"1"}});
    f.sim.invoke("c2", {2, "propose", {"2"}});
    f.sim.invoke("c3", {3, "propose", {"3"}});
    ASSERT_EQ(f.sim.run(), sim::RunStatus::Quiescent);
    const auto rs = f.results("propose");
    ASSERT_EQ(rs.size(), 3u) << seed;
    for (const auto& a : rs) {
      EXPECT_TRUE(a["verified"].get<bool>());
      for (const auto& b : rs) {
        const auto x = ids_of(a), y = ids_of(b);
        EXPECT_TRUE(x.leq(y) || y.leq(x)) << seed;
      }
    }
  }
}

TEST(Dbla, CertificateTamperingFailsVerification) {
  StaticFixture f(3, false, 1);
  f.sim.invoke("c1", {1, "propose", {"5"}});
  f.sim.run();
  const auto r = f.results("propose").at(0);
  const auto bytes = f.verifier->store().get(from_hex(r["cert"].get<std::string>()));
  ASSERT_NE(bytes, nullptr);
  auto tau = wire::OutputCertificate::from_bytes(*bytes);
  const lattice::LatticeValue w = FinSet({5});
  EXPECT_TRUE(dbla::verify_output_value(*f.verifier, kObj, w, tau));
  EXPECT_FALSE(dbla::verify_output_value(*f.verifier, kObj, FinSet({5, 6}), tau));

  // Shrink each ack map to a sub-quorum.
  auto fewer = tau;
  while (fewer.propose_acks.size() > 2) fewer.propose_acks.erase(fewer.propose_acks.begin());
  EXPECT_FALSE(dbla::verify_output_value(*f.verifier, kObj, w, fewer));
  fewer = tau;
  while (fewer.confirm_acks.size() > 2) fewer.confirm_acks.erase(fewer.confirm_acks.begin());
  EXPECT_FALSE(dbla::verify_output_value(*f.verifier, kObj, w, fewer));

  // A swapped signature no longer matches its signer.
  auto swapped = tau;
  auto it = swapped.propose_acks.begin();
  auto jt = std::next(it);
  std::swap(it->second, jt->second);
  EXPECT_FALSE(dbla::verify_output_value(*f.verifier, kObj, w, swapped));
}

TEST(Dbla, ReplicaRejectsStaleConfirmAfterKeyUpdate) {
  StaticFixture f(4, false, 1);
  // Keys past height(C0) cannot sign for C0 any more.
  f.sim.fs().update_fs_keys("r1", f.c0.height() + 1);
  EXPECT_FALSE(f.sim.fs().fs_sign("r1", as_bytes("x"), f.c0.height()).has_value());
}

TEST(MaxReg, ReadAfterWriteReturnsAtLeastTheWrite) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    StaticFixture f(seed, true, 2);
    f.sim.invoke("c1", {1, "write", {"9"}});
    f.sim.invoke("c1", {2, "read", {}});
    f.sim.invoke("c2", {3, "read", {}});
    ASSERT_EQ(f.sim.run(), sim::RunStatus::Quiescent);
    auto reads = f.results("read");
    ASSERT_EQ(reads.size(), 2u);
    // c1's read follows its own write.
    std::uint64_t c1_read = 0;
    for (const auto& e : f.sim.trace())
      if (e.kind == sim::EventKind::ClientReturn && e.descriptor == "read" && e.from == "c1")
        c1_read = e.detail["result"]["value"].get<std::uint64_t>();
    EXPECT_EQ(c1_read, 9u);
    const auto other = reads[0]["value"].get<std::uint64_t>() + reads[1]["value"].get<std::uint64_t>() - c1_read;
    EXPECT_TRUE(other == 0 || other == 9);
  }
}

TEST(MaxReg, FreshReadReturnsBottom) {
  StaticFixture f(2, true, 1);
  f.sim.invoke("c1", {1, "read", {}});
  f.sim.run();
  EXPECT_EQ(f.results("read").at(0)["value"].get<std::uint64_t>(), 0u);
}

TEST(MaxReg, SmallerSetLeavesCellUnchanged) {
  StaticFixture f(5, true, 1);
  f.sim.invoke("c1", {1, "write", {"9"}});
  f.sim.invoke("c1", {2, "write", {"4"}});
  f.sim.invoke("c1", {3, "read", {}});
  f.sim.run();
  EXPECT_EQ(f.results("write").size(), 2u);
  EXPECT_EQ(f.results("read").at(0)["value"].get<std::uint64_t>(), 9u);
  for (const auto& r : {"r1", "r2", "r3", "r4"}) {
    auto& node = dynamic_cast<dyn::Node&>(f.sim.automaton(r));
    const auto* st = dynamic_cast<maxreg::MaxRegState*>(node.core().object(kObj));
    EXPECT_LE(st->cell().value, 9u);
  }
}

TEST(MaxReg, CellVerification) {
  StaticFixture f(6, true, 1);
  EXPECT_TRUE(maxreg::verify_cell(*f.verifier, kObj, maxreg::Cell{0, {}}));
  EXPECT_FALSE(maxreg::verify_cell(*f.verifier, kObj, maxreg::Cell{0, Bytes{1, 2, 3}}));
  EXPECT_FALSE(maxreg::verify_cell(*f.verifier, kObj, maxreg::Cell{3, {}}));
  const lattice::LatticeValue v = FinSet{3};
  const auto sig = f.sim.plain().plain_sign("c1", client_input_statement(kObj, v));
  EXPECT_TRUE(maxreg::verify_cell(*f.verifier, kObj, {3, client_input_cert("c1", sig)}));
  EXPECT_FALSE(maxreg::verify_cell(*f.verifier, kObj, {4, client_input_cert("c1", sig)}));
}

}  // namespace
}  // namespace dynbft
