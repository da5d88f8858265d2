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

#include "dynbft/reconfig.hpp"

#include <gtest/gtest.h>

namespace dynbft {
namespace {

using lattice::Configuration;
using lattice::FinSet;
using lattice::Polarity;
using reconfig::Deployment;
using reconfig::DeploymentSpec;

struct Fixture {
  Fixture(std::uint64_t seed, DeploymentSpec spec)
      : sim({crypto::FsBackend::TrustedOracle, seed, 200000, wire::describe},
            std::make_unique<sim::SeededScheduler>(seed)),
        dep(sim, std::move(spec)) {}

  std::vector<sim::TraceEvent> events(const std::string& desc) const {
    std::vector<sim::TraceEvent> out;
    for (const auto& e : sim.trace())
      if (e.descriptor == desc) out.push_back(e);
    return out;
  }

  std::vector<sim::TraceEvent> returns(const std::string& op) const {
    std::vector<sim::TraceEvent> out;
    for (const auto& e : events(op))
      if (e.kind == sim::EventKind::ClientReturn) out.push_back(e);
    return out;
  }

  sim::Simulator sim;
  Deployment dep;
};

DeploymentSpec base_spec(reconfig::DataKind data) {
  DeploymentSpec s;
  s.initial = {"r1", "r2", "r3", "r4"};
  s.spares = {"r5", "r6", "r7"};
  s.clients = {"c1", "c2", "c3"};
  s.data = data;
  const auto c0 = Configuration::of_replicas(s.initial);
  s.configs["add5"] = reconfig::extend(c0, {{Polarity::Add, "r5"}});
  s.configs["add6"] = reconfig::extend(c0, {{Polarity::Add, "r6"}});
  s.configs["add7"] = reconfig::extend(c0, {{Polarity::Add, "r7"}});
  s.configs["drop1"] = reconfig::extend(c0, {{Polarity::Remove, "r1"}});
  return s;
}

TEST(Reconfig, SingleProposalInstallsEverywhere) {
  Fixture f(1, base_spec(reconfig::DataKind::Dbla));
  f.sim.invoke("c1", {1, "update-config", {"add5"}});
  ASSERT_EQ(f.sim.run(), sim::RunStatus::Quiescent);
  const auto target = f.dep.spec().configs.at("add5");
  for (const auto& r : {"r1", "r2", "r3", "r4", "r5"}) {
    auto& n = f.dep.node(r);
    EXPECT_EQ(n.highest(), target) << r;
    EXPECT_EQ(n.core().installed(), target) << r;
  }
  for (const auto& c : {"c1", "c2", "c3"}) EXPECT_EQ(f.dep.node(c).highest(), target);
  const auto ret = f.returns("update-config").back();
  EXPECT_EQ(ret.detail["result"]["status"], "ok");
}

TEST(Reconfig, StateCarriesIntoNewReplica) {
  Fixture f(2, base_spec(reconfig::DataKind::MaxReg));
  f.sim.invoke("c1", {1, "write", {"42"}});
  f.sim.run();
  f.sim.invoke("c2", {2, "update-config", {"add5"}});
  f.sim.run();
  auto* st = dynamic_cast<maxreg::MaxRegState*>(f.dep.node("r5").core().object(reconfig::kDataObject));
  ASSERT_NE(st, nullptr);
  EXPECT_EQ(st->cell().value, 42u);
  f.sim.invoke("c3", {3, "read", {}});
  f.sim.run();
  EXPECT_EQ(f.returns("read").back().detail["result"]["value"], 42);
}

TEST(Reconfig, ConcurrentProposalsStayComparable) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    Fixture f(seed, base_spec(reconfig::DataKind::Dbla));
    f.sim.invoke("c1", {1, "update-config", {"add5"}});
    f.sim.invoke("c2", {2, "update-config", {"add6"}});
    f.sim.invoke("c3", {3, "update-config", {"drop1"}});
    ASSERT_EQ(f.sim.run(), sim::RunStatus::Quiescent) << seed;
    std::vector<Configuration> installed;
    for (const auto& e : f.events("InstalledConfig"))
      installed.push_back(dyn::config_from_hex(e.detail["config_hex"].get<std::string>()));
    for (const auto& a : installed)
      for (const auto& b : installed) EXPECT_TRUE(a.comparable(b)) << seed;
    // Everyone ends on the join of all three proposals.
    const auto& cfgs = f.dep.spec().configs;
    const auto top = cfgs.at("add5").join(cfgs.at("add6")).join(cfgs.at("drop1"));
    for (const auto& r : {"r2", "r3", "r4", "r5", "r6"}) EXPECT_EQ(f.dep.node(r).core().installed(), top) << seed;
    EXPECT_EQ(f.returns("update-config").size(), 3u);
  }
}

TEST(Reconfig, ProposeAcrossReconfigurationStaysComparable) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    Fixture f(seed, base_spec(reconfig::DataKind::Dbla));
    f.sim.invoke("c1", {1, "update-config", {"add5"}});
    f.sim.invoke("c2", {2, "propose", {"1"}});
    f.sim.invoke("c3", {3, "propose", {"2"}});
    f.sim.invoke("c2", {4, "propose", {"3"}});
    ASSERT_EQ(f.sim.run(), sim::RunStatus::Quiescent) << seed;
    std::vector<FinSet> outs;
    for (const auto& e : f.returns("propose")) {
      EXPECT_TRUE(e.detail["result"]["verified"].get<bool>());
      outs.push_back(FinSet(e.detail["result"]["ids"].get<std::vector<std::uint64_t>>()));
    }
    ASSERT_EQ(outs.size(), 3u);
    for (const auto& a : outs)
      for (const auto& b : outs) EXPECT_TRUE(a.leq(b) || b.leq(a)) << seed;
  }
}

TEST(Reconfig, HistLaInputCheck) {
  Fixture f(3, base_spec(reconfig::DataKind::None));
  auto& v = f.dep.verifier();
  const auto c1 = f.dep.spec().configs.at("add5");
  // No confLA certificate behind the digest.
  EXPECT_FALSE(reconfig::histla_verify_input(v, {lattice::HistValue({c1}), Bytes(32, 0)}));
  // Two-element set.
  f.sim.invoke("c1", {1, "update-config", {"add5"}});
  f.sim.run();
  const auto& tau_bytes = f.dep.node("c1").history_cert();
  const auto hc = wire::HistoryCert::decode(tau_bytes);
  const auto* tau_h = v.store().get(hc.payload);
  ASSERT_NE(tau_h, nullptr);
  const auto tau = wire::OutputCertificate::from_bytes(*tau_h);
  // Every histLA input is a singleton backed by a confLA output.
  bool saw_non_genesis = false;
  for (const auto& [_, iv] : tau.values.items()) {
    if (is_genesis_input_cert(iv.cert)) continue;
    saw_non_genesis = true;
    EXPECT_TRUE(reconfig::histla_verify_input(v, iv));
    const auto* hv = std::get_if<lattice::HistValue>(&iv.value);
    ASSERT_NE(hv, nullptr);
    auto pair = lattice::HistValue({hv->configs().front(), f.dep.c0()});
    EXPECT_FALSE(reconfig::histla_verify_input(v, {pair, iv.cert}));
    // The certificate does not cover a different configuration.
    EXPECT_FALSE(reconfig::histla_verify_input(v, {lattice::HistValue({f.dep.spec().configs.at("add6")}), iv.cert}));
  }
  EXPECT_TRUE(saw_non_genesis);
  // A hand-built incomparable set is not a history.
  EXPECT_FALSE(lattice::History::make({f.dep.c0(), c1, f.dep.spec().configs.at("add6")}).has_value());
}

TEST(Reconfig, AccessControlledProposal) {
  for (auto auth : {reconfig::ConfigAuth::Sanity, reconfig::ConfigAuth::Quorum, reconfig::ConfigAuth::Admin,
                    reconfig::ConfigAuth::Client}) {
    auto spec = base_spec(reconfig::DataKind::None);
    spec.auth = auth;
    spec.admins = {"a1", "a2", "a3", "a4"};
    spec.denied = {"add6"};
    Fixture f(4, spec);
    f.sim.invoke("c1", {1, "update-config", {"add5"}});
    f.sim.invoke("c2", {2, "update-config", {"add6"}});
    ASSERT_EQ(f.sim.run(), sim::RunStatus::Quiescent);
    const auto rs = f.returns("update-config");
    ASSERT_EQ(rs.size(), 2u);
    for (const auto& e : rs) {
      const auto& res = e.detail["result"];
      if (res["name"] == "add5") EXPECT_EQ(res["status"], "ok") << reconfig::to_string(auth);
      // Client-signed inputs bypass the deny list.
      if (res["name"] == "add6" && auth != reconfig::ConfigAuth::Client)
        EXPECT_EQ(res["status"], "denied") << reconfig::to_string(auth);
    }
    const auto& cfgs = f.dep.spec().configs;
    const auto expected =
        auth == reconfig::ConfigAuth::Client ? cfgs.at("add5").join(cfgs.at("add6")) : cfgs.at("add5");
    EXPECT_EQ(f.dep.node("r1").core().installed(), expected) << reconfig::to_string(auth);
  }
}

}  // namespace
}  // namespace dynbft
