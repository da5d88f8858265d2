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

#include "dynbft/access_control.hpp"

#include <gtest/gtest.h>

#include "dynbft/reconfig.hpp"

namespace dynbft {
namespace {

using reconfig::Deployment;
using reconfig::DeploymentSpec;

Bytes B(const std::string& s) { return Bytes(s.begin(), s.end()); }

struct Fixture {
  Fixture(std::uint64_t seed, ac::Mode mode, int replicas = 4)
      : sim({crypto::FsBackend::TrustedOracle, seed, 200000, wire::describe},
            std::make_unique<sim::SeededScheduler>(seed)),
        dep(sim, make_spec(mode, replicas)) {}

  static DeploymentSpec make_spec(ac::Mode mode, int replicas) {
    DeploymentSpec s;
    for (int i = 1; i <= replicas; ++i) s.initial.push_back("r" + std::to_string(i));
    s.clients = {"c1", "c2"};
    s.admins = {"a1", "a2", "a3", "a4"};
    s.data = reconfig::DataKind::None;
    s.reconfigurable = false;
    s.access_control = mode;
    s.conflicts.add(B("x"), B("y"));
    s.denied = {"bad"};
    return s;
  }

  std::vector<sim::json> results() const {
    std::vector<sim::json> out;
    for (const auto& e : sim.trace())
      if (e.kind == sim::EventKind::ClientReturn) out.push_back(e.detail["result"]);
    return out;
  }

  ac::AcCertificate cert_of(const sim::json& r) {
    return ac::AcCertificate::decode(*dep.verifier().store().get(from_hex(r["cert"].get<std::string>())));
  }

  sim::Simulator sim;
  Deployment dep;
};

class AcModes : public ::testing::TestWithParam<ac::Mode> {};

TEST_P(AcModes, HonestRequestVerifies) {
  Fixture f(1, GetParam());
  f.sim.invoke("c1", {1, "request", {"x"}});
  f.sim.run();
  const auto r = f.results().at(0);
  EXPECT_EQ(r["status"], "certified");
  EXPECT_TRUE(r["verified"].get<bool>());
  const auto cert = f.cert_of(r);
  EXPECT_TRUE(ac::verify_cert(f.dep.verifier(), f.dep.policy(), B("x"), cert.encode()));
  EXPECT_FALSE(ac::verify_cert(f.dep.verifier(), f.dep.policy(), B("z"), cert.encode()));
}

TEST_P(AcModes, DeniedValue) {
  Fixture f(2, GetParam());
  f.sim.invoke("c1", {1, "request", {"bad"}});
  EXPECT_EQ(f.sim.run(), sim::RunStatus::Quiescent);
  EXPECT_EQ(f.results().at(0)["status"], "denied");
}

TEST_P(AcModes, BelowThresholdFails) {
  Fixture f(3, GetParam());
  f.sim.invoke("c1", {1, "request", {"x"}});
  f.sim.run();
  auto cert = f.cert_of(f.results().at(0));
  if (cert.mode == ac::Mode::Admin) {
    // b + 1 = 2 of 4 administrators; keep one.
    while (cert.admin_sigs.size() > 1) cert.admin_sigs.erase(cert.admin_sigs.begin());
  } else {
    const auto& c = f.dep.c0();
    const std::size_t keep = cert.mode == ac::Mode::Quorum ? c.quorum_size() - 1 : c.max_faulty();
    while (cert.approvals.size() > keep) cert.approvals.erase(cert.approvals.begin());
  }
  EXPECT_FALSE(ac::verify_cert(f.dep.verifier(), f.dep.policy(), B("x"), cert.encode()));
}

INSTANTIATE_TEST_SUITE_P(All, AcModes, ::testing::Values(ac::Mode::Sanity, ac::Mode::Quorum, ac::Mode::Admin),
                         [](const auto& info) { return ac::to_string(info.param); });

TEST(AccessControl, QuorumBackendRefusesConflictAfterCertificate) {
  Fixture f(4, ac::Mode::Quorum);
  f.sim.invoke("c1", {1, "request", {"x"}});
  f.sim.run();
  f.sim.invoke("c2", {2, "request", {"y"}});
  f.sim.run();
  const auto rs = f.results();
  EXPECT_EQ(rs.at(0)["status"], "certified");
  EXPECT_EQ(rs.at(1)["status"], "denied");
}

TEST(AccessControl, QuorumBackendNeverCertifiesBothConcurrently) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Fixture f(seed, ac::Mode::Quorum);
    f.sim.invoke("c1", {1, "request", {"x"}});
    f.sim.invoke("c2", {2, "request", {"y"}});
    ASSERT_EQ(f.sim.run(), sim::RunStatus::Quiescent);
    int certified = 0;
    for (const auto& r : f.results())
      if (r["status"] == "certified" && r["verified"].get<bool>()) ++certified;
    EXPECT_LE(certified, 1) << seed;
  }
}

TEST(AccessControl, SanityBackendAllowsNonConflictingPair) {
  Fixture f(5, ac::Mode::Sanity);
  f.sim.invoke("c1", {1, "request", {"x"}});
  f.sim.invoke("c2", {2, "request", {"y"}});
  f.sim.run();
  for (const auto& r : f.results()) EXPECT_EQ(r["status"], "certified");
}

TEST(AccessControl, CertificateEncodingRoundTrip) {
  Fixture f(6, ac::Mode::Sanity);
  f.sim.invoke("c1", {1, "request", {"x"}});
  f.sim.run();
  const auto cert = f.cert_of(f.results().at(0));
  EXPECT_EQ(ac::AcCertificate::decode(cert.encode()).encode(), cert.encode());
  auto bytes = cert.encode();
  bytes.push_back(0);
  EXPECT_THROW(ac::AcCertificate::decode(bytes), DecodeError);
  EXPECT_FALSE(ac::verify_cert(f.dep.verifier(), f.dep.policy(), B("x"), bytes));
}

TEST(AccessControl, ModeNames) {
  for (auto m : {ac::Mode::Sanity, ac::Mode::Quorum, ac::Mode::Admin})
    EXPECT_EQ(ac::mode_from_string(ac::to_string(m)), m);
  EXPECT_THROW(ac::mode_from_string("none"), std::invalid_argument);
}

}  // namespace
}  // namespace dynbft
