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

#include <gtest/gtest.h>

#include "dynbft/harness/attacks.hpp"
#include "dynbft/harness/harness.hpp"

namespace dynbft::harness {
namespace {

const char* kTwoProposes = R"(scenario 1
name two
object dbla
replicas r1 r2 r3 r4
clients c1 c2
at 0 c1 propose 1
at 0 c2 propose 2
)";

const char* kMaxReg = R"(scenario 1
name mr
object maxreg
reconfig on
replicas r1 r2 r3 r4
spares r5
clients c1 c2 c3
config add5 +r5
at 0 c1 write 4 as w
at 0 c3 update-config add5
after w c2 read
)";

std::string pass_list(const RunReport& r) {
  std::string out;
  for (const auto& i : r.invariants)
    if (!i.pass) out += i.name + ": " + i.message + "\n";
  return out;
}

// Re-serialises a trace after an edit so that only the semantic check, not
// the hash, can notice it.
Trace rehash(Trace t) {
  t.footer["trace_hash"] = compute_trace_hash(t);
  return t;
}

sim::TraceEvent* find_return(Trace& t, const std::string& op) {
  for (auto& e : t.events)
    if (e.kind == sim::EventKind::ClientReturn && e.descriptor == op) return &e;
  return nullptr;
}

TEST(Harness, EmptyScheduleIsVacuous) {
  const auto s = scenario::parse("scenario 1\nname empty\nobject dbla\nreplicas r1 r2 r3 r4\nclients c1\n");
  const auto r = run(s, 1);
  EXPECT_EQ(r.status, "quiescent");
  EXPECT_EQ(r.metrics.steps, 0u);
  EXPECT_TRUE(r.ok()) << pass_list(r);
}

TEST(Harness, TwoConcurrentProposes) {
  const auto s = scenario::parse(kTwoProposes);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run(s, seed);
    EXPECT_TRUE(r.ok()) << pass_list(r);
    EXPECT_TRUE(r.liveness());
    EXPECT_EQ(r.find("bla-comparability")->checked, 1u);
    EXPECT_EQ(r.metrics.returned, 2u);
  }
}

TEST(Harness, DeterministicPerSeed) {
  const auto s = scenario::parse(kMaxReg);
  const auto a = execute(s, 7), b = execute(s, 7), c = execute(s, 8);
  EXPECT_EQ(to_jsonl(a.trace), to_jsonl(b.trace));
  EXPECT_NE(a.trace.footer["trace_hash"], c.trace.footer["trace_hash"]);
  const auto ra = check(a.trace), rc = check(c.trace);
  EXPECT_EQ(ra.ok(), rc.ok());
  EXPECT_TRUE(ra.ok()) << pass_list(ra);
}

TEST(Harness, TraceRoundTripAndReplay) {
  const auto s = scenario::parse(kMaxReg);
  const auto exec = execute(s, 3);
  const auto text = to_jsonl(exec.trace);
  const auto back = parse_trace(text);
  EXPECT_EQ(to_jsonl(back), text);
  EXPECT_EQ(check(back).to_json(), check(exec.trace).to_json());
  std::string hash;
  EXPECT_TRUE(replay(back, &hash));
  EXPECT_EQ(hash, exec.trace.footer["trace_hash"]);
}

TEST(Harness, TamperedTraceIsFlagged) {
  const auto s = scenario::parse(kTwoProposes);
  auto t = execute(s, 2).trace;
  t.events[3].descriptor = "Forged";
  const auto r = check(t);
  EXPECT_FALSE(r.find("trace-integrity")->pass);
  EXPECT_FALSE(replay(t));
}

TEST(Harness, MalformedTraces) {
  EXPECT_THROW(parse_trace(""), TraceError);
  EXPECT_THROW(parse_trace("{\"type\":\"event\"}\n"), TraceError);
  EXPECT_THROW(parse_trace("not json\n"), TraceError);
  const auto s = scenario::parse(kTwoProposes);
  auto text = to_jsonl(execute(s, 2).trace);
  EXPECT_THROW(parse_trace(text.substr(0, text.rfind("{\"messages_sent\""))), TraceError);
  // Removing an event breaks dense step numbering.
  const auto first = text.find('\n') + 1;
  const auto second = text.find('\n', first) + 1;
  EXPECT_THROW(parse_trace(text.substr(0, first) + text.substr(second)), TraceError);
}

TEST(Checker, IncomparableOutputs) {
  auto t = execute(scenario::parse(kTwoProposes), 1).trace;
  for (auto& e : t.events)
    if (e.kind == sim::EventKind::ClientReturn) e.detail["result"]["ids"] = std::vector<std::uint64_t>{e.from == "c1" ? 1u : 2u};
  const auto r = check(rehash(t));
  EXPECT_TRUE(r.find("trace-integrity")->pass);
  EXPECT_FALSE(r.find("bla-comparability")->pass);
}

TEST(Checker, InvalidAndUnverifiedOutputs) {
  auto t = execute(scenario::parse(kTwoProposes), 1).trace;
  auto* e = find_return(t, "propose");
  ASSERT_NE(e, nullptr);
  e->detail["result"]["ids"] = std::vector<std::uint64_t>{1, 2, 77};
  auto r = check(rehash(t));
  EXPECT_FALSE(r.find("bla-validity")->pass);
  e->detail["result"]["verified"] = false;
  r = check(rehash(t));
  EXPECT_FALSE(r.find("bla-verifiability")->pass);
}

TEST(Checker, StaleRead) {
  auto t = execute(scenario::parse(kMaxReg), 1).trace;
  auto* e = find_return(t, "read");
  ASSERT_NE(e, nullptr);
  e->detail["result"]["value"] = 0;
  const auto r = check(rehash(t));
  EXPECT_FALSE(r.find("mr-atomicity")->pass);
  EXPECT_TRUE(r.find("mr-validity")->pass);
  e->detail["result"]["value"] = 5;
  EXPECT_FALSE(check(rehash(t)).find("mr-validity")->pass);
}

TEST(Checker, LedgerBelowKeyTimestamp) {
  auto t = execute(scenario::parse(kMaxReg), 1).trace;
  const auto before = check(t);
  ASSERT_TRUE(before.ok()) << pass_list(before);
  ASSERT_GT(before.metrics.installs, 0u);
  // Pretend an old-configuration signature was issued after every key update.
  for (auto& rec : t.ledger)
    if (rec.kind == crypto::SchemeKind::Fs && rec.timestamp == 4) {
      rec.step = t.events.size();
      break;
    }
  EXPECT_FALSE(check(rehash(t)).find("fs-ledger")->pass);
}

TEST(Checker, LivenessAtStepCap) {
  RunOptions o;
  o.max_steps = 10;
  const auto r = run(scenario::parse(kMaxReg), 1, o);
  EXPECT_EQ(r.status, "step-cap");
  EXPECT_FALSE(r.liveness());
  EXPECT_FALSE(r.ok());
}

TEST(Checker, TentativeAndKeyUpdateOnForgedInstall) {
  auto t = execute(scenario::parse(kMaxReg), 1).trace;
  // An install recorded at the very start precedes every key update and
  // every history that contains it.
  for (auto& e : t.events)
    if (e.kind == sim::EventKind::Upcall && e.descriptor == "InstalledConfig") {
      auto moved = e;
      t.events.erase(t.events.begin() + static_cast<std::ptrdiff_t>(e.step));
      moved.statuses = t.events.front().statuses;
      t.events.insert(t.events.begin() + 1, moved);
      break;
    }
  for (std::size_t i = 0; i < t.events.size(); ++i) t.events[i].step = i;
  const auto r = check(rehash(t));
  EXPECT_FALSE(r.find("tentative-never-installed")->pass);
  EXPECT_FALSE(r.find("key-update")->pass);
}

TEST(Checker, ConflictingCertificates) {
  const auto s = scenario::parse(R"(scenario 1
name ac
object none
ac quorum
replicas r1 r2 r3 r4
clients c1 c2
conflict a b
at 0 c1 request a
at 0 c2 request b
)");
  auto t = execute(s, 4).trace;
  EXPECT_TRUE(check(t).ok());
  for (auto& e : t.events)
    if (e.kind == sim::EventKind::ClientReturn) {
      e.detail["result"]["status"] = "certified";
      e.detail["result"]["verified"] = true;
    }
  EXPECT_FALSE(check(rehash(t)).find("ac-at-most-one")->pass);
}

TEST(Checker, SanitySignerMustBeCorrect) {
  const auto s = scenario::parse(R"(scenario 1
name sanity
object none
ac sanity
replicas r1 r2 r3 r4
clients c1
at 0 c1 request v
)");
  auto t = execute(s, 2).trace;
  auto r = check(t);
  ASSERT_TRUE(r.ok()) << pass_list(r);
  EXPECT_EQ(r.find("ac-sanity-signer")->checked, 1u);
  for (auto& e : t.events) std::fill(e.statuses.begin(), e.statuses.begin() + 4, 'B');
  EXPECT_FALSE(check(rehash(t)).find("ac-sanity-signer")->pass);
}

TEST(Checker, ForgedCertificateNote) {
  auto t = execute(scenario::parse(kTwoProposes), 1).trace;
  t.events.push_back({t.events.size(), sim::EventKind::AdversaryAction, "", "", "forge", "", t.events.back().statuses,
                      {{"verified", true}, {"anchor_hex", "00"}}});
  t.footer["steps"] = t.events.size();
  EXPECT_FALSE(check(rehash(t)).find("forged-certificates")->pass);
}

TEST(Harness, KeyChainBackend) {
  RunOptions o;
  o.backend = crypto::FsBackend::KeyChain;
  const auto r = run(scenario::parse(kMaxReg), 5, o);
  EXPECT_TRUE(r.ok()) << pass_list(r);
}

TEST(Harness, InvalidScenarioIsRejected) {
  const auto s = scenario::parse(std::string(kTwoProposes) + "at 0 halt r1\nat 0 halt r2\n");
  EXPECT_THROW(execute(s, 1), scenario::ScenarioError);
}

struct AttackCase {
  Attack attack;
  reconfig::DataKind object;
};

class Attacks : public ::testing::TestWithParam<AttackCase> {};

TEST_P(Attacks, DefeatedAndControl) {
  const auto [a, obj] = GetParam();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = run_attack(a, obj, seed);
    EXPECT_TRUE(r.pass) << r.verdict << "\n" << r.report.summary();
    RunOptions control;
    control.adversary = false;
    const auto c = run_attack(a, obj, seed, control);
    EXPECT_TRUE(c.pass) << c.verdict << "\n" << c.report.summary();
  }
}

INSTANTIATE_TEST_SUITE_P(All, Attacks,
                         ::testing::Values(AttackCase{Attack::IStillWorkHere, reconfig::DataKind::Dbla},
                                           AttackCase{Attack::IStillWorkHere, reconfig::DataKind::MaxReg},
                                           AttackCase{Attack::SlowReader, reconfig::DataKind::Dbla},
                                           AttackCase{Attack::SlowReader, reconfig::DataKind::MaxReg}));

TEST(AttackNames, RoundTrip) {
  EXPECT_EQ(attack_from_string(to_string(Attack::SlowReader)), Attack::SlowReader);
  EXPECT_THROW(attack_from_string("nope"), std::invalid_argument);
}

}  // namespace
}  // namespace dynbft::harness
