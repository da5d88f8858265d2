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

#include "dynbft/simnet.hpp"

#include <gtest/gtest.h>

namespace dynbft::sim {
namespace {

// Forwards a counter around a ring of processes until it reaches a limit.
class Relay : public Automaton {
 public:
  Relay(std::vector<ProcessId> peers, std::uint64_t limit) : peers_(std::move(peers)), limit_(limit) {}

  void on_message(Context& ctx, const ProcessId&, ByteView payload) override {
    Reader r(payload);
    auto n = r.u64();
    seen.push_back(n);
    if (n >= limit_) return;
    for (const auto& p : peers_) {
      if (p == ctx.self()) continue;
      Writer w;
      w.u64(n + 1);
      ctx.send(p, w.take());
    }
  }

  void on_invoke(Context& ctx, const Operation& op) override {
    ctx.client_invoked(op);
    Writer w;
    w.u64(0);
    for (const auto& p : peers_)
      if (p != ctx.self()) ctx.send(p, w.view());
    ctx.client_return(op, "ok");
  }

  std::vector<std::uint64_t> seen;

 private:
  std::vector<ProcessId> peers_;
  std::uint64_t limit_;
};

SimOptions options(std::uint64_t seed) {
  SimOptions o;
  o.seed = seed;
  o.describe = [](ByteView) { return std::string("relay"); };
  return o;
}

std::unique_ptr<Simulator> make_sim(std::uint64_t seed, std::uint64_t limit = 4) {
  auto sim = std::make_unique<Simulator>(options(seed), std::make_unique<SeededScheduler>(seed));
  std::vector<ProcessId> ids{"a", "b", "c"};
  for (const auto& id : ids) sim->spawn(id, std::make_unique<Relay>(ids, limit));
  return sim;
}

std::string dump(const Simulator& sim) {
  std::string out;
  for (const auto& e : sim.trace()) out += to_json(e).dump() + "\n";
  return out;
}

TEST(Simulator, DeterministicForSeed) {
  auto s1 = make_sim(11), s2 = make_sim(11), s3 = make_sim(12);
  for (auto* s : {s1.get(), s2.get(), s3.get()}) {
    s->invoke("a", {1, "start", {}});
    EXPECT_EQ(s->run(), RunStatus::Quiescent);
  }
  EXPECT_EQ(dump(*s1), dump(*s2));
  EXPECT_NE(dump(*s1), dump(*s3));
}

TEST(Simulator, DeliversEverythingEventually) {
  auto sim = make_sim(3, 3);
  sim->invoke("a", {1, "start", {}});
  sim->run();
  // 2 initial sends, each delivery below the limit fans out to 2 peers.
  std::size_t expected = 0, frontier = 2;
  for (int level = 0; level <= 3; ++level) {
    expected += frontier;
    frontier *= 2;
  }
  std::size_t delivered = 0;
  for (const auto& e : sim->trace()) delivered += e.kind == EventKind::Deliver;
  EXPECT_EQ(delivered, expected);
  EXPECT_EQ(sim->messages_sent(), expected);
}

TEST(Simulator, StepsAreDenseAndStatusesTracked) {
  auto sim = make_sim(5);
  sim->invoke("a", {1, "start", {}});
  sim->run();
  for (std::size_t i = 0; i < sim->trace().size(); ++i) EXPECT_EQ(sim->trace()[i].step, i);
  EXPECT_EQ(sim->trace().front().kind, EventKind::ClientInvoke);
  EXPECT_EQ(sim->trace().front().statuses, "CII");
  EXPECT_EQ(sim->trace().back().statuses, "CCC");
}

TEST(Simulator, HaltDropsPendingAndIllegalTransitionsThrow) {
  auto sim = make_sim(1);
  sim->invoke("a", {1, "start", {}});
  sim->halt("b");
  EXPECT_EQ(sim->status("b"), ProcessStatus::Halted);
  for (const auto& m : sim->pending_messages()) EXPECT_NE(m.to, "b");
  EXPECT_THROW(sim->halt("b"), std::logic_error);
  sim->run();
  for (const auto& e : sim->trace())
    if (e.kind == EventKind::Deliver) {
      EXPECT_NE(e.to, "b");
    }
}

class Mute : public AdversaryScript {
 public:
  std::string name() const override { return "mute"; }
  void on_message(Context&, Automaton&, const ProcessId&, ByteView) override { ++received; }
  int received = 0;
};

TEST(Simulator, CorruptRoutesToAdversary) {
  auto sim = make_sim(2);
  auto mute = std::make_unique<Mute>();
  auto* raw = mute.get();
  sim->corrupt("c", std::move(mute));
  EXPECT_EQ(sim->status("c"), ProcessStatus::Byzantine);
  EXPECT_THROW(sim->halt("c"), std::logic_error);
  sim->invoke("a", {1, "start", {}});
  sim->run();
  EXPECT_GT(raw->received, 0);
  EXPECT_TRUE(static_cast<Relay&>(sim->automaton("c")).seen.empty());
}

TEST(Simulator, HoldDelaysMatchingMessages) {
  auto sim = make_sim(9, 1);
  sim->add_hold({std::nullopt, ProcessId("c"), std::nullopt, 1000});
  sim->invoke("a", {1, "start", {}});
  sim->run();
  // b and a finish their exchange before the held messages to c move.
  std::vector<std::string> order;
  for (const auto& e : sim->trace())
    if (e.kind == EventKind::Deliver) order.push_back(e.to);
  ASSERT_GE(order.size(), 3u);
  EXPECT_EQ(order[0], "b");
  EXPECT_EQ(order[1], "a");
  EXPECT_EQ(order[2], "c");
}

TEST(Simulator, TriggersFireAtStepOrWhenIdle) {
  auto sim = make_sim(4, 1);
  std::vector<std::uint64_t> fired;
  sim->at_step(0, [&](Simulator& s) {
    fired.push_back(s.now());
    s.invoke("a", {1, "start", {}});
  });
  sim->at_step(500, [&](Simulator& s) { fired.push_back(s.now()); });
  EXPECT_EQ(sim->run(), RunStatus::Quiescent);
  ASSERT_EQ(fired.size(), 2u);
  EXPECT_EQ(fired[0], 0u);
  EXPECT_LT(fired[1], 500u);
}

TEST(Simulator, ScriptedSchedulerStopsAfterChoices) {
  Simulator sim(options(0), std::make_unique<ScriptedScheduler>(std::vector<std::size_t>{1, 0}));
  std::vector<ProcessId> ids{"a", "b", "c"};
  for (const auto& id : ids) sim.spawn(id, std::make_unique<Relay>(ids, 5));
  sim.invoke("a", {1, "start", {}});
  EXPECT_EQ(sim.run(), RunStatus::Stopped);
  std::vector<std::string> order;
  for (const auto& e : sim.trace())
    if (e.kind == EventKind::Deliver) order.push_back(e.to);
  EXPECT_EQ(order, (std::vector<std::string>{"c", "b"}));
}

TEST(Simulator, StepCap) {
  SimOptions o = options(1);
  o.max_steps = 10;
  Simulator sim(o, std::make_unique<SeededScheduler>(1));
  std::vector<ProcessId> ids{"a", "b"};
  for (const auto& id : ids) sim.spawn(id, std::make_unique<Relay>(ids, 1000));
  sim.invoke("a", {1, "start", {}});
  EXPECT_EQ(sim.run(), RunStatus::StepCap);
  EXPECT_EQ(sim.now(), 10u);
}

TEST(TraceEventJson, RoundTrip) {
  TraceEvent e{3, EventKind::Upcall, "r1", "", "InstalledConfig", "", "CCB", {{"config", "{+r1}"}}};
  auto back = trace_event_from_json(to_json(e));
  EXPECT_EQ(to_json(back), to_json(e));
}

}  // namespace
}  // namespace dynbft::sim
