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

#include "dynbft/scenario.hpp"

#include <gtest/gtest.h>

namespace dynbft::scenario {
namespace {

const char* kBase = R"(scenario 1
name base
object maxreg
reconfig on
replicas r1 r2 r3 r4
spares r5 r6
clients c1 c2
config add5 +r5
config swap -r1 +r6
)";

std::string with(const std::string& extra) { return std::string(kBase) + extra; }

bool mentions(const std::vector<std::string>& errs, const std::string& needle) {
  for (const auto& e : errs)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

TEST(ScenarioParse, Fields) {
  const auto s = parse(with(R"(
# comment line
seeds 3..5 9
max-steps 5000
hold from=c1 to=r2 desc=Set until=40
at 0 c1 write 3 as first   # trailing comment
after first c2 read
on-install add5 halt r2
at 7 c1 update-config add5
)"));
  EXPECT_EQ(s.name, "base");
  EXPECT_EQ(s.spec.data, reconfig::DataKind::MaxReg);
  EXPECT_TRUE(s.spec.reconfigurable);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{3, 4, 5, 9}));
  EXPECT_EQ(s.max_steps, 5000u);
  ASSERT_EQ(s.holds.size(), 1u);
  EXPECT_EQ(*s.holds[0].from, "c1");
  EXPECT_EQ(*s.holds[0].descriptor, "Set");
  EXPECT_EQ(s.holds[0].until_step, 40u);
  ASSERT_EQ(s.actions.size(), 4u);
  EXPECT_EQ(s.actions[0].action.label, "first");
  EXPECT_EQ(s.actions[0].action.args, (std::vector<std::string>{"3"}));
  EXPECT_EQ(s.actions[0].action.op_id, 1u);
  EXPECT_EQ(s.actions[1].trigger.kind, TriggerKind::After);
  EXPECT_EQ(s.actions[1].action.op_id, 2u);
  EXPECT_EQ(s.actions[2].action.kind, ActionKind::Halt);
  EXPECT_EQ(s.actions[2].action.op_id, 0u);
  EXPECT_EQ(s.actions[3].action.op_id, 3u);
  EXPECT_TRUE(validate(s).empty());
}

TEST(ScenarioParse, Configurations) {
  const auto s = parse(with("history h add5\n"));
  const auto c0 = lattice::Configuration::of_replicas({"r1", "r2", "r3", "r4"});
  EXPECT_EQ(s.config("C0"), c0);
  EXPECT_EQ(s.config("add5").replicas(), (std::vector<ProcessId>{"r1", "r2", "r3", "r4", "r5"}));
  EXPECT_EQ(s.config("swap").replicas(), (std::vector<ProcessId>{"r2", "r3", "r4", "r6"}));
  EXPECT_TRUE(c0.lt(s.config("swap")));
  EXPECT_EQ(s.config_name(s.config("swap")), "swap");
  EXPECT_EQ(s.config_name(c0), "C0");
  EXPECT_THROW(s.config("nope"), ScenarioError);
  EXPECT_EQ(s.roster(), (std::vector<ProcessId>{"r1", "r2", "r3", "r4", "r5", "r6", "c1", "c2"}));
  EXPECT_EQ(s.spec.histories.at("h").size(), 2u);
  // add5 and swap are incomparable, so this history is not a chain.
  EXPECT_THROW(parse(with("history h add5 swap\n")), ScenarioError);
}

TEST(ScenarioParse, Errors) {
  EXPECT_THROW(parse(""), ScenarioError);
  EXPECT_THROW(parse("name x\n"), ScenarioError);
  EXPECT_THROW(parse("scenario 2\n"), ScenarioError);
  try {
    parse(with("frobnicate\n"));
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("line 10"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse(with("config bad r5\n")), ScenarioError);
  EXPECT_THROW(parse(with("config add5 +r6\n")), ScenarioError);
  EXPECT_THROW(parse(with("seeds 5..2\n")), ScenarioError);
  EXPECT_THROW(parse(with("hold sideways\n")), ScenarioError);
  EXPECT_THROW(parse(with("at x c1 read\n")), ScenarioError);
  EXPECT_THROW(parse(with("backend quantum\n")), ScenarioError);
  EXPECT_THROW(parse("scenario 1\nname x\n"), ScenarioError);
}

TEST(ScenarioValidate, References) {
  EXPECT_TRUE(mentions(validate(parse(with("at 0 c9 read\n"))), "undeclared client"));
  EXPECT_TRUE(mentions(validate(parse(with("at 0 c1 propose 1\n"))), "object dbla"));
  EXPECT_TRUE(mentions(validate(parse(with("at 0 c1 write 0\n"))), "positive"));
  EXPECT_TRUE(mentions(validate(parse(with("at 0 c1 update-config nope\n"))), "declared configuration"));
  EXPECT_TRUE(mentions(validate(parse(with("after ghost c1 read\n"))), "unknown label"));
  EXPECT_TRUE(mentions(validate(parse(with("at 0 corrupt r1 cackle\n"))), "unknown adversary script"));
  EXPECT_TRUE(mentions(validate(parse(with("at 0 c1 request x\n"))), "ac"));
  EXPECT_TRUE(mentions(validate(parse(with("config odd +c1\n"))), "non-replica"));
  EXPECT_TRUE(mentions(validate(parse(with("at 0 c1 read as a\nat 0 c2 read as a\n"))), "duplicate label"));
  EXPECT_TRUE(mentions(validate(parse(with("clients r1\n"))), "duplicate process"));
  EXPECT_TRUE(mentions(validate(parse(with("auth admin\n"))), "administrators"));
}

TEST(ScenarioValidate, Availability) {
  // Two of four initial replicas down leaves C0 without a quorum.
  auto errs = validate(parse(with("at 5 halt r1\nat 9 corrupt r2 silent\n")));
  EXPECT_TRUE(mentions(errs, "configuration C0")) << (errs.empty() ? "" : errs[0]);
  // One fault is tolerated.
  EXPECT_TRUE(validate(parse(with("at 5 halt r1\n"))).empty());
  // Faults triggered by installing a larger configuration only count for
  // configurations that are not below it.
  const auto ok = with(R"(at 0 c1 update-config add5
on-install add5 corrupt r1 silent
on-install add5 corrupt r2 silent
)");
  errs = validate(parse(ok));
  EXPECT_TRUE(mentions(errs, "configuration add5"));
  EXPECT_FALSE(mentions(errs, "configuration C0"));
  // Every join of proposals is checked. Removing r1 once swap is installed
  // is fine, but losing both spares breaks the join of add5 and swap.
  errs = validate(parse(with(R"(at 0 c1 update-config add5
at 0 c2 update-config swap
on-install swap halt r1
)")));
  EXPECT_TRUE(errs.empty()) << errs[0];
  errs = validate(parse(with(R"(at 0 c1 update-config add5
at 0 c2 update-config swap
at 0 halt r5
at 0 halt r6
)")));
  EXPECT_FALSE(errs.empty());
}

TEST(ScenarioSeeds, Ranges) {
  EXPECT_EQ(parse_seed_range("7"), (std::vector<std::uint64_t>{7}));
  EXPECT_EQ(parse_seed_range("2..4"), (std::vector<std::uint64_t>{2, 3, 4}));
  EXPECT_THROW(parse_seed_range("x"), ScenarioError);
  EXPECT_THROW(parse_seed_range("4..2"), ScenarioError);
}

}  // namespace
}  // namespace dynbft::scenario
