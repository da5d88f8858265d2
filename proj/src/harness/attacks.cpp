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

#include "dynbft/harness/attacks.hpp"

#include <stdexcept>

namespace dynbft::harness {

std::string to_string(Attack a) { return a == Attack::IStillWorkHere ? "i_still_work_here" : "slow_reader"; }

Attack attack_from_string(const std::string& s) {
  if (s == "i_still_work_here") return Attack::IStillWorkHere;
  if (s == "slow_reader") return Attack::SlowReader;
  throw std::invalid_argument("unknown attack " + s);
}

std::string attack_scenario_text(Attack a, reconfig::DataKind object) {
  if (object != reconfig::DataKind::Dbla && object != reconfig::DataKind::MaxReg)
    throw std::invalid_argument("attacks target dbla or maxreg");
  const bool dbla = object == reconfig::DataKind::Dbla;
  std::string s = "scenario 1\nname " + to_string(a) + "-" + reconfig::to_string(object) + "\n";
  s += "object " + reconfig::to_string(object) + "\nreconfig on\nreplicas r1 r2 r3 r4\n";
  if (a == Attack::IStillWorkHere) {
    s += "spares r5 r6 r7 r8\nclients c1 c2\n"
         "config C1 -r1 -r2 -r3 -r4 +r5 +r6 +r7 +r8\n"
         "hold to=c2 desc=RB\n";
    s += dbla ? "at 0 c1 propose 1 as first\n" : "at 0 c1 write 7 as first\n";
    s += "after first c1 update-config C1 as moved\n";
    for (const auto* r : {"r1", "r2", "r3", "r4"}) s += "on-install C1 corrupt " + std::string(r) + " answer-stale\n";
    if (dbla) s += "on-install C1 forge C0\n";
    s += dbla ? "on-install C1 c2 propose 2 as victim\n" : "on-install C1 c2 read as victim\n";
    return s;
  }
  s += "spares r5\nclients c1 c2 c3 c5\nconfig C1 +r5\n";
  if (dbla) {
    s += "hold from=c2 desc=Confirm until=9000001\n"
         "hold to=c2 desc=RB until=9000002\n"
         "at 1000000 c2 propose 2 as victim\n"
         "at 1000001 corrupt r4 answer-stale\n"
         "at 1000002 c1 update-config C1 as moved\n"
         "at 1000003 c3 propose 3 as fresh\n"
         "after victim c3 propose 4 as check\n";
  } else {
    s += "hold from=c5 to=r1 until=9000003\n"
         "hold from=c5 to=r2 until=9000003\n"
         "hold from=c5 to=r3 until=9000003\n"
         "hold from=c2 desc=Set until=9000001\n"
         "hold to=c2 desc=RB until=9000002\n"
         "at 0 c5 write 9 as slow\n"
         "at 1000000 halt c5\n"
         "at 1000001 c2 read as victim\n"
         "at 1000002 corrupt r4 answer-stale\n"
         "at 1000003 c1 update-config C1 as moved\n"
         "at 1000004 c3 read as fresh\n"
         "after victim c3 read as check\n";
  }
  return s;
}

AttackResult run_attack(Attack a, reconfig::DataKind object, std::uint64_t seed, const RunOptions& options,
                        const std::string& trace_path) {
  const auto s = scenario::parse(attack_scenario_text(a, object));
  const auto exec = execute(s, seed, options);
  if (!trace_path.empty()) write_trace(trace_path, exec.trace);
  AttackResult out;
  out.report = check(exec.trace);
  out.report.trace_path = trace_path;

  std::uint64_t victim = 0;
  for (const auto& sa : s.actions)
    if (sa.action.label == "victim") victim = sa.action.op_id;
  const sim::json* result = nullptr;
  std::size_t forges = 0;
  bool forged = false;
  for (const auto& e : exec.trace.events) {
    if (e.kind == sim::EventKind::ClientReturn && e.detail.at("op").get<std::uint64_t>() == victim)
      result = &e.detail.at("result");
    if (e.kind == sim::EventKind::AdversaryAction && e.descriptor == "forge") {
      ++forges;
      forged = forged || e.detail.value("verified", false);
    }
  }

  const auto c0_hex = dyn::config_hex(s.config("C0"));
  const auto c1_hex = dyn::config_hex(s.config("C1"));
  std::vector<std::string> problems;
  if (!out.report.ok()) problems.push_back("invariant violated");
  if (result == nullptr) {
    problems.push_back("victim never returned");
  } else if (options.adversary) {
    const auto cfg = result->value("config_hex", std::string());
    if (cfg == c0_hex) problems.push_back("victim completed in the superseded configuration");
    if (a == Attack::IStillWorkHere && cfg != c1_hex) problems.push_back("victim did not complete in C1");
    if (object == reconfig::DataKind::Dbla && !result->value("verified", false))
      problems.push_back("victim output does not verify");
    if (object == reconfig::DataKind::MaxReg && a == Attack::IStillWorkHere && result->value("value", 0) < 7)
      problems.push_back("victim read below the completed write");
  }
  if (options.adversary && a == Attack::IStillWorkHere && object == reconfig::DataKind::Dbla) {
    if (forges == 0) problems.push_back("no forgery was attempted");
    if (forged) problems.push_back("a forged certificate verified");
  }
  out.pass = problems.empty();
  for (const auto& p : problems) out.verdict += (out.verdict.empty() ? "" : "; ") + p;
  if (out.pass) out.verdict = options.adversary ? "attack defeated" : "control run completed";
  return out;
}

}  // namespace dynbft::harness
