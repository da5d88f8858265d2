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

#ifndef DYNBFT_HARNESS_ATTACKS_HPP_
#define DYNBFT_HARNESS_ATTACKS_HPP_

#include <string>

#include "dynbft/harness/harness.hpp"

/// Scripted attacks on superseded configurations.
///
/// i_still_work_here: the system moves from C0 to a disjoint C1, every C0
/// replica is then corrupted, the adversary tries to forge an output
/// certificate anchored at C0, and a client that has not heard of C1 runs an
/// operation against C0.
///
/// slow_reader: a client collects replies in C0, its confirming round
/// (dbla) or write-back (maxreg) is delayed past a reconfiguration to C1,
/// and one C0 replica that kept its old keys answers it.
namespace dynbft::harness {

enum class Attack { IStillWorkHere, SlowReader };

std::string to_string(Attack a);
/// Throws std::invalid_argument.
Attack attack_from_string(const std::string& s);

/// Scenario text of an attack against `object` (dbla or maxreg).
std::string attack_scenario_text(Attack a, reconfig::DataKind object);

struct AttackResult {
  RunReport report;
  bool pass = false;
  std::string verdict;
};

AttackResult run_attack(Attack a, reconfig::DataKind object, std::uint64_t seed, const RunOptions& options = {},
                        const std::string& trace_path = {});

}  // namespace dynbft::harness

#endif  // DYNBFT_HARNESS_ATTACKS_HPP_
