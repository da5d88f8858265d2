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

#ifndef DYNBFT_SCENARIO_HPP_
#define DYNBFT_SCENARIO_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynbft/reconfig.hpp"

/// Declarative scenario files.
///
/// Line-oriented; `#` starts a comment. The first statement must be
/// `scenario 1` (the format version). Statements:
///
///   name NAME
///   object dbla | maxreg | none      data object hosted by every replica
///   reconfig on | off                host confLA/histLA (default off)
///   auth accept-all | client | sanity | quorum | admin
///   ac sanity | quorum | admin       access-control object under test
///   backend oracle | keychain
///   replicas ID...                   the initial configuration
///   spares ID...                     replica processes outside it
///   clients ID...
///   admins ID...
///   conflict A B                     declared-conflicting values
///   deny VALUE                       value (or config name) refused by all
///   config NAME (+ID | -ID)...       initial configuration plus updates
///   history NAME CONFIG...           initial configuration plus named configs
///   seeds A..B | seeds N...
///   max-steps N
///   hold [from=ID] [to=ID] [desc=TEXT] [until=STEP]
///   TRIGGER ACTION
///
/// Triggers: `at STEP` (fires at that step, or earlier when nothing else can
/// move), `on-install CONFIG` (first install of CONFIG by any replica) and
/// `after LABEL` (once the labelled operation has returned).
///
/// Actions: `CLIENT OP ARGS... [as LABEL]`, `corrupt ID SCRIPT`,
/// `halt ID` and `forge CONFIG`.
namespace dynbft::scenario {

using lattice::ProcessId;

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TriggerKind { At, OnInstall, After };

struct Trigger {
  TriggerKind kind = TriggerKind::At;
  std::uint64_t step = 0;
  std::string ref;  // config name or label
};

enum class ActionKind { Invoke, Corrupt, Halt, Forge };

struct Action {
  ActionKind kind = ActionKind::Invoke;
  ProcessId target;        // client, corrupted or halted process
  std::string op;          // Invoke: operation name; Corrupt: script name; Forge: config name
  std::vector<std::string> args;
  std::string label;
  std::uint64_t op_id = 0;  // Invoke only, dense from 1 in file order
};

struct ScheduledAction {
  Trigger trigger;
  Action action;
  int line = 0;
};

struct Scenario {
  int version = 1;
  std::string name = "unnamed";
  reconfig::DeploymentSpec spec;
  crypto::FsBackend backend = crypto::FsBackend::TrustedOracle;
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t max_steps = 200000;
  std::vector<sim::HoldRule> holds;
  std::vector<ScheduledAction> actions;
  std::string source;  // text the scenario was parsed from

  /// Ids of every process, in spawn order.
  std::vector<ProcessId> roster() const;
  /// Named configurations including "C0" for the initial one.
  lattice::Configuration config(const std::string& name) const;
  /// Name of a configuration, or its printed form if unnamed.
  std::string config_name(const lattice::Configuration& c) const;
};

/// Throws ScenarioError with the offending line number.
Scenario parse(const std::string& text);
Scenario parse_file(const std::string& path);

/// Precondition violations; empty when the scenario may run. Checks
/// references and that every configuration that may be formed from the
/// declared proposals keeps an available quorum until it is superseded.
std::vector<std::string> validate(const Scenario& s);

/// Known adversary script names.
const std::vector<std::string>& script_names();

/// "A..B" or "N" into a seed list.
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

}  // namespace dynbft::scenario

#endif  // DYNBFT_SCENARIO_HPP_
