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

#ifndef DYNBFT_HARNESS_HARNESS_HPP_
#define DYNBFT_HARNESS_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynbft/harness/trace.hpp"
#include "dynbft/scenario.hpp"

/// Scenario runner and post-hoc invariant checker.
namespace dynbft::harness {

struct RunOptions {
  std::optional<std::uint64_t> max_steps;
  std::optional<crypto::FsBackend> backend;
  /// When false, corrupt, halt and forge actions are skipped.
  bool adversary = true;
  /// Scheduler factory; the seeded weighted scheduler when empty.
  std::function<std::unique_ptr<sim::Scheduler>(std::uint64_t seed)> scheduler;
};

struct Execution {
  Trace trace;
  sim::RunStatus status = sim::RunStatus::Quiescent;
};

/// Runs one seed of a validated scenario. Throws ScenarioError listing the
/// violated preconditions when validation fails.
Execution execute(const scenario::Scenario& s, std::uint64_t seed, const RunOptions& options = {});

struct InvariantResult {
  std::string name;
  bool pass = true;
  std::optional<std::uint64_t> first_violation;  // step
  std::string message;
  std::size_t checked = 0;  // number of individual obligations examined
};

struct Metrics {
  std::uint64_t steps = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t configs_accessed = 0;  // distinct configurations read in state transfer
  std::uint64_t installs = 0;
  std::uint64_t restarts = 0;
  std::uint64_t operations = 0;
  std::uint64_t returned = 0;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string status;
  std::vector<InvariantResult> invariants;
  Metrics metrics;
  std::string trace_path;
  std::string trace_hash;

  bool ok() const;
  bool liveness() const;
  const InvariantResult* find(const std::string& name) const;
  sim::json to_json() const;
  /// One line per invariant.
  std::string summary() const;
};

/// Evaluates every invariant that applies to the traced scenario.
RunReport check(const Trace& trace);

/// execute() followed by check(); writes the trace when `trace_path` is set.
RunReport run(const scenario::Scenario& s, std::uint64_t seed, const RunOptions& options = {},
              const std::string& trace_path = {});

/// Re-executes the run described by a trace header. True when the new trace
/// hashes to the recorded value.
bool replay(const Trace& trace, std::string* new_hash = nullptr);

}  // namespace dynbft::harness

#endif  // DYNBFT_HARNESS_HARNESS_HPP_
