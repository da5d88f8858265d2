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

#ifndef DYNBFT_SIMNET_HPP_
#define DYNBFT_SIMNET_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynbft/bytes.hpp"
#include "dynbft/fscrypto.hpp"
#include "dynbft/lattice.hpp"

namespace dynbft::sim {

using lattice::ProcessId;
using json = nlohmann::json;

enum class ProcessStatus : char { Idle = 'I', Correct = 'C', Halted = 'H', Byzantine = 'B' };

enum class EventKind { Deliver, Upcall, AdversaryAction, ClientInvoke, ClientReturn };

std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

/// A client operation as scheduled by a scenario.
struct Operation {
  std::uint64_t id = 0;
  std::string name;
  std::vector<std::string> args;
};

/// One entry of the replayable trace. Steps are dense from zero.
struct TraceEvent {
  std::uint64_t step = 0;
  EventKind kind = EventKind::Deliver;
  ProcessId from;
  ProcessId to;
  std::string descriptor;
  std::string payload_hash;
  std::string statuses;  // one status letter per roster entry
  json detail;           // null when absent
};

json to_json(const TraceEvent& e);
TraceEvent trace_event_from_json(const json& j);

/// Everything a protocol handler may do. Handlers never see the simulator
/// directly; adversary scripts wrap a Context to alter what an automaton does.
class Context {
 public:
  virtual ~Context() = default;

  virtual const ProcessId& self() const = 0;
  virtual std::uint64_t now() const = 0;
  virtual const std::vector<ProcessId>& roster() const = 0;

  virtual void send(const ProcessId& to, Bytes payload) = 0;
  virtual void upcall(const std::string& descriptor, json detail) = 0;
  virtual void client_invoked(const Operation& op) = 0;
  virtual void client_return(const Operation& op, json result) = 0;
  virtual void adversary_note(json detail) = 0;

  virtual void update_fs_keys(crypto::Timestamp t) = 0;
  virtual std::optional<crypto::FsSignature> fs_sign(ByteView message, crypto::Timestamp t) = 0;
  virtual Bytes plain_sign(ByteView message) = 0;
  virtual const crypto::FsScheme& fs() const = 0;
  virtual const crypto::PlainScheme& plain() const = 0;
};

/// Context that forwards every call; adversary wrappers override a subset.
class ForwardingContext : public Context {
 public:
  explicit ForwardingContext(Context& inner) : inner_(inner) {}

  const ProcessId& self() const override { return inner_.self(); }
  std::uint64_t now() const override { return inner_.now(); }
  const std::vector<ProcessId>& roster() const override { return inner_.roster(); }
  void send(const ProcessId& to, Bytes payload) override { inner_.send(to, std::move(payload)); }
  void upcall(const std::string& d, json detail) override { inner_.upcall(d, std::move(detail)); }
  void client_invoked(const Operation& op) override { inner_.client_invoked(op); }
  void client_return(const Operation& op, json result) override { inner_.client_return(op, std::move(result)); }
  void adversary_note(json detail) override { inner_.adversary_note(std::move(detail)); }
  void update_fs_keys(crypto::Timestamp t) override { inner_.update_fs_keys(t); }
  std::optional<crypto::FsSignature> fs_sign(ByteView m, crypto::Timestamp t) override { return inner_.fs_sign(m, t); }
  Bytes plain_sign(ByteView m) override { return inner_.plain_sign(m); }
  const crypto::FsScheme& fs() const override { return inner_.fs(); }
  const crypto::PlainScheme& plain() const override { return inner_.plain(); }

 protected:
  Context& inner_;
};

/// A deterministic protocol handler. One handler call runs to completion
/// before the next event is chosen.
class Automaton {
 public:
  virtual ~Automaton() = default;
  virtual void on_message(Context& ctx, const ProcessId& from, ByteView payload) = 0;
  virtual void on_invoke(Context& ctx, const Operation& op);
};

/// Scripted Byzantine behaviour. Receives every event addressed to the
/// corrupted process; may consult or drive the original automaton.
class AdversaryScript {
 public:
  virtual ~AdversaryScript() = default;
  virtual std::string name() const = 0;
  virtual void on_corrupt(Context&, Automaton&) {}
  virtual void on_message(Context& ctx, Automaton& original, const ProcessId& from, ByteView payload) = 0;
  virtual void on_invoke(Context&, Automaton&, const Operation&) {}
};

struct PendingMessage {
  std::uint64_t seq = 0;
  std::uint64_t enqueued_at = 0;  // scheduler pick count at send time
  ProcessId from;
  ProcessId to;
  std::string descriptor;
  Bytes payload;
};

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  /// Index into `eligible` (never empty), or nullopt to stop the run.
  virtual std::optional<std::size_t> pick(const std::vector<const PendingMessage*>& eligible,
                                          std::uint64_t picks) = 0;
};

/// Seeded weighted choice; each pending message weighs 1 + its age in picks,
/// so no message can be starved for long.
class SeededScheduler final : public Scheduler {
 public:
  explicit SeededScheduler(std::uint64_t seed) : rng_(seed) {}
  std::optional<std::size_t> pick(const std::vector<const PendingMessage*>& eligible, std::uint64_t picks) override;

 private:
  std::mt19937_64 rng_;
};

/// Replays a fixed list of choices (indices into the eligible list, in
/// sequence order) and then stops. Used for exhaustive schedule enumeration.
class ScriptedScheduler final : public Scheduler {
 public:
  explicit ScriptedScheduler(std::vector<std::size_t> choices) : choices_(std::move(choices)) {}
  std::optional<std::size_t> pick(const std::vector<const PendingMessage*>& eligible, std::uint64_t picks) override;

 private:
  std::vector<std::size_t> choices_;
  std::size_t next_ = 0;
};

/// Keeps matching messages out of the eligible set until the trace reaches
/// `until_step`, or until nothing else can happen.
struct HoldRule {
  std::optional<ProcessId> from;
  std::optional<ProcessId> to;
  std::optional<std::string> descriptor;  // matched as substring
  std::uint64_t until_step = 0;

  bool matches(const PendingMessage& m) const;
};

struct SimOptions {
  crypto::FsBackend backend = crypto::FsBackend::TrustedOracle;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 200000;
  /// Maps a payload to its trace descriptor.
  std::function<std::string(ByteView)> describe;
};

enum class RunStatus { Quiescent, StepCap, Stopped };

class Simulator {
 public:
  Simulator(SimOptions options, std::unique_ptr<Scheduler> scheduler);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Registers an Idle process. Throws std::invalid_argument on a duplicate id.
  void spawn(const ProcessId& id, std::unique_ptr<Automaton> automaton);

  ProcessStatus status(const ProcessId& id) const;
  const std::vector<ProcessId>& roster() const { return roster_; }
  Automaton& automaton(const ProcessId& id);
  bool has_process(const ProcessId& id) const { return procs_.contains(id); }

  /// Hands an operation to a client automaton right away.
  void invoke(const ProcessId& client, const Operation& op);
  /// Correct|Halted -> Byzantine. Throws std::logic_error on an illegal transition.
  void corrupt(const ProcessId& id, std::unique_ptr<AdversaryScript> script);
  /// Correct -> Halted. Throws std::logic_error on an illegal transition.
  void halt(const ProcessId& id);
  void add_hold(HoldRule rule);
  /// Runs `action` once the trace reaches `step` (or earlier, if the system
  /// would otherwise go quiet).
  void at_step(std::uint64_t step, std::function<void(Simulator&)> action);

  /// One unit of progress: fires due triggers, then delivers one message.
  /// Returns false at quiescence or when the scheduler stops.
  bool step();
  RunStatus run();

  const std::vector<TraceEvent>& trace() const { return trace_; }
  std::uint64_t now() const { return trace_.size(); }
  std::size_t pending() const { return pending_.size(); }
  const std::vector<PendingMessage>& pending_messages() const { return pending_; }
  bool stopped() const { return stopped_; }
  std::uint64_t messages_sent() const { return messages_sent_; }

  crypto::FsScheme& fs() { return *fs_; }
  crypto::PlainScheme& plain() { return plain_; }
  const crypto::FsScheme& fs() const { return *fs_; }
  const crypto::PlainScheme& plain() const { return plain_; }

  // Used by process contexts.
  void enqueue(const ProcessId& from, const ProcessId& to, Bytes payload);
  void record(EventKind kind, const ProcessId& from, const ProcessId& to, std::string descriptor, json detail,
              std::string payload_hash = {});
  void mark_active(const ProcessId& id);

 private:
  struct Proc;
  struct Trigger {
    std::uint64_t step;
    std::uint64_t order;
    std::function<void(Simulator&)> action;
  };

  Proc& proc(const ProcessId& id);
  void set_status(const ProcessId& id, ProcessStatus s);
  bool fire_due_triggers();
  bool eligible(const PendingMessage& m) const;

  SimOptions options_;
  std::unique_ptr<Scheduler> scheduler_;
  std::unique_ptr<crypto::FsScheme> fs_;
  crypto::PlainScheme plain_;

  std::vector<ProcessId> roster_;
  std::map<ProcessId, std::unique_ptr<Proc>> procs_;
  std::string statuses_;

  std::vector<PendingMessage> pending_;
  std::vector<HoldRule> holds_;
  std::vector<Trigger> triggers_;
  std::vector<TraceEvent> trace_;

  std::uint64_t next_seq_ = 0;
  std::uint64_t next_trigger_ = 0;
  std::uint64_t picks_ = 0;
  std::uint64_t messages_sent_ = 0;
  bool stopped_ = false;
};

std::string to_string(RunStatus s);

}  // namespace dynbft::sim

#endif  // DYNBFT_SIMNET_HPP_
