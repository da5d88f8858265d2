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

#include <algorithm>
#include <stdexcept>

namespace dynbft::sim {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Deliver:
      return "deliver";
    case EventKind::Upcall:
      return "upcall";
    case EventKind::AdversaryAction:
      return "adversary";
    case EventKind::ClientInvoke:
      return "invoke";
    case EventKind::ClientReturn:
      return "return";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "deliver") return EventKind::Deliver;
  if (s == "upcall") return EventKind::Upcall;
  if (s == "adversary") return EventKind::AdversaryAction;
  if (s == "invoke") return EventKind::ClientInvoke;
  if (s == "return") return EventKind::ClientReturn;
  throw std::invalid_argument("unknown event kind: " + s);
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Quiescent:
      return "quiescent";
    case RunStatus::StepCap:
      return "step-cap";
    case RunStatus::Stopped:
      return "stopped";
  }
  return "?";
}

json to_json(const TraceEvent& e) {
  json j = {{"step", e.step},         {"kind", to_string(e.kind)}, {"from", e.from},
            {"to", e.to},             {"desc", e.descriptor},      {"hash", e.payload_hash},
            {"statuses", e.statuses}};
  if (!e.detail.is_null()) j["detail"] = e.detail;
  return j;
}

TraceEvent trace_event_from_json(const json& j) {
  TraceEvent e;
  e.step = j.at("step").get<std::uint64_t>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.from = j.at("from").get<std::string>();
  e.to = j.at("to").get<std::string>();
  e.descriptor = j.at("desc").get<std::string>();
  e.payload_hash = j.at("hash").get<std::string>();
  e.statuses = j.at("statuses").get<std::string>();
  if (j.contains("detail")) e.detail = j.at("detail");
  return e;
}

void Automaton::on_invoke(Context&, const Operation&) {}

// ---- Schedulers ----------------------------------------------------------

std::optional<std::size_t> SeededScheduler::pick(const std::vector<const PendingMessage*>& eligible,
                                                 std::uint64_t picks) {
  std::uint64_t total = 0;
  for (const auto* m : eligible) total += 1 + (picks - m->enqueued_at);
  // Plain modulo keeps the choice identical across standard libraries.
  std::uint64_t r = rng_() % total;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    const std::uint64_t w = 1 + (picks - eligible[i]->enqueued_at);
    if (r < w) return i;
    r -= w;
  }
  return eligible.size() - 1;
}

std::optional<std::size_t> ScriptedScheduler::pick(const std::vector<const PendingMessage*>& eligible,
                                                   std::uint64_t) {
  if (next_ >= choices_.size()) return std::nullopt;
  return std::min(choices_[next_++], eligible.size() - 1);
}

bool HoldRule::matches(const PendingMessage& m) const {
  if (from && *from != m.from) return false;
  if (to && *to != m.to) return false;
  if (descriptor && m.descriptor.find(*descriptor) == std::string::npos) return false;
  return true;
}

// ---- Process context -----------------------------------------------------

struct Simulator::Proc {
  ProcessId id;
  std::size_t index = 0;
  ProcessStatus status = ProcessStatus::Idle;
  std::unique_ptr<Automaton> automaton;
  std::unique_ptr<AdversaryScript> adversary;
  std::unique_ptr<Context> ctx;
};

namespace {

class ProcessContext final : public Context {
 public:
  ProcessContext(Simulator& sim, ProcessId self) : sim_(sim), self_(std::move(self)) {}

  const ProcessId& self() const override { return self_; }
  std::uint64_t now() const override { return sim_.now(); }
  const std::vector<ProcessId>& roster() const override { return sim_.roster(); }

  void send(const ProcessId& to, Bytes payload) override { sim_.enqueue(self_, to, std::move(payload)); }

  void upcall(const std::string& descriptor, json detail) override {
    sim_.record(EventKind::Upcall, self_, "", descriptor, std::move(detail));
  }

  void client_invoked(const Operation& op) override {
    sim_.record(EventKind::ClientInvoke, self_, "", op.name, {{"op", op.id}, {"args", op.args}});
  }

  void client_return(const Operation& op, json result) override {
    sim_.record(EventKind::ClientReturn, self_, "", op.name, {{"op", op.id}, {"result", std::move(result)}});
  }

  void adversary_note(json detail) override {
    sim_.record(EventKind::AdversaryAction, self_, "", "note", std::move(detail));
  }

  void update_fs_keys(crypto::Timestamp t) override {
    const auto before = sim_.fs().key_timestamp(self_);
    sim_.fs().update_fs_keys(self_, t);
    const auto after = sim_.fs().key_timestamp(self_);
    if (after != before) sim_.record(EventKind::Upcall, self_, "", "KeyUpdate", {{"st", after}});
  }

  std::optional<crypto::FsSignature> fs_sign(ByteView message, crypto::Timestamp t) override {
    return sim_.fs().fs_sign(self_, message, t);
  }

  Bytes plain_sign(ByteView message) override { return sim_.plain().plain_sign(self_, message); }

  const crypto::FsScheme& fs() const override { return sim_.fs(); }
  const crypto::PlainScheme& plain() const override { return sim_.plain(); }

 private:
  Simulator& sim_;
  ProcessId self_;
};

}  // namespace

// ---- Simulator -----------------------------------------------------------

Simulator::Simulator(SimOptions options, std::unique_ptr<Scheduler> scheduler)
    : options_(std::move(options)),
      scheduler_(std::move(scheduler)),
      fs_(crypto::make_fs_scheme(options_.backend, options_.seed)),
      plain_(options_.seed) {
  fs_->set_clock([this] { return now(); });
  plain_.set_clock([this] { return now(); });
}

Simulator::~Simulator() = default;

void Simulator::spawn(const ProcessId& id, std::unique_ptr<Automaton> automaton) {
  if (procs_.contains(id)) throw std::invalid_argument("duplicate process id: " + id);
  auto p = std::make_unique<Proc>();
  p->id = id;
  p->index = roster_.size();
  p->automaton = std::move(automaton);
  p->ctx = std::make_unique<ProcessContext>(*this, id);
  roster_.push_back(id);
  statuses_.push_back(static_cast<char>(ProcessStatus::Idle));
  procs_.emplace(id, std::move(p));
}

Simulator::Proc& Simulator::proc(const ProcessId& id) {
  auto it = procs_.find(id);
  if (it == procs_.end()) throw std::invalid_argument("unknown process: " + id);
  return *it->second;
}

ProcessStatus Simulator::status(const ProcessId& id) const {
  auto it = procs_.find(id);
  if (it == procs_.end()) throw std::invalid_argument("unknown process: " + id);
  return it->second->status;
}

Automaton& Simulator::automaton(const ProcessId& id) { return *proc(id).automaton; }

void Simulator::set_status(const ProcessId& id, ProcessStatus s) {
  auto& p = proc(id);
  p.status = s;
  statuses_[p.index] = static_cast<char>(s);
}

void Simulator::mark_active(const ProcessId& id) {
  if (proc(id).status == ProcessStatus::Idle) set_status(id, ProcessStatus::Correct);
}

void Simulator::invoke(const ProcessId& client, const Operation& op) {
  auto& p = proc(client);
  if (p.status == ProcessStatus::Halted) return;
  mark_active(client);
  if (p.adversary) {
    p.adversary->on_invoke(*p.ctx, *p.automaton, op);
  } else {
    p.automaton->on_invoke(*p.ctx, op);
  }
}

void Simulator::corrupt(const ProcessId& id, std::unique_ptr<AdversaryScript> script) {
  auto& p = proc(id);
  if (p.status == ProcessStatus::Byzantine) throw std::logic_error(id + " is already corrupted");
  const auto name = script->name();
  // Corrupting an idle process activates it first, so the status sequence
  // stays I -> C -> B.
  mark_active(id);
  set_status(id, ProcessStatus::Byzantine);
  p.adversary = std::move(script);
  record(EventKind::AdversaryAction, "", id, "corrupt", {{"action", "corrupt"}, {"script", name}});
  p.adversary->on_corrupt(*p.ctx, *p.automaton);
}

void Simulator::halt(const ProcessId& id) {
  auto& p = proc(id);
  if (p.status == ProcessStatus::Byzantine || p.status == ProcessStatus::Halted)
    throw std::logic_error(id + " cannot halt from its current status");
  mark_active(id);
  set_status(id, ProcessStatus::Halted);
  std::erase_if(pending_, [&](const PendingMessage& m) { return m.to == id; });
  record(EventKind::AdversaryAction, "", id, "halt", {{"action", "halt"}});
}

void Simulator::add_hold(HoldRule rule) { holds_.push_back(std::move(rule)); }

void Simulator::at_step(std::uint64_t step, std::function<void(Simulator&)> action) {
  triggers_.push_back({step, next_trigger_++, std::move(action)});
  std::stable_sort(triggers_.begin(), triggers_.end(), [](const Trigger& a, const Trigger& b) {
    return a.step != b.step ? a.step < b.step : a.order < b.order;
  });
}

void Simulator::enqueue(const ProcessId& from, const ProcessId& to, Bytes payload) {
  auto it = procs_.find(to);
  if (it == procs_.end() || it->second->status == ProcessStatus::Halted) return;
  ++messages_sent_;
  PendingMessage m;
  m.seq = next_seq_++;
  m.enqueued_at = picks_;
  m.from = from;
  m.to = to;
  m.descriptor = options_.describe ? options_.describe(payload) : std::string{};
  m.payload = std::move(payload);
  pending_.push_back(std::move(m));
}

void Simulator::record(EventKind kind, const ProcessId& from, const ProcessId& to, std::string descriptor,
                       json detail, std::string payload_hash) {
  TraceEvent e;
  e.step = trace_.size();
  e.kind = kind;
  e.from = from;
  e.to = to;
  e.descriptor = std::move(descriptor);
  e.payload_hash = std::move(payload_hash);
  e.statuses = statuses_;
  e.detail = std::move(detail);
  trace_.push_back(std::move(e));
}

bool Simulator::fire_due_triggers() {
  bool fired = false;
  while (!triggers_.empty() && triggers_.front().step <= now()) {
    auto t = std::move(triggers_.front());
    triggers_.erase(triggers_.begin());
    t.action(*this);
    fired = true;
  }
  return fired;
}

bool Simulator::eligible(const PendingMessage& m) const {
  for (const auto& h : holds_)
    if (h.until_step > now() && h.matches(m)) return false;
  return true;
}

bool Simulator::step() {
  if (stopped_) return false;
  fire_due_triggers();

  std::vector<const PendingMessage*> ready;
  ready.reserve(pending_.size());
  for (const auto& m : pending_)
    if (eligible(m)) ready.push_back(&m);

  if (ready.empty()) {
    if (!triggers_.empty()) {
      // Nothing can move until the next scheduled action; run it now.
      auto t = std::move(triggers_.front());
      triggers_.erase(triggers_.begin());
      t.action(*this);
      return true;
    }
    if (!pending_.empty()) {
      // Only held messages remain: lift the hold that would expire first.
      auto it = std::min_element(holds_.begin(), holds_.end(), [&](const HoldRule& a, const HoldRule& b) {
        const bool ea = a.until_step > now(), eb = b.until_step > now();
        if (ea != eb) return ea;
        return a.until_step < b.until_step;
      });
      if (it != holds_.end()) {
        holds_.erase(it);
        return true;
      }
    }
    return false;
  }

  const auto choice = scheduler_->pick(ready, picks_);
  if (!choice) {
    stopped_ = true;
    return false;
  }
  ++picks_;
  const auto seq = ready[*choice]->seq;
  auto it = std::find_if(pending_.begin(), pending_.end(), [&](const PendingMessage& m) { return m.seq == seq; });
  PendingMessage msg = std::move(*it);
  pending_.erase(it);

  auto& p = proc(msg.to);
  if (p.status == ProcessStatus::Halted) return true;
  mark_active(msg.to);
  record(EventKind::Deliver, msg.from, msg.to, msg.descriptor, nullptr, hex_digest(msg.payload));
  if (p.adversary) {
    p.adversary->on_message(*p.ctx, *p.automaton, msg.from, msg.payload);
  } else {
    p.automaton->on_message(*p.ctx, msg.from, msg.payload);
  }
  return true;
}

RunStatus Simulator::run() {
  while (now() < options_.max_steps) {
    if (!step()) return stopped_ ? RunStatus::Stopped : RunStatus::Quiescent;
  }
  return RunStatus::StepCap;
}

}  // namespace dynbft::sim
