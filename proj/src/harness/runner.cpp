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

#include <map>
#include <set>

#include "dynbft/harness/adversary.hpp"
#include "dynbft/harness/harness.hpp"

namespace dynbft::harness {

namespace {

using scenario::ActionKind;
using scenario::TriggerKind;

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

class Runner {
 public:
  Runner(const scenario::Scenario& s, std::uint64_t seed, const RunOptions& options)
      : s_(s),
        options_(options),
        max_steps_(options.max_steps.value_or(s.max_steps)),
        backend_(options.backend.value_or(s.backend)),
        seed_(seed),
        sim_(sim::SimOptions{backend_, seed, max_steps_, wire::describe},
             options.scheduler ? options.scheduler(seed) : std::make_unique<sim::SeededScheduler>(seed)),
        dep_(sim_, s.spec),
        done_(s.actions.size(), false) {
    for (const auto& sa : s.actions)
      if (!sa.action.label.empty()) labels_[sa.action.label] = sa.action.op_id;
  }

  Execution go() {
    for (std::size_t i = 0; i < s_.actions.size(); ++i)
      if (s_.actions[i].trigger.kind == TriggerKind::At)
        sim_.at_step(s_.actions[i].trigger.step, [this, i](sim::Simulator&) { perform(i); });
    for (const auto& h : s_.holds) sim_.add_hold(h);

    sim::RunStatus status = sim::RunStatus::Quiescent;
    for (;;) {
      if (sim_.now() >= max_steps_) {
        status = sim::RunStatus::StepCap;
        break;
      }
      const bool progressed = sim_.step();
      const bool fired = poll();
      if (!progressed && !fired) {
        status = sim_.stopped() ? sim::RunStatus::Stopped : sim::RunStatus::Quiescent;
        break;
      }
    }
    return {build_trace(status), status};
  }

 private:
  // Scans new events and fires condition triggers that became true.
  bool poll() {
    bool any = false;
    for (;;) {
      const auto& tr = sim_.trace();
      for (; scanned_ < tr.size(); ++scanned_) {
        const auto& e = tr[scanned_];
        if (e.kind == sim::EventKind::Upcall && e.descriptor == "InstalledConfig")
          installed_.insert(e.detail.at("config_hex").get<std::string>());
        if (e.kind == sim::EventKind::ClientReturn) returned_.insert(e.detail.at("op").get<std::uint64_t>());
      }
      bool fired = false;
      for (std::size_t i = 0; i < s_.actions.size(); ++i) {
        if (done_[i]) continue;
        const auto& t = s_.actions[i].trigger;
        bool ready = false;
        if (t.kind == TriggerKind::OnInstall) {
          ready = installed_.contains(dyn::config_hex(s_.config(t.ref)));
        } else if (t.kind == TriggerKind::After) {
          auto it = labels_.find(t.ref);
          ready = it != labels_.end() && returned_.contains(it->second);
        }
        if (ready) {
          perform(i);
          fired = true;
        }
      }
      if (!fired) return any;
      any = true;
    }
  }

  void perform(std::size_t i) {
    if (done_[i]) return;
    done_[i] = true;
    const auto& a = s_.actions[i].action;
    const bool adversarial = a.kind != ActionKind::Invoke;
    if (adversarial && !options_.adversary) return;
    try {
      switch (a.kind) {
        case ActionKind::Invoke:
          sim_.record(sim::EventKind::Upcall, "", a.target, "Schedule",
                      {{"op", a.op_id}, {"name", a.op}, {"args", a.args}});
          sim_.invoke(a.target, sim::Operation{a.op_id, a.op, a.args});
          break;
        case ActionKind::Corrupt:
          sim_.corrupt(a.target, make_script(a.op));
          break;
        case ActionKind::Halt:
          sim_.halt(a.target);
          break;
        case ActionKind::Forge:
          forge(sim_, dep_, s_.config(a.op));
          break;
      }
    } catch (const std::logic_error& e) {
      sim_.record(sim::EventKind::AdversaryAction, "", a.target, "skipped", {{"reason", e.what()}});
    }
  }

  Trace build_trace(sim::RunStatus status) {
    Trace t;
    sim::json configs = sim::json::object();
    configs["C0"] = dyn::config_hex(dep_.c0());
    for (const auto& [name, c] : s_.spec.configs) configs[name] = dyn::config_hex(c);
    t.header = {{"version", 1},
                {"scenario", s_.name},
                {"seed", seed_},
                {"backend", crypto::to_string(backend_)},
                {"roster", sim_.roster()},
                {"c0_hex", dyn::config_hex(dep_.c0())},
                {"max_steps", max_steps_},
                {"adversary", options_.adversary},
                {"configs", configs},
                {"scenario_text", s_.source}};
    t.events = sim_.trace();
    t.ledger = sim_.fs().ledger();
    const auto& plain = sim_.plain().ledger();
    t.ledger.insert(t.ledger.end(), plain.begin(), plain.end());
    t.footer = {{"status", sim::to_string(status)},
                {"steps", t.events.size()},
                {"messages_sent", sim_.messages_sent()},
                {"trace_hash", compute_trace_hash(t)}};
    return t;
  }

  const scenario::Scenario& s_;
  RunOptions options_;
  std::uint64_t max_steps_;
  crypto::FsBackend backend_;
  std::uint64_t seed_;
  sim::Simulator sim_;
  reconfig::Deployment dep_;
  std::vector<bool> done_;
  std::map<std::string, std::uint64_t> labels_;
  std::set<std::string> installed_;
  std::set<std::uint64_t> returned_;
  std::size_t scanned_ = 0;
};

}  // namespace

Execution execute(const scenario::Scenario& s, std::uint64_t seed, const RunOptions& options) {
  const auto errors = scenario::validate(s);
  if (!errors.empty()) throw scenario::ScenarioError("scenario " + s.name + " is invalid: " + joined(errors));
  Runner runner(s, seed, options);
  return runner.go();
}

RunReport run(const scenario::Scenario& s, std::uint64_t seed, const RunOptions& options,
              const std::string& trace_path) {
  const auto exec = execute(s, seed, options);
  if (!trace_path.empty()) write_trace(trace_path, exec.trace);
  auto report = check(exec.trace);
  report.trace_path = trace_path;
  return report;
}

bool replay(const Trace& trace, std::string* new_hash) {
  const auto& h = trace.header;
  try {
    const auto s = scenario::parse(h.at("scenario_text").get<std::string>());
    RunOptions o;
    o.max_steps = h.at("max_steps").get<std::uint64_t>();
    o.backend = crypto::fs_backend_from_string(h.at("backend").get<std::string>());
    o.adversary = h.at("adversary").get<bool>();
    const auto exec = execute(s, h.at("seed").get<std::uint64_t>(), o);
    const auto hash = exec.trace.footer.at("trace_hash").get<std::string>();
    if (new_hash != nullptr) *new_hash = hash;
    return trace.footer.contains("trace_hash") && hash == trace.footer.at("trace_hash").get<std::string>() &&
           hash == compute_trace_hash(trace);
  } catch (const sim::json::exception& e) {
    throw TraceError(std::string("malformed trace header: ") + e.what());
  }
}

}  // namespace dynbft::harness
