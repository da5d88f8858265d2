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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dynbft::scenario {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ScenarioError("bad " + what + ": " + s);
  return v;
}

struct LineError {
  int line;
  std::string what;
};

}  // namespace

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) return {parse_u64(text, "seed")};
  const auto a = parse_u64(text.substr(0, dots), "seed");
  const auto b = parse_u64(text.substr(dots + 2), "seed");
  if (b < a) throw ScenarioError("empty seed range: " + text);
  std::vector<std::uint64_t> out;
  for (auto s = a; s <= b; ++s) out.push_back(s);
  return out;
}

const std::vector<std::string>& script_names() {
  static const std::vector<std::string> names{"silent", "keep-keys", "answer-stale"};
  return names;
}

std::vector<ProcessId> Scenario::roster() const {
  std::vector<ProcessId> out = spec.initial;
  for (const auto* group : {&spec.spares, &spec.clients, &spec.admins})
    out.insert(out.end(), group->begin(), group->end());
  return out;
}

lattice::Configuration Scenario::config(const std::string& name) const {
  if (name == "C0") return lattice::Configuration::of_replicas(spec.initial);
  auto it = spec.configs.find(name);
  if (it == spec.configs.end()) throw ScenarioError("unknown configuration " + name);
  return it->second;
}

std::string Scenario::config_name(const lattice::Configuration& c) const {
  if (c == lattice::Configuration::of_replicas(spec.initial)) return "C0";
  for (const auto& [name, cfg] : spec.configs)
    if (cfg == c) return name;
  return c.to_string();
}

Scenario parse(const std::string& text) {
  Scenario s;
  s.source = text;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool versioned = false;
  std::uint64_t next_op = 1;
  // Config and history lines are resolved after the replica list is known.
  std::vector<std::pair<int, std::vector<std::string>>> config_lines;
  std::vector<std::pair<int, std::vector<std::string>>> history_lines;

  auto fail = [&](const std::string& what) -> ScenarioError {
    return ScenarioError("line " + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash_pos = raw.find('#'); hash_pos != std::string::npos) raw.erase(hash_pos);
    const auto t = split(raw);
    if (t.empty()) continue;
    const auto& kw = t[0];
    try {
      if (!versioned) {
        if (kw != "scenario" || t.size() != 2) throw fail("first statement must be `scenario 1`");
        s.version = static_cast<int>(parse_u64(t[1], "version"));
        if (s.version != 1) throw fail("unsupported scenario version " + t[1]);
        versioned = true;
        continue;
      }
      if (kw == "name" && t.size() == 2) {
        s.name = t[1];
      } else if (kw == "object" && t.size() == 2) {
        s.spec.data = reconfig::data_kind_from_string(t[1]);
      } else if (kw == "reconfig" && t.size() == 2 && (t[1] == "on" || t[1] == "off")) {
        s.spec.reconfigurable = t[1] == "on";
      } else if (kw == "auth" && t.size() == 2) {
        s.spec.auth = reconfig::config_auth_from_string(t[1]);
      } else if (kw == "ac" && t.size() == 2) {
        s.spec.access_control = ac::mode_from_string(t[1]);
      } else if (kw == "backend" && t.size() == 2) {
        s.backend = crypto::fs_backend_from_string(t[1]);
      } else if (kw == "replicas" || kw == "spares" || kw == "clients" || kw == "admins") {
        auto& group = kw == "replicas"  ? s.spec.initial
                      : kw == "spares"  ? s.spec.spares
                      : kw == "clients" ? s.spec.clients
                                        : s.spec.admins;
        group.insert(group.end(), t.begin() + 1, t.end());
      } else if (kw == "conflict" && t.size() == 3) {
        s.spec.conflicts.add(Bytes(t[1].begin(), t[1].end()), Bytes(t[2].begin(), t[2].end()));
      } else if (kw == "deny" && t.size() == 2) {
        s.spec.denied.insert(t[1]);
      } else if (kw == "config" && t.size() >= 3) {
        config_lines.emplace_back(lineno, t);
      } else if (kw == "history" && t.size() >= 2) {
        history_lines.emplace_back(lineno, t);
      } else if (kw == "seeds" && t.size() >= 2) {
        s.seeds.clear();
        for (std::size_t i = 1; i < t.size(); ++i) {
          auto part = parse_seed_range(t[i]);
          s.seeds.insert(s.seeds.end(), part.begin(), part.end());
        }
      } else if (kw == "max-steps" && t.size() == 2) {
        s.max_steps = parse_u64(t[1], "step cap");
      } else if (kw == "hold") {
        sim::HoldRule h;
        h.until_step = UINT64_MAX;
        for (std::size_t i = 1; i < t.size(); ++i) {
          const auto eq = t[i].find('=');
          if (eq == std::string::npos) throw fail("hold expects key=value, got " + t[i]);
          const auto key = t[i].substr(0, eq), val = t[i].substr(eq + 1);
          if (key == "from") {
            h.from = val;
          } else if (key == "to") {
            h.to = val;
          } else if (key == "desc") {
            h.descriptor = val;
          } else if (key == "until") {
            h.until_step = parse_u64(val, "step");
          } else {
            throw fail("unknown hold key " + key);
          }
        }
        s.holds.push_back(h);
      } else if (kw == "at" || kw == "on-install" || kw == "after") {
        if (t.size() < 3) throw fail("trigger without action");
        ScheduledAction sa;
        sa.line = lineno;
        if (kw == "at") {
          sa.trigger = {TriggerKind::At, parse_u64(t[1], "step"), {}};
        } else {
          sa.trigger = {kw == "on-install" ? TriggerKind::OnInstall : TriggerKind::After, 0, t[1]};
        }
        const std::vector<std::string> rest(t.begin() + 2, t.end());
        auto& a = sa.action;
        if (rest[0] == "corrupt") {
          if (rest.size() != 3) throw fail("corrupt ID SCRIPT");
          a = {ActionKind::Corrupt, rest[1], rest[2], {}, {}, 0};
        } else if (rest[0] == "halt") {
          if (rest.size() != 2) throw fail("halt ID");
          a = {ActionKind::Halt, rest[1], {}, {}, {}, 0};
        } else if (rest[0] == "forge") {
          if (rest.size() != 2) throw fail("forge CONFIG");
          a = {ActionKind::Forge, {}, rest[1], {}, {}, 0};
        } else {
          if (rest.size() < 2) throw fail("CLIENT OP ARGS...");
          a.kind = ActionKind::Invoke;
          a.target = rest[0];
          a.op = rest[1];
          std::size_t end = rest.size();
          if (rest.size() >= 4 && rest[rest.size() - 2] == "as") {
            a.label = rest.back();
            end -= 2;
          }
          a.args.assign(rest.begin() + 2, rest.begin() + static_cast<std::ptrdiff_t>(end));
          a.op_id = next_op++;
        }
        s.actions.push_back(std::move(sa));
      } else {
        throw fail("unrecognised statement `" + kw + "`");
      }
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  if (!versioned) throw ScenarioError("empty scenario (expected `scenario 1`)");
  if (s.spec.initial.empty()) throw ScenarioError("no replicas declared");

  const auto c0 = lattice::Configuration::of_replicas(s.spec.initial);
  for (const auto& [ln, t] : config_lines) {
    lineno = ln;
    std::vector<lattice::Update> ups;
    for (std::size_t i = 2; i < t.size(); ++i) {
      const auto& u = t[i];
      if (u.size() < 2 || (u[0] != '+' && u[0] != '-')) throw fail("update must be +ID or -ID, got " + u);
      ups.push_back({u[0] == '+' ? lattice::Polarity::Add : lattice::Polarity::Remove, u.substr(1)});
    }
    if (t[1] == "C0" || !s.spec.configs.emplace(t[1], reconfig::extend(c0, ups)).second)
      throw fail("duplicate configuration " + t[1]);
  }
  for (const auto& [ln, t] : history_lines) {
    lineno = ln;
    std::vector<lattice::Configuration> cs{c0};
    for (std::size_t i = 2; i < t.size(); ++i) {
      try {
        cs.push_back(s.config(t[i]));
      } catch (const ScenarioError& e) {
        throw fail(e.what());
      }
    }
    auto h = lattice::History::make(cs);
    if (!h) throw fail("history " + t[1] + " is not a chain");
    if (!s.spec.histories.emplace(t[1], *h).second) throw fail("duplicate history " + t[1]);
  }
  return s;
}

Scenario parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

// ---- Validation -------------------------------------------------------------

namespace {

bool numeric(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void check_invoke(const Scenario& s, const Action& a, std::vector<std::string>& errs, const std::string& where) {
  const auto& sp = s.spec;
  if (std::find(sp.clients.begin(), sp.clients.end(), a.target) == sp.clients.end())
    errs.push_back(where + "operation by undeclared client " + a.target);
  if (a.op == "propose") {
    if (sp.data != reconfig::DataKind::Dbla) errs.push_back(where + "propose needs `object dbla`");
    if (a.args.empty()) errs.push_back(where + "propose needs at least one value id");
    for (const auto& v : a.args)
      if (!numeric(v)) errs.push_back(where + "value ids are unsigned integers, got " + v);
  } else if (a.op == "write") {
    if (sp.data != reconfig::DataKind::MaxReg) errs.push_back(where + "write needs `object maxreg`");
    if (a.args.size() != 1 || !numeric(a.args[0]) || a.args[0] == "0")
      errs.push_back(where + "write takes one positive integer");
  } else if (a.op == "read") {
    if (sp.data != reconfig::DataKind::MaxReg) errs.push_back(where + "read needs `object maxreg`");
    if (!a.args.empty()) errs.push_back(where + "read takes no arguments");
  } else if (a.op == "update-config") {
    if (!sp.reconfigurable) errs.push_back(where + "update-config needs `reconfig on`");
    if (a.args.size() != 1 || !sp.configs.contains(a.args[0]))
      errs.push_back(where + "update-config needs one declared configuration");
  } else if (a.op == "update-history") {
    if (a.args.size() != 1 || !sp.histories.contains(a.args[0]))
      errs.push_back(where + "update-history needs one declared history");
  } else if (a.op == "request") {
    if (!sp.access_control) errs.push_back(where + "request needs an `ac` backend");
    if (a.args.size() != 1) errs.push_back(where + "request takes one value");
  } else {
    errs.push_back(where + "unknown operation " + a.op);
  }
}

}  // namespace

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> errs;
  const auto& sp = s.spec;
  const auto roster = s.roster();
  std::set<ProcessId> seen;
  for (const auto& p : roster) {
    if (p.empty() || p[0] == '@') errs.push_back("reserved process id " + p);
    if (!seen.insert(p).second) errs.push_back("duplicate process id " + p);
  }
  const std::set<ProcessId> replica_set = [&] {
    std::set<ProcessId> r(sp.initial.begin(), sp.initial.end());
    r.insert(sp.spares.begin(), sp.spares.end());
    return r;
  }();
  for (const auto& [name, c] : sp.configs) {
    for (const auto& u : c.updates())
      if (!replica_set.contains(u.replica)) errs.push_back("configuration " + name + " names non-replica " + u.replica);
    if (c.replicas().empty()) errs.push_back("configuration " + name + " has no replicas");
  }
  if (sp.access_control && sp.auth != reconfig::ConfigAuth::AcceptAll && sp.auth != reconfig::ConfigAuth::Client &&
      ac::to_string(*sp.access_control) != reconfig::to_string(sp.auth))
    errs.push_back("`ac` and `auth` name different access-control backends");
  const bool needs_admins =
      sp.auth == reconfig::ConfigAuth::Admin || (sp.access_control && *sp.access_control == ac::Mode::Admin);
  if (needs_admins && sp.admins.empty()) errs.push_back("admin backend without administrators");
  if (s.max_steps == 0) errs.push_back("max-steps must be positive");

  std::set<std::string> labels;
  for (const auto& sa : s.actions)
    if (!sa.action.label.empty() && !labels.insert(sa.action.label).second)
      errs.push_back("line " + std::to_string(sa.line) + ": duplicate label " + sa.action.label);

  for (const auto& sa : s.actions) {
    const auto where = "line " + std::to_string(sa.line) + ": ";
    const auto& a = sa.action;
    if (sa.trigger.kind == TriggerKind::OnInstall && sa.trigger.ref != "C0" && !sp.configs.contains(sa.trigger.ref))
      errs.push_back(where + "on-install names unknown configuration " + sa.trigger.ref);
    if (sa.trigger.kind == TriggerKind::After && !labels.contains(sa.trigger.ref))
      errs.push_back(where + "after names unknown label " + sa.trigger.ref);
    switch (a.kind) {
      case ActionKind::Invoke:
        check_invoke(s, a, errs, where);
        break;
      case ActionKind::Corrupt:
        if (!seen.contains(a.target)) errs.push_back(where + "corrupt of unknown process " + a.target);
        if (std::find(script_names().begin(), script_names().end(), a.op) == script_names().end())
          errs.push_back(where + "unknown adversary script " + a.op);
        break;
      case ActionKind::Halt:
        if (!seen.contains(a.target)) errs.push_back(where + "halt of unknown process " + a.target);
        break;
      case ActionKind::Forge:
        if (a.op != "C0" && !sp.configs.contains(a.op)) errs.push_back(where + "forge names unknown configuration");
        if (sp.data != reconfig::DataKind::Dbla) errs.push_back(where + "forge needs `object dbla`");
        break;
    }
  }
  if (!errs.empty()) return errs;

  // Availability: every configuration that can be formed must keep a quorum
  // of processes that are never faulty, except for faults triggered by the
  // installation of a configuration that supersedes it.
  const auto c0 = s.config("C0");
  std::vector<lattice::Configuration> proposals;
  for (const auto& sa : s.actions)
    if (sa.action.kind == ActionKind::Invoke && sa.action.op == "update-config")
      proposals.push_back(sp.configs.at(sa.action.args[0]));
  std::set<lattice::Configuration> candidates{c0};
  if (proposals.size() > 12) {
    errs.push_back("more than 12 configuration proposals; availability check is exponential");
    return errs;
  }
  for (std::uint32_t mask = 1; mask < (1u << proposals.size()); ++mask) {
    auto j = c0;
    for (std::size_t i = 0; i < proposals.size(); ++i)
      if (mask & (1u << i)) j = j.join(proposals[i]);
    candidates.insert(j);
  }
  for (const auto& [_, h] : sp.histories)
    for (const auto& c : h.configs()) candidates.insert(c);

  for (const auto& j : candidates) {
    std::set<ProcessId> faulty;
    for (const auto& sa : s.actions) {
      const auto& a = sa.action;
      if (a.kind != ActionKind::Corrupt && a.kind != ActionKind::Halt) continue;
      if (sa.trigger.kind == TriggerKind::OnInstall && j.lt(s.config(sa.trigger.ref))) continue;
      faulty.insert(a.target);
    }
    std::size_t available = 0;
    for (const auto& r : j.replicas())
      if (!faulty.contains(r)) ++available;
    if (available < j.quorum_size())
      errs.push_back("configuration " + s.config_name(j) + " has " + std::to_string(available) +
                     " available replicas but needs a quorum of " + std::to_string(j.quorum_size()));
  }
  return errs;
}

}  // namespace dynbft::scenario
