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

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "dynbft/dynamic.hpp"
#include "dynbft/harness/harness.hpp"

namespace dynbft::harness {

namespace {

using lattice::Configuration;
using lattice::FinSet;
using lattice::History;
using sim::EventKind;
using sim::json;

struct Op {
  std::uint64_t id = 0;
  ProcessId client;
  std::string name;
  std::vector<std::string> args;
  std::optional<std::uint64_t> scheduled;
  std::optional<std::uint64_t> invoked;
  std::optional<std::uint64_t> returned;
  json result;
};

std::optional<std::uint64_t> to_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

FinSet ids_of(const std::vector<std::string>& args) {
  std::vector<std::uint64_t> ids;
  for (const auto& a : args)
    if (auto v = to_u64(a)) ids.push_back(*v);
  return FinSet(ids);
}

History history_from_hex(const std::string& hex) {
  const auto b = from_hex(hex);
  Reader r(b);
  auto h = History::decode(r);
  r.expect_done();
  return h;
}

class Checker {
 public:
  explicit Checker(const Trace& t) : t_(t) {
    s_ = scenario::parse(t.header.at("scenario_text").get<std::string>());
    roster_ = t.header.at("roster").get<std::vector<ProcessId>>();
    for (std::size_t i = 0; i < roster_.size(); ++i) index_[roster_[i]] = i;
    c0_ = s_.config("C0");
    status_ = t.footer.value("status", std::string("unknown"));
    final_ = t.events.empty() ? std::string(roster_.size(), 'I') : t.events.back().statuses;
    index_events();
  }

  RunReport report() {
    RunReport rep;
    rep.scenario = t_.header.value("scenario", std::string());
    rep.seed = t_.header.value("seed", std::uint64_t{0});
    rep.status = status_;
    rep.trace_hash = t_.footer.value("trace_hash", std::string());
    integrity();
    fs_ledger();
    rb();
    liveness();
    forge();
    key_update();
    tentative();
    cmax();
    reconfig_validity();
    access_bound();
    if (s_.spec.data == reconfig::DataKind::Dbla) bla();
    if (s_.spec.data == reconfig::DataKind::MaxReg) mr();
    if (s_.spec.access_control) ac();
    rep.invariants = std::move(results_);
    rep.metrics = metrics_;
    return rep;
  }

 private:
  InvariantResult& add(const std::string& name) {
    results_.push_back({name, true, std::nullopt, {}, 0});
    return results_.back();
  }

  static void fail(InvariantResult& r, std::uint64_t step, const std::string& msg) {
    if (!r.pass && r.first_violation && *r.first_violation <= step) return;
    r.pass = false;
    r.first_violation = step;
    r.message = msg;
  }

  char status_at(const ProcessId& p, std::uint64_t step) const {
    auto it = index_.find(p);
    if (it == index_.end() || step == 0 || t_.events.empty()) return 'I';
    const auto& st = t_.events[std::min<std::uint64_t>(step, t_.events.size()) - 1].statuses;
    return it->second < st.size() ? st[it->second] : 'I';
  }

  bool forever_correct(const ProcessId& p) const {
    auto it = index_.find(p);
    if (it == index_.end() || it->second >= final_.size()) return false;
    return final_[it->second] == 'C' || final_[it->second] == 'I';
  }

  bool quiescent() const { return status_ == "quiescent"; }

  std::uint64_t st_before(const ProcessId& p, std::uint64_t step) const {
    auto it = key_updates_.find(p);
    if (it == key_updates_.end()) return 0;
    std::uint64_t st = 0;
    for (const auto& [s, v] : it->second) {
      if (s >= step) break;
      st = v;
    }
    return st;
  }

  void index_events() {
    for (const auto& e : t_.events) {
      const auto& d = e.detail;
      switch (e.kind) {
        case EventKind::Upcall:
          if (e.descriptor == "Schedule") {
            auto& op = ops_[d.at("op").get<std::uint64_t>()];
            op.id = d.at("op").get<std::uint64_t>();
            op.client = e.to;
            op.name = d.at("name").get<std::string>();
            op.args = d.at("args").get<std::vector<std::string>>();
            op.scheduled = e.step;
            ++metrics_.operations;
          } else if (e.descriptor == "KeyUpdate") {
            key_updates_[e.from].emplace_back(e.step, d.at("st").get<std::uint64_t>());
          } else if (e.descriptor == "NewHistory") {
            histories_.push_back({e.step, e.from, history_from_hex(d.at("history_hex").get<std::string>())});
          } else if (e.descriptor == "InstalledConfig") {
            installs_.push_back({e.step, e.from, dyn::config_from_hex(d.at("config_hex").get<std::string>())});
            ++metrics_.installs;
          } else if (e.descriptor == "UpdateRead") {
            reads_.insert(d.at("config_hex").get<std::string>());
          } else if (e.descriptor == "Restart") {
            ++metrics_.restarts;
          } else if (e.descriptor == "RbBroadcast") {
            rb_broadcasts_.insert({e.from, d.at("id").get<std::string>()});
          } else if (e.descriptor == "RbDeliver") {
            rb_delivers_.push_back({e.step, e.from, d.at("origin").get<std::string>(), d.at("id").get<std::string>()});
          } else if (e.descriptor == "CellUpdate") {
            cells_[e.from].emplace_back(e.step, d.at("value").get<std::uint64_t>());
          }
          break;
        case EventKind::ClientInvoke: {
          auto& op = ops_[d.at("op").get<std::uint64_t>()];
          op.id = d.at("op").get<std::uint64_t>();
          op.client = e.from;
          op.name = e.descriptor;
          op.args = d.at("args").get<std::vector<std::string>>();
          op.invoked = e.step;
          break;
        }
        case EventKind::ClientReturn: {
          auto& op = ops_[d.at("op").get<std::uint64_t>()];
          op.returned = e.step;
          op.result = d.at("result");
          ++metrics_.returned;
          break;
        }
        case EventKind::AdversaryAction:
          if (e.descriptor == "forge") forges_.push_back({e.step, d});
          break;
        case EventKind::Deliver:
          break;
      }
    }
    metrics_.steps = t_.events.size();
    metrics_.messages_sent = t_.footer.value("messages_sent", std::uint64_t{0});
    metrics_.configs_accessed = reads_.size();
  }

  // ---- Generic -------------------------------------------------------------

  void integrity() {
    auto& r = add("trace-integrity");
    r.checked = 1;
    const auto recorded = t_.footer.value("trace_hash", std::string());
    if (compute_trace_hash(t_) != recorded) fail(r, 0, "trace hash does not match the footer");
    if (t_.footer.value("steps", std::uint64_t{0}) != t_.events.size())
      fail(r, t_.events.size(), "footer step count does not match the events");
    for (const auto& e : t_.events)
      if (e.statuses.size() != roster_.size()) fail(r, e.step, "status string does not match the roster");
  }

  void fs_ledger() {
    auto& r = add("fs-ledger");
    for (const auto& rec : t_.ledger) {
      if (rec.kind != crypto::SchemeKind::Fs) continue;
      ++r.checked;
      if (rec.timestamp >= crypto::kMaxTimestamp)
        fail(r, rec.step, rec.signer + " signed at timestamp " + std::to_string(rec.timestamp));
      const auto st = st_before(rec.signer, rec.step);
      if (rec.timestamp < st)
        fail(r, rec.step,
             rec.signer + " signed at " + std::to_string(rec.timestamp) + " below its key timestamp " +
                 std::to_string(st));
    }
  }

  void rb() {
    auto& r = add("rb-broadcast");
    std::map<std::string, std::set<ProcessId>> delivered;
    std::set<std::string> correct_ids;
    for (const auto& d : rb_delivers_) {
      ++r.checked;
      delivered[d.id].insert(d.process);
      if (!rb_broadcasts_.contains({d.origin, d.id}) && status_at(d.origin, d.step) != 'B')
        fail(r, d.step, d.process + " delivered " + d.id + " never broadcast by correct " + d.origin);
      if (status_at(d.process, d.step + 1) != 'B') correct_ids.insert(d.id);
    }
    if (!quiescent()) return;
    for (const auto& id : correct_ids)
      for (const auto& p : roster_)
        if (forever_correct(p) && !delivered[id].contains(p))
          fail(r, t_.events.size(), p + " never delivered broadcast " + id);
  }

  void liveness() {
    auto& r = add("liveness");
    if (status_ == "stopped") {
      r.message = "not judged: the scheduler stopped the run";
      return;
    }
    for (const auto& [id, op] : ops_) {
      if (!op.scheduled || !forever_correct(op.client)) continue;
      ++r.checked;
      if (!op.returned)
        fail(r, *op.scheduled,
             op.client + " " + op.name + " (op " + std::to_string(id) + ") never returned; run " + status_);
    }
  }

  void forge() {
    auto& r = add("forged-certificates");
    for (const auto& [step, d] : forges_) {
      ++r.checked;
      if (d.value("verified", false)) fail(r, step, "forged certificate anchored at " + d.value("anchor_hex", "") + " verified");
    }
  }

  // ---- Reconfiguration -------------------------------------------------------

  std::vector<Configuration> candidates() const {
    std::set<Configuration> out;
    for (const auto& [_, op] : ops_) {
      if (op.name == "update-config" && op.args.size() == 1 && s_.spec.configs.contains(op.args[0]))
        out.insert(s_.spec.configs.at(op.args[0]));
      if (op.name == "update-history" && op.args.size() == 1 && s_.spec.histories.contains(op.args[0]))
        for (const auto& c : s_.spec.histories.at(op.args[0]).configs()) out.insert(c);
    }
    out.erase(c0_);
    return {out.begin(), out.end()};
  }

  void key_update() {
    auto& r = add("key-update");
    std::map<Configuration, std::uint64_t> pivotal{{c0_, 0}};  // first step adopted
    for (const auto& h : histories_) pivotal.emplace(lattice::max_element(h.history), h.step);
    for (const auto& in : installs_) {
      for (const auto& [c, first] : pivotal) {
        if (first >= in.step || !c.lt(in.config)) continue;
        ++r.checked;
        std::size_t can_sign = 0;
        for (const auto& x : c.replicas())
          if (st_before(x, in.step) <= c.height()) ++can_sign;
        if (can_sign >= c.quorum_size())
          fail(r, in.step,
               in.process + " installed " + in.config.to_string() + " while " + std::to_string(can_sign) +
                   " replicas of superseded " + c.to_string() + " could still sign at its height");
      }
    }
  }

  void tentative() {
    auto& r = add("tentative-never-installed");
    std::map<ProcessId, History> current;
    std::size_t hi = 0;
    for (const auto& in : installs_) {
      for (; hi < histories_.size() && histories_[hi].step < in.step; ++hi)
        current[histories_[hi].process] = histories_[hi].history;
      ++r.checked;
      auto it = current.find(in.process);
      const bool known = it == current.end() ? in.config == c0_ : it->second.contains(in.config);
      if (!known) fail(r, in.step, in.process + " installed " + in.config.to_string() + " outside its history");
    }
  }

  void cmax() {
    auto& r = add("cmax");
    if (!quiescent()) {
      r.message = "not judged: run did not reach quiescence";
      return;
    }
    Configuration top = c0_;
    std::map<ProcessId, std::set<Configuration>> installed;
    for (const auto& in : installs_) {
      installed[in.process].insert(in.config);
      if (top.lt(in.config)) top = in.config;
    }
    for (const auto& in : installs_)
      if (!in.config.leq(top)) {
        fail(r, in.step, "installed configurations have no maximum");
        return;
      }
    std::map<ProcessId, History> last;
    for (const auto& h : histories_) last[h.process] = h.history;
    const auto end = t_.events.size();
    if (top != c0_)
      for (const auto& x : top.replicas()) {
        if (!forever_correct(x)) continue;
        ++r.checked;
        if (!installed[x].contains(top)) fail(r, end, "correct replica " + x + " never installed " + top.to_string());
      }
    for (const auto& p : roster_) {
      if (!forever_correct(p)) continue;
      ++r.checked;
      const auto h = last.contains(p) ? last[p] : History::genesis(c0_);
      if (lattice::max_element(h) != top)
        fail(r, end, p + " ends with history maximum " + lattice::max_element(h).to_string() + " not " +
                         top.to_string());
    }
  }

  void reconfig_validity() {
    auto& r = add("reconfig-validity");
    const auto cands = candidates();
    std::vector<std::pair<std::uint64_t, Configuration>> outputs;
    for (const auto& in : installs_) outputs.emplace_back(in.step, in.config);
    for (const auto& [_, op] : ops_)
      if (op.name == "update-config" && op.returned && op.result.value("status", "") == "ok")
        outputs.emplace_back(*op.returned, dyn::config_from_hex(op.result.at("config_hex").get<std::string>()));
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const auto& [step, d] = outputs[i];
      ++r.checked;
      Configuration j = c0_;
      for (const auto& c : cands)
        if (c.leq(d)) j = j.join(c);
      if (j != d) fail(r, step, d.to_string() + " is not a join of proposed configurations");
      for (std::size_t k = 0; k < i; ++k)
        if (!outputs[k].second.comparable(d))
          fail(r, step, d.to_string() + " is incomparable with " + outputs[k].second.to_string());
    }
  }

  void access_bound() {
    auto& r = add("access-bound");
    const auto k = candidates().size();
    r.checked = reads_.size();
    if (reads_.size() > k + 1)
      fail(r, t_.events.size(),
           std::to_string(reads_.size()) + " configurations read for " + std::to_string(k) + " proposals");
  }

  // ---- Objects -------------------------------------------------------------

  void bla() {
    auto& cmp = add("bla-comparability");
    auto& val = add("bla-validity");
    auto& inc = add("bla-inclusion");
    auto& ver = add("bla-verifiability");
    std::vector<FinSet> proposals;
    for (const auto& [_, op] : ops_)
      if (op.name == "propose") proposals.push_back(ids_of(op.args));
    std::vector<std::pair<std::uint64_t, FinSet>> outputs;
    for (const auto& [id, op] : ops_) {
      if (op.name != "propose" || !op.returned || !op.result.contains("ids")) continue;
      const auto step = *op.returned;
      const FinSet out(op.result.at("ids").get<std::vector<std::uint64_t>>());
      const bool verified = op.result.value("verified", false);
      const bool correct = forever_correct(op.client);
      if (correct) {
        ++ver.checked;
        if (!verified) fail(ver, step, op.client + " returned an unverifiable output");
        ++inc.checked;
        if (!ids_of(op.args).leq(out)) fail(inc, step, op.client + " output " + out.to_string() + " misses its input");
      }
      if (!verified) continue;
      ++val.checked;
      FinSet u;
      for (const auto& p : proposals)
        if (p.leq(out)) u = u.join(p);
      if (u != out) fail(val, step, "output " + out.to_string() + " is not a join of proposed values");
      for (const auto& [_, prev] : outputs) {
        ++cmp.checked;
        if (!prev.leq(out) && !out.leq(prev))
          fail(cmp, step, "outputs " + prev.to_string() + " and " + out.to_string() + " are incomparable");
      }
      outputs.emplace_back(step, out);
    }
  }

  void mr() {
    auto& val = add("mr-validity");
    auto& atom = add("mr-atomicity");
    auto& mono = add("mr-monotone");
    std::set<std::uint64_t> written{0};
    for (const auto& [_, op] : ops_)
      if (op.name == "write" && op.args.size() == 1)
        if (auto v = to_u64(op.args[0])) written.insert(*v);
    struct Done {
      std::uint64_t invoked, returned, value;
      bool read;
      ProcessId client;
    };
    std::vector<Done> done;
    for (const auto& [_, op] : ops_) {
      if ((op.name != "read" && op.name != "write") || !op.returned || !op.invoked) continue;
      if (!op.result.contains("value")) continue;
      const auto v = op.result.at("value").get<std::uint64_t>();
      if (op.name == "read") {
        ++val.checked;
        if (!written.contains(v)) fail(val, *op.returned, "read returned unwritten value " + std::to_string(v));
      }
      if (forever_correct(op.client)) done.push_back({*op.invoked, *op.returned, v, op.name == "read", op.client});
    }
    for (const auto& r2 : done) {
      if (!r2.read) continue;
      for (const auto& o1 : done) {
        if (o1.returned >= r2.invoked) continue;
        ++atom.checked;
        if (r2.value < o1.value)
          fail(atom, r2.returned,
               r2.client + " read " + std::to_string(r2.value) + " after " + o1.client + " completed with " +
                   std::to_string(o1.value));
      }
    }
    for (const auto& [p, seq] : cells_)
      for (std::size_t i = 1; i < seq.size(); ++i) {
        ++mono.checked;
        if (seq[i].second < seq[i - 1].second) fail(mono, seq[i].first, p + " cell decreased");
      }
  }

  void ac() {
    auto& amo = add("ac-at-most-one");
    std::map<std::string, std::uint64_t> certified;
    for (const auto& [_, op] : ops_)
      if (op.name == "request" && op.returned && op.result.value("status", "") == "certified" &&
          op.result.value("verified", false))
        certified.emplace(op.result.at("value").get<std::string>(), *op.returned);
    for (const auto& [a, b] : s_.spec.conflicts.pairs()) {
      ++amo.checked;
      const std::string sa(a.begin(), a.end()), sb(b.begin(), b.end());
      if (certified.contains(sa) && certified.contains(sb))
        fail(amo, std::max(certified[sa], certified[sb]), "conflicting values " + sa + " and " + sb + " both certified");
    }
    if (*s_.spec.access_control != ac::Mode::Sanity) return;
    auto& san = add("ac-sanity-signer");
    std::map<std::tuple<ProcessId, std::string, std::uint64_t>, std::uint64_t> issued;
    for (const auto& rec : t_.ledger)
      if (rec.kind == crypto::SchemeKind::Fs) issued.emplace(std::make_tuple(rec.signer, to_hex(rec.message), rec.timestamp), rec.step);
    for (const auto& [_, op] : ops_) {
      if (op.name != "request" || !op.returned || op.result.value("status", "") != "certified" ||
          !op.result.value("verified", false))
        continue;
      ++san.checked;
      bool honest = false;
      for (const auto& a : op.result.at("approvals")) {
        auto it = issued.find({a.at("signer").get<std::string>(), a.at("statement").get<std::string>(),
                               a.value("timestamp", std::uint64_t{0})});
        if (it != issued.end() && status_at(std::get<0>(it->first), it->second) == 'C') honest = true;
      }
      if (!honest) fail(san, *op.returned, "certificate for " + op.result.value("value", "") + " has no correct signer");
    }
  }

  struct HistoryEvent {
    std::uint64_t step;
    ProcessId process;
    History history;
  };
  struct InstallEvent {
    std::uint64_t step;
    ProcessId process;
    Configuration config;
  };
  struct RbDelivery {
    std::uint64_t step;
    ProcessId process;
    ProcessId origin;
    std::string id;
  };

  const Trace& t_;
  scenario::Scenario s_;
  std::vector<ProcessId> roster_;
  std::map<ProcessId, std::size_t> index_;
  Configuration c0_;
  std::string status_;
  std::string final_;
  std::vector<InvariantResult> results_;
  Metrics metrics_;

  std::map<std::uint64_t, Op> ops_;
  std::map<ProcessId, std::vector<std::pair<std::uint64_t, std::uint64_t>>> key_updates_;
  std::vector<HistoryEvent> histories_;
  std::vector<InstallEvent> installs_;
  std::set<std::string> reads_;
  std::set<std::pair<ProcessId, std::string>> rb_broadcasts_;
  std::vector<RbDelivery> rb_delivers_;
  std::map<ProcessId, std::vector<std::pair<std::uint64_t, std::uint64_t>>> cells_;
  std::vector<std::pair<std::uint64_t, json>> forges_;
};

}  // namespace

bool RunReport::ok() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const InvariantResult& r) { return r.pass; });
}

bool RunReport::liveness() const {
  const auto* r = find("liveness");
  return r != nullptr && r->pass;
}

const InvariantResult* RunReport::find(const std::string& name) const {
  for (const auto& r : invariants)
    if (r.name == name) return &r;
  return nullptr;
}

sim::json RunReport::to_json() const {
  json inv = json::array();
  for (const auto& r : invariants) {
    json j{{"name", r.name}, {"pass", r.pass}, {"checked", r.checked}};
    if (r.first_violation) j["first_violation"] = *r.first_violation;
    if (!r.message.empty()) j["message"] = r.message;
    inv.push_back(std::move(j));
  }
  return {{"scenario", scenario},
          {"seed", seed},
          {"status", status},
          {"ok", ok()},
          {"liveness", liveness()},
          {"invariants", inv},
          {"metrics",
           {{"steps", metrics.steps},
            {"messages_sent", metrics.messages_sent},
            {"configs_accessed", metrics.configs_accessed},
            {"installs", metrics.installs},
            {"restarts", metrics.restarts},
            {"operations", metrics.operations},
            {"returned", metrics.returned}}},
          {"trace_path", trace_path},
          {"trace_hash", trace_hash}};
}

std::string RunReport::summary() const {
  std::ostringstream out;
  out << scenario << " seed " << seed << " (" << status << ", " << metrics.steps << " steps)\n";
  for (const auto& r : invariants) {
    out << "  " << (r.pass ? "PASS " : "FAIL ") << r.name << " [" << r.checked << "]";
    if (r.first_violation) out << " at step " << *r.first_violation;
    if (!r.message.empty()) out << ": " << r.message;
    out << "\n";
  }
  return out.str();
}

RunReport check(const Trace& trace) {
  try {
    return Checker(trace).report();
  } catch (const TraceError&) {
    throw;
  } catch (const std::exception& e) {
    throw TraceError(std::string("malformed trace: ") + e.what());
  }
}

}  // namespace dynbft::harness
