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

#include "dynbft/harness/adversary.hpp"

#include <stdexcept>

namespace dynbft::harness {

namespace {

class KeepKeysContext final : public sim::ForwardingContext {
 public:
  using ForwardingContext::ForwardingContext;
  void update_fs_keys(crypto::Timestamp) override {}
};

class Silent final : public sim::AdversaryScript {
 public:
  std::string name() const override { return "silent"; }
  void on_message(sim::Context&, sim::Automaton&, const ProcessId&, ByteView) override {}
};

class KeepKeys final : public sim::AdversaryScript {
 public:
  std::string name() const override { return "keep-keys"; }
  void on_message(sim::Context& ctx, sim::Automaton& original, const ProcessId& from, ByteView payload) override {
    KeepKeysContext k(ctx);
    original.on_message(k, from, payload);
  }
  void on_invoke(sim::Context& ctx, sim::Automaton& original, const sim::Operation& op) override {
    KeepKeysContext k(ctx);
    original.on_invoke(k, op);
  }
};

class AnswerStale final : public sim::AdversaryScript {
 public:
  std::string name() const override { return "answer-stale"; }

  void on_message(sim::Context& ctx, sim::Automaton& original, const ProcessId& from, ByteView payload) override {
    KeepKeysContext k(ctx);
    auto* node = dynamic_cast<dyn::Node*>(&original);
    if (node != nullptr && node->is_replica()) {
      try {
        Reader r(payload);
        const auto h = wire::read_header(r);
        if (h.object == wire::kCoreObject && h.desc == wire::Desc::UpdateRead) {
          const auto sn = r.u64();
          const auto c = lattice::Configuration::decode(r);
          auto w = wire::begin(wire::kCoreObject, wire::Desc::UpdateReadResp);
          w.u64(sn);
          c.encode(w);
          w.u32(0);
          k.send(from, w.take());
          return;
        }
        if (h.object != wire::kCoreObject) {
          const auto f = wire::parse_client_frame(payload);
          auto* obj = node->core().object(f.object);
          if (dyn::is_request(f.desc) && obj != nullptr) {
            obj->on_request(k, node->core(), from, f);
            return;
          }
        }
      } catch (const DecodeError&) {
        return;
      }
    }
    original.on_message(k, from, payload);
  }

  void on_invoke(sim::Context& ctx, sim::Automaton& original, const sim::Operation& op) override {
    KeepKeysContext k(ctx);
    original.on_invoke(k, op);
  }
};

}  // namespace

std::unique_ptr<sim::AdversaryScript> make_script(const std::string& name) {
  if (name == "silent") return std::make_unique<Silent>();
  if (name == "keep-keys") return std::make_unique<KeepKeys>();
  if (name == "answer-stale") return std::make_unique<AnswerStale>();
  throw std::invalid_argument("unknown adversary script " + name);
}

void forge(sim::Simulator& sim, reconfig::Deployment& dep, const lattice::Configuration& anchor) {
  std::vector<ProcessId> byz;
  for (const auto& r : anchor.replicas())
    if (sim.has_process(r) && sim.status(r) == sim::ProcessStatus::Byzantine) byz.push_back(r);

  // A history with `anchor` as maximum, as certified as the adversary can
  // get it: genesis for C0, otherwise one adopted by some process.
  std::optional<lattice::History> history;
  Bytes history_cert;
  if (anchor == dep.c0()) {
    history = lattice::History::genesis(anchor);
    history_cert = genesis_history_cert();
  } else {
    for (const auto& p : sim.roster()) {
      auto& node = dep.node(p);
      if (lattice::max_element(node.history()) == anchor) {
        history = node.history();
        history_cert = node.history_cert();
        break;
      }
    }
  }

  sim::json detail{{"action", "forge"}, {"anchor_hex", dyn::config_hex(anchor)}, {"byzantine", byz}};
  bool verified = false;
  std::size_t proposes = 0, confirms = 0;
  if (!byz.empty() && history) {
    const lattice::LatticeValue v = lattice::FinSet{999};
    const auto& signer = byz.front();
    const auto sig = sim.plain().plain_sign(signer, client_input_statement(reconfig::kDataObject, v));
    wire::OutputCertificate tau;
    tau.values.insert({v, client_input_cert(signer, sig)});
    tau.history = *history;
    tau.history_cert = history_cert;
    const auto t = anchor.height();
    const auto propose_stmt = wire::propose_resp_statement(reconfig::kDataObject, anchor, tau.values);
    for (const auto& r : byz)
      if (auto s = sim.fs().fs_sign(r, propose_stmt, t)) tau.propose_acks.emplace(r, *s);
    const auto confirm_stmt = wire::confirm_resp_statement(reconfig::kDataObject, anchor, tau.propose_acks);
    for (const auto& r : byz)
      if (auto s = sim.fs().fs_sign(r, confirm_stmt, t)) tau.confirm_acks.emplace(r, *s);
    proposes = tau.propose_acks.size();
    confirms = tau.confirm_acks.size();
    verified = dbla::verify_output_value(dep.verifier(), reconfig::kDataObject, v, tau);
  }
  detail["propose_acks"] = proposes;
  detail["confirm_acks"] = confirms;
  detail["verified"] = verified;
  sim.record(sim::EventKind::AdversaryAction, "", "", "forge", std::move(detail));
}

}  // namespace dynbft::harness
