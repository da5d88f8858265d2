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

#include "dynbft/dbla.hpp"

#include <charconv>
#include <stdexcept>

namespace dynbft::dbla {

namespace {

bool valid_acks(const Verifier& verifier, const lattice::Configuration& c, const Bytes& statement,
                const wire::AckMap& acks) {
  lattice::ProcessSet signers;
  for (const auto& [p, sig] : acks) {
    if (!c.is_member(p) || sig.signer != p) return false;
    if (!verifier.fs().fs_verify(statement, p, sig, c.height())) return false;
    signers.insert(p);
  }
  return c.is_quorum(signers);
}

}  // namespace

// ---- Replica ---------------------------------------------------------------

void DblaState::absorb(sim::Context&, Verifier& verifier, ByteView snapshot) {
  Reader r(snapshot);
  auto incoming = wire::ValueSet::decode(r);
  r.expect_done();
  for (const auto& [_, v] : incoming.items())
    if (!values_.contains(v) && verifier.verify_input(object_, v)) values_.insert(v);
}

void DblaState::on_request(sim::Context& ctx, dyn::ReplicaCore& core, const ProcessId& from,
                           const wire::ClientFrame& f) {
  const auto t = f.config.height();
  Reader r(f.body);
  if (f.desc == wire::Desc::Propose) {
    auto incoming = wire::ValueSet::decode(r);
    r.expect_done();
    for (const auto& [_, v] : incoming.items())
      if (!values_.contains(v) && core.node().verifier().verify_input(object_, v)) values_.insert(v);
    auto sig = ctx.fs_sign(wire::propose_resp_statement(object_, f.config, values_), t);
    if (!sig) return;
    Writer body;
    values_.encode(body);
    sig->encode(body);
    ctx.send(from, wire::client_frame(object_, wire::Desc::ProposeResp, f.sn, f.config, body.view()));
  } else if (f.desc == wire::Desc::Confirm) {
    const auto acks = wire::decode_acks(r);
    r.expect_done();
    // Signed without inspecting the acks; verifiers check them.
    auto sig = ctx.fs_sign(wire::confirm_resp_statement(object_, f.config, acks), t);
    if (!sig) return;
    Writer body;
    sig->encode(body);
    ctx.send(from, wire::client_frame(object_, wire::Desc::ConfirmResp, f.sn, f.config, body.view()));
  }
}

// ---- Client ------------------------------------------------------------------

DblaClient::DblaClient(dyn::Node& node, std::uint8_t object, std::optional<InputValue> seed, bool serve_ops)
    : node_(node), object_(object), seed_(std::move(seed)), serve_ops_(serve_ops) {}

void DblaClient::propose(sim::Context& ctx, InputValue v, Done done) {
  if (active()) throw std::logic_error("a propose is already running");
  if (seed_) values_.insert(*seed_);
  values_.insert(v);
  done_ = std::move(done);
  phase_ = Phase::Refining;
  start_round(ctx);
}

void DblaClient::start_round(sim::Context& ctx) {
  phase_ = Phase::Refining;
  config_ = node_.highest();
  ++sn_;
  propose_acks_.clear();
  confirm_acks_.clear();
  const auto msg = wire::client_frame(object_, wire::Desc::Propose, sn_, config_, values_.encode());
  for (const auto& p : config_.replicas()) ctx.send(p, msg);
}

void DblaClient::on_history(sim::Context& ctx) {
  if (!active() || node_.highest() == config_) return;
  ++restarts_;
  ctx.upcall("Restart", {{"object", object_}});
  start_round(ctx);
}

void DblaClient::on_reply(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f) {
  if (f.sn != sn_ || f.config != config_ || !config_.is_member(from)) return;
  if (f.desc == wire::Desc::ProposeResp && phase_ == Phase::Refining) on_propose_resp(ctx, from, f);
  if (f.desc == wire::Desc::ConfirmResp && phase_ == Phase::Confirming) on_confirm_resp(ctx, from, f);
}

void DblaClient::on_propose_resp(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f) {
  Reader r(f.body);
  auto values = wire::ValueSet::decode(r);
  auto sig = crypto::FsSignature::decode(r);
  r.expect_done();

  bool grew = false;
  for (const auto& [_, v] : values.items()) {
    if (values_.contains(v) || !node_.verifier().verify_input(object_, v)) continue;
    values_.insert(v);
    grew = true;
  }
  if (grew) {
    start_round(ctx);
    return;
  }
  if (!(values == values_) || sig.signer != from) return;
  if (!ctx.fs().fs_verify(wire::propose_resp_statement(object_, config_, values_), from, sig, config_.height()))
    return;
  propose_acks_[from] = std::move(sig);

  lattice::ProcessSet signers;
  for (const auto& [p, _] : propose_acks_) signers.insert(p);
  if (!config_.is_quorum(signers)) return;

  phase_ = Phase::Confirming;
  Writer body;
  wire::encode_acks(body, propose_acks_);
  const auto msg = wire::client_frame(object_, wire::Desc::Confirm, sn_, config_, body.view());
  for (const auto& p : config_.replicas()) ctx.send(p, msg);
}

void DblaClient::on_confirm_resp(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f) {
  Reader r(f.body);
  auto sig = crypto::FsSignature::decode(r);
  r.expect_done();
  if (sig.signer != from) return;
  if (!ctx.fs().fs_verify(wire::confirm_resp_statement(object_, config_, propose_acks_), from, sig,
                          config_.height()))
    return;
  confirm_acks_[from] = std::move(sig);

  lattice::ProcessSet signers;
  for (const auto& [p, _] : confirm_acks_) signers.insert(p);
  if (!config_.is_quorum(signers)) return;

  OutputCertificate tau{values_, node_.history(), node_.history_cert(), propose_acks_, confirm_acks_};
  const auto w = values_.join_all();
  phase_ = Phase::Idle;
  auto done = std::move(done_);
  done_ = nullptr;
  done(ctx, w, tau);
}

bool DblaClient::start(sim::Context& ctx, const sim::Operation& op) {
  if (!serve_ops_ || op.name != "propose") return false;
  const LatticeValue v = parse_ids(op.args);
  const auto sig = ctx.plain_sign(client_input_statement(object_, v));
  propose(ctx, InputValue{v, client_input_cert(ctx.self(), sig)},
          [this](sim::Context& c, const LatticeValue& w, const OutputCertificate& tau) {
            node_.finish_operation(c, output_json(node_.verifier(), object_, w, tau));
          });
  return true;
}

// ---- Verification ----------------------------------------------------------

bool verify_output_value(Verifier& verifier, std::uint8_t object, const LatticeValue& w,
                         const OutputCertificate& tau) {
  Writer key;
  key.str("verify_output").u8(object).bytes(lattice::canonical_bytes(w)).raw(tau.encode());
  return verifier.memo(hash(key.view()), [&] {
    if (tau.values.empty()) return false;
    for (const auto& [_, v] : tau.values.items())
      if (!verifier.verify_input(object, v)) return false;
    try {
      if (tau.values.join_all() != w) return false;
    } catch (const std::invalid_argument&) {
      return false;
    }
    if (!verifier.verify_history(tau.history, tau.history_cert)) return false;
    const auto& c = lattice::max_element(tau.history);
    return valid_acks(verifier, c, wire::propose_resp_statement(object, c, tau.values), tau.propose_acks) &&
           valid_acks(verifier, c, wire::confirm_resp_statement(object, c, tau.propose_acks), tau.confirm_acks);
  });
}

bool verify_output_value(Verifier& verifier, std::uint8_t object, const LatticeValue& w, ByteView tau) {
  try {
    return verify_output_value(verifier, object, w, OutputCertificate::from_bytes(tau));
  } catch (const DecodeError&) {
    return false;
  }
}

lattice::FinSet parse_ids(const std::vector<std::string>& args) {
  std::vector<std::uint64_t> ids;
  for (const auto& a : args) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
    if (ec != std::errc() || ptr != a.data() + a.size()) throw std::invalid_argument("bad value id: " + a);
    ids.push_back(v);
  }
  return lattice::FinSet(std::move(ids));
}

sim::json output_json(Verifier& verifier, std::uint8_t object, const LatticeValue& w, const OutputCertificate& tau) {
  sim::json out;
  out["value"] = lattice::to_string(w);
  if (const auto* f = std::get_if<lattice::FinSet>(&w)) out["ids"] = f->ids();
  out["verified"] = verify_output_value(verifier, object, w, tau);
  out["config_hex"] = dyn::config_hex(lattice::max_element(tau.history));
  const auto digest = verifier.store().put(tau.encode());
  out["cert"] = to_hex(digest);
  return out;
}

}  // namespace dynbft::dbla
