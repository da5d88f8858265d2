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

#include "dynbft/access_control.hpp"

#include <algorithm>
#include <stdexcept>

namespace dynbft::ac {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Sanity:
      return "sanity";
    case Mode::Quorum:
      return "quorum";
    case Mode::Admin:
      return "admin";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "sanity") return Mode::Sanity;
  if (s == "quorum") return Mode::Quorum;
  if (s == "admin") return Mode::Admin;
  throw std::invalid_argument("unknown access-control backend: " + s);
}

void ConflictSet::add(const Bytes& a, const Bytes& b) {
  pairs_.emplace(a, b);
  pairs_.emplace(b, a);
}

bool ConflictSet::conflicts(const Bytes& a, const Bytes& b) const { return pairs_.contains({a, b}); }

// ---- Certificates ----------------------------------------------------------

Bytes AcCertificate::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(mode)).bytes(value);
  if (mode == Mode::Admin) {
    w.u32(static_cast<std::uint32_t>(admin_sigs.size()));
    for (const auto& [p, sig] : admin_sigs) w.str(p).bytes(sig);
  } else {
    history.encode(w);
    w.bytes(history_cert);
    wire::encode_acks(w, approvals);
    wire::encode_acks(w, confirms);
  }
  return w.take();
}

AcCertificate AcCertificate::decode(ByteView b) {
  Reader r(b);
  AcCertificate c;
  const auto m = r.u8();
  if (m < 1 || m > 3) throw DecodeError("bad access-control mode");
  c.mode = static_cast<Mode>(m);
  c.value = r.bytes();
  if (c.mode == Mode::Admin) {
    const auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      auto p = r.str();
      auto sig = r.bytes();
      if (!c.admin_sigs.emplace(std::move(p), std::move(sig)).second) throw DecodeError("duplicate admin");
    }
  } else {
    c.history = lattice::History::decode(r);
    c.history_cert = r.bytes();
    c.approvals = wire::decode_acks(r);
    c.confirms = wire::decode_acks(r);
  }
  r.expect_done();
  return c;
}

namespace {

std::size_t approval_threshold(Mode mode, const lattice::Configuration& c) {
  return mode == Mode::Quorum ? c.quorum_size() : c.max_faulty() + 1;
}

bool valid_sigs(const Verifier& verifier, const lattice::Configuration& c, const Bytes& statement,
                const wire::AckMap& acks) {
  for (const auto& [p, sig] : acks)
    if (!c.is_member(p) || sig.signer != p || !verifier.fs().fs_verify(statement, p, sig, c.height())) return false;
  return true;
}

bool check_cert(Verifier& verifier, const Policy& policy, ByteView value, const AcCertificate& c) {
  if (c.mode != policy.mode || !std::equal(value.begin(), value.end(), c.value.begin(), c.value.end())) return false;
  if (c.mode == Mode::Admin) {
    std::size_t good = 0;
    const auto stmt = wire::admin_statement(value);
    for (const auto& [p, sig] : c.admin_sigs)
      if (std::find(policy.admins.begin(), policy.admins.end(), p) != policy.admins.end() &&
          verifier.plain().plain_verify(stmt, p, sig))
        ++good;
    return good >= policy.admin_faulty() + 1;
  }
  if (!verifier.verify_history(c.history, c.history_cert)) return false;
  const auto& cfg = lattice::max_element(c.history);
  if (c.approvals.size() < approval_threshold(c.mode, cfg)) return false;
  if (!valid_sigs(verifier, cfg, wire::ac_approve_statement(kAcObject, cfg, value), c.approvals)) return false;
  lattice::ProcessSet confirmers;
  for (const auto& [p, _] : c.confirms) confirmers.insert(p);
  if (!cfg.is_quorum(confirmers)) return false;
  return valid_sigs(verifier, cfg, wire::ac_confirm_statement(kAcObject, cfg, value, c.approvals), c.confirms);
}

}  // namespace

bool verify_cert(Verifier& verifier, const Policy& policy, ByteView value, ByteView cert) {
  Writer key;
  key.str("ac").u8(static_cast<std::uint8_t>(policy.mode)).bytes(value).bytes(cert);
  for (const auto& a : policy.admins) key.str(a);
  return verifier.memo(hash(key.view()), [&] {
    try {
      return check_cert(verifier, policy, value, AcCertificate::decode(cert));
    } catch (const DecodeError&) {
      return false;
    }
  });
}

// ---- Replica ---------------------------------------------------------------

AcState::AcState(Mode mode, DenyPredicate deny, ConflictSet conflicts)
    : mode_(mode), deny_(std::move(deny)), conflicts_(std::move(conflicts)) {}

Bytes AcState::snapshot() const {
  Writer w;
  w.u32(static_cast<std::uint32_t>(approved_.size()));
  for (const auto& v : approved_) w.bytes(v);
  return w.take();
}

void AcState::absorb(sim::Context&, Verifier&, ByteView snapshot) {
  Reader r(snapshot);
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) approved_.insert(r.bytes());
  r.expect_done();
}

bool AcState::refuses(const Bytes& value) const {
  if (deny_ && deny_(value)) return true;
  if (mode_ != Mode::Quorum) return false;
  return std::any_of(approved_.begin(), approved_.end(),
                     [&](const Bytes& prior) { return conflicts_.conflicts(prior, value); });
}

void AcState::on_request(sim::Context& ctx, dyn::ReplicaCore&, const ProcessId& from, const wire::ClientFrame& f) {
  Reader r(f.body);
  if (f.desc == wire::Desc::AcRequest) {
    const auto value = r.bytes();
    r.expect_done();
    if (refuses(value)) {
      ctx.send(from, wire::client_frame(kAcObject, wire::Desc::AcDeny, f.sn, f.config, {}));
      return;
    }
    auto sig = ctx.fs_sign(wire::ac_approve_statement(kAcObject, f.config, value), f.config.height());
    if (!sig) return;
    if (mode_ == Mode::Quorum) approved_.insert(value);
    Writer body;
    sig->encode(body);
    ctx.send(from, wire::client_frame(kAcObject, wire::Desc::AcApprove, f.sn, f.config, body.view()));
  } else if (f.desc == wire::Desc::AcConfirm) {
    const auto value = r.bytes();
    const auto approvals = wire::decode_acks(r);
    r.expect_done();
    auto sig = ctx.fs_sign(wire::ac_confirm_statement(kAcObject, f.config, value, approvals), f.config.height());
    if (!sig) return;
    Writer body;
    sig->encode(body);
    ctx.send(from, wire::client_frame(kAcObject, wire::Desc::AcConfirmResp, f.sn, f.config, body.view()));
  }
}

dyn::Service admin_service(DenyPredicate deny) {
  return [deny = std::move(deny)](sim::Context& ctx, dyn::Node&, const ProcessId& from, const wire::ClientFrame& f) {
    if (f.desc != wire::Desc::AdminRequest) return;
    Reader r(f.body);
    const auto value = r.bytes();
    r.expect_done();
    if (deny && deny(value)) {
      ctx.send(from, wire::client_frame(kAdminObject, wire::Desc::AdminDeny, f.sn, f.config, {}));
      return;
    }
    Writer body;
    body.bytes(ctx.plain_sign(wire::admin_statement(value)));
    ctx.send(from, wire::client_frame(kAdminObject, wire::Desc::AdminApprove, f.sn, f.config, body.view()));
  };
}

// ---- Client ------------------------------------------------------------------

AcClient::AcClient(dyn::Node& node, Policy policy, bool serve_ops)
    : node_(node), policy_(std::move(policy)), serve_ops_(serve_ops) {}

std::optional<std::uint8_t> AcClient::object_id() const {
  return policy_.mode == Mode::Admin ? kAdminObject : kAcObject;
}

std::size_t AcClient::threshold() const {
  if (policy_.mode == Mode::Admin) return policy_.admin_faulty() + 1;
  return approval_threshold(policy_.mode, config_);
}

std::size_t AcClient::electorate() const {
  return policy_.mode == Mode::Admin ? policy_.admins.size() : config_.replicas().size();
}

void AcClient::request(sim::Context& ctx, Bytes value, Done done) {
  if (active()) throw std::logic_error("a request is already running");
  value_ = std::move(value);
  done_ = std::move(done);
  start_round(ctx);
}

void AcClient::start_round(sim::Context& ctx) {
  phase_ = Phase::Approving;
  config_ = node_.highest();
  ++sn_;
  approvals_.clear();
  confirms_.clear();
  admin_sigs_.clear();
  denies_.clear();
  Writer body;
  body.bytes(value_);
  if (policy_.mode == Mode::Admin) {
    const auto msg = wire::client_frame(kAdminObject, wire::Desc::AdminRequest, sn_, config_, body.view());
    for (const auto& a : policy_.admins) ctx.send(a, msg);
    return;
  }
  const auto msg = wire::client_frame(kAcObject, wire::Desc::AcRequest, sn_, config_, body.view());
  for (const auto& p : config_.replicas()) ctx.send(p, msg);
}

void AcClient::on_history(sim::Context& ctx) {
  // Administrators do not depend on the configuration.
  if (!active() || policy_.mode == Mode::Admin || node_.highest() == config_) return;
  ctx.upcall("Restart", {{"object", kAcObject}});
  start_round(ctx);
}

void AcClient::on_reply(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f) {
  if (!active() || f.sn != sn_ || f.config != config_) return;
  Reader r(f.body);
  if (policy_.mode == Mode::Admin) {
    if (std::find(policy_.admins.begin(), policy_.admins.end(), from) == policy_.admins.end()) return;
    if (admin_sigs_.contains(from) || denies_.contains(from)) return;
    if (f.desc == wire::Desc::AdminDeny) {
      denies_.insert(from);
    } else if (f.desc == wire::Desc::AdminApprove) {
      auto sig = r.bytes();
      r.expect_done();
      if (!ctx.plain().plain_verify(wire::admin_statement(value_), from, sig)) return;
      admin_sigs_.emplace(from, std::move(sig));
      if (admin_sigs_.size() >= threshold()) {
        AcCertificate c;
        c.mode = Mode::Admin;
        c.value = value_;
        c.admin_sigs = admin_sigs_;
        finish(ctx, c.encode());
        return;
      }
    }
    if (electorate() - denies_.size() < threshold()) finish(ctx, std::nullopt);
    return;
  }

  if (!config_.is_member(from)) return;
  if (phase_ == Phase::Approving) {
    if (approvals_.contains(from) || denies_.contains(from)) return;
    if (f.desc == wire::Desc::AcDeny) {
      denies_.insert(from);
      if (electorate() - denies_.size() < threshold()) finish(ctx, std::nullopt);
      return;
    }
    if (f.desc != wire::Desc::AcApprove) return;
    auto sig = crypto::FsSignature::decode(r);
    r.expect_done();
    if (sig.signer != from ||
        !ctx.fs().fs_verify(wire::ac_approve_statement(kAcObject, config_, value_), from, sig, config_.height()))
      return;
    approvals_.emplace(from, std::move(sig));
    if (approvals_.size() < threshold()) return;
    phase_ = Phase::Confirming;
    Writer body;
    body.bytes(value_);
    wire::encode_acks(body, approvals_);
    const auto msg = wire::client_frame(kAcObject, wire::Desc::AcConfirm, sn_, config_, body.view());
    for (const auto& p : config_.replicas()) ctx.send(p, msg);
  } else if (phase_ == Phase::Confirming && f.desc == wire::Desc::AcConfirmResp) {
    auto sig = crypto::FsSignature::decode(r);
    r.expect_done();
    if (sig.signer != from ||
        !ctx.fs().fs_verify(wire::ac_confirm_statement(kAcObject, config_, value_, approvals_), from, sig,
                            config_.height()))
      return;
    confirms_.emplace(from, std::move(sig));
    lattice::ProcessSet who;
    for (const auto& [p, _] : confirms_) who.insert(p);
    if (!config_.is_quorum(who)) return;
    AcCertificate c;
    c.mode = policy_.mode;
    c.value = value_;
    c.history = node_.history();
    c.history_cert = node_.history_cert();
    c.approvals = approvals_;
    c.confirms = confirms_;
    finish(ctx, c.encode());
  }
}

void AcClient::finish(sim::Context& ctx, std::optional<Bytes> cert) {
  phase_ = Phase::Idle;
  auto done = std::move(done_);
  done_ = nullptr;
  done(ctx, std::move(cert));
}

bool AcClient::start(sim::Context& ctx, const sim::Operation& op) {
  if (!serve_ops_ || op.name != "request") return false;
  if (op.args.size() != 1) throw std::invalid_argument("request takes one value");
  const auto value = as_bytes(op.args[0]);
  request(ctx, Bytes(value.begin(), value.end()), [this, v = Bytes(value.begin(), value.end())](
                                                      sim::Context& c, std::optional<Bytes> cert) {
    node_.finish_operation(c, result_json(node_.verifier(), policy_, v, cert));
  });
  return true;
}

sim::json result_json(Verifier& verifier, const Policy& policy, const Bytes& value, const std::optional<Bytes>& cert) {
  sim::json out;
  out["value"] = std::string(value.begin(), value.end());
  out["backend"] = to_string(policy.mode);
  if (!cert) {
    out["status"] = "denied";
    out["verified"] = false;
    return out;
  }
  out["status"] = "certified";
  out["verified"] = verify_cert(verifier, policy, value, *cert);
  out["cert"] = to_hex(verifier.store().put(*cert));
  const auto c = AcCertificate::decode(*cert);
  auto approvals = sim::json::array();
  if (c.mode == Mode::Admin) {
    const auto digest = hex_digest(wire::admin_statement(value));
    for (const auto& [p, _] : c.admin_sigs) approvals.push_back({{"signer", p}, {"statement", digest}});
  } else {
    const auto& cfg = lattice::max_element(c.history);
    const auto digest = hex_digest(wire::ac_approve_statement(kAcObject, cfg, value));
    for (const auto& [p, sig] : c.approvals)
      approvals.push_back({{"signer", p}, {"statement", digest}, {"timestamp", sig.timestamp}});
    out["config_hex"] = dyn::config_hex(cfg);
  }
  out["approvals"] = approvals;
  return out;
}

}  // namespace dynbft::ac
