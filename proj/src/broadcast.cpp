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

#include "dynbft/broadcast.hpp"

namespace dynbft::broadcast {

namespace {

std::string key_of(const Digest& d) { return std::string(d.begin(), d.end()); }

std::string short_id(const Digest& d) { return to_hex(ByteView(d.data(), 8)); }

}  // namespace

Digest Broadcaster::rb_id(const ProcessId& origin, ByteView payload) {
  Writer w;
  w.str("rb").str(origin).bytes(payload);
  return hash(w.view());
}

Digest Broadcaster::urb_id(const ProcessId& origin, const Configuration& c, ByteView payload) {
  Writer w;
  w.str("urb").str(origin);
  c.encode(w);
  w.bytes(payload);
  return hash(w.view());
}

Bytes Broadcaster::rb_envelope(sim::Context& ctx, ByteView payload) {
  auto w = wire::begin(wire::kCoreObject, wire::Desc::Rb);
  w.str(ctx.self()).bytes(payload).bytes(ctx.plain_sign(wire::rb_statement(payload)));
  return w.take();
}

void Broadcaster::rb_broadcast(sim::Context& ctx, Bytes payload) {
  const auto id = rb_id(ctx.self(), payload);
  ctx.upcall("RbBroadcast", {{"id", short_id(id)}});
  const auto envelope = rb_envelope(ctx, payload);
  for (const auto& p : ctx.roster())
    if (p != ctx.self()) ctx.send(p, envelope);
  rb_deliver(ctx, ctx.self(), payload, id);
}

void Broadcaster::rb_deliver(sim::Context& ctx, const ProcessId& origin, ByteView payload, const Digest& id) {
  if (!rb_seen_.insert(key_of(id)).second) return;
  ctx.upcall("RbDeliver", {{"id", short_id(id)}, {"origin", origin}});
  on_rb_(ctx, Delivery{origin, Bytes(payload.begin(), payload.end()), std::nullopt});
}

void Broadcaster::on_rb(sim::Context& ctx, const ProcessId& from, Reader& r) {
  const auto origin = r.str();
  const auto payload = r.bytes();
  const auto sig = r.bytes();
  r.expect_done();
  const auto id = rb_id(origin, payload);
  if (rb_seen_.contains(key_of(id))) return;
  if (!ctx.plain().plain_verify(wire::rb_statement(payload), origin, sig)) return;
  // Gossip before delivering so that forwarding does not depend on what the
  // upper layer does with the message.
  auto w = wire::begin(wire::kCoreObject, wire::Desc::Rb);
  w.str(origin).bytes(payload).bytes(sig);
  const auto envelope = w.take();
  for (const auto& p : ctx.roster())
    if (p != ctx.self() && p != from && p != origin) ctx.send(p, envelope);
  rb_deliver(ctx, origin, payload, id);
}

void Broadcaster::urb_broadcast(sim::Context& ctx, Bytes payload, const Configuration& c) {
  if (!c.is_member(ctx.self())) return;
  auto w = wire::begin(wire::kCoreObject, wire::Desc::UrbSend);
  w.str(ctx.self());
  c.encode(w);
  w.bytes(payload);
  const auto msg = w.take();
  for (const auto& p : c.replicas()) ctx.send(p, msg);
}

Broadcaster::UrbInstance& Broadcaster::instance(const ProcessId& origin, const Configuration& c, ByteView payload,
                                                Digest& id) {
  id = urb_id(origin, c, payload);
  auto [it, fresh] = urb_.try_emplace(key_of(id));
  if (fresh) {
    it->second.origin = origin;
    it->second.config = c;
    it->second.payload.assign(payload.begin(), payload.end());
  }
  return it->second;
}

void Broadcaster::on_urb_send(sim::Context& ctx, const ProcessId& from, Reader& r) {
  const auto origin = r.str();
  const auto c = Configuration::decode(r);
  const auto payload = r.bytes();
  r.expect_done();
  if (from != origin || !c.is_member(origin) || !c.is_member(ctx.self())) return;
  Digest id;
  auto& inst = instance(origin, c, payload, id);
  if (inst.echoed) return;
  inst.echoed = true;
  auto w = wire::begin(wire::kCoreObject, wire::Desc::UrbEcho);
  w.str(origin);
  c.encode(w);
  w.bytes(payload).bytes(ctx.plain_sign(wire::urb_echo_statement(id)));
  const auto msg = w.take();
  for (const auto& p : c.replicas()) ctx.send(p, msg);
}

void Broadcaster::on_urb_echo(sim::Context& ctx, const ProcessId& from, Reader& r) {
  const auto origin = r.str();
  const auto c = Configuration::decode(r);
  const auto payload = r.bytes();
  const auto sig = r.bytes();
  r.expect_done();
  if (!c.is_member(from) || !c.is_member(ctx.self())) return;
  Digest id;
  auto& inst = instance(origin, c, payload, id);
  if (inst.delivered || inst.echoes.contains(from)) return;
  if (!ctx.plain().plain_verify(wire::urb_echo_statement(id), from, sig)) return;
  inst.echoes.emplace(from, sig);
  lattice::ProcessSet signers;
  for (const auto& [p, _] : inst.echoes) signers.insert(p);
  if (c.is_quorum(signers)) urb_deliver(ctx, id, inst);
}

void Broadcaster::on_urb_cert(sim::Context& ctx, const ProcessId&, Reader& r) {
  const auto origin = r.str();
  const auto c = Configuration::decode(r);
  const auto payload = r.bytes();
  const auto n = r.u32();
  std::map<ProcessId, Bytes> echoes;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto signer = r.str();
    auto sig = r.bytes();
    echoes.emplace(std::move(signer), std::move(sig));
  }
  r.expect_done();
  if (!c.is_member(ctx.self())) return;
  Digest id;
  auto& inst = instance(origin, c, payload, id);
  if (inst.delivered) return;
  lattice::ProcessSet valid;
  for (const auto& [p, sig] : echoes)
    if (c.is_member(p) && ctx.plain().plain_verify(wire::urb_echo_statement(id), p, sig)) valid.insert(p);
  if (!c.is_quorum(valid)) return;
  for (const auto& p : valid) inst.echoes.emplace(p, echoes.at(p));
  urb_deliver(ctx, id, inst);
}

void Broadcaster::urb_deliver(sim::Context& ctx, const Digest& id, UrbInstance& inst) {
  inst.delivered = true;
  auto w = wire::begin(wire::kCoreObject, wire::Desc::UrbCert);
  w.str(inst.origin);
  inst.config.encode(w);
  w.bytes(inst.payload).u32(static_cast<std::uint32_t>(inst.echoes.size()));
  for (const auto& [p, sig] : inst.echoes) w.str(p).bytes(sig);
  const auto msg = w.take();
  for (const auto& p : inst.config.replicas())
    if (p != ctx.self()) ctx.send(p, msg);
  ctx.upcall("UrbDeliver", {{"id", short_id(id)}, {"origin", inst.origin}, {"config", inst.config.to_string()}});
  on_urb_(ctx, Delivery{inst.origin, inst.payload, inst.config});
}

bool Broadcaster::handle(sim::Context& ctx, const ProcessId& from, const wire::Header& h, Reader& r) {
  if (h.object != wire::kCoreObject) return false;
  switch (h.desc) {
    case wire::Desc::Rb:
      on_rb(ctx, from, r);
      return true;
    case wire::Desc::UrbSend:
      on_urb_send(ctx, from, r);
      return true;
    case wire::Desc::UrbEcho:
      on_urb_echo(ctx, from, r);
      return true;
    case wire::Desc::UrbCert:
      on_urb_cert(ctx, from, r);
      return true;
    default:
      return false;
  }
}

}  // namespace dynbft::broadcast
