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

#include "dynbft/dynamic.hpp"

namespace dynbft::dyn {

std::string config_hex(const Configuration& c) { return to_hex(c.encode()); }

Configuration config_from_hex(const std::string& hex) {
  const auto bytes = from_hex(hex);
  Reader r(bytes);
  auto c = Configuration::decode(r);
  r.expect_done();
  return c;
}

bool is_request(wire::Desc d) {
  switch (d) {
    case wire::Desc::Propose:
    case wire::Desc::Confirm:
    case wire::Desc::Get:
    case wire::Desc::Set:
    case wire::Desc::AcRequest:
    case wire::Desc::AcConfirm:
    case wire::Desc::AdminRequest:
      return true;
    default:
      return false;
  }
}

// ---- ReplicaCore ---------------------------------------------------------

ReplicaCore::ReplicaCore(Node& node) : node_(node), cinst_(node.verifier().c0()), ccurr_(node.verifier().c0()) {}

void ReplicaCore::add_object(std::unique_ptr<ObjectState> obj) {
  const auto id = obj->object_id();
  objects_[id] = std::move(obj);
}

ObjectState* ReplicaCore::object(std::uint8_t id) {
  auto it = objects_.find(id);
  return it == objects_.end() ? nullptr : it->second.get();
}

Configuration ReplicaCore::highest() const { return node_.highest(); }

Gate ReplicaCore::gate(const ProcessId& self, const Configuration& c) const {
  const auto& h = node_.highest();
  if (c.lt(h)) return Gate::Drop;
  if (!c.comparable(h) || !c.comparable(cinst_)) return Gate::Drop;
  if (c == cinst_ && c == ccurr_ && c == h) return c.is_member(self) ? Gate::Serve : Gate::Drop;
  return Gate::Wait;
}

void ReplicaCore::on_request(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f,
                             ByteView payload) {
  auto* obj = object(f.object);
  if (obj == nullptr) return;
  switch (gate(ctx.self(), f.config)) {
    case Gate::Serve:
      obj->on_request(ctx, *this, from, f);
      break;
    case Gate::Wait:
      waiting_requests_.push_back({from, Bytes(payload.begin(), payload.end())});
      break;
    case Gate::Drop:
      break;
  }
}

void ReplicaCore::regate(sim::Context& ctx) {
  if (in_regate_) {
    regate_again_ = true;
    return;
  }
  in_regate_ = true;
  do {
    regate_again_ = false;
    auto requests = std::move(waiting_requests_);
    waiting_requests_.clear();
    for (auto& p : requests) {
      const auto f = wire::parse_client_frame(p.payload);
      auto* obj = object(f.object);
      switch (gate(ctx.self(), f.config)) {
        case Gate::Serve:
          obj->on_request(ctx, *this, p.from, f);
          break;
        case Gate::Wait:
          waiting_requests_.push_back(std::move(p));
          break;
        case Gate::Drop:
          break;
      }
    }
    auto reads = std::move(waiting_reads_);
    waiting_reads_.clear();
    const auto h = highest();
    for (auto& p : reads) {
      if (p.config.lt(h)) {
        answer_update_read(ctx, p.from, p.sn, p.config);
      } else if (p.config.comparable(h)) {
        waiting_reads_.push_back(std::move(p));
      }
    }
  } while (regate_again_);
  in_regate_ = false;
}

void ReplicaCore::on_update_read(sim::Context& ctx, const ProcessId& from, Reader& r) {
  const auto sn = r.u64();
  auto c = Configuration::decode(r);
  r.expect_done();
  const auto h = highest();
  // Answer only once keys have moved past height(c).
  if (c.lt(h)) {
    answer_update_read(ctx, from, sn, c);
  } else if (c.comparable(h)) {
    waiting_reads_.push_back({from, sn, std::move(c)});
  }
}

void ReplicaCore::answer_update_read(sim::Context& ctx, const ProcessId& to, std::uint64_t sn,
                                     const Configuration& c) {
  auto w = wire::begin(wire::kCoreObject, wire::Desc::UpdateReadResp);
  w.u64(sn);
  c.encode(w);
  w.u32(static_cast<std::uint32_t>(objects_.size()));
  for (const auto& [id, obj] : objects_) w.u8(id).bytes(obj->snapshot());
  ctx.send(to, w.take());
}

void ReplicaCore::on_update_read_resp(sim::Context& ctx, const ProcessId& from, Reader& r) {
  const auto sn = r.u64();
  const auto c = Configuration::decode(r);
  if (!reading_ || sn != reading_->sn || c != reading_->config) return;
  if (!c.is_member(from) || reading_->responders.contains(from)) return;
  const auto n = r.u32();
  std::vector<std::pair<std::uint8_t, ByteView>> parts;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto id = r.u8();
    parts.emplace_back(id, r.bytes_view());
  }
  r.expect_done();
  for (const auto& [id, snap] : parts) {
    auto* obj = object(id);
    if (obj == nullptr) continue;
    try {
      obj->absorb(ctx, node_.verifier(), snap);
    } catch (const DecodeError&) {
      // A malformed snapshot contributes nothing.
    }
  }
  reading_->responders.insert(from);
  if (c.is_quorum(reading_->responders)) {
    read_upto_ = c;
    reading_.reset();
    advance(ctx);
  }
}

std::optional<Configuration> ReplicaCore::next_config(const ProcessId& self) const {
  const auto& cs = node_.history().configs();
  for (auto it = cs.rbegin(); it != cs.rend(); ++it)
    if (it->is_member(self)) return *it;
  return std::nullopt;
}

void ReplicaCore::advance(sim::Context& ctx) {
  for (;;) {
    const auto cnext = next_config(ctx.self());
    if (!cnext || !ccurr_.lt(*cnext)) {
      reading_.reset();
      return;
    }
    std::optional<Configuration> target;
    for (const auto& c : node_.history().configs()) {
      if (!ccurr_.leq(c) || !c.lt(*cnext)) continue;
      if (read_upto_ && c.leq(*read_upto_)) continue;
      target = c;
      break;
    }
    if (!target) {
      ccurr_ = *cnext;
      reading_.reset();
      if (completion_sent_.insert(*cnext).second) {
        auto w = wire::begin(wire::kCoreObject, wire::Desc::UpdateComplete);
        cnext->encode(w);
        node_.broadcaster().urb_broadcast(ctx, w.take(), *cnext);
      }
      try_install(ctx);
      regate(ctx);
      continue;
    }
    if (reading_ && reading_->config == *target) return;
    reading_ = Read{*target, ++sn_, {}};
    configs_read_.insert(*target);
    ctx.upcall("UpdateRead", {{"config", target->to_string()}, {"config_hex", config_hex(*target)}});
    auto w = wire::begin(wire::kCoreObject, wire::Desc::UpdateRead);
    w.u64(reading_->sn);
    target->encode(w);
    const auto msg = w.take();
    for (const auto& p : target->replicas()) ctx.send(p, msg);
    return;
  }
}

void ReplicaCore::try_install(sim::Context& ctx) {
  bool changed = false;
  for (const auto& c : node_.history().configs()) {
    if (!cinst_.lt(c)) continue;
    auto it = update_complete_.find(c);
    if (it == update_complete_.end() || !c.is_quorum(it->second)) continue;
    cinst_ = c;
    if (ccurr_.lt(c)) ccurr_ = c;
    changed = true;
    ctx.upcall("InstalledConfig", {{"config", c.to_string()}, {"config_hex", config_hex(c)}, {"height", c.height()}});
  }
  if (changed) {
    advance(ctx);
    regate(ctx);
  }
}

void ReplicaCore::on_update_complete(sim::Context& ctx, const ProcessId& origin, const Configuration& c) {
  if (!c.is_member(origin)) return;
  update_complete_[c].insert(origin);
  try_install(ctx);
}

void ReplicaCore::on_history(sim::Context& ctx) {
  try_install(ctx);
  advance(ctx);
  regate(ctx);
}

// ---- Node ----------------------------------------------------------------

Node::Node(std::shared_ptr<Verifier> verifier, bool replica)
    : verifier_(std::move(verifier)),
      broadcaster_([this](sim::Context& ctx, const broadcast::Delivery& d) { on_rb(ctx, d); },
                   [this](sim::Context& ctx, const broadcast::Delivery& d) { on_urb(ctx, d); }),
      history_(verifier_->genesis()),
      history_cert_(genesis_history_cert()) {
  if (replica) core_ = std::make_unique<ReplicaCore>(*this);
}

void Node::add_client(std::shared_ptr<ClientModule> module) { clients_.push_back(std::move(module)); }

void Node::add_service(std::uint8_t object, Service service) { services_[object] = std::move(service); }

Bytes Node::new_history_payload(const History& h, ByteView cert) {
  auto w = wire::begin(wire::kCoreObject, wire::Desc::NewHistory);
  h.encode(w);
  w.bytes(cert);
  return w.take();
}

bool Node::update_history(sim::Context& ctx, const History& h, ByteView cert) {
  if (!verifier_->verify_history(h, cert)) return false;
  broadcaster_.rb_broadcast(ctx, new_history_payload(h, cert));
  return true;
}

bool Node::adopt_history(sim::Context& ctx, const History& h, ByteView cert) {
  if (!history_.strict_subset_of(h)) return false;
  if (!verifier_->verify_history(h, cert)) return false;
  history_ = h;
  history_cert_.assign(cert.begin(), cert.end());
  const auto& top = lattice::max_element(history_);
  if (core_) ctx.update_fs_keys(top.height());
  ctx.upcall("NewHistory", {{"history", history_.to_string()},
                            {"history_hex", to_hex(history_.encode())},
                            {"max_hex", config_hex(top)}});
  if (core_) core_->on_history(ctx);
  for (auto& c : clients_) c->on_history(ctx);
  return true;
}

void Node::on_rb(sim::Context& ctx, const broadcast::Delivery& d) {
  Reader r(d.payload);
  const auto h = wire::read_header(r);
  if (h.object != wire::kCoreObject || h.desc != wire::Desc::NewHistory) return;
  auto hist = History::decode(r);
  const auto cert = r.bytes();
  r.expect_done();
  adopt_history(ctx, hist, cert);
}

void Node::on_urb(sim::Context& ctx, const broadcast::Delivery& d) {
  if (!core_ || !d.config) return;
  Reader r(d.payload);
  const auto h = wire::read_header(r);
  if (h.object != wire::kCoreObject || h.desc != wire::Desc::UpdateComplete) return;
  const auto c = Configuration::decode(r);
  r.expect_done();
  if (c != *d.config) return;
  core_->on_update_complete(ctx, d.origin, c);
}

void Node::on_message(sim::Context& ctx, const ProcessId& from, ByteView payload) {
  try {
    dispatch(ctx, from, payload);
  } catch (const DecodeError&) {
    // Malformed messages are dropped.
  }
}

void Node::dispatch(sim::Context& ctx, const ProcessId& from, ByteView payload) {
  Reader r(payload);
  const auto h = wire::read_header(r);
  if (broadcaster_.handle(ctx, from, h, r)) return;
  if (h.object == wire::kCoreObject) {
    if (!core_) return;
    if (h.desc == wire::Desc::UpdateRead) core_->on_update_read(ctx, from, r);
    if (h.desc == wire::Desc::UpdateReadResp) core_->on_update_read_resp(ctx, from, r);
    return;
  }
  const auto f = wire::parse_client_frame(payload);
  if (is_request(f.desc)) {
    auto it = services_.find(f.object);
    if (it != services_.end()) {
      it->second(ctx, *this, from, f);
    } else if (core_) {
      core_->on_request(ctx, from, f, payload);
    }
    return;
  }
  for (auto& c : clients_)
    if (c->object_id() == f.object) c->on_reply(ctx, from, f);
}

void Node::on_invoke(sim::Context& ctx, const sim::Operation& op) {
  queue_.push_back(op);
  start_next(ctx);
}

void Node::start_next(sim::Context& ctx) {
  while (!active_ && !queue_.empty()) {
    active_ = queue_.front();
    queue_.pop_front();
    const auto op = *active_;
    ctx.client_invoked(op);
    bool started = false;
    for (auto& c : clients_) {
      if (c->start(ctx, op)) {
        started = true;
        break;
      }
    }
    if (!started) finish_operation(ctx, {{"error", "unsupported operation"}});
  }
}

void Node::finish_operation(sim::Context& ctx, json result) {
  if (!active_) return;
  const auto op = *active_;
  active_.reset();
  ctx.client_return(op, std::move(result));
  start_next(ctx);
}

}  // namespace dynbft::dyn
