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

#include "dynbft/maxreg.hpp"

#include <charconv>
#include <stdexcept>

#include "dynbft/dbla.hpp"

namespace dynbft::maxreg {

bool verify_cell(Verifier& verifier, std::uint8_t object, const Cell& cell) {
  if (cell.value == 0) return cell.cert.empty();
  return verifier.verify_input(object, wire::InputValue{lattice::FinSet{cell.value}, cell.cert});
}

Bytes encode_cell(const Cell& cell) {
  Writer w;
  w.u64(cell.value).bytes(cell.cert);
  return w.take();
}

Cell decode_cell(Reader& r) {
  Cell c;
  c.value = r.u64();
  c.cert = r.bytes();
  return c;
}

// ---- Replica ---------------------------------------------------------------

void MaxRegState::store(sim::Context& ctx, Cell cell) {
  if (cell.value <= cell_.value) return;
  cell_ = std::move(cell);
  ctx.upcall("CellUpdate", {{"value", cell_.value}});
}

void MaxRegState::absorb(sim::Context& ctx, Verifier& verifier, ByteView snapshot) {
  Reader r(snapshot);
  auto cell = decode_cell(r);
  r.expect_done();
  if (cell.value > cell_.value && verify_cell(verifier, object_, cell)) store(ctx, std::move(cell));
}

void MaxRegState::on_request(sim::Context& ctx, dyn::ReplicaCore& core, const ProcessId& from,
                             const wire::ClientFrame& f) {
  Reader r(f.body);
  if (f.desc == wire::Desc::Get) {
    r.expect_done();
    ctx.send(from, wire::client_frame(object_, wire::Desc::GetResp, f.sn, f.config, encode_cell(cell_)));
  } else if (f.desc == wire::Desc::Set) {
    auto cell = decode_cell(r);
    r.expect_done();
    if (!verify_cell(core.node().verifier(), object_, cell)) return;
    auto sig = ctx.fs_sign(wire::set_resp_statement(object_, f.config, cell.value, cell.cert), f.config.height());
    store(ctx, cell);
    if (!sig) return;
    Writer body;
    sig->encode(body);
    ctx.send(from, wire::client_frame(object_, wire::Desc::SetResp, f.sn, f.config, body.view()));
  }
}

// ---- Client ------------------------------------------------------------------

bool MaxRegClient::start(sim::Context& ctx, const sim::Operation& op) {
  if (op.name == "write") {
    if (op.args.size() != 1) throw std::invalid_argument("write takes one value");
    const auto v = dbla::parse_ids(op.args).ids().at(0);
    if (v == 0) throw std::invalid_argument("write of the bottom value");
    const lattice::LatticeValue lv = lattice::FinSet{v};
    const auto sig = ctx.plain_sign(client_input_statement(object_, lv));
    op_ = Op::Write;
    target_ = Cell{v, client_input_cert(ctx.self(), sig)};
  } else if (op.name == "read") {
    op_ = Op::Read;
  } else {
    return false;
  }
  begin(ctx);
  return true;
}

void MaxRegClient::begin(sim::Context& ctx) {
  config_ = node_.highest();
  if (op_ == Op::Write) {
    begin_set(ctx, target_);
    return;
  }
  phase_ = Phase::Get;
  ++sn_;
  replies_.clear();
  target_ = Cell{};
  const auto msg = wire::client_frame(object_, wire::Desc::Get, sn_, config_, {});
  for (const auto& p : config_.replicas()) ctx.send(p, msg);
}

void MaxRegClient::begin_set(sim::Context& ctx, Cell cell) {
  phase_ = Phase::Set;
  ++sn_;
  acks_.clear();
  target_ = std::move(cell);
  const auto msg = wire::client_frame(object_, wire::Desc::Set, sn_, config_, encode_cell(target_));
  for (const auto& p : config_.replicas()) ctx.send(p, msg);
}

void MaxRegClient::on_history(sim::Context& ctx) {
  if (op_ == Op::None || node_.highest() == config_) return;
  ++restarts_;
  ctx.upcall("Restart", {{"object", object_}});
  begin(ctx);
}

void MaxRegClient::on_reply(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f) {
  if (op_ == Op::None || f.sn != sn_ || f.config != config_ || !config_.is_member(from)) return;
  Reader r(f.body);
  if (f.desc == wire::Desc::GetResp && phase_ == Phase::Get) {
    auto cell = decode_cell(r);
    r.expect_done();
    if (replies_.contains(from) || !verify_cell(node_.verifier(), object_, cell)) return;
    replies_.emplace(from, std::move(cell));
    lattice::ProcessSet who;
    for (const auto& [p, _] : replies_) who.insert(p);
    if (!config_.is_quorum(who)) return;
    Cell best;
    for (const auto& [_, c] : replies_)
      if (c.value > best.value || (best.value == 0 && c.value == 0)) best = c;
    begin_set(ctx, std::move(best));
  } else if (f.desc == wire::Desc::SetResp && phase_ == Phase::Set) {
    auto sig = crypto::FsSignature::decode(r);
    r.expect_done();
    if (sig.signer != from) return;
    const auto stmt = wire::set_resp_statement(object_, config_, target_.value, target_.cert);
    if (!ctx.fs().fs_verify(stmt, from, sig, config_.height())) return;
    acks_.insert(from);
    if (config_.is_quorum(acks_)) finish(ctx);
  }
}

void MaxRegClient::finish(sim::Context& ctx) {
  const auto v = target_.value;
  op_ = Op::None;
  phase_ = Phase::Idle;
  node_.finish_operation(ctx, {{"value", v}, {"config_hex", dyn::config_hex(config_)}});
}

}  // namespace dynbft::maxreg
