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

#include "dynbft/wire.hpp"

#include <stdexcept>

namespace dynbft::wire {

std::string to_string(Desc d) {
  switch (d) {
    case Desc::Rb:
      return "RB";
    case Desc::UrbSend:
      return "URB-SEND";
    case Desc::UrbEcho:
      return "URB-ECHO";
    case Desc::UrbCert:
      return "URB-CERT";
    case Desc::NewHistory:
      return "NewHistory";
    case Desc::UpdateRead:
      return "UpdateRead";
    case Desc::UpdateReadResp:
      return "UpdateReadResp";
    case Desc::UpdateComplete:
      return "UpdateComplete";
    case Desc::Propose:
      return "Propose";
    case Desc::ProposeResp:
      return "ProposeResp";
    case Desc::Confirm:
      return "Confirm";
    case Desc::ConfirmResp:
      return "ConfirmResp";
    case Desc::Get:
      return "Get";
    case Desc::GetResp:
      return "GetResp";
    case Desc::Set:
      return "Set";
    case Desc::SetResp:
      return "SetResp";
    case Desc::AcRequest:
      return "AcRequest";
    case Desc::AcApprove:
      return "AcApprove";
    case Desc::AcDeny:
      return "AcDeny";
    case Desc::AcConfirm:
      return "AcConfirm";
    case Desc::AcConfirmResp:
      return "AcConfirmResp";
    case Desc::AdminRequest:
      return "AdminRequest";
    case Desc::AdminApprove:
      return "AdminApprove";
    case Desc::AdminDeny:
      return "AdminDeny";
  }
  return "?";
}

Desc desc_from_byte(std::uint8_t b) {
  const auto d = static_cast<Desc>(b);
  if (to_string(d) == "?") throw DecodeError("unknown descriptor");
  return d;
}

Header read_header(Reader& r) {
  Header h;
  h.object = r.u8();
  h.desc = desc_from_byte(r.u8());
  return h;
}

Writer begin(std::uint8_t object, Desc d) {
  Writer w;
  w.u8(object).u8(static_cast<std::uint8_t>(d));
  return w;
}

std::string describe(ByteView payload) {
  try {
    Reader r(payload);
    const auto h = read_header(r);
    std::string name = to_string(h.desc);
    if (h.object == kCoreObject) {
      if (h.desc == Desc::Rb) {
        r.str();
        return name + ":" + describe(r.bytes_view());
      }
      if (h.desc == Desc::UrbSend || h.desc == Desc::UrbEcho || h.desc == Desc::UrbCert) {
        r.str();
        Configuration::decode(r);
        return name + ":" + describe(r.bytes_view());
      }
    }
    return name;
  } catch (const DecodeError&) {
    return "?";
  }
}

Bytes client_frame(std::uint8_t object, Desc d, std::uint64_t sn, const Configuration& c, ByteView body) {
  auto w = begin(object, d);
  w.u64(sn);
  c.encode(w);
  w.raw(body);
  return w.take();
}

ClientFrame parse_client_frame(ByteView payload) {
  Reader r(payload);
  const auto h = read_header(r);
  ClientFrame f;
  f.object = h.object;
  f.desc = h.desc;
  f.sn = r.u64();
  f.config = Configuration::decode(r);
  f.body = r.take_rest();
  return f;
}

// ---- InputValue / ValueSet ----------------------------------------------

Bytes InputValue::encode() const {
  Writer w;
  w.bytes(lattice::canonical_bytes(value)).bytes(cert);
  return w.take();
}

InputValue InputValue::decode(Reader& r) {
  InputValue v;
  v.value = lattice::from_canonical_bytes(r.bytes_view());
  v.cert = r.bytes();
  return v;
}

bool ValueSet::insert(const InputValue& v) { return items_.emplace(v.encode(), v).second; }

bool ValueSet::contains(const InputValue& v) const { return items_.contains(v.encode()); }

bool ValueSet::includes(const ValueSet& o) const {
  for (const auto& [k, _] : o.items_)
    if (!items_.contains(k)) return false;
  return true;
}

LatticeValue ValueSet::join_all() const {
  if (items_.empty()) throw std::logic_error("join of an empty value set");
  auto it = items_.begin();
  LatticeValue acc = it->second.value;
  for (++it; it != items_.end(); ++it) acc = lattice::join(acc, it->second.value);
  return acc;
}

void ValueSet::encode(Writer& w) const {
  w.u32(static_cast<std::uint32_t>(items_.size()));
  for (const auto& [k, _] : items_) w.bytes(k);
}

Bytes ValueSet::encode() const {
  Writer w;
  encode(w);
  return w.take();
}

ValueSet ValueSet::decode(Reader& r) {
  ValueSet s;
  const auto n = r.u32();
  const Bytes* prev = nullptr;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto view = r.bytes_view();
    Reader er(view);
    auto v = InputValue::decode(er);
    er.expect_done();
    auto [it, fresh] = s.items_.emplace(Bytes(view.begin(), view.end()), std::move(v));
    if (!fresh || (prev && !(*prev < it->first))) throw DecodeError("non-canonical value set");
    if (it->second.encode() != it->first) throw DecodeError("non-canonical input value");
    prev = &it->first;
  }
  return s;
}

bool ValueSet::operator==(const ValueSet& o) const {
  if (items_.size() != o.items_.size()) return false;
  auto a = items_.begin();
  auto b = o.items_.begin();
  for (; a != items_.end(); ++a, ++b)
    if (a->first != b->first) return false;
  return true;
}

// ---- Acks / certificates --------------------------------------------------

void encode_acks(Writer& w, const AckMap& acks) {
  w.u32(static_cast<std::uint32_t>(acks.size()));
  for (const auto& [_, sig] : acks) sig.encode(w);
}

AckMap decode_acks(Reader& r) {
  AckMap acks;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto sig = crypto::FsSignature::decode(r);
    if (!acks.empty() && !(acks.rbegin()->first < sig.signer)) throw DecodeError("non-canonical ack order");
    acks.emplace(sig.signer, std::move(sig));
  }
  return acks;
}

void OutputCertificate::encode(Writer& w) const {
  values.encode(w);
  history.encode(w);
  w.bytes(history_cert);
  encode_acks(w, propose_acks);
  encode_acks(w, confirm_acks);
}

Bytes OutputCertificate::encode() const {
  Writer w;
  encode(w);
  return w.take();
}

OutputCertificate OutputCertificate::decode(Reader& r) {
  OutputCertificate c;
  c.values = ValueSet::decode(r);
  c.history = History::decode(r);
  c.history_cert = r.bytes();
  c.propose_acks = decode_acks(r);
  c.confirm_acks = decode_acks(r);
  return c;
}

OutputCertificate OutputCertificate::from_bytes(ByteView b) {
  Reader r(b);
  auto c = decode(r);
  r.expect_done();
  return c;
}

Bytes HistoryCert::encode() const {
  Writer w;
  w.u8(static_cast<std::uint8_t>(kind)).str(signer).bytes(payload);
  return w.take();
}

HistoryCert HistoryCert::decode(ByteView b) {
  Reader r(b);
  HistoryCert c;
  const auto k = r.u8();
  if (k > static_cast<std::uint8_t>(HistoryCertKind::Output)) throw DecodeError("unknown history cert kind");
  c.kind = static_cast<HistoryCertKind>(k);
  c.signer = r.str();
  c.payload = r.bytes();
  r.expect_done();
  return c;
}

// ---- Statements -----------------------------------------------------------

namespace {

Writer statement(std::string_view tag, std::uint8_t object, const Configuration& c) {
  Writer w;
  w.str(tag).u8(object);
  c.encode(w);
  return w;
}

}  // namespace

Bytes propose_resp_statement(std::uint8_t object, const Configuration& c, const ValueSet& values) {
  auto w = statement("ProposeResp", object, c);
  values.encode(w);
  return w.take();
}

Bytes confirm_resp_statement(std::uint8_t object, const Configuration& c, const AckMap& propose_acks) {
  auto w = statement("ConfirmResp", object, c);
  encode_acks(w, propose_acks);
  return w.take();
}

Bytes set_resp_statement(std::uint8_t object, const Configuration& c, std::uint64_t value, ByteView cert) {
  auto w = statement("SetResp", object, c);
  w.u64(value).bytes(cert);
  return w.take();
}

Bytes ac_approve_statement(std::uint8_t object, const Configuration& c, ByteView value) {
  auto w = statement("AcApprove", object, c);
  w.bytes(value);
  return w.take();
}

Bytes ac_confirm_statement(std::uint8_t object, const Configuration& c, ByteView value, const AckMap& approvals) {
  auto w = statement("AcConfirmResp", object, c);
  w.bytes(value);
  encode_acks(w, approvals);
  return w.take();
}

Bytes admin_statement(ByteView value) {
  Writer w;
  w.str("AdminApprove").bytes(value);
  return w.take();
}

Bytes client_input_statement(std::uint8_t object, ByteView value) {
  Writer w;
  w.str("Input").u8(object).bytes(value);
  return w.take();
}

Bytes authority_history_statement(const History& h) {
  Writer w;
  w.str("History");
  h.encode(w);
  return w.take();
}

Bytes rb_statement(ByteView payload) {
  Writer w;
  w.str("RB").bytes(payload);
  return w.take();
}

Bytes urb_echo_statement(const Digest& id) {
  Writer w;
  w.str("URB-ECHO").raw(id);
  return w.take();
}

}  // namespace dynbft::wire
