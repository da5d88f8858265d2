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

#ifndef DYNBFT_WIRE_HPP_
#define DYNBFT_WIRE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "dynbft/bytes.hpp"
#include "dynbft/fscrypto.hpp"
#include "dynbft/lattice.hpp"

/// Message framing and signed statements.
///
/// Every payload starts with `object:u8 descriptor:u8`. Object 0 is the
/// per-process core (broadcast, history, state transfer); other ids name the
/// dynamic objects hosted by a replica. Requests and replies of objects use
/// the client frame
///
///   object:u8 descriptor:u8 sn:u64 configuration body...
///
/// Signed statements start with a fixed ASCII tag and always name the object
/// id and the configuration, so a signature cannot be replayed in another
/// object or configuration.
namespace dynbft::wire {

using lattice::Configuration;
using lattice::History;
using lattice::LatticeValue;
using lattice::ProcessId;

inline constexpr std::uint8_t kCoreObject = 0;

enum class Desc : std::uint8_t {
  Rb = 1,
  UrbSend = 2,
  UrbEcho = 3,
  UrbCert = 4,
  NewHistory = 10,
  UpdateRead = 11,
  UpdateReadResp = 12,
  UpdateComplete = 13,
  Propose = 20,
  ProposeResp = 21,
  Confirm = 22,
  ConfirmResp = 23,
  Get = 30,
  GetResp = 31,
  Set = 32,
  SetResp = 33,
  AcRequest = 40,
  AcApprove = 41,
  AcDeny = 42,
  AcConfirm = 43,
  AcConfirmResp = 44,
  AdminRequest = 50,
  AdminApprove = 51,
  AdminDeny = 52,
};

std::string to_string(Desc d);
/// Throws DecodeError on an unknown descriptor byte.
Desc desc_from_byte(std::uint8_t b);

struct Header {
  std::uint8_t object = 0;
  Desc desc = Desc::Rb;
};

Header read_header(Reader& r);
Writer begin(std::uint8_t object, Desc d);

/// Trace descriptor of a payload, e.g. "Propose", "RB:NewHistory" or
/// "URB-ECHO:UpdateComplete". Never throws; malformed payloads map to "?".
std::string describe(ByteView payload);

struct ClientFrame {
  std::uint8_t object = 0;
  Desc desc = Desc::Propose;
  std::uint64_t sn = 0;
  Configuration config;
  ByteView body;
};

Bytes client_frame(std::uint8_t object, Desc d, std::uint64_t sn, const Configuration& c, ByteView body);
/// Throws DecodeError.
ClientFrame parse_client_frame(ByteView payload);

/// A lattice value with its input certificate.
struct InputValue {
  LatticeValue value;
  Bytes cert;

  Bytes encode() const;
  static InputValue decode(Reader& r);
};

/// Set of input values, deduplicated and ordered by canonical encoding.
class ValueSet {
 public:
  /// True if the value was not present.
  bool insert(const InputValue& v);
  bool contains(const InputValue& v) const;
  bool includes(const ValueSet& o) const;
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::map<Bytes, InputValue>& items() const { return items_; }

  /// Join of every member. Throws std::logic_error when empty.
  LatticeValue join_all() const;

  void encode(Writer& w) const;
  Bytes encode() const;
  static ValueSet decode(Reader& r);
  bool operator==(const ValueSet& o) const;

 private:
  std::map<Bytes, InputValue> items_;
};

using AckMap = std::map<ProcessId, crypto::FsSignature>;

void encode_acks(Writer& w, const AckMap& acks);
/// Rejects duplicate or out-of-order signers and signatures whose signer
/// field disagrees with the key.
AckMap decode_acks(Reader& r);

/// Evidence that an output value was produced in a pivotal configuration.
struct OutputCertificate {
  ValueSet values;
  History history;
  Bytes history_cert;
  AckMap propose_acks;
  AckMap confirm_acks;

  void encode(Writer& w) const;
  Bytes encode() const;
  static OutputCertificate decode(Reader& r);
  static OutputCertificate from_bytes(ByteView b);
};

/// How a history is certified.
enum class HistoryCertKind : std::uint8_t { Genesis = 0, Authority = 1, Output = 2 };

/// Genesis: no payload. Authority: signer + plain signature over the
/// history. Output: digest of an output certificate held in the CertStore.
struct HistoryCert {
  HistoryCertKind kind = HistoryCertKind::Genesis;
  ProcessId signer;
  Bytes payload;

  Bytes encode() const;
  static HistoryCert decode(ByteView b);
};

// ---- Signed statements ----------------------------------------------------

Bytes propose_resp_statement(std::uint8_t object, const Configuration& c, const ValueSet& values);
Bytes confirm_resp_statement(std::uint8_t object, const Configuration& c, const AckMap& propose_acks);
Bytes set_resp_statement(std::uint8_t object, const Configuration& c, std::uint64_t value, ByteView cert);
Bytes ac_approve_statement(std::uint8_t object, const Configuration& c, ByteView value);
Bytes ac_confirm_statement(std::uint8_t object, const Configuration& c, ByteView value, const AckMap& approvals);
Bytes admin_statement(ByteView value);
Bytes client_input_statement(std::uint8_t object, ByteView value);
Bytes authority_history_statement(const History& h);
Bytes rb_statement(ByteView payload);
Bytes urb_echo_statement(const Digest& id);

}  // namespace dynbft::wire

#endif  // DYNBFT_WIRE_HPP_
