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

#ifndef DYNBFT_ACCESS_CONTROL_HPP_
#define DYNBFT_ACCESS_CONTROL_HPP_

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dynbft/dynamic.hpp"

/// Access control: certificates that some authority approved a value.
///
/// Three backends:
///
///   sanity  b+1 replicas of the current configuration approve with
///           forward-secure signatures, then a confirm round proves the
///           configuration was still active.
///   quorum  as sanity, but a full quorum must approve and replicas refuse
///           values that conflict with anything they approved before.
///   admin   b+1 of a static set of administrators plain-sign the value.
///
/// Dynamic message bodies (object id kAcObject):
///
///   AcRequest      value:bytes
///   AcApprove      signature
///   AcDeny         (empty)
///   AcConfirm      value:bytes approvals
///   AcConfirmResp  signature
///
/// Admin message bodies (object id kAdminObject):
///
///   AdminRequest   value:bytes
///   AdminApprove   sig:bytes
///   AdminDeny      (empty)
namespace dynbft::ac {

using lattice::ProcessId;

inline constexpr std::uint8_t kAcObject = 4;
inline constexpr std::uint8_t kAdminObject = 5;

enum class Mode : std::uint8_t { Sanity = 1, Quorum = 2, Admin = 3 };

std::string to_string(Mode m);
/// Throws std::invalid_argument.
Mode mode_from_string(const std::string& s);

/// Symmetric conflict relation over values.
class ConflictSet {
 public:
  void add(const Bytes& a, const Bytes& b);
  bool conflicts(const Bytes& a, const Bytes& b) const;
  const std::set<std::pair<Bytes, Bytes>>& pairs() const { return pairs_; }

 private:
  std::set<std::pair<Bytes, Bytes>> pairs_;
};

/// Returns true when a replica or administrator refuses the value.
using DenyPredicate = std::function<bool(ByteView value)>;

struct Policy {
  Mode mode = Mode::Sanity;
  std::vector<ProcessId> admins;  // admin mode only

  /// b for the administrator set.
  std::size_t admin_faulty() const { return admins.empty() ? 0 : (admins.size() - 1) / 3; }
};

struct AcCertificate {
  Mode mode = Mode::Sanity;
  Bytes value;
  // Dynamic backends.
  lattice::History history;
  Bytes history_cert;
  wire::AckMap approvals;
  wire::AckMap confirms;
  // Admin backend.
  std::map<ProcessId, Bytes> admin_sigs;

  Bytes encode() const;
  /// Throws DecodeError.
  static AcCertificate decode(ByteView b);
};

/// Pure check of a certificate against a value. Memoised in the verifier.
bool verify_cert(Verifier& verifier, const Policy& policy, ByteView value, ByteView cert);

/// Replica side of the dynamic backends.
class AcState final : public dyn::ObjectState {
 public:
  AcState(Mode mode, DenyPredicate deny, ConflictSet conflicts);

  std::uint8_t object_id() const override { return kAcObject; }
  Bytes snapshot() const override;
  void absorb(sim::Context& ctx, Verifier& verifier, ByteView snapshot) override;
  void on_request(sim::Context& ctx, dyn::ReplicaCore& core, const ProcessId& from,
                  const wire::ClientFrame& f) override;

  const std::set<Bytes>& approved() const { return approved_; }

 private:
  bool refuses(const Bytes& value) const;

  Mode mode_;
  DenyPredicate deny_;
  ConflictSet conflicts_;
  std::set<Bytes> approved_;  // quorum mode: every value this replica approved
};

/// Handler for administrator processes (gating-free).
dyn::Service admin_service(DenyPredicate deny);

/// Client side. With `serve_ops` it implements the scenario operation
/// `request VALUE`.
class AcClient final : public dyn::ClientModule {
 public:
  using Done = std::function<void(sim::Context&, std::optional<Bytes> cert)>;

  AcClient(dyn::Node& node, Policy policy, bool serve_ops);

  void request(sim::Context& ctx, Bytes value, Done done);
  bool active() const { return phase_ != Phase::Idle; }

  std::optional<std::uint8_t> object_id() const override;
  void on_reply(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f) override;
  void on_history(sim::Context& ctx) override;
  bool start(sim::Context& ctx, const sim::Operation& op) override;

 private:
  enum class Phase { Idle, Approving, Confirming };

  void start_round(sim::Context& ctx);
  std::size_t threshold() const;
  std::size_t electorate() const;
  void finish(sim::Context& ctx, std::optional<Bytes> cert);

  dyn::Node& node_;
  Policy policy_;
  bool serve_ops_;
  Phase phase_ = Phase::Idle;
  Bytes value_;
  std::uint64_t sn_ = 0;
  lattice::Configuration config_;
  wire::AckMap approvals_;
  wire::AckMap confirms_;
  std::map<ProcessId, Bytes> admin_sigs_;
  std::set<ProcessId> denies_;
  Done done_;
};

/// Trace summary of a request outcome.
sim::json result_json(Verifier& verifier, const Policy& policy, const Bytes& value, const std::optional<Bytes>& cert);

}  // namespace dynbft::ac

#endif  // DYNBFT_ACCESS_CONTROL_HPP_
