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

#ifndef DYNBFT_DBLA_HPP_
#define DYNBFT_DBLA_HPP_

#include <functional>
#include <optional>

#include "dynbft/dynamic.hpp"

/// Dynamic Byzantine Lattice Agreement.
///
/// Client: refine loop (Propose until a quorum returns exactly the client's
/// value set, each signed at height(C)), then one Confirm round whose
/// forward-secure acks prove C was still active.
///
/// Message bodies (after the client frame):
///
///   Propose      values
///   ProposeResp  values signature
///   Confirm      acks
///   ConfirmResp  signature
namespace dynbft::dbla {

using lattice::LatticeValue;
using lattice::ProcessId;
using wire::InputValue;
using wire::OutputCertificate;

/// Replica-side value set of one DBLA instance.
class DblaState final : public dyn::ObjectState {
 public:
  explicit DblaState(std::uint8_t object) : object_(object) {}

  std::uint8_t object_id() const override { return object_; }
  Bytes snapshot() const override { return values_.encode(); }
  void absorb(sim::Context& ctx, Verifier& verifier, ByteView snapshot) override;
  void on_request(sim::Context& ctx, dyn::ReplicaCore& core, const ProcessId& from,
                  const wire::ClientFrame& f) override;

  const wire::ValueSet& values() const { return values_; }

 private:
  std::uint8_t object_;
  wire::ValueSet values_;
};

/// Client side. Runs at most one propose at a time.
class DblaClient final : public dyn::ClientModule {
 public:
  using Done = std::function<void(sim::Context&, const LatticeValue&, const OutputCertificate&)>;

  /// `seed`, if given, is added to every proposal (used to pin the genesis
  /// value into every output). With `serve_ops` the module also implements
  /// the scenario operation `propose ID...` over the finite-set lattice.
  DblaClient(dyn::Node& node, std::uint8_t object, std::optional<InputValue> seed, bool serve_ops);

  void propose(sim::Context& ctx, InputValue v, Done done);
  bool active() const { return phase_ != Phase::Idle; }
  std::uint64_t restarts() const { return restarts_; }

  std::optional<std::uint8_t> object_id() const override { return object_; }
  void on_reply(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f) override;
  void on_history(sim::Context& ctx) override;
  bool start(sim::Context& ctx, const sim::Operation& op) override;

 private:
  enum class Phase { Idle, Refining, Confirming };

  void start_round(sim::Context& ctx);
  void on_propose_resp(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f);
  void on_confirm_resp(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f);

  dyn::Node& node_;
  std::uint8_t object_;
  std::optional<InputValue> seed_;
  bool serve_ops_;
  Phase phase_ = Phase::Idle;
  wire::ValueSet values_;
  std::uint64_t sn_ = 0;
  lattice::Configuration config_;
  wire::AckMap propose_acks_;
  wire::AckMap confirm_acks_;
  Done done_;
  std::uint64_t restarts_ = 0;
};

/// True iff every value verifies, w is their join, the history verifies and
/// both ack sets are quorums of valid signatures at height(max(history)).
bool verify_output_value(Verifier& verifier, std::uint8_t object, const LatticeValue& w,
                         const OutputCertificate& tau);
/// Same, over the encoded certificate; false on malformed bytes.
bool verify_output_value(Verifier& verifier, std::uint8_t object, const LatticeValue& w, ByteView tau);

/// Parses `propose` arguments: value ids, each a decimal u64.
lattice::FinSet parse_ids(const std::vector<std::string>& args);

/// Summary of a propose result for the trace.
sim::json output_json(Verifier& verifier, std::uint8_t object, const LatticeValue& w, const OutputCertificate& tau);

}  // namespace dynbft::dbla

#endif  // DYNBFT_DBLA_HPP_
