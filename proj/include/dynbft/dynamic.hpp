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

#ifndef DYNBFT_DYNAMIC_HPP_
#define DYNBFT_DYNAMIC_HPP_

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dynbft/broadcast.hpp"
#include "dynbft/simnet.hpp"
#include "dynbft/verifier.hpp"
#include "dynbft/wire.hpp"

/// Machinery shared by every dynamic object: history adoption, request
/// gating, state transfer and installation on the replica side; history
/// tracking and operation sequencing on the client side.
namespace dynbft::dyn {

using lattice::Configuration;
using lattice::History;
using lattice::ProcessId;
using sim::json;

class Node;
class ReplicaCore;

/// Replica-side state of one dynamic object.
class ObjectState {
 public:
  virtual ~ObjectState() = default;
  virtual std::uint8_t object_id() const = 0;
  /// State handed to replicas performing state transfer.
  virtual Bytes snapshot() const = 0;
  /// Merges a snapshot received during state transfer. Must validate it.
  virtual void absorb(sim::Context& ctx, Verifier& verifier, ByteView snapshot) = 0;
  /// A request admitted by gating: its configuration is installed, current
  /// and highest here, and this replica is a member.
  virtual void on_request(sim::Context& ctx, ReplicaCore& core, const ProcessId& from,
                          const wire::ClientFrame& f) = 0;
};

/// Client side of an object: consumes replies and drives operations.
class ClientModule {
 public:
  virtual ~ClientModule() = default;
  /// Object id whose replies this module consumes, if any.
  virtual std::optional<std::uint8_t> object_id() const { return std::nullopt; }
  virtual void on_reply(sim::Context&, const ProcessId&, const wire::ClientFrame&) {}
  /// Called after the node adopted a larger history.
  virtual void on_history(sim::Context&) {}
  /// Starts `op` if this module implements it. Completion is reported
  /// through Node::finish_operation.
  virtual bool start(sim::Context&, const sim::Operation&) { return false; }
};

/// Handler for messages that bypass gating (e.g. static administrators).
using Service = std::function<void(sim::Context&, Node&, const ProcessId&, const wire::ClientFrame&)>;

/// Whether a request may be served now.
enum class Gate { Serve, Wait, Drop };

class ReplicaCore {
 public:
  explicit ReplicaCore(Node& node);

  void add_object(std::unique_ptr<ObjectState> obj);
  ObjectState* object(std::uint8_t id);

  const Configuration& installed() const { return cinst_; }
  const Configuration& current() const { return ccurr_; }
  Configuration highest() const;
  Gate gate(const ProcessId& self, const Configuration& c) const;

  void on_history(sim::Context& ctx);
  void on_update_complete(sim::Context& ctx, const ProcessId& origin, const Configuration& c);
  void on_update_read(sim::Context& ctx, const ProcessId& from, Reader& r);
  void on_update_read_resp(sim::Context& ctx, const ProcessId& from, Reader& r);
  void on_request(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f, ByteView payload);

  Node& node() { return node_; }

  /// Configurations this replica has read from during state transfer.
  const std::set<Configuration>& configs_read() const { return configs_read_; }

 private:
  struct Read {
    Configuration config;
    std::uint64_t sn = 0;
    lattice::ProcessSet responders;
  };
  struct Pending {
    ProcessId from;
    Bytes payload;
  };
  struct PendingRead {
    ProcessId from;
    std::uint64_t sn = 0;
    Configuration config;
  };

  std::optional<Configuration> next_config(const ProcessId& self) const;
  void advance(sim::Context& ctx);
  void try_install(sim::Context& ctx);
  void regate(sim::Context& ctx);
  void answer_update_read(sim::Context& ctx, const ProcessId& to, std::uint64_t sn, const Configuration& c);

  Node& node_;
  std::map<std::uint8_t, std::unique_ptr<ObjectState>> objects_;
  Configuration cinst_;
  Configuration ccurr_;
  std::optional<Configuration> read_upto_;
  std::optional<Read> reading_;
  std::uint64_t sn_ = 0;
  std::map<Configuration, lattice::ProcessSet> update_complete_;
  std::set<Configuration> completion_sent_;
  std::set<Configuration> configs_read_;
  std::deque<Pending> waiting_requests_;
  std::deque<PendingRead> waiting_reads_;
  bool in_regate_ = false;
  bool regate_again_ = false;
};

/// One simulated process. Hosts the broadcast endpoint, the adopted history,
/// an optional replica core, client modules and gating-free services.
class Node : public sim::Automaton {
 public:
  Node(std::shared_ptr<Verifier> verifier, bool replica);

  Verifier& verifier() { return *verifier_; }
  const std::shared_ptr<Verifier>& verifier_ptr() const { return verifier_; }
  bool is_replica() const { return core_ != nullptr; }
  ReplicaCore& core() { return *core_; }
  broadcast::Broadcaster& broadcaster() { return broadcaster_; }

  const History& history() const { return history_; }
  const Bytes& history_cert() const { return history_cert_; }
  const Configuration& highest() const { return lattice::max_element(history_); }

  void add_client(std::shared_ptr<ClientModule> module);
  void add_service(std::uint8_t object, Service service);

  /// Verifies and broadcasts a history. False (and nothing sent) if the
  /// certificate does not verify.
  bool update_history(sim::Context& ctx, const History& h, ByteView cert);
  /// Adopts `h` if it verifies and strictly contains the local history.
  bool adopt_history(sim::Context& ctx, const History& h, ByteView cert);

  void finish_operation(sim::Context& ctx, json result);
  bool busy() const { return active_.has_value(); }
  const std::optional<sim::Operation>& active_operation() const { return active_; }

  void on_message(sim::Context& ctx, const ProcessId& from, ByteView payload) override;
  void on_invoke(sim::Context& ctx, const sim::Operation& op) override;

  /// Payload of a NewHistory broadcast.
  static Bytes new_history_payload(const History& h, ByteView cert);

 private:
  void dispatch(sim::Context& ctx, const ProcessId& from, ByteView payload);
  void on_rb(sim::Context& ctx, const broadcast::Delivery& d);
  void on_urb(sim::Context& ctx, const broadcast::Delivery& d);
  void start_next(sim::Context& ctx);

  std::shared_ptr<Verifier> verifier_;
  broadcast::Broadcaster broadcaster_;
  std::unique_ptr<ReplicaCore> core_;
  History history_;
  Bytes history_cert_;
  std::vector<std::shared_ptr<ClientModule>> clients_;
  std::map<std::uint8_t, Service> services_;
  std::deque<sim::Operation> queue_;
  std::optional<sim::Operation> active_;
};

/// Canonical hex of a configuration, used in trace details.
std::string config_hex(const Configuration& c);
Configuration config_from_hex(const std::string& hex);

/// True for descriptors that clients send to replicas.
bool is_request(wire::Desc d);

}  // namespace dynbft::dyn

#endif  // DYNBFT_DYNAMIC_HPP_
