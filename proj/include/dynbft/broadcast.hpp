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

#ifndef DYNBFT_BROADCAST_HPP_
#define DYNBFT_BROADCAST_HPP_

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "dynbft/simnet.hpp"
#include "dynbft/wire.hpp"

namespace dynbft::broadcast {

using lattice::Configuration;
using lattice::ProcessId;

struct Delivery {
  ProcessId origin;
  Bytes payload;
  std::optional<Configuration> config;  // set for URB deliveries
};

/// Global reliable broadcast (gossip of origin-signed envelopes) and
/// per-configuration uniform reliable broadcast (signed echoes, delivery on
/// a quorum of echoes, then forwarding of the echo certificate).
///
/// Wire formats, after the `0 descriptor` header:
///
///   RB        origin:str payload:bytes sig:bytes
///   URB-SEND  origin:str config payload:bytes
///   URB-ECHO  origin:str config payload:bytes sig:bytes
///   URB-CERT  origin:str config payload:bytes count:u32 (signer:str sig:bytes)*
class Broadcaster {
 public:
  using Handler = std::function<void(sim::Context&, const Delivery&)>;

  Broadcaster(Handler on_rb, Handler on_urb) : on_rb_(std::move(on_rb)), on_urb_(std::move(on_urb)) {}

  /// Delivers locally at once and gossips to every other process.
  void rb_broadcast(sim::Context& ctx, Bytes payload);
  /// Requires self in replicas(c); otherwise a no-op.
  void urb_broadcast(sim::Context& ctx, Bytes payload, const Configuration& c);

  /// Consumes broadcast traffic. Returns false for any other descriptor.
  /// Malformed or badly signed messages are dropped.
  bool handle(sim::Context& ctx, const ProcessId& from, const wire::Header& h, Reader& r);

  static Digest rb_id(const ProcessId& origin, ByteView payload);
  static Digest urb_id(const ProcessId& origin, const Configuration& c, ByteView payload);

  // Envelope builders, also used by adversary scripts.
  static Bytes rb_envelope(sim::Context& ctx, ByteView payload);

 private:
  struct UrbInstance {
    ProcessId origin;
    Configuration config;
    Bytes payload;
    std::map<ProcessId, Bytes> echoes;
    bool echoed = false;
    bool delivered = false;
  };

  void on_rb(sim::Context& ctx, const ProcessId& from, Reader& r);
  void on_urb_send(sim::Context& ctx, const ProcessId& from, Reader& r);
  void on_urb_echo(sim::Context& ctx, const ProcessId& from, Reader& r);
  void on_urb_cert(sim::Context& ctx, const ProcessId& from, Reader& r);
  UrbInstance& instance(const ProcessId& origin, const Configuration& c, ByteView payload, Digest& id);
  void urb_deliver(sim::Context& ctx, const Digest& id, UrbInstance& inst);
  void rb_deliver(sim::Context& ctx, const ProcessId& origin, ByteView payload, const Digest& id);

  Handler on_rb_;
  Handler on_urb_;
  std::set<std::string> rb_seen_;
  std::map<std::string, UrbInstance> urb_;
};

}  // namespace dynbft::broadcast

#endif  // DYNBFT_BROADCAST_HPP_
