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

#ifndef DYNBFT_MAXREG_HPP_
#define DYNBFT_MAXREG_HPP_

#include "dynbft/dynamic.hpp"

/// Dynamic Byzantine max-register over u64 values with bottom 0.
///
/// write(v) repeats set(v) until a quorum of one configuration acks with
/// forward-secure signatures at its height. read() runs get (unsigned
/// replies from a quorum) and writes the maximum back; the write-back must
/// succeed in the configuration the get ran in.
///
/// Message bodies (after the client frame):
///
///   Get      (empty)
///   GetResp  value:u64 cert:bytes
///   Set      value:u64 cert:bytes
///   SetResp  signature
///
/// A value certificate is an input certificate for the singleton id set
/// {value}; the bottom value 0 needs no certificate.
namespace dynbft::maxreg {

using lattice::ProcessId;

struct Cell {
  std::uint64_t value = 0;
  Bytes cert;
};

bool verify_cell(Verifier& verifier, std::uint8_t object, const Cell& cell);
Bytes encode_cell(const Cell& cell);
Cell decode_cell(Reader& r);

class MaxRegState final : public dyn::ObjectState {
 public:
  explicit MaxRegState(std::uint8_t object) : object_(object) {}

  std::uint8_t object_id() const override { return object_; }
  Bytes snapshot() const override { return encode_cell(cell_); }
  void absorb(sim::Context& ctx, Verifier& verifier, ByteView snapshot) override;
  void on_request(sim::Context& ctx, dyn::ReplicaCore& core, const ProcessId& from,
                  const wire::ClientFrame& f) override;

  const Cell& cell() const { return cell_; }

 private:
  void store(sim::Context& ctx, Cell cell);

  std::uint8_t object_;
  Cell cell_;
};

/// Implements scenario operations `write V` and `read`.
class MaxRegClient final : public dyn::ClientModule {
 public:
  MaxRegClient(dyn::Node& node, std::uint8_t object) : node_(node), object_(object) {}

  std::optional<std::uint8_t> object_id() const override { return object_; }
  void on_reply(sim::Context& ctx, const ProcessId& from, const wire::ClientFrame& f) override;
  void on_history(sim::Context& ctx) override;
  bool start(sim::Context& ctx, const sim::Operation& op) override;

  std::uint64_t restarts() const { return restarts_; }

 private:
  enum class Op { None, Write, Read };
  enum class Phase { Idle, Get, Set };

  void begin(sim::Context& ctx);
  void begin_set(sim::Context& ctx, Cell cell);
  void finish(sim::Context& ctx);

  dyn::Node& node_;
  std::uint8_t object_;
  Op op_ = Op::None;
  Phase phase_ = Phase::Idle;
  Cell target_;  // value being written, or the best value seen by get
  std::uint64_t sn_ = 0;
  lattice::Configuration config_;
  std::map<ProcessId, Cell> replies_;
  lattice::ProcessSet acks_;
  std::uint64_t restarts_ = 0;
};

}  // namespace dynbft::maxreg

#endif  // DYNBFT_MAXREG_HPP_
