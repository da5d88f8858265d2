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

#ifndef DYNBFT_HARNESS_TRACE_HPP_
#define DYNBFT_HARNESS_TRACE_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "dynbft/simnet.hpp"

/// JSONL trace files.
///
///   {"type":"header", ...run parameters and the scenario text...}
///   {"type":"event", ...one simulator event...}          one per step
///   {"type":"ledger", "scheme":"fs"|"plain", ...}        one per signature
///   {"type":"footer", "status", "steps", "messages_sent", "trace_hash"}
///
/// The trace hash is the SHA-256 of the event and ledger lines, each
/// followed by a newline, in file order.
namespace dynbft::harness {

using lattice::ProcessId;

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trace {
  sim::json header;
  std::vector<sim::TraceEvent> events;
  std::vector<crypto::IssuanceRecord> ledger;
  sim::json footer;
};

std::string event_line(const sim::TraceEvent& e);
std::string ledger_line(const crypto::IssuanceRecord& r);
std::string compute_trace_hash(const Trace& t);

std::string to_jsonl(const Trace& t);
/// Throws TraceError on malformed input.
Trace parse_trace(const std::string& text);
Trace read_trace(const std::string& path);
void write_trace(const std::string& path, const Trace& t);

}  // namespace dynbft::harness

#endif  // DYNBFT_HARNESS_TRACE_HPP_
