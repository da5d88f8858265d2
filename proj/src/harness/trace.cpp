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

#include "dynbft/harness/trace.hpp"

#include <fstream>
#include <sstream>

#include <sodium.h>

namespace dynbft::harness {

std::string event_line(const sim::TraceEvent& e) {
  auto j = sim::to_json(e);
  j["type"] = "event";
  return j.dump();
}

std::string ledger_line(const crypto::IssuanceRecord& r) {
  const sim::json j{{"type", "ledger"},
                    {"scheme", r.kind == crypto::SchemeKind::Fs ? "fs" : "plain"},
                    {"signer", r.signer},
                    {"timestamp", r.timestamp},
                    {"message", to_hex(r.message)},
                    {"signature", to_hex(r.signature)},
                    {"step", r.step}};
  return j.dump();
}

std::string compute_trace_hash(const Trace& t) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  auto feed = [&](const std::string& line) {
    crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>(line.data()), line.size());
    crypto_hash_sha256_update(&st, reinterpret_cast<const unsigned char*>("\n"), 1);
  };
  for (const auto& e : t.events) feed(event_line(e));
  for (const auto& r : t.ledger) feed(ledger_line(r));
  Digest d{};
  crypto_hash_sha256_final(&st, d.data());
  return to_hex(d);
}

std::string to_jsonl(const Trace& t) {
  std::string out;
  auto header = t.header;
  header["type"] = "header";
  out += header.dump() + "\n";
  for (const auto& e : t.events) out += event_line(e) + "\n";
  for (const auto& r : t.ledger) out += ledger_line(r) + "\n";
  auto footer = t.footer;
  footer["type"] = "footer";
  out += footer.dump() + "\n";
  return out;
}

Trace parse_trace(const std::string& text) {
  Trace t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false, footer = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto where = "trace line " + std::to_string(lineno) + ": ";
    if (footer) throw TraceError(where + "content after footer");
    try {
      auto j = sim::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (!header && type != "header") throw TraceError(where + "expected header");
      if (type == "header") {
        if (header) throw TraceError(where + "duplicate header");
        header = true;
        t.header = std::move(j);
      } else if (type == "event") {
        auto e = sim::trace_event_from_json(j);
        if (e.step != t.events.size()) throw TraceError(where + "step indices are not dense");
        t.events.push_back(std::move(e));
      } else if (type == "ledger") {
        crypto::IssuanceRecord r;
        r.kind = j.at("scheme").get<std::string>() == "fs" ? crypto::SchemeKind::Fs : crypto::SchemeKind::Plain;
        r.signer = j.at("signer").get<std::string>();
        r.timestamp = j.at("timestamp").get<std::uint64_t>();
        const auto m = from_hex(j.at("message").get<std::string>());
        if (m.size() != r.message.size()) throw TraceError(where + "bad message digest");
        std::copy(m.begin(), m.end(), r.message.begin());
        r.signature = from_hex(j.at("signature").get<std::string>());
        r.step = j.at("step").get<std::uint64_t>();
        t.ledger.push_back(std::move(r));
      } else if (type == "footer") {
        footer = true;
        t.footer = std::move(j);
      } else {
        throw TraceError(where + "unknown line type " + type);
      }
    } catch (const TraceError&) {
      throw;
    } catch (const std::exception& e) {
      throw TraceError(where + e.what());
    }
  }
  if (!header) throw TraceError("trace has no header");
  if (!footer) throw TraceError("trace has no footer");
  return t;
}

Trace read_trace(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw TraceError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_trace(ss.str());
}

void write_trace(const std::string& path, const Trace& t) {
  std::ofstream f(path);
  if (!f) throw TraceError("cannot write " + path);
  f << to_jsonl(t);
}

}  // namespace dynbft::harness
