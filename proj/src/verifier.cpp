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

#include "dynbft/verifier.hpp"

namespace dynbft {

namespace {

std::string key_of(ByteView b) { return std::string(b.begin(), b.end()); }

constexpr std::string_view kGenesisInput = "genesis";

}  // namespace

Digest CertStore::put(Bytes bytes) {
  const auto d = hash(bytes);
  items_.emplace(key_of(d), std::move(bytes));
  return d;
}

const Bytes* CertStore::get(ByteView digest) const {
  auto it = items_.find(key_of(digest));
  return it == items_.end() ? nullptr : &it->second;
}

Verifier::Verifier(const crypto::FsScheme& fs, const crypto::PlainScheme& plain, lattice::Configuration c0)
    : fs_(fs), plain_(plain), c0_(std::move(c0)), genesis_(lattice::History::genesis(c0_)) {}

bool Verifier::memo(const Digest& key, const std::function<bool()>& f) {
  const auto k = key_of(key);
  auto it = cache_.find(k);
  if (it != cache_.end()) {
    ++hits_;
    return it->second;
  }
  const bool result = f();
  cache_.emplace(k, result);
  return result;
}

bool Verifier::verify_history(const lattice::History& h, ByteView cert) {
  if (h.empty()) return false;
  Writer key;
  key.str("verify_history");
  h.encode(key);
  key.bytes(cert);
  return memo(hash(key.view()), [&] {
    wire::HistoryCert hc;
    try {
      hc = wire::HistoryCert::decode(cert);
    } catch (const DecodeError&) {
      return false;
    }
    // Every accepted history extends the genesis configuration.
    if (!h.contains(c0_) || !c0_.leq(lattice::max_element(h))) return false;
    for (const auto& c : h.configs())
      if (!c0_.leq(c)) return false;
    switch (hc.kind) {
      case wire::HistoryCertKind::Genesis:
        return h == genesis_;
      case wire::HistoryCertKind::Authority:
        return !authority_.empty() && hc.signer == authority_ &&
               plain_.plain_verify(wire::authority_history_statement(h), authority_, hc.payload);
      case wire::HistoryCertKind::Output: {
        if (!output_history_) return false;
        const Bytes* tau = store_.get(hc.payload);
        return tau != nullptr && output_history_(*this, h, *tau);
      }
    }
    return false;
  });
}

bool Verifier::verify_input(std::uint8_t object, const wire::InputValue& v) {
  auto it = inputs_.find(object);
  if (it == inputs_.end()) return false;
  Writer key;
  key.str("verify_input").u8(object).raw(v.encode());
  return memo(hash(key.view()), [&] { return it->second(*this, v); });
}

Bytes genesis_history_cert() { return wire::HistoryCert{wire::HistoryCertKind::Genesis, {}, {}}.encode(); }

Bytes authority_history_cert(crypto::PlainScheme& plain, const lattice::ProcessId& authority,
                             const lattice::History& h) {
  wire::HistoryCert c{wire::HistoryCertKind::Authority, authority,
                      plain.plain_sign(authority, wire::authority_history_statement(h))};
  return c.encode();
}

Bytes client_input_statement(std::uint8_t object, const lattice::LatticeValue& v) {
  return wire::client_input_statement(object, lattice::canonical_bytes(v));
}

Bytes client_input_cert(const lattice::ProcessId& client, ByteView signature) {
  Writer w;
  w.u8(1).str(client).bytes(signature);
  return w.take();
}

bool check_client_input_cert(const crypto::PlainScheme& plain, std::uint8_t object, const wire::InputValue& v) {
  try {
    Reader r(v.cert);
    if (r.u8() != 1) return false;
    const auto signer = r.str();
    const auto sig = r.bytes();
    r.expect_done();
    return plain.plain_verify(client_input_statement(object, v.value), signer, sig);
  } catch (const DecodeError&) {
    return false;
  }
}

Bytes genesis_input_cert() {
  Writer w;
  w.u8(0).str(kGenesisInput);
  return w.take();
}

bool is_genesis_input_cert(ByteView cert) {
  const auto g = genesis_input_cert();
  return cert.size() == g.size() && std::equal(g.begin(), g.end(), cert.begin());
}

}  // namespace dynbft
