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

#include "dynbft/fscrypto.hpp"

#include <sodium.h>

#include <stdexcept>

namespace dynbft::crypto {

namespace {

Digest derive_key(std::uint64_t seed, std::string_view domain) {
  Writer w;
  w.str(domain).u64(seed);
  return hash(w.view());
}

std::string key_of(ByteView sig) { return std::string(sig.begin(), sig.end()); }

Digest next_chain_seed(const Digest& seed) {
  Writer w;
  w.str("dynbft.keychain.next").raw(seed);
  return hash(w.view());
}

Bytes fs_signed_bytes(ByteView message) {
  Writer w;
  w.str("dynbft.fs").raw(message);
  return w.take();
}

}  // namespace

void FsSignature::encode(Writer& w) const {
  w.str(signer).u64(timestamp).bytes(bytes);
}

FsSignature FsSignature::decode(Reader& r) {
  FsSignature s;
  s.signer = r.str();
  s.timestamp = r.u64();
  s.bytes = r.bytes();
  return s;
}

std::string to_string(FsBackend b) { return b == FsBackend::TrustedOracle ? "oracle" : "keychain"; }

FsBackend fs_backend_from_string(const std::string& s) {
  if (s == "oracle") return FsBackend::TrustedOracle;
  if (s == "keychain") return FsBackend::KeyChain;
  throw std::invalid_argument("unknown forward-secure backend: " + s);
}

void FsScheme::record(const ProcessId& p, Timestamp t, const Digest& m, const Bytes& sig) {
  ledger_.push_back({SchemeKind::Fs, p, t, m, sig, clock_ ? clock_() : 0});
}

// ---- TrustedOracle -------------------------------------------------------

TrustedOracle::TrustedOracle(std::uint64_t seed) : key_(derive_key(seed, "dynbft.oracle.fs")) {}

Bytes TrustedOracle::mac(const ProcessId& p, const Digest& m, Timestamp t) const {
  Writer w;
  w.str(p).u64(t).raw(m);
  auto d = keyed_hash(key_, w.view());
  return Bytes(d.begin(), d.end());
}

void TrustedOracle::update_fs_keys(const ProcessId& p, Timestamp t) {
  auto& st = st_[p];
  if (t > st) st = t;
}

std::optional<FsSignature> TrustedOracle::fs_sign(const ProcessId& p, ByteView message, Timestamp t) {
  if (t < key_timestamp(p) || t >= kMaxTimestamp) return std::nullopt;
  const auto m = hash(message);
  FsSignature s{p, t, mac(p, m, t)};
  if (issued_.insert(key_of(s.bytes)).second) record(p, t, m, s.bytes);
  return s;
}

bool TrustedOracle::fs_verify(ByteView message, const ProcessId& p, const FsSignature& s, Timestamp t) const {
  if (s.signer != p || s.timestamp != t) return false;
  if (s.bytes != mac(p, hash(message), t)) return false;
  return issued_.contains(key_of(s.bytes));
}

Timestamp TrustedOracle::key_timestamp(const ProcessId& p) const {
  auto it = st_.find(p);
  return it == st_.end() ? 0 : it->second;
}

void TrustedOracle::restore(const std::vector<IssuanceRecord>& records) {
  for (const auto& r : records) {
    if (r.kind != SchemeKind::Fs) continue;
    if (issued_.insert(key_of(r.signature)).second) ledger_.push_back(r);
  }
}

// ---- KeyChain ------------------------------------------------------------

KeyChain::KeyChain(std::uint64_t seed) : setup_seed_(derive_key(seed, "dynbft.keychain.setup")) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
}

KeyChain::~KeyChain() {
  for (auto& [_, s] : signers_) sodium_memzero(s.chain_seed.data(), s.chain_seed.size());
}

KeyChain::Signer& KeyChain::signer(const ProcessId& p) {
  auto it = signers_.find(p);
  if (it == signers_.end()) {
    Writer w;
    w.raw(setup_seed_).str(p);
    it = signers_.emplace(p, Signer{0, hash(w.view())}).first;
  }
  return it->second;
}

void KeyChain::update_fs_keys(const ProcessId& p, Timestamp t) {
  auto& s = signer(p);
  if (t > kMaxTimestamp) t = kMaxTimestamp;
  while (s.st < t) {
    auto next = next_chain_seed(s.chain_seed);
    sodium_memzero(s.chain_seed.data(), s.chain_seed.size());
    s.chain_seed = next;
    ++s.st;
  }
}

std::optional<FsSignature> KeyChain::fs_sign(const ProcessId& p, ByteView message, Timestamp t) {
  auto& s = signer(p);
  if (t < s.st || t >= kMaxTimestamp) return std::nullopt;
  Digest seed = s.chain_seed;
  for (Timestamp i = s.st; i < t; ++i) seed = next_chain_seed(seed);

  std::uint8_t pk[crypto_sign_PUBLICKEYBYTES];
  std::uint8_t sk[crypto_sign_SECRETKEYBYTES];
  crypto_sign_seed_keypair(pk, sk, seed.data());
  sodium_memzero(seed.data(), seed.size());

  const auto body = fs_signed_bytes(message);
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, body.data(), body.size(), sk);
  sodium_memzero(sk, sizeof sk);

  record(p, t, hash(message), sig);
  return FsSignature{p, t, std::move(sig)};
}

const Bytes& KeyChain::public_key(const ProcessId& p, Timestamp t) const {
  auto key = std::make_pair(p, t);
  auto it = directory_.find(key);
  if (it != directory_.end()) return it->second;
  // The directory is filled from the setup seed, independently of the
  // signer's (possibly advanced) chain.
  Writer w;
  w.raw(setup_seed_).str(p);
  Digest seed = hash(w.view());
  for (Timestamp i = 0; i < t; ++i) seed = next_chain_seed(seed);
  std::uint8_t pk[crypto_sign_PUBLICKEYBYTES];
  std::uint8_t sk[crypto_sign_SECRETKEYBYTES];
  crypto_sign_seed_keypair(pk, sk, seed.data());
  sodium_memzero(sk, sizeof sk);
  sodium_memzero(seed.data(), seed.size());
  return directory_.emplace(key, Bytes(pk, pk + sizeof pk)).first->second;
}

bool KeyChain::fs_verify(ByteView message, const ProcessId& p, const FsSignature& s, Timestamp t) const {
  if (s.signer != p || s.timestamp != t || t >= kMaxTimestamp) return false;
  if (s.bytes.size() != crypto_sign_BYTES) return false;
  const auto body = fs_signed_bytes(message);
  return crypto_sign_verify_detached(s.bytes.data(), body.data(), body.size(), public_key(p, t).data()) == 0;
}

Timestamp KeyChain::key_timestamp(const ProcessId& p) const {
  auto it = signers_.find(p);
  return it == signers_.end() ? 0 : it->second.st;
}

std::unique_ptr<FsScheme> make_fs_scheme(FsBackend backend, std::uint64_t seed) {
  if (backend == FsBackend::KeyChain) return std::make_unique<KeyChain>(seed);
  return std::make_unique<TrustedOracle>(seed);
}

// ---- PlainScheme ---------------------------------------------------------

PlainScheme::PlainScheme(std::uint64_t seed) : key_(derive_key(seed, "dynbft.oracle.plain")) {}

Bytes PlainScheme::mac(const ProcessId& p, const Digest& m) const {
  Writer w;
  w.str(p).raw(m);
  auto d = keyed_hash(key_, w.view());
  return Bytes(d.begin(), d.end());
}

Bytes PlainScheme::plain_sign(const ProcessId& p, ByteView message) {
  const auto m = hash(message);
  auto sig = mac(p, m);
  if (issued_.insert(key_of(sig)).second) {
    ledger_.push_back({SchemeKind::Plain, p, 0, m, sig, clock_ ? clock_() : 0});
  }
  return sig;
}

bool PlainScheme::plain_verify(ByteView message, const ProcessId& p, ByteView signature) const {
  const auto expected = mac(p, hash(message));
  if (signature.size() != expected.size() || !std::equal(expected.begin(), expected.end(), signature.begin()))
    return false;
  return issued_.contains(key_of(signature));
}

void PlainScheme::restore(const std::vector<IssuanceRecord>& records) {
  for (const auto& r : records) {
    if (r.kind != SchemeKind::Plain) continue;
    if (issued_.insert(key_of(r.signature)).second) ledger_.push_back(r);
  }
}

}  // namespace dynbft::crypto
