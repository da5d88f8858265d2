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

#ifndef DYNBFT_FSCRYPTO_HPP_
#define DYNBFT_FSCRYPTO_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynbft/bytes.hpp"
#include "dynbft/lattice.hpp"

namespace dynbft::crypto {

using lattice::ProcessId;
using Timestamp = std::uint64_t;

/// Upper bound on signing timestamps. Signing at or above it is refused.
inline constexpr Timestamp kMaxTimestamp = 65536;

struct FsSignature {
  ProcessId signer;
  Timestamp timestamp = 0;
  Bytes bytes;

  void encode(Writer& w) const;
  static FsSignature decode(Reader& r);
  bool operator==(const FsSignature&) const = default;
};

enum class FsBackend { TrustedOracle, KeyChain };

std::string to_string(FsBackend b);
FsBackend fs_backend_from_string(const std::string& s);

enum class SchemeKind : std::uint8_t { Fs, Plain };

/// One issued signature. The schemes keep an append-only ledger of these for
/// post-hoc auditing.
struct IssuanceRecord {
  SchemeKind kind = SchemeKind::Fs;
  ProcessId signer;
  Timestamp timestamp = 0;
  Digest message{};
  Bytes signature;
  std::uint64_t step = 0;
};

/// Forward-secure signature scheme. Each process has a key timestamp that only
/// moves forward; signing below it is refused no matter who asks, so a
/// corrupted process cannot recover keys it has already given up.
class FsScheme {
 public:
  virtual ~FsScheme() = default;

  /// st_p := max(st_p, t).
  virtual void update_fs_keys(const ProcessId& p, Timestamp t) = 0;
  /// Nullopt ("refused") when t < st_p or t >= kMaxTimestamp.
  virtual std::optional<FsSignature> fs_sign(const ProcessId& p, ByteView message, Timestamp t) = 0;
  virtual bool fs_verify(ByteView message, const ProcessId& p, const FsSignature& s, Timestamp t) const = 0;
  virtual Timestamp key_timestamp(const ProcessId& p) const = 0;
  virtual FsBackend backend() const = 0;

  /// Re-admits ledger records dumped by an earlier run so that offline audits
  /// can verify signatures issued there.
  virtual void restore(const std::vector<IssuanceRecord>& records) = 0;

  const std::vector<IssuanceRecord>& ledger() const { return ledger_; }
  void set_clock(std::function<std::uint64_t()> clock) { clock_ = std::move(clock); }

 protected:
  void record(const ProcessId& p, Timestamp t, const Digest& m, const Bytes& sig);

  std::vector<IssuanceRecord> ledger_;
  std::function<std::uint64_t()> clock_;
};

/// Trusted-oracle backend: signatures are MACs under an oracle-held key and
/// verification additionally requires the signature to be in the issuance
/// ledger.
class TrustedOracle final : public FsScheme {
 public:
  explicit TrustedOracle(std::uint64_t seed);

  void update_fs_keys(const ProcessId& p, Timestamp t) override;
  std::optional<FsSignature> fs_sign(const ProcessId& p, ByteView message, Timestamp t) override;
  bool fs_verify(ByteView message, const ProcessId& p, const FsSignature& s, Timestamp t) const override;
  Timestamp key_timestamp(const ProcessId& p) const override;
  FsBackend backend() const override { return FsBackend::TrustedOracle; }
  void restore(const std::vector<IssuanceRecord>& records) override;

 private:
  Bytes mac(const ProcessId& p, const Digest& m, Timestamp t) const;

  Digest key_;
  std::map<ProcessId, Timestamp> st_;
  std::unordered_set<std::string> issued_;
};

/// Key-chain backend: one Ed25519 key pair per timestamp, derived from a
/// per-process hash chain. Updating the key timestamp overwrites the chain
/// seed, so private keys below st_p are physically gone. Public keys are
/// published through a directory built at setup time.
class KeyChain final : public FsScheme {
 public:
  explicit KeyChain(std::uint64_t seed);
  ~KeyChain() override;

  void update_fs_keys(const ProcessId& p, Timestamp t) override;
  std::optional<FsSignature> fs_sign(const ProcessId& p, ByteView message, Timestamp t) override;
  bool fs_verify(ByteView message, const ProcessId& p, const FsSignature& s, Timestamp t) const override;
  Timestamp key_timestamp(const ProcessId& p) const override;
  FsBackend backend() const override { return FsBackend::KeyChain; }
  void restore(const std::vector<IssuanceRecord>&) override {}

 private:
  struct Signer {
    Timestamp st = 0;
    Digest chain_seed{};  // seed for timestamp st
  };
  Signer& signer(const ProcessId& p);
  const Bytes& public_key(const ProcessId& p, Timestamp t) const;

  Digest setup_seed_;
  std::map<ProcessId, Signer> signers_;
  mutable std::map<std::pair<ProcessId, Timestamp>, Bytes> directory_;
};

std::unique_ptr<FsScheme> make_fs_scheme(FsBackend backend, std::uint64_t seed);

/// Ordinary unforgeable signatures inside the simulation (used for input
/// certificates, broadcast envelopes and administrator approvals).
class PlainScheme {
 public:
  explicit PlainScheme(std::uint64_t seed);

  Bytes plain_sign(const ProcessId& p, ByteView message);
  bool plain_verify(ByteView message, const ProcessId& p, ByteView signature) const;
  void restore(const std::vector<IssuanceRecord>& records);

  const std::vector<IssuanceRecord>& ledger() const { return ledger_; }
  void set_clock(std::function<std::uint64_t()> clock) { clock_ = std::move(clock); }

 private:
  Bytes mac(const ProcessId& p, const Digest& m) const;

  Digest key_;
  std::unordered_set<std::string> issued_;
  std::vector<IssuanceRecord> ledger_;
  std::function<std::uint64_t()> clock_;
};

}  // namespace dynbft::crypto

#endif  // DYNBFT_FSCRYPTO_HPP_
