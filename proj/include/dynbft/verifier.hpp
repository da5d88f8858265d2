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

#ifndef DYNBFT_VERIFIER_HPP_
#define DYNBFT_VERIFIER_HPP_

#include <functional>
#include <map>
#include <string>
#include <unordered_map>

#include "dynbft/fscrypto.hpp"
#include "dynbft/lattice.hpp"
#include "dynbft/wire.hpp"

namespace dynbft {

/// Content-addressed storage for nested certificates. Certificates that
/// embed other certificates (histories certified by outputs, inputs
/// certified by outputs of another object) carry the digest instead of the
/// bytes, which keeps message sizes linear in the number of
/// reconfigurations. Anyone may insert; the digest binds the content.
class CertStore {
 public:
  Digest put(Bytes bytes);
  /// Nullptr when unknown.
  const Bytes* get(ByteView digest) const;
  std::size_t size() const { return items_.size(); }

 private:
  std::unordered_map<std::string, Bytes> items_;
};

/// Run-wide verification predicates. All checks are pure functions of their
/// arguments and the signature schemes, so results are memoised.
class Verifier {
 public:
  using InputCheck = std::function<bool(Verifier&, const wire::InputValue&)>;
  using OutputHistoryCheck = std::function<bool(Verifier&, const lattice::History&, ByteView tau)>;

  Verifier(const crypto::FsScheme& fs, const crypto::PlainScheme& plain, lattice::Configuration c0);

  const crypto::FsScheme& fs() const { return fs_; }
  const crypto::PlainScheme& plain() const { return plain_; }
  const lattice::Configuration& c0() const { return c0_; }
  const lattice::History& genesis() const { return genesis_; }
  CertStore& store() { return store_; }

  /// Histories certified by a plain signature of this process are accepted.
  void set_authority(lattice::ProcessId id) { authority_ = std::move(id); }
  const lattice::ProcessId& authority() const { return authority_; }
  void set_output_history_check(OutputHistoryCheck check) { output_history_ = std::move(check); }
  void set_input_check(std::uint8_t object, InputCheck check) { inputs_[object] = std::move(check); }

  bool verify_history(const lattice::History& h, ByteView cert);
  /// False when no check is registered for the object.
  bool verify_input(std::uint8_t object, const wire::InputValue& v);

  /// Memoises `f` under `key`.
  bool memo(const Digest& key, const std::function<bool()>& f);

  std::uint64_t cache_hits() const { return hits_; }

 private:
  const crypto::FsScheme& fs_;
  const crypto::PlainScheme& plain_;
  lattice::Configuration c0_;
  lattice::History genesis_;
  lattice::ProcessId authority_;
  CertStore store_;
  OutputHistoryCheck output_history_;
  std::map<std::uint8_t, InputCheck> inputs_;
  std::unordered_map<std::string, bool> cache_;
  std::uint64_t hits_ = 0;
};

/// Certificate helpers shared by protocols and tests.
Bytes genesis_history_cert();
Bytes authority_history_cert(crypto::PlainScheme& plain, const lattice::ProcessId& authority,
                             const lattice::History& h);
/// Statement a client signs to certify one of its input values.
Bytes client_input_statement(std::uint8_t object, const lattice::LatticeValue& v);
/// Signer id + plain signature over client_input_statement.
Bytes client_input_cert(const lattice::ProcessId& client, ByteView signature);
bool check_client_input_cert(const crypto::PlainScheme& plain, std::uint8_t object, const wire::InputValue& v);
/// Marker certificate for the genesis input of an object.
Bytes genesis_input_cert();
bool is_genesis_input_cert(ByteView cert);

}  // namespace dynbft

#endif  // DYNBFT_VERIFIER_HPP_
