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

#ifndef DYNBFT_LATTICE_HPP_
#define DYNBFT_LATTICE_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dynbft/bytes.hpp"

/// Join semi-lattices used by the protocols: finite sets of value ids, the
/// configuration lattice and the powerset lattice over configurations, plus
/// histories (chains of configurations).
///
/// Every value has a canonical byte encoding:
///
///   value      := tag:u8 count:u32 (len:u32 element)*      elements sorted by bytes
///   FinSet     := tag 0x01, element = id:u64
///   Config     := tag 0x02, element = polarity:u8 ('+' | '-') replica-id bytes
///   HistValue  := tag 0x03, element = Config encoding
///   History    := tag 0x04, element = Config encoding
///   canonical  := version:u8 (=kEncodingVersion) value
///
/// All integers are big-endian. Values are immutable after construction.
namespace dynbft::lattice {

inline constexpr std::uint8_t kEncodingVersion = 1;

enum class Tag : std::uint8_t { FinSet = 0x01, Config = 0x02, HistValue = 0x03, History = 0x04 };

/// Opaque process identifier; doubles as the handle of the process' public keys.
using ProcessId = std::string;
using ProcessSet = std::set<ProcessId>;

enum class Polarity : std::uint8_t { Add = '+', Remove = '-' };

struct Update {
  Polarity polarity = Polarity::Add;
  ProcessId replica;

  auto operator<=>(const Update&) const = default;
};

class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<Update> updates);

  /// Configuration consisting of one Add per id.
  static Configuration of_replicas(const std::vector<ProcessId>& ids);

  const std::vector<Update>& updates() const { return updates_; }
  /// Sorted ids with Add present and Remove absent.
  const std::vector<ProcessId>& replicas() const { return replicas_; }
  bool is_member(const ProcessId& id) const;
  /// Ids with a Remove update.
  std::vector<ProcessId> removed() const;

  std::size_t height() const { return updates_.size(); }
  /// Smallest quorum cardinality: the least q with q > 2n/3.
  std::size_t quorum_size() const { return replicas_.size() * 2 / 3 + 1; }
  /// Resilience threshold b = floor((n - 1) / 3).
  std::size_t max_faulty() const { return replicas_.empty() ? 0 : (replicas_.size() - 1) / 3; }
  bool is_quorum(const ProcessSet& s) const;

  Configuration join(const Configuration& other) const;
  bool leq(const Configuration& other) const;
  bool lt(const Configuration& other) const { return leq(other) && *this != other; }
  bool comparable(const Configuration& other) const { return leq(other) || other.leq(*this); }

  void encode(Writer& w) const;
  Bytes encode() const;
  static Configuration decode(Reader& r);
  std::string to_string() const;

  bool operator==(const Configuration& o) const { return updates_ == o.updates_; }
  /// Canonical total order for use as a container key; unrelated to leq.
  auto operator<=>(const Configuration& o) const { return updates_ <=> o.updates_; }

 private:
  std::vector<Update> updates_;
  std::vector<ProcessId> replicas_;
};

/// Powerset lattice over opaque 64-bit value ids.
class FinSet {
 public:
  FinSet() = default;
  explicit FinSet(std::vector<std::uint64_t> ids);
  FinSet(std::initializer_list<std::uint64_t> ids) : FinSet(std::vector<std::uint64_t>(ids)) {}

  const std::vector<std::uint64_t>& ids() const { return ids_; }
  FinSet join(const FinSet& o) const;
  bool leq(const FinSet& o) const;
  void encode(Writer& w) const;
  static FinSet decode(Reader& r);
  std::string to_string() const;

  bool operator==(const FinSet&) const = default;

 private:
  std::vector<std::uint64_t> ids_;
};

/// Powerset lattice over configurations.
class HistValue {
 public:
  HistValue() = default;
  explicit HistValue(std::vector<Configuration> configs);

  const std::vector<Configuration>& configs() const { return configs_; }
  HistValue join(const HistValue& o) const;
  bool leq(const HistValue& o) const;
  void encode(Writer& w) const;
  static HistValue decode(Reader& r);
  std::string to_string() const;

  bool operator==(const HistValue&) const = default;

 private:
  std::vector<Configuration> configs_;  // sorted by canonical order, unique
};

using LatticeValue = std::variant<FinSet, Configuration, HistValue>;

/// Least upper bound. Throws std::invalid_argument when the two values belong
/// to different lattices.
LatticeValue join(const LatticeValue& a, const LatticeValue& b);
bool leq(const LatticeValue& a, const LatticeValue& b);
Tag tag_of(const LatticeValue& v);

void encode(Writer& w, const LatticeValue& v);
LatticeValue decode_value(Reader& r);
/// Version byte followed by the value encoding.
Bytes canonical_bytes(const LatticeValue& v);
LatticeValue from_canonical_bytes(ByteView data);
std::string to_string(const LatticeValue& v);

/// True iff every pair of configurations is comparable.
bool validate_history(std::span<const Configuration> configs);

/// A finite chain of configurations, stored in ascending order.
class History {
 public:
  History() = default;

  /// Nullopt unless the configurations are pairwise comparable. Duplicates
  /// are collapsed.
  static std::optional<History> make(std::vector<Configuration> configs);
  static History genesis(const Configuration& c0) { return *make({c0}); }

  const std::vector<Configuration>& configs() const { return chain_; }
  bool empty() const { return chain_.empty(); }
  std::size_t size() const { return chain_.size(); }
  bool contains(const Configuration& c) const;
  bool subset_of(const History& o) const;
  bool strict_subset_of(const History& o) const { return subset_of(o) && size() < o.size(); }

  HistValue to_hist_value() const { return HistValue(chain_); }

  void encode(Writer& w) const;
  Bytes encode() const;
  static History decode(Reader& r);
  std::string to_string() const;

  bool operator==(const History&) const = default;

 private:
  std::vector<Configuration> chain_;
};

/// The unique maximum of a non-empty history. Throws std::invalid_argument on
/// an empty history.
const Configuration& max_element(const History& h);

}  // namespace dynbft::lattice

#endif  // DYNBFT_LATTICE_HPP_
