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

#include "dynbft/lattice.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dynbft::lattice {

namespace {

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

template <typename T>
std::vector<T> set_union(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Writes the sorted-element body shared by every set-shaped value.
void write_elements(Writer& w, Tag tag, std::vector<Bytes> elements) {
  std::sort(elements.begin(), elements.end());
  w.u8(static_cast<std::uint8_t>(tag));
  w.u32(static_cast<std::uint32_t>(elements.size()));
  for (const auto& e : elements) w.bytes(e);
}

void expect_tag(Reader& r, Tag tag) {
  if (r.u8() != static_cast<std::uint8_t>(tag)) throw DecodeError("unexpected lattice tag");
}

// Reads `count` elements and insists they arrive in strictly ascending byte
// order, which keeps decoding a bijection with the canonical encoding.
template <typename F>
void read_elements(Reader& r, F&& on_element) {
  const std::uint32_t count = r.u32();
  Bytes prev;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto view = r.bytes_view();
    Bytes cur(view.begin(), view.end());
    if (i > 0 && !(prev < cur)) throw DecodeError("non-canonical element order");
    Reader er(view);
    on_element(er);
    er.expect_done();
    prev = std::move(cur);
  }
}

}  // namespace

// ---- Configuration -------------------------------------------------------

Configuration::Configuration(std::vector<Update> updates) : updates_(std::move(updates)) {
  sort_unique(updates_);
  for (const auto& u : updates_) {
    if (u.polarity != Polarity::Add) continue;
    const bool removed = std::binary_search(updates_.begin(), updates_.end(), Update{Polarity::Remove, u.replica});
    if (!removed) replicas_.push_back(u.replica);
  }
  sort_unique(replicas_);
}

Configuration Configuration::of_replicas(const std::vector<ProcessId>& ids) {
  std::vector<Update> ups;
  ups.reserve(ids.size());
  for (const auto& id : ids) ups.push_back({Polarity::Add, id});
  return Configuration(std::move(ups));
}

bool Configuration::is_member(const ProcessId& id) const {
  return std::binary_search(replicas_.begin(), replicas_.end(), id);
}

std::vector<ProcessId> Configuration::removed() const {
  std::vector<ProcessId> out;
  for (const auto& u : updates_)
    if (u.polarity == Polarity::Remove) out.push_back(u.replica);
  return out;
}

bool Configuration::is_quorum(const ProcessSet& s) const {
  for (const auto& id : s)
    if (!is_member(id)) return false;
  // |S| > 2n/3, kept in integers.
  return 3 * s.size() > 2 * replicas_.size();
}

Configuration Configuration::join(const Configuration& other) const {
  return Configuration(set_union(updates_, other.updates_));
}

bool Configuration::leq(const Configuration& other) const {
  return std::includes(other.updates_.begin(), other.updates_.end(), updates_.begin(), updates_.end());
}

void Configuration::encode(Writer& w) const {
  std::vector<Bytes> elems;
  elems.reserve(updates_.size());
  for (const auto& u : updates_) {
    Writer e;
    e.u8(static_cast<std::uint8_t>(u.polarity)).raw(as_bytes(u.replica));
    elems.push_back(e.take());
  }
  write_elements(w, Tag::Config, std::move(elems));
}

Bytes Configuration::encode() const {
  Writer w;
  encode(w);
  return w.take();
}

Configuration Configuration::decode(Reader& r) {
  expect_tag(r, Tag::Config);
  std::vector<Update> ups;
  read_elements(r, [&](Reader& er) {
    const auto p = er.u8();
    if (p != static_cast<std::uint8_t>(Polarity::Add) && p != static_cast<std::uint8_t>(Polarity::Remove))
      throw DecodeError("bad update polarity");
    auto rest = er.take_rest();
    if (rest.empty()) throw DecodeError("empty replica id");
    ups.push_back({static_cast<Polarity>(p), ProcessId(rest.begin(), rest.end())});
  });
  return Configuration(std::move(ups));
}

std::string Configuration::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < updates_.size(); ++i) {
    if (i) os << ',';
    os << static_cast<char>(updates_[i].polarity) << updates_[i].replica;
  }
  os << '}';
  return os.str();
}

// ---- FinSet --------------------------------------------------------------

FinSet::FinSet(std::vector<std::uint64_t> ids) : ids_(std::move(ids)) { sort_unique(ids_); }

FinSet FinSet::join(const FinSet& o) const { return FinSet(set_union(ids_, o.ids_)); }

bool FinSet::leq(const FinSet& o) const { return std::includes(o.ids_.begin(), o.ids_.end(), ids_.begin(), ids_.end()); }

void FinSet::encode(Writer& w) const {
  std::vector<Bytes> elems;
  elems.reserve(ids_.size());
  for (auto id : ids_) {
    Writer e;
    e.u64(id);
    elems.push_back(e.take());
  }
  write_elements(w, Tag::FinSet, std::move(elems));
}

FinSet FinSet::decode(Reader& r) {
  expect_tag(r, Tag::FinSet);
  std::vector<std::uint64_t> ids;
  read_elements(r, [&](Reader& er) { ids.push_back(er.u64()); });
  return FinSet(std::move(ids));
}

std::string FinSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < ids_.size(); ++i) os << (i ? "," : "") << ids_[i];
  os << '}';
  return os.str();
}

// ---- HistValue -----------------------------------------------------------

HistValue::HistValue(std::vector<Configuration> configs) : configs_(std::move(configs)) { sort_unique(configs_); }

HistValue HistValue::join(const HistValue& o) const { return HistValue(set_union(configs_, o.configs_)); }

bool HistValue::leq(const HistValue& o) const {
  return std::includes(o.configs_.begin(), o.configs_.end(), configs_.begin(), configs_.end());
}

void HistValue::encode(Writer& w) const {
  std::vector<Bytes> elems;
  elems.reserve(configs_.size());
  for (const auto& c : configs_) elems.push_back(c.encode());
  write_elements(w, Tag::HistValue, std::move(elems));
}

HistValue HistValue::decode(Reader& r) {
  expect_tag(r, Tag::HistValue);
  std::vector<Configuration> cs;
  read_elements(r, [&](Reader& er) { cs.push_back(Configuration::decode(er)); });
  return HistValue(std::move(cs));
}

std::string HistValue::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < configs_.size(); ++i) out += (i ? "," : "") + configs_[i].to_string();
  return out + "}";
}

// ---- LatticeValue --------------------------------------------------------

LatticeValue join(const LatticeValue& a, const LatticeValue& b) {
  if (a.index() != b.index()) throw std::invalid_argument("join of values from different lattices");
  return std::visit(
      [&](const auto& x) -> LatticeValue {
        using T = std::decay_t<decltype(x)>;
        return x.join(std::get<T>(b));
      },
      a);
}

bool leq(const LatticeValue& a, const LatticeValue& b) {
  if (a.index() != b.index()) throw std::invalid_argument("leq of values from different lattices");
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        return x.leq(std::get<T>(b));
      },
      a);
}

Tag tag_of(const LatticeValue& v) {
  switch (v.index()) {
    case 0:
      return Tag::FinSet;
    case 1:
      return Tag::Config;
    default:
      return Tag::HistValue;
  }
}

void encode(Writer& w, const LatticeValue& v) {
  std::visit([&](const auto& x) { x.encode(w); }, v);
}

LatticeValue decode_value(Reader& r) {
  auto peek = r.rest();
  if (peek.empty()) throw DecodeError("missing lattice value");
  switch (static_cast<Tag>(peek[0])) {
    case Tag::FinSet:
      return FinSet::decode(r);
    case Tag::Config:
      return Configuration::decode(r);
    case Tag::HistValue:
      return HistValue::decode(r);
    default:
      throw DecodeError("unknown lattice tag");
  }
}

Bytes canonical_bytes(const LatticeValue& v) {
  Writer w;
  w.u8(kEncodingVersion);
  encode(w, v);
  return w.take();
}

LatticeValue from_canonical_bytes(ByteView data) {
  Reader r(data);
  if (r.u8() != kEncodingVersion) throw DecodeError("unsupported encoding version");
  auto v = decode_value(r);
  r.expect_done();
  return v;
}

std::string to_string(const LatticeValue& v) {
  return std::visit([](const auto& x) { return x.to_string(); }, v);
}

// ---- History -------------------------------------------------------------

bool validate_history(std::span<const Configuration> configs) {
  for (std::size_t i = 0; i < configs.size(); ++i)
    for (std::size_t j = i + 1; j < configs.size(); ++j)
      if (!configs[i].comparable(configs[j])) return false;
  return true;
}

std::optional<History> History::make(std::vector<Configuration> configs) {
  sort_unique(configs);
  if (!validate_history(configs)) return std::nullopt;
  // A chain is totally ordered by leq, and leq implies strictly smaller height
  // for distinct members, so sorting by height yields ascending order.
  std::sort(configs.begin(), configs.end(),
            [](const Configuration& a, const Configuration& b) { return a.height() < b.height(); });
  History h;
  h.chain_ = std::move(configs);
  return h;
}

bool History::contains(const Configuration& c) const {
  return std::any_of(chain_.begin(), chain_.end(), [&](const Configuration& x) { return x == c; });
}

bool History::subset_of(const History& o) const {
  return std::all_of(chain_.begin(), chain_.end(), [&](const Configuration& c) { return o.contains(c); });
}

void History::encode(Writer& w) const {
  std::vector<Bytes> elems;
  elems.reserve(chain_.size());
  for (const auto& c : chain_) elems.push_back(c.encode());
  write_elements(w, Tag::History, std::move(elems));
}

Bytes History::encode() const {
  Writer w;
  encode(w);
  return w.take();
}

History History::decode(Reader& r) {
  expect_tag(r, Tag::History);
  std::vector<Configuration> cs;
  read_elements(r, [&](Reader& er) { cs.push_back(Configuration::decode(er)); });
  auto h = make(std::move(cs));
  if (!h) throw DecodeError("history members are not comparable");
  return *h;
}

std::string History::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < chain_.size(); ++i) out += (i ? " < " : "") + chain_[i].to_string();
  return out + "]";
}

const Configuration& max_element(const History& h) {
  if (h.empty()) throw std::invalid_argument("max_element of an empty history");
  return h.configs().back();
}

}  // namespace dynbft::lattice
