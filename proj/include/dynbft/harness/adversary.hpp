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

#ifndef DYNBFT_HARNESS_ADVERSARY_HPP_
#define DYNBFT_HARNESS_ADVERSARY_HPP_

#include <memory>
#include <string>

#include "dynbft/reconfig.hpp"

/// Scripted Byzantine behaviour.
///
///   silent        drops everything it receives
///   keep-keys     follows the protocol but never evolves its signing keys
///   answer-stale  keep-keys, and additionally serves every client request
///                 without gating and answers state-transfer reads at once
///                 with an empty state
namespace dynbft::harness {

using lattice::ProcessId;

/// Throws std::invalid_argument on an unknown name.
std::unique_ptr<sim::AdversaryScript> make_script(const std::string& name);

/// Tries to assemble a data-object output certificate anchored at `anchor`
/// using only signatures obtainable from currently Byzantine processes, and
/// records the attempt as an AdversaryAction "forge" event with detail
/// {anchor_hex, propose_acks, confirm_acks, verified}.
void forge(sim::Simulator& sim, reconfig::Deployment& dep, const lattice::Configuration& anchor);

}  // namespace dynbft::harness

#endif  // DYNBFT_HARNESS_ADVERSARY_HPP_
