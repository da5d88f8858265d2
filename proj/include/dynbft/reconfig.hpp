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

#ifndef DYNBFT_RECONFIG_HPP_
#define DYNBFT_RECONFIG_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dynbft/access_control.hpp"
#include "dynbft/dbla.hpp"
#include "dynbft/maxreg.hpp"

/// Reconfigurable objects built from dynamic ones.
///
/// Every replica process hosts confLA (lattice agreement over
/// configurations), histLA (lattice agreement over sets of configurations)
/// and the data object, all sharing one history and one state transfer.
/// UpdateConfig runs confLA on the proposed configuration, then histLA on
/// the singleton of its output, and broadcasts the resulting history with
/// the histLA certificate.
namespace dynbft::reconfig {

using lattice::Configuration;
using lattice::History;
using lattice::ProcessId;

inline constexpr std::uint8_t kConfLa = 1;
inline constexpr std::uint8_t kHistLa = 2;
inline constexpr std::uint8_t kDataObject = 3;

/// Process that signs declared histories for deployments without
/// reconfiguration.
inline constexpr const char* kAuthority = "@authority";

enum class DataKind { None, Dbla, MaxReg };

/// How proposed configurations are certified.
enum class ConfigAuth { AcceptAll, Client, Sanity, Quorum, Admin };

std::string to_string(DataKind k);
std::string to_string(ConfigAuth a);
/// Throw std::invalid_argument.
DataKind data_kind_from_string(const std::string& s);
ConfigAuth config_auth_from_string(const std::string& s);

struct DeploymentSpec {
  std::vector<ProcessId> initial;  // replicas of C0
  std::vector<ProcessId> spares;   // replica processes outside C0
  std::vector<ProcessId> clients;
  std::vector<ProcessId> admins;
  DataKind data = DataKind::Dbla;
  /// Hosts confLA and histLA and enables `update-config`.
  bool reconfigurable = true;
  ConfigAuth auth = ConfigAuth::AcceptAll;
  /// Access-control object under test (`request VALUE` operations).
  std::optional<ac::Mode> access_control;
  ac::ConflictSet conflicts;
  std::set<std::string> denied;
  /// Named configurations available to `update-config`.
  std::map<std::string, Configuration> configs;
  /// Named histories with authority certificates for `update-history`.
  std::map<std::string, History> histories;
};

/// True when the proposed configuration is certified under `auth`.
bool verify_input_config(Verifier& verifier, ConfigAuth auth, const ac::Policy& policy, const Configuration& c,
                         ByteView cert);

/// Registers input checks and the history hook on `verifier`.
void wire_verifier(Verifier& verifier, const DeploymentSpec& spec);

/// True iff `v` is the singleton of a verifiable confLA output whose
/// certificate digest is `cert`.
bool histla_verify_input(Verifier& verifier, const wire::InputValue& v);

/// History hook: histLA output certificate for exactly the configurations
/// of `h`.
bool verify_output_history(Verifier& verifier, const History& h, ByteView tau);

/// Client module implementing `update-config NAME` and
/// `update-history NAME`.
class ReconfigDriver final : public dyn::ClientModule {
 public:
  ReconfigDriver(dyn::Node& node, const DeploymentSpec& spec, std::shared_ptr<dbla::DblaClient> conf_la,
                 std::shared_ptr<dbla::DblaClient> hist_la, std::shared_ptr<ac::AcClient> ac,
                 std::map<std::string, Bytes> history_certs);

  bool start(sim::Context& ctx, const sim::Operation& op) override;

 private:
  void with_config_cert(sim::Context& ctx, const std::string& name, const Configuration& c);
  void run_conf_la(sim::Context& ctx, const std::string& name, const Configuration& c, Bytes cert);

  dyn::Node& node_;
  const DeploymentSpec& spec_;
  std::shared_ptr<dbla::DblaClient> conf_la_;
  std::shared_ptr<dbla::DblaClient> hist_la_;
  std::shared_ptr<ac::AcClient> ac_;
  std::map<std::string, Bytes> history_certs_;
};

/// A fully wired deployment inside a simulator.
class Deployment {
 public:
  Deployment(sim::Simulator& sim, DeploymentSpec spec);

  const DeploymentSpec& spec() const { return spec_; }
  Verifier& verifier() { return *verifier_; }
  const std::shared_ptr<Verifier>& verifier_ptr() const { return verifier_; }
  const Configuration& c0() const { return c0_; }
  ac::Policy policy() const;

  /// Replica processes (initial and spare).
  const std::vector<ProcessId>& replicas() const { return replicas_; }
  dyn::Node& node(const ProcessId& id);
  bool is_replica(const ProcessId& id) const;

 private:
  sim::Simulator& sim_;
  DeploymentSpec spec_;
  Configuration c0_;
  std::shared_ptr<Verifier> verifier_;
  std::vector<ProcessId> replicas_;
};

/// Configuration obtained by adding `updates` to `base`.
Configuration extend(const Configuration& base, const std::vector<lattice::Update>& updates);

}  // namespace dynbft::reconfig

#endif  // DYNBFT_RECONFIG_HPP_
