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

#include "dynbft/reconfig.hpp"

#include <stdexcept>

namespace dynbft::reconfig {

std::string to_string(DataKind k) {
  switch (k) {
    case DataKind::None:
      return "none";
    case DataKind::Dbla:
      return "dbla";
    case DataKind::MaxReg:
      return "maxreg";
  }
  return "?";
}

std::string to_string(ConfigAuth a) {
  switch (a) {
    case ConfigAuth::AcceptAll:
      return "accept-all";
    case ConfigAuth::Client:
      return "client";
    case ConfigAuth::Sanity:
      return "sanity";
    case ConfigAuth::Quorum:
      return "quorum";
    case ConfigAuth::Admin:
      return "admin";
  }
  return "?";
}

DataKind data_kind_from_string(const std::string& s) {
  if (s == "none") return DataKind::None;
  if (s == "dbla") return DataKind::Dbla;
  if (s == "maxreg") return DataKind::MaxReg;
  throw std::invalid_argument("unknown data object: " + s);
}

ConfigAuth config_auth_from_string(const std::string& s) {
  if (s == "accept-all") return ConfigAuth::AcceptAll;
  if (s == "client") return ConfigAuth::Client;
  if (s == "sanity") return ConfigAuth::Sanity;
  if (s == "quorum") return ConfigAuth::Quorum;
  if (s == "admin") return ConfigAuth::Admin;
  throw std::invalid_argument("unknown input-config authorisation: " + s);
}

Configuration extend(const Configuration& base, const std::vector<lattice::Update>& updates) {
  auto all = base.updates();
  all.insert(all.end(), updates.begin(), updates.end());
  return Configuration(std::move(all));
}

namespace {

std::optional<ac::Mode> ac_mode(const DeploymentSpec& spec) {
  if (spec.access_control) return spec.access_control;
  switch (spec.auth) {
    case ConfigAuth::Sanity:
      return ac::Mode::Sanity;
    case ConfigAuth::Quorum:
      return ac::Mode::Quorum;
    case ConfigAuth::Admin:
      return ac::Mode::Admin;
    default:
      return std::nullopt;
  }
}

ac::Policy policy_of(const DeploymentSpec& spec) {
  ac::Policy p;
  p.mode = ac_mode(spec).value_or(ac::Mode::Sanity);
  p.admins = spec.admins;
  return p;
}

}  // namespace

// ---- Verification wiring ---------------------------------------------------

bool verify_input_config(Verifier& verifier, ConfigAuth auth, const ac::Policy& policy, const Configuration& c,
                         ByteView cert) {
  switch (auth) {
    case ConfigAuth::AcceptAll:
      return true;
    case ConfigAuth::Client:
      return check_client_input_cert(verifier.plain(), kConfLa,
                                     wire::InputValue{c, Bytes(cert.begin(), cert.end())});
    case ConfigAuth::Sanity:
    case ConfigAuth::Quorum:
    case ConfigAuth::Admin:
      return ac::verify_cert(verifier, policy, c.encode(), cert);
  }
  return false;
}

bool histla_verify_input(Verifier& verifier, const wire::InputValue& v) {
  const auto* hv = std::get_if<lattice::HistValue>(&v.value);
  if (hv == nullptr || hv->configs().size() != 1) return false;
  const Bytes* tau = verifier.store().get(v.cert);
  if (tau == nullptr) return false;
  return dbla::verify_output_value(verifier, kConfLa, hv->configs().front(), *tau);
}

bool verify_output_history(Verifier& verifier, const History& h, ByteView tau) {
  return dbla::verify_output_value(verifier, kHistLa, h.to_hist_value(), tau);
}

void wire_verifier(Verifier& verifier, const DeploymentSpec& spec) {
  verifier.set_authority(kAuthority);
  verifier.set_output_history_check(verify_output_history);
  const auto auth = spec.auth;
  const auto policy = policy_of(spec);
  verifier.set_input_check(kConfLa, [auth, policy](Verifier& v, const wire::InputValue& iv) {
    const auto* c = std::get_if<Configuration>(&iv.value);
    if (c == nullptr) return false;
    if (is_genesis_input_cert(iv.cert)) return *c == v.c0();
    return verify_input_config(v, auth, policy, *c, iv.cert);
  });
  verifier.set_input_check(kHistLa, [](Verifier& v, const wire::InputValue& iv) {
    if (is_genesis_input_cert(iv.cert)) return iv.value == lattice::LatticeValue(v.genesis().to_hist_value());
    return histla_verify_input(v, iv);
  });
  verifier.set_input_check(kDataObject, [](Verifier& v, const wire::InputValue& iv) {
    return check_client_input_cert(v.plain(), kDataObject, iv);
  });
}

// ---- Driver ----------------------------------------------------------------

ReconfigDriver::ReconfigDriver(dyn::Node& node, const DeploymentSpec& spec, std::shared_ptr<dbla::DblaClient> conf_la,
                               std::shared_ptr<dbla::DblaClient> hist_la, std::shared_ptr<ac::AcClient> ac,
                               std::map<std::string, Bytes> history_certs)
    : node_(node),
      spec_(spec),
      conf_la_(std::move(conf_la)),
      hist_la_(std::move(hist_la)),
      ac_(std::move(ac)),
      history_certs_(std::move(history_certs)) {}

bool ReconfigDriver::start(sim::Context& ctx, const sim::Operation& op) {
  if (op.name == "update-history") {
    const auto name = op.args.empty() ? std::string() : op.args[0];
    auto it = spec_.histories.find(name);
    if (it == spec_.histories.end()) {
      node_.finish_operation(ctx, {{"error", "unknown history " + name}});
      return true;
    }
    const bool ok = node_.update_history(ctx, it->second, history_certs_.at(name));
    node_.finish_operation(ctx, {{"status", ok ? "ok" : "rejected"}, {"history", it->second.to_string()}});
    return true;
  }
  if (op.name != "update-config" || !spec_.reconfigurable) return false;
  const auto name = op.args.empty() ? std::string() : op.args[0];
  auto it = spec_.configs.find(name);
  if (it == spec_.configs.end()) {
    node_.finish_operation(ctx, {{"error", "unknown configuration " + name}});
    return true;
  }
  with_config_cert(ctx, name, it->second);
  return true;
}

void ReconfigDriver::with_config_cert(sim::Context& ctx, const std::string& name, const Configuration& c) {
  switch (spec_.auth) {
    case ConfigAuth::AcceptAll:
      run_conf_la(ctx, name, c, {});
      return;
    case ConfigAuth::Client: {
      const auto sig = ctx.plain_sign(client_input_statement(kConfLa, c));
      run_conf_la(ctx, name, c, client_input_cert(ctx.self(), sig));
      return;
    }
    default:
      ac_->request(ctx, c.encode(), [this, name, c](sim::Context& cx, std::optional<Bytes> cert) {
        if (!cert) {
          node_.finish_operation(cx, {{"status", "denied"}, {"name", name}});
          return;
        }
        run_conf_la(cx, name, c, std::move(*cert));
      });
  }
}

void ReconfigDriver::run_conf_la(sim::Context& ctx, const std::string& name, const Configuration& c, Bytes cert) {
  conf_la_->propose(ctx, wire::InputValue{c, std::move(cert)}, [this, name](sim::Context& cx,
                                                                              const lattice::LatticeValue& w,
                                                                              const wire::OutputCertificate& tau_c) {
    const auto& joined = std::get<Configuration>(w);
    const auto digest = node_.verifier().store().put(tau_c.encode());
    const lattice::LatticeValue single = lattice::HistValue({joined});
    hist_la_->propose(
        cx, wire::InputValue{single, Bytes(digest.begin(), digest.end())},
        [this, name, joined](sim::Context& c2, const lattice::LatticeValue& hw, const wire::OutputCertificate& tau_h) {
          const auto h = History::make(std::get<lattice::HistValue>(hw).configs());
          const auto d = node_.verifier().store().put(tau_h.encode());
          const auto cert = wire::HistoryCert{wire::HistoryCertKind::Output, {}, Bytes(d.begin(), d.end())}.encode();
          sim::json out{{"name", name}, {"config", joined.to_string()}, {"config_hex", dyn::config_hex(joined)}};
          if (!h) {
            out["status"] = "incomparable";
          } else {
            const bool ok = node_.update_history(c2, *h, cert);
            out["status"] = ok ? "ok" : "rejected";
            out["history"] = h->to_string();
            out["history_hex"] = to_hex(h->encode());
          }
          node_.finish_operation(c2, std::move(out));
        });
  });
}

// ---- Deployment ------------------------------------------------------------

ac::Policy Deployment::policy() const { return policy_of(spec_); }

Deployment::Deployment(sim::Simulator& sim, DeploymentSpec spec)
    : sim_(sim), spec_(std::move(spec)), c0_(Configuration::of_replicas(spec_.initial)) {
  verifier_ = std::make_shared<Verifier>(sim.fs(), sim.plain(), c0_);
  wire_verifier(*verifier_, spec_);

  std::set<Bytes> denied;
  for (const auto& d : spec_.denied) {
    const auto b = as_bytes(d);
    denied.emplace(b.begin(), b.end());
    if (auto it = spec_.configs.find(d); it != spec_.configs.end()) denied.insert(it->second.encode());
  }
  const ac::DenyPredicate deny = [denied](ByteView v) { return denied.contains(Bytes(v.begin(), v.end())); };

  std::map<std::string, Bytes> history_certs;
  for (const auto& [name, h] : spec_.histories)
    history_certs[name] = authority_history_cert(sim.plain(), kAuthority, h);

  const auto mode = ac_mode(spec_);
  const bool dynamic_ac = mode && *mode != ac::Mode::Admin;
  const auto policy = policy_of(spec_);

  replicas_ = spec_.initial;
  replicas_.insert(replicas_.end(), spec_.spares.begin(), spec_.spares.end());
  for (const auto& r : replicas_) {
    auto node = std::make_unique<dyn::Node>(verifier_, true);
    auto& core = node->core();
    if (spec_.data == DataKind::Dbla) core.add_object(std::make_unique<dbla::DblaState>(kDataObject));
    if (spec_.data == DataKind::MaxReg) core.add_object(std::make_unique<maxreg::MaxRegState>(kDataObject));
    if (spec_.reconfigurable) {
      core.add_object(std::make_unique<dbla::DblaState>(kConfLa));
      core.add_object(std::make_unique<dbla::DblaState>(kHistLa));
    }
    if (dynamic_ac) core.add_object(std::make_unique<ac::AcState>(*mode, deny, spec_.conflicts));
    sim.spawn(r, std::move(node));
  }

  const wire::InputValue conf_seed{c0_, genesis_input_cert()};
  const wire::InputValue hist_seed{verifier_->genesis().to_hist_value(), genesis_input_cert()};
  for (const auto& c : spec_.clients) {
    auto node = std::make_unique<dyn::Node>(verifier_, false);
    auto& n = *node;
    if (spec_.data == DataKind::Dbla)
      n.add_client(std::make_shared<dbla::DblaClient>(n, kDataObject, std::nullopt, true));
    if (spec_.data == DataKind::MaxReg) n.add_client(std::make_shared<maxreg::MaxRegClient>(n, kDataObject));
    std::shared_ptr<dbla::DblaClient> conf_la;
    std::shared_ptr<dbla::DblaClient> hist_la;
    if (spec_.reconfigurable) {
      conf_la = std::make_shared<dbla::DblaClient>(n, kConfLa, conf_seed, false);
      hist_la = std::make_shared<dbla::DblaClient>(n, kHistLa, hist_seed, false);
      n.add_client(conf_la);
      n.add_client(hist_la);
    }
    std::shared_ptr<ac::AcClient> acc;
    if (mode) {
      acc = std::make_shared<ac::AcClient>(n, policy, spec_.access_control.has_value());
      n.add_client(acc);
    }
    n.add_client(std::make_shared<ReconfigDriver>(n, spec_, conf_la, hist_la, acc, history_certs));
    sim.spawn(c, std::move(node));
  }

  for (const auto& a : spec_.admins) {
    auto node = std::make_unique<dyn::Node>(verifier_, false);
    node->add_service(ac::kAdminObject, ac::admin_service(deny));
    sim.spawn(a, std::move(node));
  }
}

dyn::Node& Deployment::node(const ProcessId& id) { return dynamic_cast<dyn::Node&>(sim_.automaton(id)); }

bool Deployment::is_replica(const ProcessId& id) const {
  return std::find(replicas_.begin(), replicas_.end(), id) != replicas_.end();
}

}  // namespace dynbft::reconfig
