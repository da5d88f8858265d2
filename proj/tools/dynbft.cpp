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

#include <CLI11.hpp>

#include <iostream>

#include "dynbft/harness/attacks.hpp"
#include "dynbft/harness/harness.hpp"

using namespace dynbft;

namespace {

harness::RunOptions options_from(std::optional<std::uint64_t> max_steps, const std::string& backend, bool adversary) {
  harness::RunOptions o;
  o.max_steps = max_steps;
  if (!backend.empty()) o.backend = crypto::fs_backend_from_string(backend);
  o.adversary = adversary;
  return o;
}

void print(const harness::RunReport& r, bool json) {
  if (json) {
    std::cout << r.to_json().dump() << "\n";
  } else {
    std::cout << r.summary();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulation harness for dynamic Byzantine objects"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Print reports as JSON");

  std::string scenario_path, trace_path, backend, seeds;
  std::optional<std::uint64_t> max_steps;
  std::uint64_t seed = 1;
  bool do_check = false;

  auto* run = app.add_subcommand("run", "Run one seed of a scenario");
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Seed");
  run->add_option("--max-steps", max_steps, "Step cap");
  run->add_option("--trace", trace_path, "Write the JSONL trace here");
  run->add_option("--backend", backend, "Forward-secure backend (oracle | keychain)");
  run->add_flag("--check", do_check, "Re-check the written trace offline");

  auto* sweep = app.add_subcommand("sweep", "Run a range of seeds");
  sweep->add_option("--scenario", scenario_path, "Scenario file")->required();
  sweep->add_option("--seeds", seeds, "Seed range A..B (default: the file's seeds)");
  sweep->add_option("--max-steps", max_steps, "Step cap");
  sweep->add_option("--backend", backend, "Forward-secure backend (oracle | keychain)");

  std::string attack_name, object = "dbla";
  bool no_adversary = false;
  auto* attack = app.add_subcommand("attack", "Run a scripted attack");
  attack->add_option("--name", attack_name, "i_still_work_here | slow_reader")->required();
  attack->add_option("--object", object, "dbla | maxreg");
  std::string attack_seeds = "1";
  attack->add_option("--seeds", attack_seeds, "Seed range A..B");
  attack->add_option("--trace", trace_path, "Write the JSONL trace of the first seed here");
  attack->add_option("--backend", backend, "Forward-secure backend (oracle | keychain)");
  attack->add_flag("--no-adversary", no_adversary, "Control run without corruption");

  auto* check = app.add_subcommand("check", "Evaluate the invariants of a trace");
  check->add_option("--trace", trace_path, "JSONL trace")->required();
  auto* replay = app.add_subcommand("replay", "Re-execute a trace and compare hashes");
  replay->add_option("--trace", trace_path, "JSONL trace")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto s = scenario::parse_file(scenario_path);
      auto report = harness::run(s, seed, options_from(max_steps, backend, true), trace_path);
      if (do_check && !trace_path.empty()) {
        const auto offline = harness::check(harness::read_trace(trace_path));
        if (offline.to_json()["invariants"] != report.to_json()["invariants"]) {
          std::cerr << "offline check disagrees with the run\n";
          return 1;
        }
      }
      print(report, json);
      return report.ok() ? 0 : 1;
    }
    if (*sweep) {
      const auto s = scenario::parse_file(scenario_path);
      const auto list = seeds.empty() ? s.seeds : scenario::parse_seed_range(seeds);
      std::size_t failed = 0;
      for (const auto sd : list) {
        const auto r = harness::run(s, sd, options_from(max_steps, backend, true));
        if (!r.ok()) {
          ++failed;
          print(r, json);
        }
      }
      std::cout << s.name << ": " << list.size() - failed << "/" << list.size() << " seeds passed\n";
      return failed == 0 ? 0 : 1;
    }
    if (*attack) {
      const auto a = harness::attack_from_string(attack_name);
      const auto obj = reconfig::data_kind_from_string(object);
      const auto opts = options_from(std::nullopt, backend, !no_adversary);
      std::size_t failed = 0;
      const auto list = scenario::parse_seed_range(attack_seeds);
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto r = harness::run_attack(a, obj, list[i], opts, i == 0 ? trace_path : std::string());
        if (!r.pass) {
          ++failed;
          std::cout << "seed " << list[i] << ": " << r.verdict << "\n";
          print(r.report, json);
        }
      }
      std::cout << harness::to_string(a) << " against " << object << (no_adversary ? " (control)" : "") << ": "
                << list.size() - failed << "/" << list.size() << " seeds passed\n";
      return failed == 0 ? 0 : 1;
    }
    if (*check) {
      const auto r = harness::check(harness::read_trace(trace_path));
      print(r, json);
      return r.ok() ? 0 : 1;
    }
    if (*replay) {
      const auto t = harness::read_trace(trace_path);
      std::string hash;
      const bool same = harness::replay(t, &hash);
      std::cout << (same ? "identical" : "DIFFERENT") << " trace hash " << hash << "\n";
      return same ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
