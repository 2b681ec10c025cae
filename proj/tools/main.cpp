// Copyright 2026 The fermijet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fermijet command-line driver.
//
// Exit codes: 0 all enabled checks pass, 1 some check failed, 2 bad
// configuration or command line.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fermijet/config.hpp"
#include "fermijet/pipeline.hpp"

namespace {

using namespace fermijet;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string config_path;
  std::optional<int> order;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  unsigned threads = 0;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("config", o.config_path, "Run configuration (JSON)")->required();
  cmd->add_option("--order", o.order, "Jet order, 2..5");
  cmd->add_option("--tol", o.tol, "Tolerance for the characterization conditions");
  cmd->add_option("--seed", o.seed, "Seed for randomized catalog cases");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)");
}

RunConfig load(const Overrides& o) {
  std::ifstream in(o.config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + o.config_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_run_config(ss.str());
  if (o.order) cfg.order = *o.order;
  if (o.tol) cfg.tolerance = *o.tol;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output.dir = *o.out;
  if (o.format) cfg.output.format = *o.format;
  cfg.validate();
  return cfg;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

void print_case(const CaseRecord& c) {
  std::cout << (c.pass() ? "PASS " : "FAIL ") << c.name << " " << c.type;
  if (!c.error.empty()) {
    std::cout << "  error: " << c.error << "\n";
    return;
  }
  if (c.conditions) {
    std::cout << "  cond";
    for (const auto& r : c.conditions->conditions) std::cout << " " << r.name << "=" << sci(r.residual);
  }
  if (c.first_order) std::cout << "  first-order=" << sci(c.first_order->max_abs_dev());
  if (c.linearized) {
    std::cout << "  linearized=" << (c.linearized->pass() ? "ok" : "bad");
    if (c.linearized->fitted_exponent) std::cout << " exponent=" << sci(*c.linearized->fitted_exponent);
  }
  if (c.loop_deviation) std::cout << "  loop=" << sci(c.loop_deviation->value);
  if (c.gauss) std::cout << "  gauss=" << sci(c.gauss->value);
  if (c.metric_jet) std::cout << "  jet order " << c.metric_jet->layout()->order();
  if (c.prediction && !c.first_order) std::cout << "  " << c.prediction->entries.size() << " predicted";
  std::cout << "\n";
}

int run(const Overrides& o, unsigned stages) {
  RunConfig cfg;
  std::vector<CaseSpec> cases;
  try {
    cfg = load(o);
    cases = expand_cases(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "fermijet: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run_cases(cases, cfg, stages, o.threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& c : r.cases) print_case(c);
  try {
    for (const auto& p : write_reports(r, cfg.output.dir, cfg.output.format)) std::cout << "wrote " << p << "\n";
  } catch (const std::exception& e) {
    std::cerr << "fermijet: " << e.what() << "\n";
    return kExitConfig;
  }
  std::cout << r.cases.size() << " case(s), " << (r.pass() ? "all passed" : "FAILURES") << ", "
            << sci(secs) << " s\n";
  return r.pass() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fermi coordinate metric jets and their verification"};
  app.require_subcommand(1);

  auto* cat = app.add_subcommand("catalog", "List the built-in example cases");
  std::string dump;
  cat->add_option("--dump", dump, "Print the case specification of a catalog entry as JSON");

  Overrides o;
  struct Sub {
    const char* name;
    const char* help;
    unsigned stages;
  };
  const Sub subs[] = {
      {"run", "All checks", kStageAll},
      {"verify", "Characterization conditions only", kStageConditions},
      {"taylor", "Dump the measured metric jet", kStageTaylor},
      {"predict", "Dump the linear prediction and compare first-order rows", kStagePredict},
      {"loop", "Frame-recursion closed loop", kStageLoop},
  };
  std::vector<std::pair<CLI::App*, unsigned>> runners;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_run_options(cmd, o);
    runners.emplace_back(cmd, s.stages);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (cat->parsed()) {
    if (!dump.empty()) {
      try {
        std::cout << serialize_case(catalog_case(dump));
      } catch (const ConfigError& e) {
        std::cerr << "fermijet: " << e.what() << "\n";
        return kExitConfig;
      }
      return 0;
    }
    std::size_t w = 0;
    for (const auto& e : catalog()) w = std::max(w, e.name.size());
    for (const auto& e : catalog()) std::cout << e.name << std::string(w + 2 - e.name.size(), ' ') << e.description << "\n";
    return 0;
  }
  for (const auto& [cmd, stages] : runners)
    if (cmd->parsed()) return run(o, stages);
  return kExitConfig;
}
