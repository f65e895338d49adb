//
// Copyright 2026 The GeoPrivacy Budgeting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Command-line experiment runner.
//
//   geopriv_cli range-count --config cfg.json [--seed S] [--trials T] [--out f.csv]
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geopriv/experiment.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
};

int Run(const std::string& command, const Flags& flags) {
  geopriv::ExperimentConfig cfg;
  try {
    nlohmann::json j;
    {
      std::ifstream in(flags.config);
      if (!in) throw geopriv::ConfigError("cannot open config " + flags.config);
      try {
        in >> j;
      } catch (const nlohmann::json::parse_error& e) {
        throw geopriv::ConfigError(std::string("invalid JSON: ") + e.what());
      }
    }
    if (!j.is_object()) throw geopriv::ConfigError("config must be a JSON object");
    const geopriv::QueryKind kind = geopriv::ParseQueryKind(command);
    if (j.contains("query") && j["query"].is_string() &&
        geopriv::ParseQueryKind(j["query"].get<std::string>()) != kind) {
      throw geopriv::ConfigError("config query '" + j["query"].get<std::string>() +
                                 "' does not match subcommand '" + command + "'");
    }
    j["query"] = geopriv::QueryKindName(kind);
    if (flags.seed) j["seed"] = *flags.seed;
    if (flags.trials) j["trials"] = *flags.trials;
    cfg = geopriv::ParseExperimentConfig(j);
  } catch (const geopriv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const std::vector<geopriv::ResultRow> rows = geopriv::RunExperiment(cfg);
    if (flags.out.empty() || flags.out == "-") {
      geopriv::WriteCsv(std::cout, rows);
    } else {
      std::ofstream out(flags.out, std::ios::binary);
      if (!out) {
        std::cerr << "cannot write " << flags.out << "\n";
        return kExitFailure;
      }
      geopriv::WriteCsv(out, rows);
    }
  } catch (const geopriv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geo-private query experiments"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"range-count", "Rectangle range counting"},
      {"kde", "Gaussian kernel density estimate"},
      {"knn", "k nearest neighbors"},
      {"threshold", "Central-model threshold query"},
      {"multi-query", "Sequence of range counting queries under one budget"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON experiment config")->required();
    sub->add_option("--seed", flags.seed, "Override the config seed");
    sub->add_option("--trials", flags.trials, "Override the number of trials");
    sub->add_option("--out", flags.out, "Output CSV path (default stdout)");
    sub->callback([&chosen, name = name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  return Run(chosen, flags);
}
