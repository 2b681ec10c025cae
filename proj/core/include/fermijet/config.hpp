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

// Run configuration and the built-in example catalog.
//
// A case is written in the expression language: n coordinate names, an n x n
// metric, k parameter names and n embedding components. The identifier `eps`
// is available in every expression; its value is the case's `eps` field, and
// cases marked `linearize` are also treated as the family eps -> case.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fermijet/expr.hpp"
#include "fermijet/fermi.hpp"
#include "fermijet/geometry.hpp"
#include "fermijet/verify.hpp"

namespace fermijet {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kFamilyParameter = "eps";

struct CaseSpec {
  std::string name;
  SubmanifoldType type;
  std::vector<std::string> coordinates;           // n
  std::vector<std::vector<std::string>> metric;   // n x n, symmetric
  std::vector<std::string> parameters;            // k
  std::vector<std::string> embedding;             // n
  std::vector<double> base;                       // k
  double eps = 0.0;
  bool linearize = false;

  bool operator==(const CaseSpec&) const = default;
};

/// Catalog arguments; unset fields take the catalog defaults.
struct CatalogArgs {
  std::optional<SubmanifoldType> type;
  std::optional<double> kappa;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
};

struct CaseInput {
  std::string catalog;        // empty for an explicit case
  CatalogArgs args;
  std::optional<std::string> name;
  std::optional<CaseSpec> spec;
};

struct OutputSettings {
  std::string dir = "fermijet-out";
  std::string format = "both";  // csv | json | both
};

struct RunConfig {
  int order = 4;
  double tolerance = 1e-8;       // conditions
  double first_order_tolerance = 1e-7;
  double loop_tolerance = 1e-6;
  double gauss_tolerance = 1e-8;
  std::uint64_t seed = 1;
  GeodesicSolverConfig solver;
  double radius = 0.5;
  LinearizeOptions linearize;    // `order` and `fermi` are filled in per run
  OutputSettings output;
  std::vector<CaseInput> cases;

  /// Range and consistency checks on everything except case contents.
  void validate() const;
};

struct CatalogEntry {
  std::string name;
  std::string description;
};

/// Built-in examples, sorted by name.
const std::vector<CatalogEntry>& catalog();
CaseSpec catalog_case(const std::string& name, const CatalogArgs& args = {}, std::uint64_t default_seed = 1);

/// Parses a configuration document; throws ConfigError with a path to the
/// offending field.
RunConfig parse_run_config(const std::string& json_text);
std::string serialize_run_config(const RunConfig& cfg);

std::string serialize_case(const CaseSpec& c);
CaseSpec parse_case(const std::string& json_text);

/// Type/dimension consistency and expression parsing.
void validate_case(const CaseSpec& c);
/// Catalog expansion (using cfg.seed for unseeded random cases) and validation.
std::vector<CaseSpec> expand_cases(const RunConfig& cfg);

/// Charts for the case with `eps` bound to the given value.
CaseGeometry build_case(const CaseSpec& c, double eps);
inline CaseGeometry build_case(const CaseSpec& c) { return build_case(c, c.eps); }

SubmanifoldType parse_type(const std::string& text);
std::string type_string(const SubmanifoldType& t);

}  // namespace fermijet
