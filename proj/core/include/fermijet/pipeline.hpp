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

// Per-case verification pipeline and report writers.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fermijet/config.hpp"
#include "fermijet/verify.hpp"

namespace fermijet {

inline constexpr int kReportSchemaVersion = 1;

enum Stage : unsigned {
  kStageConditions = 1u << 0,
  kStageTaylor = 1u << 1,
  kStagePredict = 1u << 2,  // prediction and the first-order comparison
  kStageLinearize = 1u << 3,
  kStageLoop = 1u << 4,
  kStageGauss = 1u << 5,
  kStageAll = 0x3fu,
};

struct ScalarCheck {
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CaseRecord {
  std::string name;
  std::string type;
  std::string error;  // empty unless a stage threw
  std::optional<ConditionReport> conditions;
  std::optional<JetMatrix> metric_jet;
  std::optional<LinearPrediction> prediction;
  std::optional<ComparisonReport> first_order;
  std::optional<ComparisonReport> linearized;
  std::optional<ComparisonReport> loop;  // measured vs reassembled, row 0
  int loop_order = 0;
  std::optional<ScalarCheck> loop_deviation;
  std::optional<ScalarCheck> gauss;

  bool pass() const;
};

struct RunResult {
  int order = 0;
  std::uint64_t seed = 0;
  unsigned stages = 0;
  std::vector<CaseRecord> cases;  // sorted by name

  bool pass() const;
};

CaseRecord run_case(const CaseSpec& spec, const RunConfig& cfg, unsigned stages);

/// Runs every case, in parallel when `threads` > 1 (0 picks the hardware
/// concurrency). Failures are recorded per case.
RunResult run_cases(const std::vector<CaseSpec>& cases, const RunConfig& cfg, unsigned stages, unsigned threads = 0);

struct ReportFile {
  std::string name;
  std::string content;
};

/// Report documents for the enabled stages, in a fixed order.
std::vector<ReportFile> render_reports(const RunResult& r, const std::string& format);

/// Writes render_reports into dir (created if missing); returns the paths.
std::vector<std::string> write_reports(const RunResult& r, const std::string& dir, const std::string& format);

std::string csv_field(const std::string& s);

}  // namespace fermijet
