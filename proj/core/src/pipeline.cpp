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

#include "fermijet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace fermijet {

using nlohmann::ordered_json;

bool CaseRecord::pass() const {
  if (!error.empty()) return false;
  if (conditions && !conditions->pass()) return false;
  if (first_order && !first_order->pass()) return false;
  if (linearized && !linearized->pass()) return false;
  if (loop_deviation && !loop_deviation->pass) return false;
  if (gauss && !gauss->pass) return false;
  return true;
}

bool RunResult::pass() const {
  return std::all_of(cases.begin(), cases.end(), [](const CaseRecord& c) { return c.pass(); });
}

namespace {

ComparisonReport loop_entries(const JetMatrix& measured, const JetMatrix& rebuilt, int order, double tol) {
  ComparisonReport rep;
  const auto& lay = measured.layout();
  for (int i = 0; i < measured.rows(); ++i)
    for (int j = i; j < measured.cols(); ++j)
      for (int m = 0; m < lay->size(); ++m) {
        const MultiIndex& kk = lay->monomial(m);
        if (kk.order() > order) continue;
        ComparisonEntry e;
        e.i = i;
        e.j = j;
        e.k = kk;
        e.measured = measured(i, j).derivative(kk);
        e.predicted = rebuilt(i, j).derivative(kk);
        e.abs_dev = std::abs(e.measured - e.predicted);
        e.rel_dev = relative_deviation(e.measured, e.predicted);
        e.tolerance = tol;
        e.pass = e.abs_dev <= tol;
        rep.entries.push_back(std::move(e));
      }
  return rep;
}

}  // namespace

CaseRecord run_case(const CaseSpec& spec, const RunConfig& cfg, unsigned stages) {
  CaseRecord rec;
  rec.name = spec.name;
  rec.type = type_string(spec.type);
  try {
    const CaseGeometry geo = build_case(spec);
    const AdaptedFrame frame = adapted_frame(geo.metric, geo.submanifold, geo.type);
    FermiOptions fo;
    fo.solver = cfg.solver;
    fo.radius = cfg.radius;
    const FermiChart chart(geo.metric, geo.submanifold, frame, fo);
    const int k = spec.type.k();

    JetMatrix gt;
    if (stages & (kStageConditions | kStageTaylor | kStagePredict)) gt = fermi_metric_jet(chart, cfg.order);
    if (stages & kStageConditions) rec.conditions = check_conditions(gt, frame.h, k, cfg.order, cfg.tolerance);
    if (stages & kStageTaylor) rec.metric_jet = gt;
    if (stages & kStagePredict) {
      const auto curv = frame_curvature(geo.metric, geo.submanifold, frame, cfg.order - 2);
      const auto fund = second_fundamental_form(geo.metric, geo.submanifold, frame, cfg.order - 1);
      rec.prediction = predict_linear_jet(curv, fund, frame.h, k, cfg.order);
      rec.first_order = compare_first_order(gt, *rec.prediction, cfg.first_order_tolerance);
    }
    if ((stages & kStageLinearize) && spec.linearize) {
      LinearizeOptions lo = cfg.linearize;
      lo.order = std::min(cfg.order, 3);
      lo.min_order = std::min(lo.min_order, lo.order);
      lo.fermi = fo;
      rec.linearized = linearized_compare([&spec](double e) { return build_case(spec, e); }, lo);
    }
    if (stages & kStageLoop) {
      rec.loop_order = std::min(cfg.order, 3);
      const auto f = solve_frame_coefficients(fermi_tensor_jets(chart, rec.loop_order), frame.h, k, rec.loop_order);
      const JetMatrix rebuilt = reassemble_metric_jet(f);
      const JetMatrix measured = fermi_metric_jet(chart, rec.loop_order);
      rec.loop = loop_entries(measured, rebuilt, rec.loop_order, cfg.loop_tolerance);
      const double d = max_derivative_deviation(rebuilt, measured, rec.loop_order);
      rec.loop_deviation = ScalarCheck{d, cfg.loop_tolerance, d <= cfg.loop_tolerance};
    }
    if (stages & kStageGauss) {
      const double r = gauss_residual(geo.metric, geo.submanifold, frame);
      rec.gauss = ScalarCheck{r, cfg.gauss_tolerance, r <= cfg.gauss_tolerance};
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
    if (rec.error.empty()) rec.error = "unknown error";
  }
  return rec;
}

RunResult run_cases(const std::vector<CaseSpec>& cases, const RunConfig& cfg, unsigned stages, unsigned threads) {
  RunResult r;
  r.order = cfg.order;
  r.seed = cfg.seed;
  r.stages = stages;
  r.cases.resize(cases.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(cases.size(), 1)));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) r.cases[i] = run_case(cases[i], cfg, stages);
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  std::stable_sort(r.cases.begin(), r.cases.end(),
                   [](const CaseRecord& a, const CaseRecord& b) { return a.name < b.name; });
  return r;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON numbers: non-finite values become null.
ordered_json jnum(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

const char* kComparisonHeader = "case,i,j,K,measured,predicted,deviation,pass\n";

void comparison_rows(std::string& out, const std::string& name, const ComparisonReport& rep) {
  for (const auto& e : rep.entries)
    out += csv_field(name) + "," + std::to_string(e.i) + "," + std::to_string(e.j) + "," + csv_field(e.k.str()) +
           "," + num(e.measured) + "," + num(e.predicted) + "," + num(e.abs_dev) + "," + (e.pass ? "true" : "false") +
           "\n";
}

template <class Get>
std::string comparison_csv(const RunResult& r, Get get) {
  std::string out = kComparisonHeader;
  for (const auto& c : r.cases)
    if (const auto* rep = get(c)) comparison_rows(out, c.name, *rep);
  return out;
}

ordered_json comparison_json(const ComparisonReport& rep) {
  ordered_json j;
  j["pass"] = rep.pass();
  j["entries"] = rep.entries.size();
  j["failures"] = std::count_if(rep.entries.begin(), rep.entries.end(), [](const auto& e) { return !e.pass; });
  j["max_abs_deviation"] = jnum(rep.max_abs_dev());
  double rel = 0.0;
  for (const auto& e : rep.entries) rel = std::max(rel, e.rel_dev);
  j["max_rel_deviation"] = jnum(rel);
  if (!rep.entries.empty()) j["tolerance"] = jnum(rep.entries.front().tolerance);
  if (!rep.eps_used.empty()) j["eps"] = rep.eps_used;
  if (!rep.scaling_eps.empty()) {
    j["scaling_eps"] = rep.scaling_eps;
    j["scaling_deviation"] = rep.scaling_deviation;
    j["fitted_exponent"] = rep.fitted_exponent ? jnum(*rep.fitted_exponent) : ordered_json(nullptr);
    j["min_exponent"] = rep.min_exponent;
  }
  return j;
}

ordered_json case_json(const CaseRecord& c) {
  ordered_json j;
  j["name"] = c.name;
  j["type"] = c.type;
  j["pass"] = c.pass();
  if (!c.error.empty()) j["error"] = c.error;
  if (c.conditions) {
    ordered_json cj;
    cj["order"] = c.conditions->order;
    cj["tolerance"] = c.conditions->tolerance;
    for (const auto& r : c.conditions->conditions)
      cj[std::string(1, r.name)] = {{"residual", jnum(r.residual)}, {"pass", r.pass}};
    j["conditions"] = std::move(cj);
  }
  if (c.first_order) j["first_order"] = comparison_json(*c.first_order);
  if (c.linearized) j["linearized"] = comparison_json(*c.linearized);
  if (c.loop_deviation)
    j["loop"] = {{"order", c.loop_order},
                 {"deviation", jnum(c.loop_deviation->value)},
                 {"tolerance", c.loop_deviation->tolerance},
                 {"pass", c.loop_deviation->pass}};
  if (c.gauss)
    j["gauss"] = {{"residual", jnum(c.gauss->value)}, {"tolerance", c.gauss->tolerance}, {"pass", c.gauss->pass}};
  return j;
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<ReportFile> render_reports(const RunResult& r, const std::string& format) {
  std::vector<ReportFile> files;
  const bool csv = format == "csv" || format == "both";
  const bool json = format == "json" || format == "both";
  if (csv) {
    if (r.stages & kStageConditions) {
      std::string out = "case,condition,residual,component,K,tolerance,pass\n";
      for (const auto& c : r.cases) {
        if (!c.conditions) continue;
        for (const auto& x : c.conditions->conditions)
          out += csv_field(c.name) + "," + x.name + "," + num(x.residual) + "," + std::to_string(x.component) + "," +
                 csv_field(x.worst.nvars() ? x.worst.str() : "") + "," + num(c.conditions->tolerance) + "," +
                 (x.pass ? "true" : "false") + "\n";
      }
      files.push_back({"conditions.csv", std::move(out)});
    }
    if (r.stages & kStageTaylor) {
      std::string out = "case,i,j,K,value\n";
      for (const auto& c : r.cases) {
        if (!c.metric_jet) continue;
        const auto& g = *c.metric_jet;
        const auto& lay = g.layout();
        for (int i = 0; i < g.rows(); ++i)
          for (int j = i; j < g.cols(); ++j)
            for (int m = 0; m < lay->size(); ++m)
              out += csv_field(c.name) + "," + std::to_string(i) + "," + std::to_string(j) + "," +
                     csv_field(lay->monomial(m).str()) + "," + num(g(i, j).derivative(lay->monomial(m))) + "\n";
      }
      files.push_back({"taylor.csv", std::move(out)});
    }
    if (r.stages & kStagePredict) {
      std::string out = "case,i,j,K,row,value\n";
      for (const auto& c : r.cases) {
        if (!c.prediction) continue;
        for (const auto& e : c.prediction->entries)
          out += csv_field(c.name) + "," + std::to_string(e.i) + "," + std::to_string(e.j) + "," +
                 csv_field(e.k.str()) + "," + std::to_string(e.row) + "," + num(e.value) + "\n";
      }
      files.push_back({"predict.csv", std::move(out)});
      files.push_back({"first_order.csv", comparison_csv(r, [](const CaseRecord& c) {
                         return c.first_order ? &*c.first_order : nullptr;
                       })});
    }
    if (r.stages & kStageLinearize)
      files.push_back({"linearized.csv", comparison_csv(r, [](const CaseRecord& c) {
                         return c.linearized ? &*c.linearized : nullptr;
                       })});
    if (r.stages & kStageLoop)
      files.push_back(
          {"loop.csv", comparison_csv(r, [](const CaseRecord& c) { return c.loop ? &*c.loop : nullptr; })});
  }
  if (json) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["order"] = r.order;
    j["seed"] = r.seed;
    j["pass"] = r.pass();
    ordered_json cases = ordered_json::array();
    for (const auto& c : r.cases) cases.push_back(case_json(c));
    j["cases"] = std::move(cases);
    files.push_back({"summary.json", j.dump(2) + "\n"});
  }
  return files;
}

std::vector<std::string> write_reports(const RunResult& r, const std::string& dir, const std::string& format) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& f : render_reports(r, format)) {
    const fs::path p = fs::path(dir) / f.name;
    std::ofstream os(p, std::ios::binary);
    os << f.content;
    if (!os) throw std::runtime_error("cannot write " + p.string());
    paths.push_back(p.string());
  }
  return paths;
}

}  // namespace fermijet
