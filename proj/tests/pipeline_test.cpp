#include "fermijet/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fermijet {
namespace {

RunConfig config_for(std::vector<std::string> names) {
  RunConfig cfg;
  for (auto& n : names) cfg.cases.push_back({n, {}, std::nullopt, std::nullopt});
  return cfg;
}

TEST(Pipeline, FlatAffineAllChecksPass) {
  RunConfig cfg;
  const auto c = catalog_case("flat-affine", {.type = SubmanifoldType{{2, 0}, {1, 0}}});
  const CaseRecord r = run_case(c, cfg, kStageAll);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_TRUE(r.pass());
  for (const auto& x : r.conditions->conditions) EXPECT_LE(x.residual, 1e-10) << x.name;
  EXPECT_LE(r.first_order->max_abs_dev(), 1e-10);
  EXPECT_LE(r.loop_deviation->value, 1e-10);
  EXPECT_LE(r.gauss->value, 1e-10);
  EXPECT_FALSE(r.linearized.has_value());
}

TEST(Pipeline, CircleFirstOrderAndLoop) {
  RunConfig cfg;
  const CaseRecord r = run_case(catalog_case("circle-in-plane"), cfg, kStageAll);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_TRUE(r.first_order->pass());
  EXPECT_LE(r.loop_deviation->value, 1e-6);
  EXPECT_EQ(r.loop_order, 3);
}

TEST(Pipeline, MinkowskiSpacelikeLine) {
  RunConfig cfg;
  const CaseRecord r = run_case(catalog_case("minkowski-spacelike-line"), cfg, kStageAll);
  ASSERT_TRUE(r.error.empty()) << r.error;
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.type, "((1,0),(0,1))");
}

TEST(Pipeline, StagesAreSelective) {
  RunConfig cfg;
  const CaseRecord r = run_case(catalog_case("circle-in-plane"), cfg, kStageConditions);
  EXPECT_TRUE(r.conditions.has_value());
  EXPECT_FALSE(r.first_order || r.loop || r.gauss || r.metric_jet || r.prediction);
  const CaseRecord t = run_case(catalog_case("circle-in-plane"), cfg, kStageTaylor);
  ASSERT_TRUE(t.metric_jet.has_value());
  EXPECT_EQ(t.metric_jet->layout()->order(), cfg.order);
  EXPECT_TRUE(t.pass());
}

TEST(Pipeline, FailuresAreRecordedPerCase) {
  RunConfig cfg;
  CaseSpec bad = catalog_case("circle-in-plane");
  bad.name = "bad";
  bad.embedding = {"cos(t)", "sqrt(t)"};  // not differentiable at the base point
  const RunResult r = run_cases({catalog_case("circle-in-plane"), bad}, cfg, kStageAll, 1);
  ASSERT_EQ(r.cases.size(), 2u);
  EXPECT_EQ(r.cases[0].name, "bad");
  EXPECT_FALSE(r.cases[0].error.empty());
  EXPECT_FALSE(r.cases[0].pass());
  EXPECT_TRUE(r.cases[1].pass());
  EXPECT_FALSE(r.pass());
  const auto files = render_reports(r, "json");
  ASSERT_EQ(files.size(), 1u);
  EXPECT_NE(files[0].content.find("\"error\""), std::string::npos);
}

TEST(Pipeline, ReportsAreDeterministic) {
  RunConfig cfg = config_for({"sphere2-in-r3", "circle-in-plane", "graph-quadratic", "minkowski-hyperbola"});
  cfg.order = 3;
  const auto cases = expand_cases(cfg);
  const auto a = render_reports(run_cases(cases, cfg, kStageAll, 1), "both");
  const auto b = render_reports(run_cases(cases, cfg, kStageAll, 3), "both");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].content, b[i].content) << a[i].name;
  }
  std::vector<std::string> names;
  for (const auto& f : a) names.push_back(f.name);
  EXPECT_EQ(names, (std::vector<std::string>{"conditions.csv", "taylor.csv", "predict.csv", "first_order.csv",
                                             "linearized.csv", "loop.csv", "summary.json"}));
  // sorted by case name
  const std::string& cond = a[0].content;
  EXPECT_LT(cond.find("circle-in-plane"), cond.find("minkowski-hyperbola"));
  EXPECT_LT(cond.find("minkowski-hyperbola"), cond.find("sphere2-in-r3"));
}

TEST(Pipeline, ComparisonCsvLayout) {
  RunConfig cfg;
  const RunResult r = run_cases({catalog_case("circle-in-plane")}, cfg, kStagePredict, 1);
  const auto files = render_reports(r, "csv");
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[1].name, "first_order.csv");
  std::istringstream in(files[1].content);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "case,i,j,K,measured,predicted,deviation,pass");
  // g~_tt,u = 2 on the unit circle
  bool found = false;
  while (std::getline(in, row))
    if (row.rfind("circle-in-plane,0,0,\"(0,1)\",", 0) == 0) {
      found = true;
      EXPECT_NE(row.find(",2,2,0,true"), std::string::npos) << row;
    }
  EXPECT_TRUE(found);
}

TEST(Pipeline, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Pipeline, WriteReports) {
  namespace fs = std::filesystem;
  RunConfig cfg;
  const RunResult r = run_cases({catalog_case("circle-in-plane")}, cfg, kStageConditions, 1);
  const fs::path dir = fs::temp_directory_path() / "fermijet_pipeline_test";
  fs::remove_all(dir);
  const auto paths = write_reports(r, dir.string(), "both");
  ASSERT_EQ(paths.size(), 2u);
  for (const auto& p : paths) EXPECT_TRUE(fs::exists(p)) << p;
  std::ifstream in(dir / "summary.json");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("\"schema_version\": 1"), std::string::npos);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace fermijet
