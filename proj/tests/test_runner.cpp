#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fotd/runner.hpp"

using namespace fotd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fotd_runner_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<long>(std::count(s.begin(), s.end(), '\n'));
}

bool has_violation(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

RunConfig small_rossler(const fs::path& out) {
  RunConfig c;
  c.kind = CaseKind::rossler;
  c.ranks = {1, 2};
  c.horizon = 1.0;
  c.stride = 50;
  c.otd_baseline = true;
  c.output = out.string();
  return c;
}

}  // namespace

TEST(Validate, PresetsAreValid) {
  for (CaseKind k : {CaseKind::rossler, CaseKind::ks, CaseKind::reactive}) {
    RunConfig c;
    c.kind = k;
    EXPECT_TRUE(validate(c).empty()) << to_string(k);
  }
}

TEST(Validate, ItemizesViolations) {
  RunConfig c;
  c.kind = CaseKind::rossler;
  c.ranks = {4};
  EXPECT_TRUE(has_violation(validate(c), "rank exceeds parameter count"));
  c.ranks = {0, 2, 2};
  c.stride = 0;
  const auto v = validate(c);
  EXPECT_GE(v.size(), 3u);
  EXPECT_TRUE(has_violation(v, "at least 1"));
  EXPECT_TRUE(has_violation(v, "listed twice"));
  EXPECT_TRUE(has_violation(v, "stride"));

  RunConfig ks;
  ks.kind = CaseKind::ks;
  ks.dt = 0.03;
  EXPECT_TRUE(has_violation(validate(ks), "dt does not divide"));

  RunConfig rx;
  rx.kind = CaseKind::reactive;
  rx.otd_baseline = true;
  rx.integrator = Integrator::etdrk4;
  const auto rv = validate(rx);
  EXPECT_TRUE(has_violation(rv, "etdrk4"));
  EXPECT_TRUE(has_violation(rv, "OTD baseline"));

  RunConfig bad_preset;
  bad_preset.preset = "huge";
  EXPECT_FALSE(validate(bad_preset).empty());
}

TEST(Validate, HasNoSideEffects) {
  const fs::path out = scratch("validate");
  RunConfig c = small_rossler(out);
  c.ranks = {7};
  EXPECT_FALSE(validate(c).empty());
  EXPECT_FALSE(fs::exists(out));
}

TEST(Run, WritesSeriesManifestAndCoefficients) {
  const fs::path out = scratch("rossler");
  const RunConfig c = small_rossler(out);
  const RunResult r = run(c);
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const long rows = 1000 / 50 + 1;
  for (int rank : {1, 2}) {
    const fs::path dir = out / ("r" + std::to_string(rank));
    EXPECT_EQ(line_count(dir / "errors.csv"), rows + 1);
    EXPECT_EQ(line_count(dir / "singulars.csv"), rows + 1);
    EXPECT_TRUE(fs::exists(dir / "coeffs_t1.csv"));
    const std::string header = slurp(dir / "errors.csv").substr(0, 80);
    EXPECT_NE(header.find("t,e,e_r,e_u,pct_e,pct_er,pct_eu,energy_pct,otd_e,otd_pct_e"), std::string::npos);
  }
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["config"]["case"], "rossler");
  EXPECT_EQ(manifest["config"]["seeds"]["padding"], 20210401);
  EXPECT_EQ(manifest["runs"].size(), 2u);
  EXPECT_TRUE(manifest.contains("wall_seconds"));
}

TEST(Run, RepeatedRunsAreByteIdentical) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run(small_rossler(a)).exit_code, 0);
  ASSERT_EQ(run(small_rossler(b)).exit_code, 0);
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path other = b / fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path();
  }
}

TEST(Run, InvalidConfigurationWritesErrorRecord) {
  const fs::path out = scratch("invalid");
  RunConfig c = small_rossler(out);
  c.ranks = {9};
  const RunResult r = run(c);
  EXPECT_EQ(r.exit_code, 2);
  const auto err = nlohmann::json::parse(slurp(out / "error.json"));
  EXPECT_EQ(err["error"], "configuration");
  EXPECT_FALSE(err["violations"].empty());
}

TEST(Run, OutputRootOverrideAppliesToRelativePaths) {
  const fs::path root = scratch("root");
  setenv("FOTD_OUTPUT_ROOT", root.c_str(), 1);
  RunConfig c;
  c.output = "sweep";
  EXPECT_EQ(resolve_output(c), (root / "sweep").string());
  c.output = "/abs/path";
  EXPECT_EQ(resolve_output(c), "/abs/path");
  unsetenv("FOTD_OUTPUT_ROOT");
}

TEST(Run, ReactiveTinySweepWritesHeatmaps) {
  const fs::path out = scratch("reactive");
  RunConfig c;
  c.kind = CaseKind::reactive;
  c.preset = "tiny";
  c.ranks = {2};
  c.horizon = 0.2;
  c.stride = 10;
  c.output = out.string();
  const RunResult r = run(c);
  ASSERT_EQ(r.exit_code, 0) << r.message;
  EXPECT_EQ(line_count(out / "r2" / "errors.csv"), 20 / 10 + 1 + 1);
  EXPECT_TRUE(fs::exists(out / "r2" / "coeffs_t0.2_mode1.csv"));
  EXPECT_EQ(line_count(out / "r2" / "coeffs_t0.2_mode2.csv"), 24);
}

TEST(Run, NumericalFailureExitsWithThree) {
  const fs::path out = scratch("numeric");
  RunConfig c = small_rossler(out);
  c.otd_baseline = false;
  c.dt = 2.0;
  c.horizon = 400.0;
  c.ranks = {2};
  c.stride = 1;
  const RunResult r = run(c);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_TRUE(fs::exists(out / "error.json"));
}
