#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "io.hpp"

namespace fs = std::filesystem;
using simota::cli::Json;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "simota_kit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = simota::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("simota_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path scenes(int count, int objects, const std::string& sub = "scenes") {
    const auto d = dir_ / sub;
    const auto r = run_cli({"make-scenes", "--count", std::to_string(count), "--objects", std::to_string(objects),
                            "--seed", "3", "--out", d.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return d;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"assign"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"assign", "--scene", (dir_ / "missing.json").string()}).code, 2);
}

TEST_F(Cli, AssignReportsPerGtK) {
  const auto d = scenes(1, 4);
  const auto out = dir_ / "assign.json";
  const auto r = run_cli({"assign", "--scene", (d / "scene_0.json").string(), "--assigner", "simota", "--out",
                          out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = simota::cli::read_json_file(out);
  EXPECT_EQ(j["assigner"], "simota");
  EXPECT_EQ(j["k_values"].size(), 4u);
  EXPECT_GT(j["num_positives"].get<int>(), 0);
  EXPECT_TRUE(j.contains("diagnostics"));
  EXPECT_FALSE(j["config"].contains("threads"));
}

TEST_F(Cli, AssignWithoutGts) {
  const auto d = scenes(1, 0);
  const auto r = run_cli({"assign", "--scene", (d / "scene_0.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["num_positives"], 0);
  EXPECT_TRUE(j["positives"].empty());
}

TEST_F(Cli, CorruptJsonExitsTwoNamingThePath) {
  const auto bad = dir_ / "bad.json";
  spit(bad, "{\"id\": \"x\", ");
  const auto r = run_cli({"assign", "--scene", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.json"), std::string::npos) << r.err;

  const auto d = scenes(1, 2);
  const auto cfg = dir_ / "cfg.json";
  spit(cfg, R"({"fit": {"stpes": 10}})");
  const auto r2 = run_cli({"assign", "--scene", (d / "scene_0.json").string(), "--config", cfg.string()});
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.err.find("fit.stpes"), std::string::npos) << r2.err;
}

TEST_F(Cli, PresetsEchoScaleRanges) {
  const auto d = scenes(1, 3);
  const auto scene = (d / "scene_0.json").string();
  for (const auto& [preset, lo, hi, mix] :
       {std::tuple{"small", 0.5, 1.5, false}, std::tuple{"large", 0.1, 2.0, true}}) {
    const auto out = dir_ / preset;
    const auto r = run_cli({"augment", "--op", "flip", "--scene", scene, "--preset", preset, "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = simota::cli::read_json_file(out / "transforms.json");
    const auto& aug = j["config"]["augment"];
    EXPECT_EQ(aug["preset"], preset);
    EXPECT_EQ(aug["scale_jitter"], Json::array({lo, hi}));
    EXPECT_EQ(aug["mixup_enabled"], mix);
  }
  // Mixup is off in the small preset.
  EXPECT_EQ(run_cli({"augment", "--op", "mixup", "--scene", scene, "--scene", scene, "--preset", "small", "--out",
                     (dir_ / "m").string()})
                .code,
            2);
}

TEST_F(Cli, AugmentSceneCountIsChecked) {
  const auto d = scenes(2, 2);
  const auto s0 = (d / "scene_0.json").string();
  EXPECT_EQ(run_cli({"augment", "--op", "mosaic", "--scene", s0, "--scene", s0, "--out", (dir_ / "a").string()}).code,
            2);
  EXPECT_EQ(run_cli({"augment", "--op", "mixup", "--scene", s0, "--out", (dir_ / "b").string()}).code, 2);
  EXPECT_EQ(run_cli({"augment", "--op", "rotate", "--scene", s0, "--out", (dir_ / "c").string()}).code, 2);
}

TEST_F(Cli, SameSeedGivesIdenticalFiles) {
  const auto d = scenes(4, 3);
  std::vector<std::string> base{"augment", "--op", "mosaic", "--seed", "11"};
  for (int i = 0; i < 4; ++i) {
    base.push_back("--scene");
    base.push_back((d / ("scene_" + std::to_string(i) + ".json")).string());
  }
  auto a = base, b = base;
  a.insert(a.end(), {"--out", (dir_ / "a").string()});
  b.insert(b.end(), {"--out", (dir_ / "b").string()});
  ASSERT_EQ(run_cli(a).code, 0);
  ASSERT_EQ(run_cli(b).code, 0);
  for (const char* f : {"aug.ppm", "aug.json", "transforms.json"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;

  const auto s0 = (d / "scene_0.json").string();
  for (const char* sub : {"f1", "f2"})
    ASSERT_EQ(run_cli({"fit", "--scene", s0, "--steps", "30", "--out", (dir_ / sub).string(), "--threads", sub[1] == '1' ? "1" : "2"}).code, 0);
  EXPECT_EQ(slurp(dir_ / "f1" / "summary.json"), slurp(dir_ / "f2" / "summary.json"));
  EXPECT_EQ(slurp(dir_ / "f1" / "trace_0.csv"), slurp(dir_ / "f2" / "trace_0.csv"));
}

TEST_F(Cli, JsonOutputsAreFixedPoints) {
  const auto d = scenes(1, 3);
  const auto out = dir_ / "assign.json";
  ASSERT_EQ(run_cli({"assign", "--scene", (d / "scene_0.json").string(), "--out", out.string()}).code, 0);
  for (const auto& p : {out, d / "scene_0.json", d / "index.json"}) {
    const auto once = slurp(p);
    simota::cli::write_json_file(dir_ / "again.json", simota::cli::read_json_file(p));
    EXPECT_EQ(slurp(dir_ / "again.json"), once) << p;
  }
  // Scenes survive a read/write cycle byte for byte.
  const auto scene = simota::cli::read_scene(d / "scene_0.json");
  simota::cli::write_scene(dir_, "copy", scene);
  EXPECT_EQ(slurp(dir_ / "copy.ppm"), slurp(d / "scene_0.ppm"));
  EXPECT_EQ(simota::cli::read_scene(dir_ / "copy.json").gts, scene.gts);
}

TEST_F(Cli, EvalPerfectDetections) {
  const auto in = dir_ / "eval.json";
  spit(in, R"({"images": [{"gts": [{"cx": 10, "cy": 10, "w": 6, "h": 6, "class_id": 0},
                                    {"cx": 30, "cy": 12, "w": 8, "h": 4, "class_id": 1}],
                           "dets": [{"cx": 10, "cy": 10, "w": 6, "h": 6, "class_id": 0, "score": 0.9},
                                    {"cx": 30, "cy": 12, "w": 8, "h": 4, "class_id": 1, "score": 0.8}]}]})");
  const auto r = run_cli({"eval", "--detections", in.string(), "--out", (dir_ / "ev").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = simota::cli::read_json_file(dir_ / "ev" / "report.json");
  EXPECT_EQ(j["map"], 1.0);
  EXPECT_EQ(j["ap50"], 1.0);
  EXPECT_TRUE(fs::exists(dir_ / "ev" / "pr_curves.csv"));
}

TEST_F(Cli, FitSingleStepTrace) {
  const auto d = scenes(1, 2);
  const auto r = run_cli({"fit", "--scene", (d / "scene_0.json").string(), "--steps", "1", "--out", (dir_ / "f").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(dir_ / "f" / "trace_0.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 2);  // header + one step
  const auto j = simota::cli::read_json_file(dir_ / "f" / "summary.json");
  EXPECT_EQ(j["runs"][0]["trace_length"], 1);
}

TEST_F(Cli, NumericFailureExitsThree) {
  const auto d = scenes(1, 3);
  const auto cfg = dir_ / "cfg.json";
  spit(cfg, R"({"fit": {"step_size": 1e9, "optimizer": "gd", "cosine_decay": false}})");
  const auto r = run_cli({"fit", "--scene", (d / "scene_0.json").string(), "--steps", "20", "--config", cfg.string(),
                          "--out", (dir_ / "f").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("step"), std::string::npos) << r.err;
}

TEST_F(Cli, RoadmapOneRowPerAssigner) {
  const auto cfg = dir_ / "cfg.json";
  spit(cfg, R"({"scenes": {"count": 10, "objects": 2}, "fit": {"steps": 20}})");
  const auto r = run_cli({"roadmap", "--config", cfg.string(), "--out", (dir_ / "rm").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(dir_ / "rm" / "roadmap.csv"));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1].rfind("single_center,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("multi3x3,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("simota,", 0), 0u);
  EXPECT_EQ(rows[4].rfind("one_to_one,", 0), 0u);
}

TEST_F(Cli, OtCompareOnTrivialScene) {
  const auto d = scenes(1, 1);
  const auto out = dir_ / "ot.json";
  const auto r = run_cli({"ot-compare", "--scene", (d / "scene_0.json").string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = simota::cli::read_json_file(out);
  EXPECT_EQ(j["summary"]["all_converged"], true);
  EXPECT_LT(j["summary"]["max_marginal_violation"].get<double>(), 1e-6);
  EXPECT_EQ(j["scenes"][0]["agreement"], 1.0);
  const auto t = simota::cli::read_json_file(dir_ / "ot.timings.json");
  EXPECT_TRUE(t["solvers"][0].contains("sinkhorn_seconds"));
}

TEST_F(Cli, ThreadsFromEnvironment) {
  const auto d = scenes(1, 1);
  ::setenv("SIMOTA_KIT_THREADS", "3", 1);
  const auto r = run_cli({"fit", "--scene", (d / "scene_0.json").string(), "--steps", "2", "--out", (dir_ / "f").string()});
  ::unsetenv("SIMOTA_KIT_THREADS");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(simota::cli::read_json_file(dir_ / "f" / "timings.json")["threads"], 3);
  ASSERT_EQ(run_cli({"fit", "--scene", (d / "scene_0.json").string(), "--steps", "2", "--threads", "2", "--out",
                     (dir_ / "g").string()})
                .code,
            0);
  EXPECT_EQ(simota::cli::read_json_file(dir_ / "g" / "timings.json")["threads"], 2);
}
