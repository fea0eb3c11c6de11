#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(FPLI_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "fisherpli_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json manifest_without_clock(const fs::path& dir) {
  json m = json::parse(slurp(dir / "manifest.json"));
  EXPECT_TRUE(m.contains("wall_time_seconds"));
  m.erase("wall_time_seconds");
  return m;
}

std::vector<std::string> files_in(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

void expect_same_outputs(const fs::path& a, const fs::path& b) {
  const auto names = files_in(a);
  ASSERT_EQ(names, files_in(b));
  for (const auto& n : names) {
    if (n == "manifest.json") continue;
    EXPECT_EQ(slurp(a / n), slurp(b / n)) << n;
  }
  json ma = manifest_without_clock(a), mb = manifest_without_clock(b);
  ma["config"].erase("output");
  mb["config"].erase("output");
  EXPECT_EQ(ma, mb);
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, Version) {
  const auto r = run("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("fisherpli 0.3.0"), std::string::npos);
}

TEST(Cli, IshigamiDemoIsByteIdentical) {
  const fs::path a = scratch("ishigami_a"), b = scratch("ishigami_b");
  ASSERT_EQ(run("demo ishigami --seed 42 --out " + a.string()).code, 0);
  ASSERT_EQ(run("demo ishigami --seed 42 --out " + b.string()).code, 0);
  expect_same_outputs(a, b);
  EXPECT_TRUE(fs::exists(a / "curve_x3.csv"));
  EXPECT_EQ(manifest_without_clock(a)["seed"], 42);
}

TEST(Cli, OutputsDoNotDependOnThreadCount) {
  const fs::path a = scratch("threads_1"), b = scratch("threads_3");
  const std::string args = " demo ishigami --seed 7 --k 24 --bootstrap 10 --deltas 0.3,0.9 --out ";
  ASSERT_EQ(run("--threads 1" + args + a.string()).code, 0);
  ASSERT_EQ(run("--threads 3" + args + b.string()).code, 0);
  expect_same_outputs(a, b);
  const fs::path c = scratch("flood_1"), d = scratch("flood_3");
  const std::string fargs = " demo flood --seed 5 --k 12 --bootstrap 10 --deltas 0.2,0.4 --out ";
  ASSERT_EQ(run("--threads 1" + fargs + c.string()).code, 0);
  ASSERT_EQ(run("--threads 3" + fargs + d.string()).code, 0);
  expect_same_outputs(c, d);
}

TEST(Cli, SeedChangesTheResult) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  const std::string args = " --k 12 --bootstrap 0 --deltas 0.5 --out ";
  ASSERT_EQ(run("demo ishigami --seed 1" + args + a.string()).code, 0);
  ASSERT_EQ(run("demo ishigami --seed 2" + args + b.string()).code, 0);
  EXPECT_NE(slurp(a / "curve_x1.csv"), slurp(b / "curve_x1.csv"));
}

TEST(Cli, BadAlphaIsAConfigError) {
  const fs::path dir = scratch("alpha");
  const auto cfg = write_config(dir, {{"model", "ishigami"}, {"n", 500}, {"alpha", 1.5}, {"seed", 1},
                                      {"delta_grid", {0.1}}, {"output", (dir / "out").string()}});
  const auto r = run("ofpli --config " + cfg.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("alpha"), std::string::npos) << r.output;
}

TEST(Cli, MissingSeedIsAConfigError) {
  const fs::path dir = scratch("noseed");
  const auto cfg = write_config(dir, {{"model", "ishigami"}, {"n", 500}, {"delta_grid", {0.1}}});
  const auto r = run("ofpli --config " + cfg.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("seed"), std::string::npos) << r.output;
}

TEST(Cli, UnknownFlagsAndFilesFail) {
  EXPECT_EQ(run("sphere --family normal --theta 0,1 --delta 1 --bogus 3").code, 1);
  EXPECT_EQ(run("ofpli --config /nonexistent/config.json").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST(Cli, GaussianSphereCsv) {
  const fs::path dir = scratch("sphere");
  const auto r = run("sphere --family normal --theta 0,1 --delta 1 --k 100 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.output;
  std::ifstream in(dir / "sphere.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "direction_index,angle,theta1,theta2,status,measured_length");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",complete,"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 100);
}

TEST(Cli, EmptySphereIsANumericalFailure) {
  const auto r = run("sphere --family triangular --theta 50.99 --support 49,51 --delta 3.1 --out " +
                     scratch("empty").string());
  EXPECT_EQ(r.code, 2) << r.output;
}

TEST(Cli, GeodesicAndFim) {
  const fs::path dir = scratch("geo");
  ASSERT_EQ(run("geodesic --family normal --theta 0,1 --delta 1 --direction 0 --steps 200 --out " + dir.string()).code,
            0);
  const std::string csv = slurp(dir / "geodesic.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,q1,q2,p1,p2,H,delta_H");
  EXPECT_EQ(count_lines(csv), 202u);
  ASSERT_EQ(run("fim --family triangular --theta 50 --support 49,51 --out " + dir.string()).code, 0);
  const json fim = json::parse(slurp(dir / "fim.json"));
  EXPECT_DOUBLE_EQ(fim["fisher_information"][0][0].get<double>(), 1.0);
}

TEST(Cli, FloodDemoWritesOneCurvePerInput) {
  const fs::path dir = scratch("flood");
  const auto r = run("demo flood --seed 3 --k 8 --deltas 0.1,0.2 --bootstrap 0 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.output;
  for (int i = 1; i <= 4; ++i) {
    const std::string curve = slurp(dir / ("curve_x" + std::to_string(i) + ".csv"));
    EXPECT_EQ(curve.substr(0, curve.find('\n')),
              "input,delta,s_plus,s_minus,ci_lo_plus,ci_hi_plus,ci_lo_minus,ci_hi_minus,admissible,n_valid");
    EXPECT_EQ(count_lines(curve), 3u);
    EXPECT_TRUE(fs::exists(dir / ("sphere_x" + std::to_string(i) + ".csv")));
  }
  const json m = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["inputs"].size(), 4u);
  EXPECT_EQ(m["inputs"][0]["admissible"].size(), 2u);
}

TEST(Cli, EmptyGridWritesManifestOnly) {
  const fs::path dir = scratch("empty_grid");
  const fs::path out = dir / "out";
  const auto cfg = write_config(dir, {{"model", "flood"}, {"n", 300}, {"seed", 11}, {"delta_grid", json::array()},
                                      {"output", out.string()}});
  const auto r = run("ofpli --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(files_in(out), std::vector<std::string>{"manifest.json"});
  const json m = json::parse(slurp(out / "manifest.json"));
  ASSERT_FALSE(m["warnings"].empty());
  EXPECT_NE(m["warnings"][0].get<std::string>().find("grid"), std::string::npos);
}

TEST(Cli, SeedIsEchoedVerbatim) {
  const fs::path dir = scratch("big_seed");
  const fs::path out = dir / "out";
  const auto cfg = write_config(dir, {{"model", "flood"}, {"n", 300}, {"seed", 18446744073709551615ULL},
                                      {"delta_grid", json::array()}, {"output", out.string()}});
  ASSERT_EQ(run("ofpli --config " + cfg.string()).code, 0);
  EXPECT_NE(slurp(out / "manifest.json").find("\"seed\": 18446744073709551615"), std::string::npos);
}

TEST(Cli, ExternalSampleWithUniformInput) {
  const fs::path dir = scratch("external");
  {
    std::ofstream s(dir / "runs.csv");
    s << "x1,x2,y\n";
    for (int k = 0; k < 400; ++k) {
      const double u = -40.0 + 100.0 * (k % 97) / 97.0;
      const double v = 20 + 20.0 * ((k * 37) % 101) / 101.0;
      s << u << "," << v << "," << 1.0 + 0.01 * u + 0.05 * v << "\n";
    }
  }
  const auto cfg = write_config(
      dir, {{"model", "external"},
            {"inputs",
             {{{"family", "uniform"}, {"theta", json::array()}, {"support", {-44.9, 63.5}}},
              {{"family", "trunc_normal"}, {"theta", {30, 7.5}}, {"support", {15, 75}}}}},
            {"sample", (dir / "runs.csv").string()},
            {"seed", 1},
            {"K", 8},
            {"delta_grid", {0.1, 0.2}},
            {"output", (dir / "out").string()}});
  const auto r = run("ofpli --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_FALSE(fs::exists(dir / "out" / "curve_x1.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "curve_x2.csv"));
  const json m = json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_FALSE(m["warnings"].empty());
}

TEST(Cli, PliEpliAndSobol) {
  const fs::path dir = scratch("misc");
  const auto cfg = write_config(
      dir, {{"model", "flood"},
            {"n", 2000},
            {"seed", 4},
            {"input", 1},
            {"perturbed", {{"family", "trunc_gumbel"}, {"theta", {1100, 558}}, {"support", {500, 3000}}}},
            {"epli", {{"mode", "mean_shift"}, {"grid", {-0.5, 0.0, 0.5}}}},
            {"sobol", {{"n_base", 2000}}},
            {"output", (dir / "out").string()}});
  auto r = run("pli --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  r = run("epli --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string e = slurp(dir / "out" / "epli_x1.csv");
  EXPECT_EQ(e.substr(0, e.find('\n')), "input,parameter,pli,admissible");
  EXPECT_NE(e.find("1,0,0,"), std::string::npos) << e;
  r = run("sobol --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string s = slurp(dir / "out" / "sobol.csv");
  EXPECT_EQ(count_lines(s), 5u);
  EXPECT_EQ(s.rfind("input,first_order,total,target_first_order,target_total", 0), 0u);
}
