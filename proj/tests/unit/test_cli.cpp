#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(CPMOL_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_wall_time(const std::string& s) {
  std::istringstream in(s);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# wall_time_s:", 0) == 0) continue;
    out += line + '\n';
  }
  return out;
}

std::vector<std::string> data_rows(const std::string& s) {
  std::istringstream in(s);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  }
  return rows;
}

std::string footer(const std::string& s, const std::string& key) {
  const std::string tag = "# " + key + ": ";
  const auto pos = s.find(tag);
  if (pos == std::string::npos) return {};
  return s.substr(pos + tag.size(), s.find('\n', pos) - pos - tag.size());
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("cpmol_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("converge --problem nope").code, 2);
  EXPECT_EQ(run("converge --problem heat-circle --dx -0.1").code, 2);
  EXPECT_EQ(run("stability-scan --gamma-dx2 \"\"").code, 2);
  EXPECT_EQ(run("simulate --mesh /nonexistent.off --steps 1").code, 2);
}

TEST(Cli, ConvergeHeatCircle) {
  const auto r = run("converge --problem heat-circle --dx 0.2,0.1,0.05");
  ASSERT_EQ(r.code, 0);
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "dx,dt,p,gamma,max_err");
  EXPECT_NE(r.out.find("# command: converge"), std::string::npos);
  EXPECT_GE(std::stod(footer(r.out, "ls_slope")), 1.8);
}

TEST(Cli, ConvergeSingleDxHasNoSlope) {
  const auto r = run("converge --problem heat-circle --dx 0.1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(data_rows(r.out).size(), 2u);
  EXPECT_EQ(footer(r.out, "ls_slope"), "");
}

TEST(Cli, ConvergeLinearInterpolationDegrades) {
  const auto r = run("converge --problem heat-circle --dx 0.2,0.1,0.05 --p 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_LE(std::stod(footer(r.out, "ls_slope")), 1.2);
}

TEST(Cli, DeterministicOutputFile) {
  const fs::path dir = scratch("det");
  const std::string base = "converge --problem poisson-circle --dx 0.2,0.1 --out ";
  ASSERT_EQ(run(base + (dir / "a.csv").string()).code, 0);
  ASSERT_EQ(run(base + (dir / "b.csv").string()).code, 0);
  const std::string a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(without_wall_time(a), without_wall_time(b));
}

TEST(Cli, StabilityScan) {
  const auto r = run("stability-scan --dx 0.1 --gamma-dx2 4,400");
  ASSERT_EQ(r.code, 0);
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "gamma,gamma_dx2,dt_max_observed,dt_predicted,ratio");
  const double ratio = std::stod(rows[2].substr(rows[2].rfind(',') + 1));
  EXPECT_NEAR(ratio, 1.0, 0.15);
}

TEST(Cli, GammaSweepFlagsInstability) {
  const auto r = run("gamma-sweep --dx 0.1 --gamma-dx2 4,20");
  ASSERT_EQ(r.code, 0);
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  auto status = [](const std::string& row) { return row.substr(row.rfind(',') + 1); };
  EXPECT_EQ(status(rows[1]), "stable");
  EXPECT_NE(status(rows[2]), "stable");
}

TEST(Cli, CurvatureCheck) {
  const auto r = run("curvature-check --surface sphere --radius 2 --dx 0.2");
  ASSERT_EQ(r.code, 0);
  EXPECT_GT(data_rows(r.out).size(), 10u);
  EXPECT_EQ(run("curvature-check --mesh /nonexistent.off").code, 2);
}

TEST(Cli, SimulateSnapshots) {
  const fs::path dir = scratch("sim");
  const std::string prefix = (dir / "gs").string();
  const auto r = run("simulate --problem gray-scott --surface circle --dx 0.1 --steps 20 --snapshots 2 --out " + prefix);
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(prefix + "_0000.csv"));
  EXPECT_TRUE(fs::exists(prefix + "_0001.csv"));
  EXPECT_TRUE(fs::exists(prefix + "_0002.csv"));
  EXPECT_FALSE(fs::exists(prefix + "_0000.vtk"));
  const std::string first = slurp(prefix + "_0000.csv");
  EXPECT_EQ(data_rows(first)[0], "index,x,y,cpx,cpy,u,v,nu_v");
  ASSERT_EQ(run("simulate --problem gray-scott --surface circle --dx 0.1 --steps 20 --snapshots 2 --out " +
                (dir / "again").string())
                .code,
            0);
  EXPECT_EQ(without_wall_time(slurp(prefix + "_0002.csv")), without_wall_time(slurp((dir / "again_0002.csv").string())));
}

TEST(Cli, SimulateZeroStepsEchoesInitialData) {
  const fs::path dir = scratch("zero");
  const std::string prefix = (dir / "z").string();
  ASSERT_EQ(run("simulate --problem curvdiff-ellipse --dx 0.1 --steps 0 --out " + prefix).code, 0);
  EXPECT_TRUE(fs::exists(prefix + "_0000.csv"));
  EXPECT_FALSE(fs::exists(prefix + "_0001.csv"));
}

TEST(Cli, SimulateSphereWritesVtk) {
  const fs::path dir = scratch("vtk");
  const std::string prefix = (dir / "s").string();
  ASSERT_EQ(run("simulate --problem gray-scott --dx 0.2 --steps 2 --out " + prefix).code, 0);
  EXPECT_EQ(slurp(prefix + "_0001.vtk").rfind("# vtk DataFile Version 3.0", 0), 0u);
}

TEST(Cli, NonFiniteExitsThree) {
  const fs::path dir = scratch("nan");
  const std::string prefix = (dir / "bad").string();
  const auto r = run("simulate --problem curvdiff-ellipse --dx 0.1 --scheme forward-euler --dt 0.5 --steps 400 --out " + prefix);
  EXPECT_EQ(r.code, 3);
  bool flagged = false;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (slurp(e.path()).find("# status: nonfinite") != std::string::npos) flagged = true;
  }
  EXPECT_TRUE(flagged);
}

TEST(Cli, BandAndGenMesh) {
  const auto b = run("band --surface circle --dx 0.2");
  ASSERT_EQ(b.code, 0);
  EXPECT_NE(b.out.find("linear_index,i,j,x,y,cpx,cpy,dist"), std::string::npos);
  const fs::path dir = scratch("mesh");
  ASSERT_EQ(run("gen-mesh --shape torus --out " + (dir / "t.off").string()).code, 0);
  EXPECT_EQ(slurp(dir / "t.off").rfind("OFF\n", 0), 0u);
  const auto m = run("band --mesh " + (dir / "t.off").string() + " --dx 0.2");
  EXPECT_EQ(m.code, 0);
}
