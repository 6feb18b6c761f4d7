#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace cpmol;

TEST(Format, Doubles) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Manifest, Lines) {
  RunManifest m;
  m.command = "converge";
  m.problem = "heat-circle";
  m.set("dx", 0.5);
  m.set("scheme", "bdf2");
  m.set("dx", 0.25);
  m.seed = 3;
  m.version = "9.9";
  std::ostringstream out;
  write_manifest(out, m);
  EXPECT_EQ(out.str(),
            "# command: converge\n# problem: heat-circle\n# dx: 0.25\n# scheme: bdf2\n# seed: 3\n# version: 9.9\n");
  m.wall_seconds = 1.5;
  std::ostringstream timed;
  write_manifest(timed, m);
  EXPECT_NE(timed.str().find("# wall_time_s: 1.5\n"), std::string::npos);
}

TEST(Csv, TableLayout) {
  CsvTable t({"a", "b"});
  t.row(std::vector<double>{1.0, 0.5}).row(std::vector<std::string>{"x", "inf"});
  t.footer("ls_slope", "2");
  RunManifest m;
  m.command = "c";
  m.problem = "p";
  m.version = "0";
  std::ostringstream out;
  t.write(out, m);
  EXPECT_EQ(out.str(), "# command: c\n# problem: p\n# seed: 0\n# version: 0\na,b\n1,0.5\nx,inf\n# ls_slope: 2\n");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_THROW(t.row(std::vector<double>{1.0}), DimensionMismatch);
}

TEST(Vtk, PointCloud) {
  const BandedGrid g = build_band(Surface::sphere(), 0.25, {1, 1});
  const auto n = static_cast<Eigen::Index>(g.size());
  RunManifest m;
  m.command = "simulate";
  m.problem = "gray-scott";
  m.seed = 5;
  std::ostringstream out;
  write_vtk_points(out, g, {{"u", Vector::Ones(n)}}, m);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# vtk DataFile Version 3.0");
  std::getline(in, line);
  EXPECT_EQ(line, "cpmol simulate gray-scott seed=5");
  const std::string s = out.str();
  EXPECT_NE(s.find("DATASET POLYDATA\nPOINTS " + std::to_string(n) + " double\n"), std::string::npos);
  EXPECT_NE(s.find("VERTICES " + std::to_string(n) + " " + std::to_string(2 * n) + "\n"), std::string::npos);
  EXPECT_NE(s.find("SCALARS u double 1\nLOOKUP_TABLE default\n"), std::string::npos);
  EXPECT_THROW(write_vtk_points(out, g, {{"u", Vector::Ones(2)}}, m), DimensionMismatch);
}

TEST(Files, WriteFailure) {
  // a regular file cannot be a parent directory
  const auto blocker = std::filesystem::temp_directory_path() / "cpmol_io_blocker";
  write_file(blocker.string(), "x");
  EXPECT_THROW(write_file((blocker / "x.csv").string(), "a"), InvalidArgument);
}

TEST(Files, CreatesParentDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "cpmol_io_nested";
  std::filesystem::remove_all(dir);
  const auto path = dir / "a" / "b.csv";
  write_file(path.string(), "1,2\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "1,2");
}
