#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace dynpca;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = (std::filesystem::temp_directory_path() / ("dynpca_cli_test_" + name)).string();
  std::ofstream(path) << content;
  return path;
}

double field(const std::string& text, const std::string& key) {
  const auto pos = text.find("\n" + key + " ");
  const auto start = pos == std::string::npos ? (text.rfind(key + " ", 0) == 0 ? 0 : std::string::npos) : pos + 1;
  if (start == std::string::npos) {
    ADD_FAILURE() << "missing " << key;
    return 0.0;
  }
  return std::stod(text.substr(start + key.size() + 1));
}

const std::string kCubeXyz = "0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n";
const std::string kCubeOff =
    "OFF\n8 12 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n"
    "3 0 2 1\n3 0 3 2\n3 4 5 6\n3 4 6 7\n3 0 1 5\n3 0 5 4\n3 1 2 6\n3 1 6 5\n3 2 3 7\n3 2 7 6\n3 3 0 4\n3 3 4 7\n";

}  // namespace

TEST(CliBox, UnitCubeAp) {
  const auto r = run({"box", "--input", temp_file("cube.xyz", kCubeXyz), "--mode", "ap"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(field(r.out, "volume"), 1.0, 1e-12);
}

TEST(CliBox, GridIsConservative) {
  const auto cube = temp_file("cube.xyz", kCubeXyz);
  for (const char* mode : {"agp", "egp"}) {
    const auto r = run({"box", "--input", cube, "--mode", mode, "--epsilon", "0.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_GE(field(r.out, "volume"), 1.0);
  }
  const auto tight = run({"box", "--input", cube, "--mode", "agp", "--epsilon", "0.5", "--tight"});
  EXPECT_NEAR(field(tight.out, "volume"), 1.0, 1e-12);
}

TEST(CliBox, Deterministic) {
  const std::vector<std::string> args{"box", "--synthetic", "5000", "--seed", "9", "--mode", "agp",
                                      "--epsilon", "0.02", "--omit-timing", "--out", "-"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(CliBox, ReportRowPerEpsilon) {
  const auto path = (std::filesystem::temp_directory_path() / "dynpca_cli_test_box.csv").string();
  const auto r = run({"box", "--synthetic", "1000", "--mode", "agp", "--epsilon", "0.1", "--epsilon", "0.05", "--out",
                      path});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  const auto report = io::read_report(in, io::ReportFormat::csv);
  ASSERT_EQ(report.size(), 2u);
  EXPECT_EQ(report[0].epsilon, 0.1);
  EXPECT_EQ(report[1].epsilon, 0.05);
  std::remove(path.c_str());
}

TEST(CliBox, PolygonInput) {
  const auto r = run({"box", "--input", temp_file("sq.xyz", "0 0\n2 0\n2 1\n0 1\n")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(field(r.out, "volume"), 2.0, 1e-12);
}

TEST(CliBench, ZeroBatchIsUsageError) {
  EXPECT_EQ(run({"bench", "--synthetic", "1000", "--batch", "0"}).code, 2);
}

TEST(CliBench, UsageErrors) {
  EXPECT_EQ(run({"bench", "--synthetic", "1000", "--reps", "0"}).code, 2);
  EXPECT_EQ(run({"bench", "--synthetic", "1000", "--mode", "agp", "--epsilon", "-1"}).code, 2);
  EXPECT_EQ(run({"bench", "--synthetic", "1000", "--mode", "cpca"}).code, 2);
  EXPECT_EQ(run({"bench", "--mode", "ap"}).code, 2);
  EXPECT_EQ(run({"bench", "--synthetic", "1000", "--mode", "nope"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"bench", "--synthetic", "1000", "--format", "xml"}).code, 2);
}

TEST(CliBench, DataErrors) {
  EXPECT_EQ(run({"bench", "--input", "/nonexistent/pts.xyz"}).code, 1);
  EXPECT_EQ(run({"box", "--input", temp_file("bad.xyz", "1 2 3\n4 five 6\n")}).code, 1);
  EXPECT_EQ(run({"bench", "--input", temp_file("few.xyz", kCubeXyz), "--batch", "8"}).code, 1);
}

TEST(CliBench, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(CliBench, DeterministicWithoutTiming) {
  const std::vector<std::string> args{"bench", "--synthetic", "3000", "--mode", "egp", "--epsilon", "0.05",
                                      "--batch", "10", "--batch", "100", "--reps", "3", "--seed", "42",
                                      "--omit-timing"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  const auto report = io::read_report(in, io::ReportFormat::csv);
  // One grid build row plus static and dynamic rows for 2 batch sizes and 2 operations.
  EXPECT_EQ(report.size(), 9u);
}

TEST(CliBench, VolumesMatchStatic) {
  const auto r = run({"bench", "--synthetic", "5000", "--batch", "50", "--reps", "5", "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  const auto report = io::read_report(in, io::ReportFormat::csv);
  ASSERT_EQ(report.size(), 4u);
  for (std::size_t i = 0; i < report.size(); i += 2) {
    EXPECT_EQ(report[i].algo, "ap-static");
    EXPECT_EQ(report[i + 1].algo, "ap-dynamic");
    EXPECT_NEAR(report[i].volume, report[i + 1].volume, 1e-9 * report[i].volume);
    EXPECT_EQ(report[i].candidates, report[i + 1].candidates);
  }
}

TEST(CliBench, ThreadsDoNotChangeResults) {
  const std::vector<std::string> base{"bench", "--synthetic", "3000", "--mode", "agp", "--epsilon", "0.05",
                                      "--reps", "6", "--omit-timing"};
  auto threaded = base;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const auto a = run(base), b = run(threaded);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(CliCpca, CubeModes) {
  const auto cube = temp_file("cube.off", kCubeOff);
  const auto vol = run({"cpca", "--input", cube, "--mode", "polyhedron_volume", "--edits", "40"});
  ASSERT_EQ(vol.code, 0) << vol.err;
  EXPECT_NEAR(field(vol.out, "measure"), 1.0, 1e-12);
  EXPECT_NEAR(std::stod(vol.out.substr(vol.out.find("cov\n") + 4)), 1.0 / 12.0, 1e-9);
  EXPECT_LE(field(vol.out, "delta_error"), 1e-8);

  const auto surf = run({"cpca", "--input", cube, "--mode", "polyhedron_boundary", "--edits", "40"});
  ASSERT_EQ(surf.code, 0) << surf.err;
  EXPECT_NEAR(std::stod(surf.out.substr(surf.out.find("cov\n") + 4)), 5.0 / 36.0, 1e-9);
  EXPECT_LE(field(surf.out, "delta_error"), 1e-8);
}

TEST(CliCpca, CubeResultsAgainstLibrary) {
  cli::CpcaConfig cfg;
  cfg.input = temp_file("cube.off", kCubeOff);
  cfg.edits = 60;
  cfg.seed = 3;
  const auto results = cli::run_cpca(cfg);
  ASSERT_EQ(results.size(), 2u);
  for (const auto& r : results) {
    const double want = r.mode == CpcaMode::polyhedron_volume ? 1.0 / 12.0 : 5.0 / 36.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(r.cov[i][j], i == j ? want : 0.0, 1e-9);
    EXPECT_LE(r.delta_error, 1e-8);
  }
}

TEST(CliCpca, Polygon) {
  const auto sq = temp_file("square.xyz", "0 0\n1 0\n1 1\n0 1\n");
  const auto r = run({"cpca", "--input", sq, "--edits", "25"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mode polygon_area"), std::string::npos);
  EXPECT_NE(r.out.find("mode polygon_boundary"), std::string::npos);
}

TEST(CliCpca, NonKernelApexGetsHint) {
  const auto sq = temp_file("square.xyz", "0 0\n1 0\n1 1\n0 1\n");
  const auto r = run({"cpca", "--input", sq, "--mode", "polygon_area", "--kernel", "3,3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--kernel"), std::string::npos);
}

TEST(CliCpca, ModeMustMatchInput) {
  const auto sq = temp_file("square.xyz", "0 0\n1 0\n1 1\n0 1\n");
  EXPECT_EQ(run({"cpca", "--input", sq, "--mode", "polyhedron_volume"}).code, 2);
  EXPECT_EQ(run({"cpca", "--input", sq, "--kernel", "a,b"}).code, 2);
}

TEST(CliTool, ExitCodes) {
  const std::string tool = DYNPCA_TOOL_PATH;
  const auto cube = temp_file("cube.xyz", kCubeXyz);
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  EXPECT_EQ(status(tool + " box --input " + cube), 0);
  EXPECT_EQ(status(tool + " bench --input " + cube + " --batch 0"), 2);
  EXPECT_EQ(status(tool + " box --input /nonexistent.xyz"), 1);
}
