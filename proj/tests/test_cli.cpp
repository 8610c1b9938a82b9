#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thinplate/cli.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace thinplate;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "thinplate");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "thinplate_test_cli" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string read_all(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const std::vector<std::string> small_sweep = {"--set",      "geometry.n1=9", "--set", "geometry.n2=9",
                                              "--set",      "geometry.n3=3", "--set", "sweep.h=0.25,0.125,0.0625",
                                              "--set",      "output.wall_time=false"};

}  // namespace

TEST_CASE("q2 prints the reduced form") {
  const Run r = run({"q2", "--density", "logdet", "--p", "2"});
  CHECK(r.code == ExitOk);
  CHECK(r.out.find("3") != std::string::npos);
  std::istringstream is(r.out);
  std::string title;
  std::getline(is, title);
  double m[9];
  for (double& x : m) is >> x;
  CHECK(m[0] == doctest::Approx(3.0));
  CHECK(m[1] == doctest::Approx(1.0));
  CHECK(m[4] == doctest::Approx(3.0));
  CHECK(m[8] == doctest::Approx(2.0));
  CHECK(m[2] == doctest::Approx(0.0));
}

TEST_CASE("check-density passes for built-in densities") {
  CHECK(run({"check-density", "--density", "logdet", "--p", "2"}).code == ExitOk);
  CHECK(run({"check-density", "--density", "invdet", "--p", "2"}).code == ExitOk);
}

TEST_CASE("config errors exit with code 2 and name the culprit") {
  const Run a = run({"converge"});
  CHECK(a.code == ExitConfigError);
  CHECK(a.err.find("[sweep]") != std::string::npos);
  const Run b = run({"q2", "--set", "density.shape=1"});
  CHECK(b.code == ExitConfigError);
  CHECK(b.err.find("density.shape") != std::string::npos);
  const Run c = run({"q2", "--set", "density.p=x"});
  CHECK(c.code == ExitConfigError);
  CHECK(c.err.find("density.p") != std::string::npos);
  CHECK(run({"nosuch"}).code == ExitConfigError);
  CHECK(run({"q2", "--config", "/nonexistent.ini"}).code == ExitConfigError);
}

TEST_CASE("solve2d writes the state and moments") {
  const std::string dir = temp_dir("solve2d");
  const Run r = run({"solve2d", "--out", dir, "--set", "geometry.n1=9", "--set", "geometry.n2=9"});
  CHECK(r.code == ExitOk);
  CHECK(std::filesystem::exists(dir + "/convergence_plate2d.csv"));
  CHECK(std::filesystem::exists(dir + "/convergence_moments.csv"));
  CHECK(std::filesystem::exists(dir + "/resolved_config.ini"));
}

TEST_CASE("solve3d writes the deformation") {
  const std::string dir = temp_dir("solve3d");
  const Run r = run({"solve3d", "--out", dir, "--thickness", "0.25", "--set", "geometry.n1=9", "--set",
                     "geometry.n2=9", "--set", "geometry.n3=3"});
  CHECK(r.code == ExitOk);
  CHECK(std::filesystem::exists(dir + "/convergence_deformation.csv"));
  CHECK(std::filesystem::exists(dir + "/convergence_deformation.json"));
}

TEST_CASE("solver failures exit with code 3") {
  const std::string dir = temp_dir("fail");
  std::vector<std::string> args{"converge", "--out", dir, "--set", "solver.max_iterations=1"};
  args.insert(args.end(), small_sweep.begin(), small_sweep.end());
  CHECK(run(args).code == ExitSolverFailed);
}

TEST_CASE("the config echo reproduces the report bit-exactly") {
  const std::string dir = temp_dir("echo_a");
  std::vector<std::string> args{"converge", "--out", dir, "--threads", "2"};
  args.insert(args.end(), small_sweep.begin(), small_sweep.end());
  const Run a = run(args);
  REQUIRE(a.code != ExitConfigError);
  REQUIRE(a.code != ExitSolverFailed);
  CHECK(std::filesystem::exists(dir + "/convergence.csv"));
  CHECK(std::filesystem::exists(dir + "/convergence.json"));
  CHECK(std::filesystem::exists(dir + "/convergence.gp"));

  const std::string dir2 = temp_dir("echo_b");
  const Run b = run({"converge", "--config", dir + "/resolved_config.ini", "--out", dir2, "--threads", "1"});
  CHECK(b.code == a.code);
  CHECK(read_all(dir + "/convergence.csv") == read_all(dir2 + "/convergence.csv"));
  auto ja = nlohmann::json::parse(read_all(dir + "/convergence.json"));
  auto jb = nlohmann::json::parse(read_all(dir2 + "/convergence.json"));
  ja["config"]["output"].erase("dir");
  jb["config"]["output"].erase("dir");
  CHECK(ja == jb);
}
