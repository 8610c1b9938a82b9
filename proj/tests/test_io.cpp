#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "thinplate/config.hpp"
#include "thinplate/field_io.hpp"
#include "thinplate/harness.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace thinplate;

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "thinplate_test_io" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

SlabGrid small_slab() {
  SlabGrid g;
  g.mid = MidGrid{1.0, 0.75, 6, 5, Clamp::Bottom};
  g.n3 = 3;
  g.h = 0.1;
  g.beta = 5.0;
  return g;
}

DeformationField3 random_field(const SlabGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1e-3);
  DeformationField3 y(g);
  for (auto& d : y.displacements().reshaped()) d = n(rng);
  return y;
}

std::string read_all(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("deformation fields round-trip bit-exactly") {
  const SlabGrid g = small_slab();
  const DeformationField3 y = random_field(g, 11);
  for (FieldFormat f : {FieldFormat::Csv, FieldFormat::Binary}) {
    const std::string base = temp_dir(f == FieldFormat::Csv ? "csv" : "bin") + "/field";
    const std::string path = write_deformation(y, g, base, f);
    CHECK(std::filesystem::exists(path));
    CHECK(std::filesystem::exists(base + ".json"));
    const LoadedDeformation back = read_deformation(base);
    CHECK(back.grid.mid.n1 == g.mid.n1);
    CHECK(back.grid.mid.n2 == g.mid.n2);
    CHECK(back.grid.mid.L2 == g.mid.L2);
    CHECK(back.grid.mid.clamp == g.mid.clamp);
    CHECK(back.grid.n3 == g.n3);
    CHECK(back.grid.h == g.h);
    CHECK(back.grid.beta == g.beta);
    REQUIRE(back.y.num_nodes() == y.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) CHECK(back.y.y(back.grid, n) == y.y(g, n));
  }
}

TEST_CASE("binary layout is flat little-endian positions") {
  const SlabGrid g = small_slab();
  const DeformationField3 y = random_field(g, 5);
  const std::string base = temp_dir("layout") + "/field";
  write_deformation(y, g, base, FieldFormat::Binary);
  CHECK(std::filesystem::file_size(base + ".f64") == static_cast<std::uintmax_t>(3 * g.num_nodes() * 8));
  const auto meta = nlohmann::json::parse(read_all(base + ".json"));
  CHECK(meta.at("kind") == "deformation3d");
  CHECK(meta.at("nodes") == g.num_nodes());
}

TEST_CASE("csv header lists the documented columns") {
  const SlabGrid g = small_slab();
  const std::string base = temp_dir("header") + "/field";
  write_deformation(DeformationField3::rest(g), g, base);
  std::ifstream is(base + ".csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "node,i,j,k,x1,x2,x3,y1,y2,y3");
}

TEST_CASE("plate states round-trip bit-exactly") {
  const MidGrid g{1.0, 1.0, 7, 9, Clamp::Full};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  PlateState2 s = PlateState2::zero(g);
  for (int k = 0; k < g.num_nodes(); ++k) {
    s.u1[k] = n(rng);
    s.u2[k] = n(rng);
    s.v[k] = n(rng);
  }
  const std::string base = temp_dir("plate") + "/state";
  write_plate_state(s, g, base);
  MidGrid back_grid;
  const PlateState2 back = read_plate_state(base, &back_grid);
  CHECK(back_grid.n1 == 7);
  CHECK(back_grid.n2 == 9);
  CHECK(back.u1 == s.u1);
  CHECK(back.u2 == s.u2);
  CHECK(back.v == s.v);
}

TEST_CASE("missing or malformed field files are reported") {
  CHECK_THROWS_AS(read_deformation(temp_dir("missing") + "/none"), std::runtime_error);
  const std::string base = temp_dir("bad") + "/field";
  const SlabGrid g = small_slab();
  write_deformation(DeformationField3::rest(g), g, base, FieldFormat::Binary);
  std::filesystem::resize_file(base + ".f64", 24);
  CHECK_THROWS_AS(read_deformation(base), std::runtime_error);
}

TEST_CASE("rate estimate recovers power laws") {
  const std::vector<double> h{0.4, 0.2, 0.1, 0.05};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * x * x);
  const RateEstimate r = estimate_rate(h, e);
  CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.points == 4);
  CHECK_THROWS_WITH_AS(estimate_rate({0.2, 0.1, 0.05}, {1.0, 0.0, 0.5}), "insufficient data", std::invalid_argument);
  CHECK_THROWS_WITH_AS(estimate_rate({0.2, 0.1}, {1.0, 0.5}), "insufficient data", std::invalid_argument);
}

TEST_CASE("an empty report gives a header-only csv") {
  ConvergenceReport rep;
  const std::string dir = temp_dir("empty");
  const auto files = emit_report(rep, dir, "conv", "both", true);
  CHECK(files.size() == 3);
  CHECK(read_all(dir + "/conv.csv") ==
        "h,w_energy,w_energy_scaled,err_u_l2,err_v_l2,err_grad_v_l2,ball_residual,bad_set_measure,iterations,"
        "wall_time_s,status\n");
  const auto j = nlohmann::json::parse(read_all(dir + "/conv.json"));
  CHECK(j.at("rows").empty());
}

TEST_CASE("report rows keep the column order and round-trip through csv") {
  ConvergenceReport rep;
  ConvergenceRow row;
  row.h = 0.125;
  row.w_energy = 1.0 / 3.0;
  row.w_energy_scaled = row.w_energy / std::pow(0.125, 4);
  row.err_u_l2 = 1e-5;
  row.err_v_l2 = 0.1 / 7.0;
  row.err_grad_v_l2 = 0.3;
  row.ball_residual = 2e-7;
  row.bad_set_measure = 0.0;
  row.iterations = 9;
  row.status = "converged";
  rep.rows.push_back(row);
  std::istringstream is(report_csv(rep));
  std::string header, line;
  std::getline(is, header);
  std::getline(is, line);
  std::vector<std::string> cells;
  std::stringstream ls(line);
  for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
  REQUIRE(cells.size() == report_columns().size());
  CHECK(std::stod(cells[1]) == row.w_energy);
  CHECK(std::stod(cells[4]) == row.err_v_l2);
  CHECK(cells[8] == "9");
  CHECK(cells[10] == "converged");
}

TEST_CASE("unwritable output is reported") {
  ConvergenceReport rep;
  const std::string blocker = temp_dir("blocked") + "/file";
  std::ofstream(blocker) << "x";
  CHECK_THROWS_WITH_AS(emit_report(rep, blocker + "/sub", "conv", "csv", false), doctest::Contains("cannot write"),
                       std::runtime_error);
}
