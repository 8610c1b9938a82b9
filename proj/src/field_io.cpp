#include "thinplate/field_io.hpp"

#include "thinplate/config.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace thinplate {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream is(path, mode);
  if (!is) throw std::runtime_error("cannot read " + path);
  return is;
}

void write_sidecar(const std::string& base, const nlohmann::json& j) {
  auto os = open_out(base + ".json");
  os << j.dump(2) << "\n";
}

nlohmann::json read_sidecar(const std::string& base) {
  auto is = open_in(base + ".json");
  return nlohmann::json::parse(is);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  auto is = open_in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const MidGrid& g) {
  return {{"L1", g.L1}, {"L2", g.L2}, {"n1", g.n1}, {"n2", g.n2}, {"clamp", to_string(g.clamp)}};
}

nlohmann::json to_json(const SlabGrid& g) {
  nlohmann::json j = to_json(g.mid);
  j["n3"] = g.n3;
  j["h"] = g.h;
  j["beta"] = g.beta;
  return j;
}

MidGrid mid_grid_from_json(const nlohmann::json& j) {
  return MidGrid{j.at("L1").get<double>(), j.at("L2").get<double>(), j.at("n1").get<int>(), j.at("n2").get<int>(),
                 clamp_from_string(j.at("clamp").get<std::string>())};
}

SlabGrid slab_grid_from_json(const nlohmann::json& j) {
  SlabGrid g;
  g.mid = mid_grid_from_json(j);
  g.n3 = j.at("n3").get<int>();
  g.h = j.at("h").get<double>();
  g.beta = j.at("beta").get<double>();
  return g;
}

std::string write_deformation(const DeformationField3& y, const SlabGrid& grid, const std::string& base,
                              FieldFormat format) {
  nlohmann::json meta = {{"kind", "deformation3d"}, {"grid", to_json(grid)}, {"nodes", grid.num_nodes()}};
  std::string path;
  if (format == FieldFormat::Csv) {
    path = base + ".csv";
    auto os = open_out(path);
    os << "node,i,j,k,x1,x2,x3,y1,y2,y3\n";
    for (int k = 0; k < grid.n3; ++k)
      for (int j = 0; j < grid.mid.n2; ++j)
        for (int i = 0; i < grid.mid.n1; ++i) {
          const int n = grid.node(i, j, k);
          const Vec3 x = grid.reference(n), p = y.y(grid, n);
          os << n << ',' << i << ',' << j << ',' << k << ',' << format_double(x[0]) << ',' << format_double(x[1]) << ','
             << format_double(x[2]) << ',' << format_double(p[0]) << ',' << format_double(p[1]) << ','
             << format_double(p[2]) << '\n';
        }
    meta["format"] = "csv";
    meta["columns"] = {"node", "i", "j", "k", "x1", "x2", "x3", "y1", "y2", "y3"};
  } else {
    static_assert(std::endian::native == std::endian::little, "binary field output assumes a little-endian host");
    path = base + ".f64";
    auto os = open_out(path, std::ios::out | std::ios::binary);
    for (int n = 0; n < grid.num_nodes(); ++n) {
      const Vec3 p = y.y(grid, n);
      os.write(reinterpret_cast<const char*>(p.data()), 3 * sizeof(double));
    }
    meta["format"] = "f64le";
    meta["layout"] = "y1 y2 y3 per node, node = i + n1 (j + n2 k)";
  }
  meta["data"] = path.substr(path.find_last_of('/') + 1);
  write_sidecar(base, meta);
  return path;
}

LoadedDeformation read_deformation(const std::string& base) {
  const nlohmann::json meta = read_sidecar(base);
  LoadedDeformation out{slab_grid_from_json(meta.at("grid")), {}};
  const SlabGrid& g = out.grid;
  std::vector<Vec3> pos(g.num_nodes());
  if (meta.at("format") == "csv") {
    const auto rows = read_csv(base + ".csv");
    if (static_cast<int>(rows.size()) != g.num_nodes()) throw std::runtime_error(base + ".csv: wrong number of rows");
    for (const auto& r : rows) pos.at(std::stoi(r.at(0))) = Vec3(std::stod(r.at(7)), std::stod(r.at(8)), std::stod(r.at(9)));
  } else {
    auto is = open_in(base + ".f64", std::ios::in | std::ios::binary);
    for (auto& p : pos) is.read(reinterpret_cast<char*>(p.data()), 3 * sizeof(double));
    if (!is) throw std::runtime_error(base + ".f64: truncated file");
  }
  out.y = DeformationField3::from_positions(g, pos);
  return out;
}

std::string write_plate_state(const PlateState2& s, const MidGrid& grid, const std::string& base) {
  const std::string path = base + ".csv";
  auto os = open_out(path);
  os << "i,j,u1,u2,v\n";
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) {
      const int n = grid.node(i, j);
      os << i << ',' << j << ',' << format_double(s.u1[n]) << ',' << format_double(s.u2[n]) << ','
         << format_double(s.v[n]) << '\n';
    }
  write_sidecar(base, {{"kind", "plate_state2d"}, {"grid", to_json(grid)}, {"format", "csv"},
                       {"columns", {"i", "j", "u1", "u2", "v"}}, {"data", path.substr(path.find_last_of('/') + 1)}});
  return path;
}

PlateState2 read_plate_state(const std::string& base, MidGrid* grid_out) {
  const nlohmann::json meta = read_sidecar(base);
  const MidGrid g = mid_grid_from_json(meta.at("grid"));
  PlateState2 s = PlateState2::zero(g);
  const auto rows = read_csv(base + ".csv");
  if (static_cast<int>(rows.size()) != g.num_nodes()) throw std::runtime_error(base + ".csv: wrong number of rows");
  for (const auto& r : rows) {
    const int n = g.node(std::stoi(r.at(0)), std::stoi(r.at(1)));
    s.u1[n] = std::stod(r.at(2));
    s.u2[n] = std::stod(r.at(3));
    s.v[n] = std::stod(r.at(4));
  }
  if (grid_out) *grid_out = g;
  return s;
}

std::string write_moments(const StressMoments& m, const MidGrid& grid, const std::string& base) {
  const std::string path = base + ".csv";
  auto os = open_out(path);
  os << "i,j,Ebar11,Ebar12,Ebar22,Ehat11,Ehat12,Ehat22\n";
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) {
      const int n = grid.node(i, j);
      const auto& a = m.Ebar[n];
      const auto& b = m.Ehat[n];
      os << i << ',' << j << ',' << format_double(a(0, 0)) << ',' << format_double(a(0, 1)) << ','
         << format_double(a(1, 1)) << ',' << format_double(b(0, 0)) << ',' << format_double(b(0, 1)) << ','
         << format_double(b(1, 1)) << '\n';
    }
  write_sidecar(base, {{"kind", "stress_moments2d"},
                       {"grid", to_json(grid)},
                       {"format", "csv"},
                       {"columns", {"i", "j", "Ebar11", "Ebar12", "Ebar22", "Ehat11", "Ehat12", "Ehat22"}},
                       {"membrane_residual", m.membrane_residual},
                       {"bending_residual", m.bending_residual},
                       {"data", path.substr(path.find_last_of('/') + 1)}});
  return path;
}

}  // namespace thinplate
