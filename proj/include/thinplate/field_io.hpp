#pragma once

#include "thinplate/plate2d.hpp"
#include "thinplate/slab.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace thinplate {

enum class FieldFormat { Csv, Binary };

/// Writes base.csv (node, i, j, k, x1, x2, x3, y1, y2, y3) or base.f64 (flat
/// little-endian doubles y1 y2 y3 per node in node order) plus base.json
/// with the grid metadata. Returns the data file path.
std::string write_deformation(const DeformationField3& y, const SlabGrid& grid, const std::string& base,
                              FieldFormat format = FieldFormat::Csv);

struct LoadedDeformation {
  SlabGrid grid;
  DeformationField3 y;
};
/// Reads a field back through its sidecar base.json.
LoadedDeformation read_deformation(const std::string& base);

/// base.csv with columns i, j, u1, u2, v and a base.json sidecar.
std::string write_plate_state(const PlateState2& s, const MidGrid& grid, const std::string& base);
PlateState2 read_plate_state(const std::string& base, MidGrid* grid = nullptr);

/// base.csv with columns i, j, Ebar11, Ebar12, Ebar22, Ehat11, Ehat12, Ehat22
/// and a base.json sidecar carrying the residuals.
std::string write_moments(const StressMoments& m, const MidGrid& grid, const std::string& base);

nlohmann::json to_json(const MidGrid& g);
nlohmann::json to_json(const SlabGrid& g);
MidGrid mid_grid_from_json(const nlohmann::json& j);
SlabGrid slab_grid_from_json(const nlohmann::json& j);

}  // namespace thinplate
