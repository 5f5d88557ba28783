#pragma once

#include <string>

#include "hoi/geometry/mesh.hpp"

namespace hoi::geom {

/// Wavefront OBJ (v/f records, 1-based or negative indices; polygons are fan
/// triangulated). Coordinates are multiplied by units_scale. Errors name file and line.
TriMesh read_obj(const std::string& path, double units_scale = 1.0);
TriMesh parse_obj(const std::string& text, const std::string& name, double units_scale = 1.0);
std::string format_obj(const TriMesh& mesh);
void write_obj(const std::string& path, const TriMesh& mesh);

/// Binary little-endian PLY with vertex x/y/z and a face vertex_indices list.
TriMesh read_ply(const std::string& path, double units_scale = 1.0);
void write_ply(const std::string& path, const TriMesh& mesh);

/// Dispatches on the .obj / .ply extension.
TriMesh read_mesh(const std::string& path, double units_scale = 1.0);
void write_mesh(const std::string& path, const TriMesh& mesh);

}  // namespace hoi::geom
