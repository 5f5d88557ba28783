#pragma once

#include <utility>
#include <vector>

#include "hoi/geometry/mesh.hpp"

namespace hoi::geom {

struct WatertightReport {
    bool watertight = false;
    std::vector<std::pair<int, int>> boundary_edges;      // used by exactly one face
    std::vector<std::pair<int, int>> nonmanifold_edges;   // used by three or more faces
    std::vector<std::pair<int, int>> misoriented_edges;   // two faces traverse it the same way
};

/// True iff every edge is shared by exactly two faces traversing it in opposite directions.
WatertightReport is_watertight(const TriMesh& mesh);

}  // namespace hoi::geom
