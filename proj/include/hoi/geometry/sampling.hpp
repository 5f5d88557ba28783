#pragma once

#include <cstdint>
#include <vector>

#include "hoi/geometry/mesh.hpp"

namespace hoi::geom {

struct SurfaceSamples {
    std::vector<Vec3> points;
    std::vector<int> faces;
};

/// Area-weighted uniform surface samples, deterministic for a given seed.
SurfaceSamples sample_surface(const TriMesh& mesh, int count, std::uint64_t seed);

}  // namespace hoi::geom
