#pragma once

#include <vector>

#include "hoi/geometry/mesh_index.hpp"

namespace hoi::geom {

/// Regular lattice of sample points origin + (i, j, k) * pitch.
struct Lattice {
    Vec3 origin = Vec3::Zero();
    Vec3 spacing = Vec3::Ones();
    Eigen::Vector3i dims = Eigen::Vector3i::Zero();

    std::size_t size() const
    {
        return static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
    }
    std::size_t index(int i, int j, int k) const
    {
        return (static_cast<std::size_t>(k) * dims.y() + j) * dims.x() + i;
    }
    Vec3 point(int i, int j, int k) const
    {
        return origin + Vec3(i * spacing.x(), j * spacing.y(), k * spacing.z());
    }
};

/// Inside/outside per lattice point from signed ray crossings along z.
/// Exact for closed meshes (including unions of overlapping closed parts).
std::vector<char> occupancy_by_crossings(const MeshIndex& index, const Lattice& lattice);

/// Generalized winding number per lattice point.
std::vector<double> winding_numbers(const MeshIndex& index, const Lattice& lattice);

/// Hand-object overlap in cm^3: lattice points (cell centres at `pitch`, m)
/// inside both meshes over the intersection of their bounding boxes.
/// Both meshes must be watertight (ContractError otherwise).
double intersection_volume(const TriMesh& a, const TriMesh& b, double pitch = 0.002);

/// Same, on pre-built indices (watertightness is the caller's responsibility).
double intersection_volume(const MeshIndex& a, const MeshIndex& b, double pitch);

/// Watertight re-mesh: winding-number occupancy sampled at `pitch`, surface
/// extracted at occupancy 0.5 by marching tetrahedra.
TriMesh voxel_remesh(const TriMesh& mesh, double pitch);

}  // namespace hoi::geom
