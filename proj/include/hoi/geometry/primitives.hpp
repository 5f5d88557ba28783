#pragma once

#include "hoi/geometry/mesh.hpp"

// Closed, outward-oriented primitive meshes.
namespace hoi::geom {

/// Axis-aligned box [min, max]; each face split into n_x * n_y quads (default 1 -> 12 triangles).
TriMesh make_box(const Vec3& min, const Vec3& max, int subdivisions = 1);
TriMesh make_box(const Vec3& min, const Vec3& max, const Eigen::Vector3i& divisions);

/// Icosphere with the given number of subdivision passes (0 -> 20 faces).
TriMesh make_icosphere(const Vec3& center, double radius, int subdivisions);

/// Cylinder along z centred at `center`, with `segments` around and capped ends.
TriMesh make_cylinder(const Vec3& center, double radius, double height, int segments);

/// Capsule from a to b: cylinder with hemispherical caps.
TriMesh make_capsule(const Vec3& a, const Vec3& b, double radius, int segments, int cap_rings);

}  // namespace hoi::geom
