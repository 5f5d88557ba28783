#pragma once

#include <limits>
#include <vector>

#include "hoi/common.hpp"

namespace hoi::geom {

/// Indexed triangle mesh. Coordinates are meters; units_scale records the
/// meters-per-unit factor of the file it was loaded from.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    double units_scale = 1.0;

    bool empty() const { return faces.empty(); }
};

inline constexpr double kDegenerateArea = 1e-12;

struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p)
    {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    void extend(const Aabb& b)
    {
        min = min.cwiseMin(b.min);
        max = max.cwiseMax(b.max);
    }
    bool valid() const { return (max.array() >= min.array()).all(); }
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return 0.5 * (min + max); }
    double diagonal() const { return valid() ? extent().norm() : 0.0; }
    bool contains(const Vec3& p) const
    {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

/// Throws InputError naming the first offending face or vertex.
void validate_mesh(const TriMesh& mesh);

/// Builds a mesh and validates it.
TriMesh make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces, double units_scale = 1.0);

Aabb bounding_box(const TriMesh& mesh);
Aabb bounding_box(const std::vector<Vec3>& points);

Vec3 face_normal(const TriMesh& mesh, int face);  // unit, right-hand rule
double face_area(const TriMesh& mesh, int face);
double surface_area(const TriMesh& mesh);

/// Signed volume via the divergence theorem; positive for outward-oriented closed meshes.
double signed_volume(const TriMesh& mesh);

/// Volume centroid of a closed mesh (falls back to the vertex mean for ~zero volume).
Vec3 volume_centroid(const TriMesh& mesh);

TriMesh translated(const TriMesh& mesh, const Vec3& offset);
TriMesh transformed(const TriMesh& mesh, const Mat3& R, const Vec3& t);

/// Concatenates meshes, re-indexing faces.
TriMesh merge(const std::vector<TriMesh>& parts);

}  // namespace hoi::geom
