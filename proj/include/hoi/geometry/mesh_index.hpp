#pragma once

#include <vector>

#include "hoi/geometry/mesh.hpp"

namespace hoi::geom {

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
};

/// Validates ‖direction‖ = 1 ± 1e-9.
Ray make_ray(const Vec3& origin, const Vec3& direction);

struct RayHit {
    double depth = 0.0;  // distance along the ray, meters
    int face = -1;
    Vec3 barycentric = Vec3::Zero();
    /// +1 when the ray enters the surface (against the face normal), -1 when leaving.
    int crossing = 0;
};

/// Front-to-back surface intersections along a ray, at most the layer budget.
struct DepthHits {
    std::vector<RayHit> hits;
    bool empty() const { return hits.empty(); }
};

struct ClosestPoint {
    Vec3 point = Vec3::Zero();
    int face = -1;
    double distance = 0.0;
};

/// Bounding-volume hierarchy over a triangle mesh. Immutable; all queries are
/// const and safe to call concurrently.
class MeshIndex {
public:
    explicit MeshIndex(TriMesh mesh);

    const TriMesh& mesh() const { return mesh_; }
    const Aabb& bounds() const { return nodes_.front().box; }

    /// Every intersection with depth > 0, sorted by depth. Hits closer than
    /// 1e-9 m that share a crossing direction (shared edges) are merged.
    std::vector<RayHit> intersect_all(const Ray& ray) const;

    /// Nearest `layers` intersections, strictly increasing in depth.
    DepthHits cast_peeled(const Ray& ray, int layers) const;

    ClosestPoint closest_point(const Vec3& p) const;

    /// Generalized winding number (solid-angle sum / 4pi).
    double winding_number(const Vec3& p) const;

    /// Negative inside (winding number > 0.5), magnitude = exact surface distance.
    double signed_distance(const Vec3& p) const;

    /// Integer winding count at each sample along a line through `origin` in
    /// direction `axis` (unit). `ts` must be sorted ascending and lie beyond
    /// the mesh bounds' entry point; uses signed ray crossings, exact for
    /// closed meshes.
    std::vector<int> winding_along_line(const Vec3& origin, const Vec3& axis,
                                        const std::vector<double>& ts) const;

private:
    struct Node {
        Aabb box;
        int left = -1;
        int right = -1;
        int first = 0;
        int count = 0;
    };

    int build(int first, int count, std::vector<Vec3>& centroids);
    bool ray_face(const Ray& ray, int face, RayHit& hit) const;

    TriMesh mesh_;
    std::vector<Vec3> normals_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

/// Point-triangle closest point (Ericson); returns the point, writes barycentrics.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* barycentric = nullptr);

/// Up to `layers` front-to-back intersections (default budget 4).
DepthHits cast_ray_peeled(const TriMesh& mesh, const Ray& ray, int layers = 4);

/// Exact signed distance; sign from the generalized winding number.
double signed_distance(const TriMesh& mesh, const Vec3& point);

}  // namespace hoi::geom
