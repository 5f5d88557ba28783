#include "hoi/geometry/sdf.hpp"

#include <algorithm>
#include <cmath>

#include "hoi/geometry/topology.hpp"

namespace hoi::geom {

ExactSdf::ExactSdf(const TriMesh& mesh) : index_(std::make_shared<const MeshIndex>(mesh))
{
    if (mesh.faces.empty()) throw InputError("ExactSdf: mesh is empty");
}

ExactSdf::ExactSdf(std::shared_ptr<const MeshIndex> index) : index_(std::move(index)) {}

SdfSample ExactSdf::sample(const Vec3& p) const
{
    const ClosestPoint cp = index_->closest_point(p);
    const double sign = index_->winding_number(p) > 0.5 ? -1.0 : 1.0;
    SdfSample s;
    s.d = sign * cp.distance;
    if (cp.distance > 1e-12)
        s.grad = sign * (p - cp.point) / cp.distance;
    else
        s.grad = face_normal(index_->mesh(), cp.face);
    return s;
}

GridSdf::GridSdf(const TriMesh& mesh, int resolution, double padding) : exact_(mesh)
{
    if (resolution < 2) throw InputError("GridSdf: resolution must be >= 2");
    const Aabb box = bounding_box(mesh);
    const Vec3 lo = box.min - Vec3::Constant(padding);
    const Vec3 hi = box.max + Vec3::Constant(padding);
    lattice_.origin = lo;
    lattice_.dims = Eigen::Vector3i::Constant(resolution);
    lattice_.spacing = (hi - lo) / (resolution - 1);

    const MeshIndex& index = exact_.index();
    // Closed meshes get their sign from exact scanline crossings, others from
    // the winding number.
    std::vector<char> inside;
    if (is_watertight(mesh).watertight) {
        inside = occupancy_by_crossings(index, lattice_);
    } else {
        const auto w = winding_numbers(index, lattice_);
        inside.resize(w.size());
        for (std::size_t n = 0; n < w.size(); ++n) inside[n] = w[n] > 0.5 ? 1 : 0;
    }
    values_.assign(lattice_.size(), 0.0);
    const int nx = lattice_.dims.x(), ny = lattice_.dims.y();
    parallel_for(lattice_.size(), [&](std::size_t n) {
        const int i = static_cast<int>(n % nx);
        const int j = static_cast<int>((n / nx) % ny);
        const int k = static_cast<int>(n / (static_cast<std::size_t>(nx) * ny));
        const double d = index.closest_point(lattice_.point(i, j, k)).distance;
        values_[n] = inside[n] ? -d : d;
    });
}

SdfSample GridSdf::sample(const Vec3& p) const
{
    const Vec3 u = (p - lattice_.origin).cwiseQuotient(lattice_.spacing);
    int c[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
        if (!(u[a] >= 0.0) || u[a] > lattice_.dims[a] - 1) return exact_.sample(p);
        c[a] = std::min(static_cast<int>(u[a]), lattice_.dims[a] - 2);
        f[a] = u[a] - c[a];
    }
    double v[2][2][2];
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di)
                v[di][dj][dk] = values_[lattice_.index(c[0] + di, c[1] + dj, c[2] + dk)];
    const double x = f[0], y = f[1], z = f[2];
    SdfSample s;
    double gx = 0.0, gy = 0.0, gz = 0.0;
    for (int dk = 0; dk < 2; ++dk) {
        const double wz = dk ? z : 1.0 - z;
        const double sz = dk ? 1.0 : -1.0;
        for (int dj = 0; dj < 2; ++dj) {
            const double wy = dj ? y : 1.0 - y;
            const double sy = dj ? 1.0 : -1.0;
            for (int di = 0; di < 2; ++di) {
                const double wx = di ? x : 1.0 - x;
                const double sx = di ? 1.0 : -1.0;
                const double val = v[di][dj][dk];
                s.d += wx * wy * wz * val;
                gx += sx * wy * wz * val;
                gy += wx * sy * wz * val;
                gz += wx * wy * sz * val;
            }
        }
    }
    s.grad = Vec3(gx / lattice_.spacing.x(), gy / lattice_.spacing.y(), gz / lattice_.spacing.z());
    return s;
}

}  // namespace hoi::geom
