#pragma once

#include <memory>
#include <vector>

#include "hoi/geometry/mesh_index.hpp"
#include "hoi/geometry/volume.hpp"

namespace hoi::geom {

struct SdfSample {
    double d = 0.0;          // signed distance (m), negative inside
    Vec3 grad = Vec3::Zero();  // spatial gradient of d
};

/// Point -> signed distance contract. Implementations are immutable and
/// safe to query concurrently.
class SdfQuery {
public:
    virtual ~SdfQuery() = default;
    virtual SdfSample sample(const Vec3& p) const = 0;
    double distance(const Vec3& p) const { return sample(p).d; }
};

/// Exact closest-point distance with winding-number sign.
class ExactSdf final : public SdfQuery {
public:
    explicit ExactSdf(const TriMesh& mesh);
    explicit ExactSdf(std::shared_ptr<const MeshIndex> index);
    SdfSample sample(const Vec3& p) const override;
    const MeshIndex& index() const { return *index_; }

private:
    std::shared_ptr<const MeshIndex> index_;
};

/// Signed distance cached on a regular grid (resolution^3 nodes over the
/// padded bounding box), trilinearly interpolated. Queries outside the grid
/// fall back to the exact field.
class GridSdf final : public SdfQuery {
public:
    explicit GridSdf(const TriMesh& mesh, int resolution = 96, double padding = 0.02);
    SdfSample sample(const Vec3& p) const override;
    const Lattice& lattice() const { return lattice_; }

private:
    ExactSdf exact_;
    Lattice lattice_;
    std::vector<double> values_;
};

}  // namespace hoi::geom
