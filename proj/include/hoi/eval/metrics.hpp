#pragma once

#include <cstdint>

#include "hoi/geometry/mesh.hpp"

namespace hoi::eval {

struct MeshMetrics {
    double chamfer = 0.0;  // m, mean of the two directed mean nearest distances
    double f5 = 0.0;
    double f10 = 0.0;
    double precision5 = 0.0, recall5 = 0.0;
    double precision10 = 0.0, recall10 = 0.0;
    int samples = 0;
    std::uint64_t seed = 0;
};

/// Chamfer distance and F-scores at 5 mm and 10 mm between area-weighted
/// surface samples. Both meshes are sampled with the same seed.
MeshMetrics chamfer_fscore(const geom::TriMesh& pred, const geom::TriMesh& gt, int samples = 10000,
                           std::uint64_t seed = 0);

struct SimConfig {
    int steps = 1000;
    double dt = 0.002;         // s
    double gravity = 9.8;      // m/s^2 along -z
    int samples = 2000;        // object surface points tested against the hand
    double cap = 0.5;          // m; displacement beyond this counts as escaped
    int sdf_resolution = 64;   // hand SDF grid
    int projection_passes = 4;
    std::uint64_t seed = 0;
};

struct SimResult {
    double displacement_cm = 0.0;
    bool escaped = false;
    int steps = 0;
};

/// Drop test: the object falls as a rigid, non-rotating body under gravity
/// while the hand stays fixed. Penetrating surface samples are projected out
/// along the hand SDF gradient and the velocity loses its inward normal
/// component (no friction). Both meshes must be watertight.
SimResult simulation_displacement(const geom::TriMesh& hand, const geom::TriMesh& object, const SimConfig& cfg = {});

struct GraspMetrics {
    double sim_disp = 0.0;  // cm
    double int_vol = 0.0;   // cm^3
};

GraspMetrics grasp_metrics(const geom::TriMesh& hand, const geom::TriMesh& object, double pitch = 0.002,
                           const SimConfig& sim = {});

}  // namespace hoi::eval
