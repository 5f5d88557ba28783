#pragma once

#include <cmath>
#include <random>

#include "hoi/geometry/primitives.hpp"
#include "hoi/rotation.hpp"

namespace hoi::testing {

/// Closed, genus-0, generally non-convex mesh: an icosphere whose vertices are
/// pushed radially by a random low-frequency bump field, then rotated and moved.
inline geom::TriMesh random_blob(std::mt19937_64& rng, int subdiv = 2)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    geom::TriMesh m = geom::make_icosphere(Vec3::Zero(), 1.0, subdiv);
    Vec3 dirs[4];
    double amps[4];
    for (int k = 0; k < 4; ++k) {
        dirs[k] = Vec3(u(rng), u(rng), u(rng)).normalized();
        amps[k] = 0.25 * u(rng);
    }
    const double radius = 0.05 + 0.05 * (u(rng) + 1.0);
    for (Vec3& v : m.vertices) {
        double r = 1.0;
        for (int k = 0; k < 4; ++k) r += amps[k] * std::pow(std::max(0.0, v.dot(dirs[k])), 2);
        v *= radius * r;
    }
    const Mat3 R = rotation_from_axis_angle(Vec3(u(rng), u(rng), u(rng)) * 1.5);
    const Vec3 t(0.05 * u(rng), 0.05 * u(rng), 0.05 * u(rng));
    return geom::transformed(m, R, t);
}

/// Random oriented box (closed, convex).
inline geom::TriMesh random_box(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec3 half(0.02 + 0.08 * u(rng), 0.02 + 0.08 * u(rng), 0.02 + 0.08 * u(rng));
    geom::TriMesh m = geom::make_box(-half, half, 2);
    const Mat3 R = rotation_from_axis_angle(Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5) * 3.0);
    return geom::transformed(m, R, Vec3(0.02 * u(rng), 0.02 * u(rng), 0.02 * u(rng)));
}

/// Alternates blobs and boxes.
inline geom::TriMesh random_closed_mesh(std::mt19937_64& rng, int i)
{
    return i % 3 == 2 ? random_box(rng) : random_blob(rng);
}

}  // namespace hoi::testing
