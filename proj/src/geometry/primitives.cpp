#include "hoi/geometry/primitives.hpp"

#include <cmath>
#include <map>

namespace hoi::geom {

namespace {

struct Ring {
    double z;
    double radius;
};

// Surface of revolution around +z: bottom pole, rings bottom-to-top, top pole.
TriMesh revolve(double bottom_z, const std::vector<Ring>& rings, double top_z, int segments)
{
    TriMesh mesh;
    mesh.vertices.emplace_back(0.0, 0.0, bottom_z);
    for (const Ring& ring : rings) {
        for (int k = 0; k < segments; ++k) {
            const double a = 2.0 * kPi * k / segments;
            mesh.vertices.emplace_back(ring.radius * std::cos(a), ring.radius * std::sin(a), ring.z);
        }
    }
    const int top = static_cast<int>(mesh.vertices.size());
    mesh.vertices.emplace_back(0.0, 0.0, top_z);

    auto at = [segments](int ring, int k) { return 1 + ring * segments + (k % segments); };
    for (int k = 0; k < segments; ++k) mesh.faces.push_back({0, at(0, k + 1), at(0, k)});
    for (int j = 0; j + 1 < static_cast<int>(rings.size()); ++j) {
        for (int k = 0; k < segments; ++k) {
            mesh.faces.push_back({at(j, k), at(j, k + 1), at(j + 1, k + 1)});
            mesh.faces.push_back({at(j, k), at(j + 1, k + 1), at(j + 1, k)});
        }
    }
    const int last = static_cast<int>(rings.size()) - 1;
    for (int k = 0; k < segments; ++k) mesh.faces.push_back({top, at(last, k), at(last, k + 1)});
    return mesh;
}

}  // namespace

TriMesh make_box(const Vec3& min, const Vec3& max, int subdivisions)
{
    return make_box(min, max, Eigen::Vector3i::Constant(subdivisions));
}

TriMesh make_box(const Vec3& min, const Vec3& max, const Eigen::Vector3i& n)
{
    if (n.minCoeff() < 1) throw InputError("make_box: subdivisions must be >= 1");
    TriMesh mesh;
    std::map<std::array<int, 3>, int> lattice;
    auto vertex = [&](std::array<int, 3> ijk) {
        auto it = lattice.find(ijk);
        if (it != lattice.end()) return it->second;
        Vec3 p;
        for (int k = 0; k < 3; ++k) p[k] = min[k] + (max[k] - min[k]) * ijk[k] / n[k];
        const int id = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(p);
        lattice.emplace(ijk, id);
        return id;
    };
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3;
        const int c = (a + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            for (int i = 0; i < n[b]; ++i) {
                for (int j = 0; j < n[c]; ++j) {
                    auto corner = [&](int di, int dj) {
                        std::array<int, 3> ijk{};
                        ijk[a] = side ? n[a] : 0;
                        ijk[b] = i + di;
                        ijk[c] = j + dj;
                        return vertex(ijk);
                    };
                    const int p00 = corner(0, 0), p10 = corner(1, 0), p11 = corner(1, 1), p01 = corner(0, 1);
                    if (side) {
                        mesh.faces.push_back({p00, p10, p11});
                        mesh.faces.push_back({p00, p11, p01});
                    } else {
                        mesh.faces.push_back({p00, p11, p10});
                        mesh.faces.push_back({p00, p01, p11});
                    }
                }
            }
        }
    }
    validate_mesh(mesh);
    return mesh;
}

TriMesh make_icosphere(const Vec3& center, double radius, int subdivisions)
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<Face> f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                           {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                           {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const int id = static_cast<int>(v.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(f.size() * 4);
        for (const Face& tri : f) {
            const int ab = midpoint(tri[0], tri[1]);
            const int bc = midpoint(tri[1], tri[2]);
            const int ca = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    for (auto& p : v) p = center + radius * p;
    return make_mesh(std::move(v), std::move(f));
}

TriMesh make_cylinder(const Vec3& center, double radius, double height, int segments)
{
    if (segments < 3) throw InputError("make_cylinder: need at least 3 segments");
    TriMesh mesh = revolve(-0.5 * height, {{-0.5 * height, radius}, {0.5 * height, radius}}, 0.5 * height, segments);
    mesh = translated(mesh, center);
    validate_mesh(mesh);
    return mesh;
}

TriMesh make_capsule(const Vec3& a, const Vec3& b, double radius, int segments, int cap_rings)
{
    if (segments < 3 || cap_rings < 1) throw InputError("make_capsule: bad tessellation");
    const Vec3 axis = b - a;
    const double length = axis.norm();
    if (length <= 0.0) throw InputError("make_capsule: endpoints coincide");
    std::vector<Ring> rings;
    for (int i = 1; i <= cap_rings; ++i) {
        const double phi = -0.5 * kPi + 0.5 * kPi * i / cap_rings;
        rings.push_back({radius * std::sin(phi), radius * std::cos(phi)});
    }
    for (int i = 0; i < cap_rings; ++i) {
        const double phi = 0.5 * kPi * i / cap_rings;
        rings.push_back({length + radius * std::sin(phi), radius * std::cos(phi)});
    }
    TriMesh mesh = revolve(-radius, rings, length + radius, segments);

    const Vec3 z = axis / length;
    const Vec3 helper = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 x = helper.cross(z).normalized();
    const Vec3 y = z.cross(x);
    Mat3 R;
    R.col(0) = x;
    R.col(1) = y;
    R.col(2) = z;
    mesh = transformed(mesh, R, a);
    validate_mesh(mesh);
    return mesh;
}

}  // namespace hoi::geom
