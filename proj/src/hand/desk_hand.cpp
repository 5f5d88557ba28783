#include <algorithm>
#include <cmath>

#include "hoi/geometry/primitives.hpp"
#include "hoi/hand/hand_model.hpp"

namespace hoi::hand {

namespace {

constexpr double kPalmHalfWidth = 0.042;
constexpr double kPalmLength = 0.095;
constexpr double kPalmHalfThickness = 0.013;
constexpr int kCapsuleSegments = 10;
constexpr int kCapRings = 2;

struct Chain {
    Vec3 base;
    Vec3 direction;
    double lengths[3];
    double radius;
};

// Index, middle, pinky, ring, thumb: the joint-index order of the chains.
const Chain kChains[5] = {
    {{0.030, kPalmLength, 0.0}, {0, 1, 0}, {0.045, 0.028, 0.022}, 0.0085},
    {{0.010, kPalmLength, 0.0}, {0, 1, 0}, {0.050, 0.032, 0.024}, 0.0090},
    {{-0.030, kPalmLength, 0.0}, {0, 1, 0}, {0.036, 0.022, 0.020}, 0.0075},
    {{-0.010, kPalmLength, 0.0}, {0, 1, 0}, {0.046, 0.030, 0.022}, 0.0085},
    {{0.035, 0.025, -0.005}, Vec3(0.7, 0.7, 0.0).normalized(), {0.040, 0.032, 0.026}, 0.0100},
};

}  // namespace

Vec3 desk_flexion_axis(int joint)
{
    if (joint >= 13) return Vec3(-1.0, 1.0, 0.0).normalized();
    return Vec3(-1.0, 0.0, 0.0);
}

HandModel generate_desk_hand()
{
    HandModel model;
    model.joints.resize(kJointCount);
    model.joints[0] = {Vec3::Zero(), -1};

    std::vector<geom::TriMesh> parts;
    std::vector<SkinRow> weights;

    const geom::TriMesh palm = geom::make_box(Vec3(-kPalmHalfWidth, 0.0, -kPalmHalfThickness),
                                              Vec3(kPalmHalfWidth, kPalmLength, kPalmHalfThickness),
                                              Eigen::Vector3i(8, 10, 2));
    parts.push_back(palm);
    weights.insert(weights.end(), palm.vertices.size(), SkinRow{{0, 1.0}});

    struct Distal {
        int first_vertex;
        int count;
        Vec3 a;
        Vec3 axis;
        double length;
    };
    std::vector<Distal> distal;
    int vertex_base = static_cast<int>(palm.vertices.size());

    for (int c = 0; c < 5; ++c) {
        const Chain& chain = kChains[c];
        Vec3 p = chain.base;
        for (int s = 0; s < 3; ++s) {
            const int joint = 1 + 3 * c + s;
            const int parent = s == 0 ? 0 : joint - 1;
            model.joints[joint] = {p, parent};
            const Vec3 q = p + chain.lengths[s] * chain.direction;
            const geom::TriMesh cap = geom::make_capsule(p, q, chain.radius, kCapsuleSegments, kCapRings);
            for (const Vec3& v : cap.vertices) {
                const double axial = (v - p).dot(chain.direction);
                if (axial < 0.0) {
                    // Proximal cap: half on the parent at the pole, fully own at the equator.
                    const double own = 1.0 - 0.5 * std::min(1.0, -axial / chain.radius);
                    weights.push_back({{parent, 1.0 - own}, {joint, own}});
                } else {
                    weights.push_back({{joint, 1.0}});
                }
            }
            if (s == 2)
                distal.push_back({vertex_base, static_cast<int>(cap.vertices.size()), p, chain.direction, chain.lengths[s]});
            vertex_base += static_cast<int>(cap.vertices.size());
            parts.push_back(cap);
            p = q;
        }
    }

    const geom::TriMesh mesh = geom::merge(parts);
    model.template_vertices = mesh.vertices;
    model.faces = mesh.faces;
    model.skin_weights = weights;

    const int nf = static_cast<int>(mesh.faces.size());
    std::vector<char> dorsal_incident(mesh.vertices.size(), 0);
    for (int f = 0; f < nf; ++f) {
        if (geom::face_normal(mesh, f).z() < -0.2)
            model.palmar_faces.push_back(f);
        else
            for (int v : mesh.faces[f]) dorsal_incident[v] = 1;
    }

    // One pad vertex per fingertip and one at the palm centre, each the palmar
    // vertex closest to its target point.
    auto closest_palmar = [&](int first, int count, const Vec3& target) {
        int best = -1;
        for (int v = first; v < first + count; ++v)
            if (!dorsal_incident[v] &&
                (best < 0 || (mesh.vertices[v] - target).squaredNorm() < (mesh.vertices[best] - target).squaredNorm()))
                best = v;
        return best;
    };
    for (int c = 0; c < 5; ++c) {
        const Distal& d = distal[c];
        const Vec3 target = d.a + 0.75 * d.length * d.axis - kChains[c].radius * Vec3::UnitZ();
        model.contact_zone_vertices.push_back(closest_palmar(d.first_vertex, d.count, target));
    }
    model.contact_zone_vertices.push_back(
        closest_palmar(0, static_cast<int>(palm.vertices.size()), Vec3(0.0, 0.06, -kPalmHalfThickness)));
    std::sort(model.contact_zone_vertices.begin(), model.contact_zone_vertices.end());
    return model;
}

}  // namespace hoi::hand
