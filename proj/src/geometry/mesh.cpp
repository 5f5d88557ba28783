#include "hoi/geometry/mesh.hpp"

#include <cmath>
#include <sstream>

namespace hoi::geom {

void validate_mesh(const TriMesh& mesh)
{
    if (!(mesh.units_scale > 0.0) || !std::isfinite(mesh.units_scale))
        throw InputError("mesh units_scale must be positive and finite");
    const int nv = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i < nv; ++i) {
        if (!mesh.vertices[i].allFinite()) {
            std::ostringstream os;
            os << "vertex " << i << " has a non-finite coordinate";
            throw InputError(os.str());
        }
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& tri = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= nv) {
                std::ostringstream os;
                os << "face " << f << " references vertex " << tri[k] << " but the mesh has " << nv
                   << " vertices";
                throw InputError(os.str());
            }
        }
        if (face_area(mesh, static_cast<int>(f)) <= kDegenerateArea) {
            std::ostringstream os;
            os << "face " << f << " is degenerate (area <= 1e-12 m^2)";
            throw InputError(os.str());
        }
    }
}

TriMesh make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces, double units_scale)
{
    TriMesh mesh{std::move(vertices), std::move(faces), units_scale};
    validate_mesh(mesh);
    return mesh;
}

Aabb bounding_box(const TriMesh& mesh) { return bounding_box(mesh.vertices); }

Aabb bounding_box(const std::vector<Vec3>& points)
{
    Aabb box;
    for (const auto& p : points) box.extend(p);
    return box;
}

Vec3 face_normal(const TriMesh& mesh, int face)
{
    const Face& f = mesh.faces[face];
    const Vec3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double face_area(const TriMesh& mesh, int face)
{
    const Face& f = mesh.faces[face];
    return 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm();
}

double surface_area(const TriMesh& mesh)
{
    double a = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) a += face_area(mesh, static_cast<int>(f));
    return a;
}

double signed_volume(const TriMesh& mesh)
{
    double v = 0.0;
    for (const Face& f : mesh.faces)
        v += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
    return v / 6.0;
}

Vec3 volume_centroid(const TriMesh& mesh)
{
    double vol = 0.0;
    Vec3 c = Vec3::Zero();
    for (const Face& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& d = mesh.vertices[f[2]];
        const double v = a.dot(b.cross(d)) / 6.0;
        vol += v;
        c += v * (a + b + d) / 4.0;
    }
    if (std::abs(vol) < 1e-18) {
        Vec3 mean = Vec3::Zero();
        for (const auto& p : mesh.vertices) mean += p;
        return mesh.vertices.empty() ? mean : Vec3(mean / static_cast<double>(mesh.vertices.size()));
    }
    return c / vol;
}

TriMesh translated(const TriMesh& mesh, const Vec3& offset)
{
    TriMesh out = mesh;
    for (auto& v : out.vertices) v += offset;
    return out;
}

TriMesh transformed(const TriMesh& mesh, const Mat3& R, const Vec3& t)
{
    TriMesh out = mesh;
    for (auto& v : out.vertices) v = R * v + t;
    return out;
}

TriMesh merge(const std::vector<TriMesh>& parts)
{
    TriMesh out;
    for (const auto& part : parts) {
        const int base = static_cast<int>(out.vertices.size());
        out.vertices.insert(out.vertices.end(), part.vertices.begin(), part.vertices.end());
        for (const Face& f : part.faces) out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    }
    return out;
}

}  // namespace hoi::geom
