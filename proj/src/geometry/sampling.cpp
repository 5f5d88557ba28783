#include "hoi/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hoi::geom {

SurfaceSamples sample_surface(const TriMesh& mesh, int count, std::uint64_t seed)
{
    if (mesh.faces.empty()) throw InputError("sample_surface: mesh is empty");
    if (count < 0) throw InputError("sample_surface: negative sample count");
    std::vector<double> cdf(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        total += face_area(mesh, static_cast<int>(f));
        cdf[f] = total;
    }
    if (!(total > 0.0)) throw InputError("sample_surface: mesh has zero area");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SurfaceSamples out;
    out.points.reserve(count);
    out.faces.reserve(count);
    for (int s = 0; s < count; ++s) {
        const double r = unit(rng) * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
        const int f = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
        double a = unit(rng), b = unit(rng);
        if (a + b > 1.0) {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        const Face& tri = mesh.faces[f];
        const Vec3& p0 = mesh.vertices[tri[0]];
        out.points.push_back(p0 + a * (mesh.vertices[tri[1]] - p0) + b * (mesh.vertices[tri[2]] - p0));
        out.faces.push_back(f);
    }
    return out;
}

}  // namespace hoi::geom
