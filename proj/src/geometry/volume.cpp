#include "hoi/geometry/volume.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hoi/geometry/topology.hpp"

namespace hoi::geom {

namespace {

// Kuhn decomposition of the unit cube into six tetrahedra sharing the 0-7
// diagonal; face splits agree between neighbouring cubes.
constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                             {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

Lattice cell_centres(const Aabb& box, double pitch)
{
    Lattice lat;
    lat.spacing = Vec3::Constant(pitch);
    for (int k = 0; k < 3; ++k) {
        const double extent = box.max[k] - box.min[k];
        lat.dims[k] = std::max(1, static_cast<int>(std::ceil(extent / pitch - 1e-9)));
    }
    lat.origin = box.min + Vec3::Constant(0.5 * pitch);
    return lat;
}

}  // namespace

std::vector<char> occupancy_by_crossings(const MeshIndex& index, const Lattice& lattice)
{
    std::vector<char> inside(lattice.size(), 0);
    const double z0 = std::min(index.bounds().min.z(), lattice.origin.z()) - 1.0;
    std::vector<double> ts(lattice.dims.z());
    for (int k = 0; k < lattice.dims.z(); ++k) ts[k] = lattice.origin.z() + k * lattice.spacing.z() - z0;
    const auto columns = static_cast<std::size_t>(lattice.dims.x()) * lattice.dims.y();
    const Aabb& b = index.bounds();
    parallel_for(columns, [&](std::size_t c) {
        const int i = static_cast<int>(c % lattice.dims.x());
        const int j = static_cast<int>(c / lattice.dims.x());
        const Vec3 p = lattice.point(i, j, 0);
        if (p.x() < b.min.x() || p.x() > b.max.x() || p.y() < b.min.y() || p.y() > b.max.y()) return;
        const auto counts = index.winding_along_line(Vec3(p.x(), p.y(), z0), Vec3::UnitZ(), ts);
        for (int k = 0; k < lattice.dims.z(); ++k) inside[lattice.index(i, j, k)] = counts[k] > 0 ? 1 : 0;
    });
    return inside;
}

std::vector<double> winding_numbers(const MeshIndex& index, const Lattice& lattice)
{
    std::vector<double> w(lattice.size(), 0.0);
    parallel_for(lattice.size(), [&](std::size_t n) {
        const int i = static_cast<int>(n % lattice.dims.x());
        const int j = static_cast<int>((n / lattice.dims.x()) % lattice.dims.y());
        const int k = static_cast<int>(n / (static_cast<std::size_t>(lattice.dims.x()) * lattice.dims.y()));
        w[n] = index.winding_number(lattice.point(i, j, k));
    });
    return w;
}

double intersection_volume(const TriMesh& a, const TriMesh& b, double pitch)
{
    if (!(pitch > 0.0)) throw InputError("intersection_volume: pitch must be positive");
    if (!is_watertight(a).watertight || !is_watertight(b).watertight)
        throw ContractError("intersection_volume: both meshes must be watertight (remesh first)");
    return intersection_volume(MeshIndex(a), MeshIndex(b), pitch);
}

double intersection_volume(const MeshIndex& a, const MeshIndex& b, double pitch)
{
    Aabb box;
    box.min = a.bounds().min.cwiseMax(b.bounds().min);
    box.max = a.bounds().max.cwiseMin(b.bounds().max);
    if (!box.valid()) return 0.0;
    const Lattice lat = cell_centres(box, pitch);
    const auto in_a = occupancy_by_crossings(a, lat);
    const auto in_b = occupancy_by_crossings(b, lat);
    std::size_t count = 0;
    for (std::size_t n = 0; n < in_a.size(); ++n) count += (in_a[n] && in_b[n]) ? 1 : 0;
    return static_cast<double>(count) * pitch * pitch * pitch * 1e6;
}

TriMesh voxel_remesh(const TriMesh& mesh, double pitch)
{
    if (mesh.faces.empty()) throw InputError("voxel_remesh: mesh is empty");
    if (!(pitch > 0.0)) throw InputError("voxel_remesh: pitch must be positive");
    const Aabb box = bounding_box(mesh);
    const double diag = box.diagonal();
    if (!(diag > 0.0)) throw InputError("voxel_remesh: bounding box is empty");
    if (pitch > diag) throw InputError("voxel_remesh: pitch exceeds the bounding-box diagonal");

    const MeshIndex index(mesh);
    Lattice lat;
    lat.spacing = Vec3::Constant(pitch);
    // Small fixed skew keeps nodes off axis-aligned input faces.
    lat.origin = box.min - 2.0 * pitch * Vec3::Ones() + pitch * Vec3(0.0317, 0.0173, 0.0241);
    for (int k = 0; k < 3; ++k)
        lat.dims[k] = static_cast<int>(std::ceil((box.max[k] - box.min[k]) / pitch)) + 5;
    const auto w = winding_numbers(index, lat);
    constexpr double iso = 0.5;
    // An open sheet never reaches winding numbers much above one half.
    if (*std::max_element(w.begin(), w.end()) < 0.75)
        throw InputError("voxel_remesh: input encloses no volume (open or flat surface)");

    TriMesh out;
    std::unordered_map<std::uint64_t, int> edge_vertex;
    const std::uint64_t total = lat.size();
    auto node_of = [&](int i, int j, int k) { return lat.index(i, j, k); };
    auto edge_point = [&](std::size_t na, std::size_t nb, const Vec3& pa, const Vec3& pb) {
        const std::size_t lo = std::min(na, nb);
        const std::size_t hi = std::max(na, nb);
        const std::uint64_t key = static_cast<std::uint64_t>(lo) * total + hi;
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;
        double t = (iso - w[na]) / (w[nb] - w[na]);
        t = std::clamp(t, 0.02, 0.98);
        const int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(pa + t * (pb - pa));
        edge_vertex.emplace(key, id);
        return id;
    };

    for (int k = 0; k + 1 < lat.dims.z(); ++k) {
        for (int j = 0; j + 1 < lat.dims.y(); ++j) {
            for (int i = 0; i + 1 < lat.dims.x(); ++i) {
                std::size_t node[8];
                Vec3 pos[8];
                bool any_in = false, any_out = false;
                for (int c = 0; c < 8; ++c) {
                    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
                    node[c] = node_of(i + di, j + dj, k + dk);
                    pos[c] = lat.point(i + di, j + dj, k + dk);
                    (w[node[c]] > iso ? any_in : any_out) = true;
                }
                if (!any_in || !any_out) continue;
                for (const auto& tet : kTets) {
                    int ins[4], outs[4];
                    int ni = 0, no = 0;
                    for (int c : tet) (w[node[c]] > iso ? ins[ni++] : outs[no++]) = c;
                    if (ni == 0 || no == 0) continue;
                    Vec3 cin = Vec3::Zero(), cout = Vec3::Zero();
                    for (int m = 0; m < ni; ++m) cin += pos[ins[m]] / ni;
                    for (int m = 0; m < no; ++m) cout += pos[outs[m]] / no;
                    const Vec3 outward = cout - cin;
                    auto ev = [&](int a, int b) { return edge_point(node[a], node[b], pos[a], pos[b]); };
                    auto emit = [&](int p, int q, int r) {
                        const Vec3 n = (out.vertices[q] - out.vertices[p]).cross(out.vertices[r] - out.vertices[p]);
                        if (n.dot(outward) < 0.0)
                            out.faces.push_back({p, r, q});
                        else
                            out.faces.push_back({p, q, r});
                    };
                    if (ni == 1 || no == 1) {
                        const int lone = ni == 1 ? ins[0] : outs[0];
                        const int* rest = ni == 1 ? outs : ins;
                        emit(ev(lone, rest[0]), ev(lone, rest[1]), ev(lone, rest[2]));
                    } else {
                        const int a = ins[0], b = ins[1], c = outs[0], d = outs[1];
                        const int ac = ev(a, c), ad = ev(a, d), bd = ev(b, d), bc = ev(b, c);
                        emit(ac, ad, bd);
                        emit(ac, bd, bc);
                    }
                }
            }
        }
    }
    if (out.faces.empty()) throw InputError("voxel_remesh: input encloses no volume (open or flat surface)");
    out.units_scale = mesh.units_scale;
    return out;
}

}  // namespace hoi::geom
