#include "hoi/geometry/mesh_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hoi::geom {

namespace {

constexpr int kLeafSize = 4;
constexpr double kMergeDepth = 1e-9;

bool ray_box(const Ray& ray, const Vec3& inv_dir, const Aabb& box, double t_max)
{
    double t0 = 0.0;
    double t1 = t_max;
    for (int k = 0; k < 3; ++k) {
        double lo = (box.min[k] - ray.origin[k]) * inv_dir[k];
        double hi = (box.max[k] - ray.origin[k]) * inv_dir[k];
        if (std::isnan(lo) || std::isnan(hi)) {
            // Direction component is zero and origin lies on a slab plane.
            if (ray.origin[k] < box.min[k] || ray.origin[k] > box.max[k]) return false;
            continue;
        }
        if (lo > hi) std::swap(lo, hi);
        t0 = std::max(t0, lo);
        t1 = std::min(t1, hi);
        if (t0 > t1 * (1.0 + 1e-12) + 1e-15) return false;
    }
    return true;
}

double box_distance2(const Aabb& box, const Vec3& p)
{
    const Vec3 d = (box.min - p).cwiseMax(Vec3::Zero()).cwiseMax(p - box.max);
    return d.squaredNorm();
}

}  // namespace

Ray make_ray(const Vec3& origin, const Vec3& direction)
{
    if (!origin.allFinite() || !direction.allFinite())
        throw InputError("ray has non-finite origin or direction");
    if (std::abs(direction.norm() - 1.0) > 1e-9)
        throw InputError("ray direction must be unit length (|d| = 1 +- 1e-9)");
    return Ray{origin, direction};
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, Vec3* bary)
{
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    auto out = [&](double u, double v, double w) {
        if (bary) *bary = Vec3(u, v, w);
        return Vec3(u * a + v * b + w * c);
    };
    if (d1 <= 0.0 && d2 <= 0.0) return out(1, 0, 0);

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return out(0, 1, 0);

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return out(1 - v, v, 0);
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return out(0, 0, 1);

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return out(1 - w, 0, w);
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return out(0, 1 - w, w);
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return out(1 - v - w, v, w);
}

MeshIndex::MeshIndex(TriMesh mesh) : mesh_(std::move(mesh))
{
    if (mesh_.faces.empty()) throw InputError("cannot index an empty mesh");
    const int nf = static_cast<int>(mesh_.faces.size());
    normals_.resize(nf);
    std::vector<Vec3> centroids(nf);
    for (int f = 0; f < nf; ++f) {
        normals_[f] = face_normal(mesh_, f);
        const Face& t = mesh_.faces[f];
        centroids[f] = (mesh_.vertices[t[0]] + mesh_.vertices[t[1]] + mesh_.vertices[t[2]]) / 3.0;
    }
    order_.resize(nf);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * nf / kLeafSize + 2);
    build(0, nf, centroids);
}

int MeshIndex::build(int first, int count, std::vector<Vec3>& centroids)
{
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Aabb box;
    Aabb cbox;
    for (int i = first; i < first + count; ++i) {
        const Face& t = mesh_.faces[order_[i]];
        for (int k = 0; k < 3; ++k) box.extend(mesh_.vertices[t[k]]);
        cbox.extend(centroids[order_[i]]);
    }
    nodes_[id].box = box;
    if (count <= kLeafSize) {
        nodes_[id].first = first;
        nodes_[id].count = count;
        return id;
    }
    int axis = 0;
    cbox.extent().maxCoeff(&axis);
    const int mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](int a, int b) {
                         if (centroids[a][axis] != centroids[b][axis]) return centroids[a][axis] < centroids[b][axis];
                         return a < b;
                     });
    const int left = build(first, mid - first, centroids);
    const int right = build(mid, first + count - mid, centroids);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

bool MeshIndex::ray_face(const Ray& ray, int face, RayHit& hit) const
{
    const Face& f = mesh_.faces[face];
    const Vec3& v0 = mesh_.vertices[f[0]];
    const Vec3 e1 = mesh_.vertices[f[1]] - v0;
    const Vec3 e2 = mesh_.vertices[f[2]] - v0;
    const Vec3 pvec = ray.direction.cross(e2);
    const double det = e1.dot(pvec);
    const double scale = e1.norm() * e2.norm();
    if (std::abs(det) <= 1e-14 * scale) return false;
    const double inv = 1.0 / det;
    const Vec3 tvec = ray.origin - v0;
    const double u = tvec.dot(pvec) * inv;
    if (u < -1e-12 || u > 1.0 + 1e-12) return false;
    const Vec3 qvec = tvec.cross(e1);
    const double v = ray.direction.dot(qvec) * inv;
    if (v < -1e-12 || u + v > 1.0 + 1e-12) return false;
    const double t = e2.dot(qvec) * inv;
    if (!(t > 1e-12)) return false;
    hit.depth = t;
    hit.face = face;
    hit.barycentric = Vec3(1.0 - u - v, u, v);
    hit.crossing = normals_[face].dot(ray.direction) < 0.0 ? 1 : -1;
    return true;
}

std::vector<RayHit> MeshIndex::intersect_all(const Ray& ray) const
{
    const Vec3 inv_dir = ray.direction.cwiseInverse();
    std::vector<RayHit> hits;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        const Node& node = nodes_[id];
        if (!ray_box(ray, inv_dir, node.box, std::numeric_limits<double>::infinity())) continue;
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                RayHit h;
                if (ray_face(ray, order_[i], h)) hits.push_back(h);
            }
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.face < b.face;
    });
    std::vector<RayHit> merged;
    merged.reserve(hits.size());
    for (const auto& h : hits) {
        bool duplicate = false;
        for (auto it = merged.rbegin(); it != merged.rend() && h.depth - it->depth < kMergeDepth; ++it) {
            if (it->crossing == h.crossing) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) merged.push_back(h);
    }
    return merged;
}

DepthHits MeshIndex::cast_peeled(const Ray& ray, int layers) const
{
    if (layers < 1) throw InputError("depth peeling needs at least one layer");
    DepthHits out;
    for (const auto& h : intersect_all(ray)) {
        if (!out.hits.empty() && h.depth - out.hits.back().depth < kMergeDepth) continue;
        out.hits.push_back(h);
        if (static_cast<int>(out.hits.size()) == layers) break;
    }
    return out;
}

ClosestPoint MeshIndex::closest_point(const Vec3& p) const
{
    ClosestPoint best;
    double best_d2 = std::numeric_limits<double>::infinity();
    // Explicit stack; nearer child visited first.
    std::vector<std::pair<double, int>> stack;
    stack.reserve(64);
    stack.emplace_back(box_distance2(nodes_[0].box, p), 0);
    while (!stack.empty()) {
        const auto [d2box, id] = stack.back();
        stack.pop_back();
        if (d2box >= best_d2) continue;
        const Node& node = nodes_[id];
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const int f = order_[i];
                const Face& t = mesh_.faces[f];
                const Vec3 q = closest_point_on_triangle(p, mesh_.vertices[t[0]], mesh_.vertices[t[1]],
                                                         mesh_.vertices[t[2]]);
                const double d2 = (q - p).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && f < best.face)) {
                    best_d2 = d2;
                    best.point = q;
                    best.face = f;
                }
            }
        } else {
            const double dl = box_distance2(nodes_[node.left].box, p);
            const double dr = box_distance2(nodes_[node.right].box, p);
            if (dl < dr) {
                stack.emplace_back(dr, node.right);
                stack.emplace_back(dl, node.left);
            } else {
                stack.emplace_back(dl, node.left);
                stack.emplace_back(dr, node.right);
            }
        }
    }
    best.distance = std::sqrt(best_d2);
    return best;
}

double MeshIndex::winding_number(const Vec3& p) const
{
    double total = 0.0;
    for (const Face& f : mesh_.faces) {
        const Vec3 a = mesh_.vertices[f[0]] - p;
        const Vec3 b = mesh_.vertices[f[1]] - p;
        const Vec3 c = mesh_.vertices[f[2]] - p;
        const double la = a.norm();
        const double lb = b.norm();
        const double lc = c.norm();
        const double num = a.dot(b.cross(c));
        const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        total += 2.0 * std::atan2(num, den);
    }
    return total / (4.0 * kPi);
}

double MeshIndex::signed_distance(const Vec3& p) const
{
    const double d = closest_point(p).distance;
    return winding_number(p) > 0.5 ? -d : d;
}

std::vector<int> MeshIndex::winding_along_line(const Vec3& origin, const Vec3& axis,
                                               const std::vector<double>& ts) const
{
    const Ray ray{origin, axis};
    const auto hits = intersect_all(ray);
    std::vector<int> out(ts.size(), 0);
    int count = 0;
    std::size_t h = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        while (h < hits.size() && hits[h].depth < ts[i]) count += hits[h++].crossing;
        out[i] = count;
    }
    return out;
}

DepthHits cast_ray_peeled(const TriMesh& mesh, const Ray& ray, int layers)
{
    if (mesh.faces.empty()) throw InputError("cast_ray_peeled: mesh is empty");
    if (std::abs(ray.direction.norm() - 1.0) > 1e-9) throw InputError("cast_ray_peeled: ray direction is not unit length");
    return MeshIndex(mesh).cast_peeled(ray, layers);
}

double signed_distance(const TriMesh& mesh, const Vec3& point)
{
    if (mesh.faces.empty()) throw InputError("signed_distance: mesh has no faces");
    return MeshIndex(mesh).signed_distance(point);
}

}  // namespace hoi::geom
