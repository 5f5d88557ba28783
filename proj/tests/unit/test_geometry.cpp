#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "hoi/geometry/kdtree.hpp"
#include "hoi/geometry/mesh_index.hpp"
#include "hoi/geometry/mesh_io.hpp"
#include "hoi/geometry/primitives.hpp"
#include "hoi/geometry/sampling.hpp"
#include "hoi/geometry/sdf.hpp"
#include "hoi/geometry/topology.hpp"
#include "hoi/geometry/volume.hpp"
#include "../support/random_meshes.hpp"

using namespace hoi;
using namespace hoi::geom;

namespace {

TriMesh unit_cube() { return make_box(Vec3::Zero(), Vec3::Ones()); }

// Brute-force ray/triangle depths (test-side oracle, no acceleration structure).
std::vector<double> brute_depths(const TriMesh& m, const Vec3& o, const Vec3& d)
{
    std::vector<double> out;
    for (const Face& f : m.faces) {
        const Vec3 a = m.vertices[f[0]], b = m.vertices[f[1]], c = m.vertices[f[2]];
        const Vec3 n = (b - a).cross(c - a);
        const double denom = n.dot(d);
        if (std::abs(denom) < 1e-15) continue;
        const double t = n.dot(a - o) / denom;
        if (t <= 0.0) continue;
        const Vec3 p = o + t * d;
        const double s0 = (b - a).cross(p - a).dot(n), s1 = (c - b).cross(p - b).dot(n), s2 = (a - c).cross(p - c).dot(n);
        if (s0 >= 0 && s1 >= 0 && s2 >= 0) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double brute_distance(const TriMesh& m, const Vec3& p)
{
    double best = 1e300;
    for (const Face& f : m.faces)
        best = std::min(best, (p - closest_point_on_triangle(p, m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]])).norm());
    return best;
}

}  // namespace

TEST_CASE("cast_ray_peeled through the unit cube hits entry and exit faces")
{
    const TriMesh cube = unit_cube();
    const DepthHits h = cast_ray_peeled(cube, make_ray({0.5, 0.5, -1}, {0, 0, 1}), 4);
    REQUIRE(h.hits.size() == 2);
    CHECK(h.hits[0].depth == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.hits[1].depth == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(h.hits[0].crossing == 1);
    CHECK(h.hits[1].crossing == -1);
    for (const RayHit& hit : h.hits) {
        const Face& f = cube.faces[hit.face];
        const Vec3 p = hit.barycentric[0] * cube.vertices[f[0]] + hit.barycentric[1] * cube.vertices[f[1]] +
                       hit.barycentric[2] * cube.vertices[f[2]];
        CHECK((p - Vec3(0.5, 0.5, -1 + hit.depth)).norm() < 1e-9);
    }
}

TEST_CASE("cast_ray_peeled misses and respects the layer budget")
{
    const TriMesh cube = unit_cube();
    CHECK(cast_ray_peeled(cube, make_ray({2, 2, -1}, {0, 0, 1})).empty());
    const TriMesh nested = merge({cube, make_box(Vec3::Constant(0.25), Vec3::Constant(0.75))});
    const DepthHits h4 = cast_ray_peeled(nested, make_ray({0.5, 0.5, -1}, {0, 0, 1}), 4);
    REQUIRE(h4.hits.size() == 4);
    const double expect[4] = {1.0, 1.25, 1.75, 2.0};
    for (int k = 0; k < 4; ++k) CHECK(h4.hits[k].depth == doctest::Approx(expect[k]).epsilon(1e-12));
    CHECK(cast_ray_peeled(nested, make_ray({0.5, 0.5, -1}, {0, 0, 1}), 3).hits.size() == 3);
    CHECK_THROWS_AS(cast_ray_peeled(cube, make_ray({0, 0, 0}, {0, 0, 1}), 0), InputError);
}

TEST_CASE("rays must have unit direction")
{
    CHECK_THROWS_AS(make_ray({0, 0, 0}, {0, 0, 2}), InputError);
    CHECK_NOTHROW(make_ray({0, 0, 0}, {0, 0, 1 + 1e-10}));
}

TEST_CASE("signed distance on the unit cube")
{
    const TriMesh cube = unit_cube();
    CHECK(signed_distance(cube, {0.5, 0.5, 0.5}) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(signed_distance(cube, {0.5, 0.5, 2.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(signed_distance(cube, {0.5, 0.3, 1.0})) < 1e-9);
    CHECK(signed_distance(cube, {2, 2, 2}) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(signed_distance(TriMesh{}, {0, 0, 0}), InputError);
}

TEST_CASE("watertightness report")
{
    TriMesh cube = unit_cube();
    CHECK(is_watertight(cube).watertight);
    // Drop both triangles of one square face.
    TriMesh open = cube;
    open.faces.erase(open.faces.begin(), open.faces.begin() + 2);
    const auto rep = is_watertight(open);
    CHECK_FALSE(rep.watertight);
    CHECK(rep.boundary_edges.size() == 4);
    const TriMesh tri = make_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    CHECK(is_watertight(tri).boundary_edges.size() == 3);
    TriMesh flipped = cube;
    std::swap(flipped.faces[0][1], flipped.faces[0][2]);
    CHECK_FALSE(is_watertight(flipped).watertight);
    CHECK_FALSE(is_watertight(flipped).misoriented_edges.empty());
}

TEST_CASE("primitives are closed and outward")
{
    for (const TriMesh& m : {make_icosphere(Vec3::Zero(), 0.1, 2), make_cylinder(Vec3(0, 0, 1), 0.05, 0.2, 24),
                             make_capsule(Vec3(0, 0, 0), Vec3(0.1, 0.02, 0.0), 0.01, 8, 2),
                             make_box(Vec3::Zero(), Vec3(1, 2, 3), Eigen::Vector3i(2, 3, 4))}) {
        CHECK(is_watertight(m).watertight);
        CHECK(signed_volume(m) > 0.0);
    }
    CHECK(signed_volume(make_box(Vec3::Zero(), Vec3(1, 2, 3), 3)) == doctest::Approx(6.0));
    const double r = 0.02, len = 0.1;
    const TriMesh cap = make_capsule(Vec3::Zero(), Vec3(0, 0, len), r, 64, 16);
    CHECK(signed_volume(cap) == doctest::Approx(kPi * r * r * len + 4.0 / 3.0 * kPi * r * r * r).epsilon(0.01));
}

TEST_CASE("mesh validation names the offending element")
{
    CHECK_THROWS_WITH_AS(make_mesh({{0, 0, 0}, {1, 0, 0}}, {{0, 1, 2}}), doctest::Contains("face 0"), InputError);
    CHECK_THROWS_AS(make_mesh({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}}), InputError);
    CHECK_THROWS_AS(make_mesh({{0, 0, NAN}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}), InputError);
}

TEST_CASE("voxel remesh of a closed cube")
{
    const TriMesh out = voxel_remesh(unit_cube(), 0.02);
    CHECK(is_watertight(out).watertight);
    CHECK(signed_volume(out) == doctest::Approx(1.0).epsilon(0.05));
    const Aabb b = bounding_box(out);
    CHECK((b.min - Vec3::Zero()).cwiseAbs().maxCoeff() <= 0.04);
    CHECK((b.max - Vec3::Ones()).cwiseAbs().maxCoeff() <= 0.04);
}

TEST_CASE("voxel remesh closes a hole and rejects bad input")
{
    TriMesh open = unit_cube();
    open.faces.erase(open.faces.begin(), open.faces.begin() + 2);
    const TriMesh out = voxel_remesh(open, 0.02);
    CHECK(is_watertight(out).watertight);
    CHECK(signed_volume(out) > 0.5);
    const TriMesh plane = make_mesh({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
    CHECK_THROWS_AS(voxel_remesh(plane, 0.05), InputError);
    CHECK_THROWS_AS(voxel_remesh(unit_cube(), 5.0), InputError);
    CHECK_THROWS_AS(voxel_remesh(unit_cube(), 0.0), InputError);
}

TEST_CASE("intersection volume of cubes")
{
    const TriMesh a = unit_cube();
    CHECK(intersection_volume(a, translated(a, {2, 0, 0}), 0.01) == 0.0);
    // Half overlap: 0.5 m^3 = 5e5 cm^3.
    CHECK(intersection_volume(a, translated(a, {0.5, 0, 0}), 0.01) == doctest::Approx(5e5).epsilon(0.02));
    CHECK(intersection_volume(a, a, 0.01) == doctest::Approx(1e6).epsilon(0.02));
    TriMesh open = a;
    open.faces.pop_back();
    CHECK_THROWS_AS(intersection_volume(open, a, 0.01), ContractError);
}

TEST_CASE("intersection volume is symmetric")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const TriMesh a = testing::random_closed_mesh(rng, trial);
        const TriMesh b = testing::random_closed_mesh(rng, trial + 1);
        CHECK(intersection_volume(a, b, 0.004) == intersection_volume(b, a, 0.004));
    }
}

TEST_CASE("self-overlap of a convex body shrinks as the copy separates")
{
    // For convex K, vol(K and K + s u) is non-increasing in s >= 0 along any axis u.
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        TriMesh a = testing::random_box(rng);
        if (trial % 2) {
            a = make_icosphere(Vec3::Zero(), 1.0, 2);
            const Vec3 axes(0.03 + 0.03 * std::abs(u(rng)), 0.03 + 0.03 * std::abs(u(rng)), 0.03 + 0.03 * std::abs(u(rng)));
            for (Vec3& v : a.vertices) v = v.cwiseProduct(axes);
        }
        const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
        double prev = 1e300;
        for (int s = 0; s < 8; ++s) {
            const double v = intersection_volume(a, translated(a, axis * (0.008 * s)), 0.002);
            // Allow one layer of lattice quantization.
            CHECK(v <= prev + 0.02 * prev + 1e-9);
            prev = v;
        }
        CHECK(prev < intersection_volume(a, a, 0.002));
    }
}

TEST_CASE("depth-hit parity agrees with the winding number on random closed meshes")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const TriMesh m = testing::random_closed_mesh(rng, i);
        const MeshIndex index(m);
        for (int s = 0; s < 40; ++s) {
            const Vec3 p = index.bounds().center() + 0.6 * index.bounds().extent().cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
            const Vec3 d = Vec3(u(rng), u(rng), u(rng)).normalized();
            const DepthHits h = cast_ray_peeled(m, make_ray(p, d), 64);
            const auto oracle = brute_depths(m, p, d);
            for (std::size_t k = 1; k < h.hits.size(); ++k) CHECK(h.hits[k].depth > h.hits[k - 1].depth);
            // Grazing rays through shared edges are skipped: the brute oracle double counts them.
            if (oracle.size() != h.hits.size()) continue;
            const bool odd = h.hits.size() % 2 == 1;
            CHECK(odd == (index.winding_number(p) > 0.5));
        }
    }
}

TEST_CASE("sdf sign agrees with ray parity at 1000 random points")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 10; ++i) {
        const TriMesh m = testing::random_closed_mesh(rng, i);
        const Aabb b = bounding_box(m);
        for (int s = 0; s < 100; ++s) {
            const Vec3 p = b.center() + 0.6 * b.extent().cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
            const Vec3 d = Vec3(u(rng), u(rng), u(rng)).normalized();
            const auto hits = brute_depths(m, p, d);
            const double sd = signed_distance(m, p);
            if (std::abs(sd) < 1e-9) continue;
            CHECK((sd < 0.0) == (hits.size() % 2 == 1));
            CHECK(std::abs(sd) == doctest::Approx(brute_distance(m, p)).epsilon(1e-9));
            ++checked;
        }
    }
    CHECK(checked >= 990);
}

TEST_CASE("voxel remesh output is watertight on random meshes")
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 10; ++i) {
        const TriMesh m = testing::random_closed_mesh(rng, i);
        const double pitch = bounding_box(m).diagonal() / 24.0;
        const TriMesh out = voxel_remesh(m, pitch);
        const auto rep = is_watertight(out);
        CHECK(rep.watertight);
        CHECK_NOTHROW(validate_mesh(out));
        CHECK(signed_volume(out) == doctest::Approx(signed_volume(m)).epsilon(0.1));
        // Remesh vertices stay within 2 pitches of the input surface.
        double worst = 0.0;
        for (std::size_t v = 0; v < out.vertices.size(); v += 7) worst = std::max(worst, brute_distance(m, out.vertices[v]));
        CHECK(worst <= 2.0 * pitch);
    }
}

TEST_CASE("exact and grid SDF fields")
{
    const TriMesh sphere = make_icosphere(Vec3::Zero(), 0.05, 3);
    const ExactSdf exact(sphere);
    const GridSdf grid(sphere, 64, 0.02);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.06, 0.06);
    for (int s = 0; s < 200; ++s) {
        const Vec3 p(u(rng), u(rng), u(rng));
        const SdfSample e = exact.sample(p);
        const SdfSample g = grid.sample(p);
        CHECK(e.d == doctest::Approx(brute_distance(sphere, p) * (e.d < 0 ? -1 : 1)).epsilon(1e-9));
        CHECK(std::abs(g.d - e.d) < 2e-3);
        // Finite-difference gradient of the exact field away from the medial point.
        if (p.norm() > 0.01) {
            Vec3 fd;
            for (int a = 0; a < 3; ++a) {
                Vec3 dp = Vec3::Zero();
                dp[a] = 1e-6;
                fd[a] = (exact.distance(p + dp) - exact.distance(p - dp)) / 2e-6;
            }
            CHECK((fd - e.grad).norm() < 1e-3);
        }
    }
    // Far outside the grid the exact field is used.
    CHECK(grid.distance(Vec3(1, 0, 0)) == doctest::Approx(exact.distance(Vec3(1, 0, 0))));
}

TEST_CASE("grid SDF gradient is the derivative of its interpolant")
{
    const GridSdf grid(make_box(Vec3::Constant(-0.03), Vec3::Constant(0.03), 2), 32, 0.01);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.035, 0.035);
    for (int s = 0; s < 100; ++s) {
        const Vec3 p(u(rng), u(rng), u(rng));
        const SdfSample g = grid.sample(p);
        for (int a = 0; a < 3; ++a) {
            Vec3 dp = Vec3::Zero();
            dp[a] = 1e-9;
            const double fd = (grid.distance(p + dp) - grid.distance(p - dp)) / 2e-9;
            CHECK(fd == doctest::Approx(g.grad[a]).epsilon(1e-4).scale(1.0));
        }
    }
}

TEST_CASE("kd-tree nearest neighbour matches brute force")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts(500);
    for (Vec3& p : pts) p = Vec3(u(rng), u(rng), u(rng));
    const KdTree tree(pts);
    for (int s = 0; s < 200; ++s) {
        const Vec3 q(u(rng), u(rng), u(rng));
        int best = 0;
        for (int i = 1; i < 500; ++i)
            if ((pts[i] - q).squaredNorm() < (pts[best] - q).squaredNorm()) best = i;
        const auto hit = tree.nearest(q);
        CHECK(hit.index == best);
        CHECK(hit.distance == doctest::Approx((pts[best] - q).norm()));
    }
}

TEST_CASE("surface sampling is on-surface, area-weighted and seeded")
{
    // Box 1 x 1 x 3: the four long sides hold 12/14 of the area.
    const TriMesh box = make_box(Vec3::Zero(), Vec3(1, 1, 3));
    const auto a = sample_surface(box, 20000, 42);
    const auto b = sample_surface(box, 20000, 42);
    CHECK(a.points == b.points);
    int side = 0;
    for (const Vec3& p : a.points) {
        CHECK(brute_distance(box, p) < 1e-12);
        if (p.z() > 1e-9 && p.z() < 3 - 1e-9) ++side;
    }
    CHECK(side / 20000.0 == doctest::Approx(12.0 / 14.0).epsilon(0.02));
}

TEST_CASE("mesh file round trips and errors")
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hoi_geometry_io";
    fs::create_directories(dir);
    const TriMesh m = make_icosphere(Vec3(0.1, 0.2, 0.3), 0.05, 1);
    write_obj((dir / "a.obj").string(), m);
    write_ply((dir / "a.ply").string(), m);
    for (const char* name : {"a.obj", "a.ply"}) {
        const TriMesh r = read_mesh((dir / name).string());
        REQUIRE(r.vertices.size() == m.vertices.size());
        CHECK(r.faces == m.faces);
        for (std::size_t i = 0; i < m.vertices.size(); ++i) CHECK((r.vertices[i] - m.vertices[i]).norm() == 0.0);
    }
    const TriMesh scaled = read_obj((dir / "a.obj").string(), 0.01);
    CHECK((scaled.vertices[3] - 0.01 * m.vertices[3]).norm() < 1e-15);
    CHECK(scaled.units_scale == 0.01);
    CHECK_THROWS_WITH_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n", "bad.obj"), doctest::Contains("bad.obj:4"),
                         InputError);
    CHECK_THROWS_WITH_AS(parse_obj("v 0 0\n", "bad.obj"), doctest::Contains("bad.obj:1"), InputError);
    const TriMesh quad = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 -1\n", "q.obj");
    CHECK(quad.faces.size() == 2);
    CHECK_THROWS_AS(read_mesh((dir / "missing.obj").string()), InputError);
    fs::remove_all(dir);
}
