#include <cmath>

#include "doctest.h"
#include "hoi/eval/metrics.hpp"
#include "hoi/geometry/primitives.hpp"

using namespace hoi;
using namespace hoi::eval;

namespace {

geom::TriMesh flipped(geom::TriMesh m)
{
    for (Face& f : m.faces) std::swap(f[1], f[2]);
    return m;
}

// Closed box shell with a cavity [inner_min, inner_max] and an optional open top.
geom::TriMesh cup(double inner_half, double wall, double floor_z, double height)
{
    const geom::TriMesh outer = geom::make_box(Vec3(-inner_half - wall, -inner_half - wall, floor_z - wall),
                                               Vec3(inner_half + wall, inner_half + wall, floor_z + height));
    const geom::TriMesh inner = flipped(geom::make_box(Vec3(-inner_half, -inner_half, floor_z),
                                                       Vec3(inner_half, inner_half, floor_z + height - wall)));
    return geom::merge({outer, inner});
}

}  // namespace

TEST_CASE("chamfer and F-score on identical and offset meshes")
{
    const geom::TriMesh gt = geom::make_icosphere(Vec3::Zero(), 0.05, 3);
    const MeshMetrics same = chamfer_fscore(gt, gt, 2000, 4);
    CHECK(same.chamfer == 0.0);
    CHECK(same.f5 == 1.0);
    CHECK(same.f10 == 1.0);

    // Radial 7 mm offset clone.
    geom::TriMesh clone = gt;
    for (Vec3& v : clone.vertices) v *= 0.057 / 0.05;
    const MeshMetrics off = chamfer_fscore(clone, gt, 10000, 4);
    CHECK(off.f5 == 0.0);
    CHECK(off.f10 == 1.0);
    CHECK(off.chamfer == doctest::Approx(0.007).epsilon(0.03));

    const geom::TriMesh cube = geom::make_box(Vec3::Zero(), Vec3::Ones(), 4);
    geom::TriMesh big = cube;
    for (Vec3& v : big.vertices) v = Vec3::Constant(0.5) + 2.0 * (v - Vec3::Constant(0.5));
    CHECK(chamfer_fscore(big, cube, 5000, 1).f5 < 0.05);

    CHECK_THROWS_AS(chamfer_fscore(geom::TriMesh{}, gt), InputError);
}

TEST_CASE("chamfer is symmetric and F-score decreases with offset")
{
    const geom::TriMesh a = geom::make_icosphere(Vec3::Zero(), 0.05, 3);
    const geom::TriMesh b = geom::make_box(Vec3(-0.04, -0.04, -0.04), Vec3(0.05, 0.04, 0.04), 3);
    const MeshMetrics ab = chamfer_fscore(a, b, 3000, 9), ba = chamfer_fscore(b, a, 3000, 9);
    CHECK(ab.chamfer == doctest::Approx(ba.chamfer).epsilon(1e-12));
    CHECK(ab.precision5 == ba.recall5);
    CHECK(ab.recall10 == ba.precision10);
    CHECK(ab.f5 == doctest::Approx(ba.f5).epsilon(1e-12));

    double prev5 = 2.0, prev10 = 2.0;
    for (int k = 0; k <= 10; ++k) {
        const MeshMetrics m = chamfer_fscore(geom::translated(a, Vec3(0.002 * k, 0, 0)), a, 3000, 2);
        CHECK(m.f5 <= prev5);
        CHECK(m.f10 <= prev10);
        CHECK(m.f5 <= m.f10);
        prev5 = m.f5;
        prev10 = m.f10;
    }
}

TEST_CASE("drop test: cage holds, free fall escapes")
{
    const geom::TriMesh object = geom::make_box(Vec3(-0.02, -0.02, 0.001), Vec3(0.02, 0.02, 0.041), 2);
    const geom::TriMesh cage = cup(0.025, 0.01, 0.0, 0.07);
    const SimResult held = simulation_displacement(cage, object);
    CHECK(held.displacement_cm < 0.5);
    CHECK_FALSE(held.escaped);

    const geom::TriMesh far = geom::make_box(Vec3(1, 1, 1), Vec3(1.1, 1.1, 1.1));
    const SimResult fall = simulation_displacement(far, object);
    CHECK(fall.escaped);
    CHECK(fall.displacement_cm == doctest::Approx(50.0));

    // A wall touching one side does not support the object.
    const geom::TriMesh wall = geom::make_box(Vec3(0.02, -0.05, -0.05), Vec3(0.03, 0.05, 0.08));
    const SimResult tangent = simulation_displacement(wall, object);
    CHECK(held.displacement_cm < tangent.displacement_cm);

    // Orders agree across seeds and values move by less than 5%.
    SimConfig other;
    other.seed = 99;
    const double h2 = simulation_displacement(cage, object, other).displacement_cm;
    const double t2 = simulation_displacement(wall, object, other).displacement_cm;
    CHECK(h2 < t2);
    CHECK(std::abs(t2 - tangent.displacement_cm) <= 0.05 * tangent.displacement_cm);
    CHECK(std::abs(h2 - held.displacement_cm) <= std::max(0.05 * held.displacement_cm, 0.01));

    CHECK(simulation_displacement(cage, object).displacement_cm == held.displacement_cm);
    geom::TriMesh open = object;
    open.faces.pop_back();
    CHECK_THROWS_AS(simulation_displacement(cage, open), ContractError);
}

TEST_CASE("grasp metrics bundle volume and displacement")
{
    const geom::TriMesh object = geom::make_box(Vec3(-0.02, -0.02, 0.001), Vec3(0.02, 0.02, 0.041), 2);
    const geom::TriMesh far = geom::make_box(Vec3(1, 1, 1), Vec3(1.1, 1.1, 1.1));
    const GraspMetrics g = grasp_metrics(far, object);
    CHECK(g.int_vol == 0.0);
    CHECK(g.sim_disp == doctest::Approx(50.0));
    const GraspMetrics overlap = grasp_metrics(geom::make_box(Vec3(0.0, -0.02, 0.001), Vec3(0.04, 0.02, 0.041)), object);
    CHECK(overlap.int_vol == doctest::Approx(32.0).epsilon(0.02));
}
