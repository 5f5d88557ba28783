#include "hoi/eval/metrics.hpp"

#include <algorithm>
#include <vector>

#include "hoi/geometry/kdtree.hpp"
#include "hoi/geometry/sampling.hpp"
#include "hoi/geometry/sdf.hpp"
#include "hoi/geometry/topology.hpp"
#include "hoi/geometry/volume.hpp"

namespace hoi::eval {

namespace {

std::vector<double> nearest_distances(const std::vector<Vec3>& from, const geom::KdTree& to)
{
    std::vector<double> d(from.size());
    parallel_for(from.size(), [&](std::size_t i) { d[i] = to.nearest(from[i]).distance; });
    return d;
}

double fraction_within(const std::vector<double>& d, double tau)
{
    std::size_t n = 0;
    for (double v : d) n += v < tau ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(d.size());
}

double harmonic(double p, double r)
{
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

MeshMetrics chamfer_fscore(const geom::TriMesh& pred, const geom::TriMesh& gt, int samples, std::uint64_t seed)
{
    if (pred.empty()) throw InputError("chamfer_fscore: predicted mesh is empty");
    if (gt.empty()) throw InputError("chamfer_fscore: ground-truth mesh is empty");
    if (samples < 1) throw InputError("chamfer_fscore: samples must be >= 1");
    const auto ps = geom::sample_surface(pred, samples, seed).points;
    const auto gs = geom::sample_surface(gt, samples, seed).points;
    const auto d_pg = nearest_distances(ps, geom::KdTree(gs));
    const auto d_gp = nearest_distances(gs, geom::KdTree(ps));

    MeshMetrics m;
    m.samples = samples;
    m.seed = seed;
    m.chamfer = 0.5 * (mean(d_pg) + mean(d_gp));
    m.precision5 = fraction_within(d_pg, 0.005);
    m.recall5 = fraction_within(d_gp, 0.005);
    m.precision10 = fraction_within(d_pg, 0.010);
    m.recall10 = fraction_within(d_gp, 0.010);
    m.f5 = harmonic(m.precision5, m.recall5);
    m.f10 = harmonic(m.precision10, m.recall10);
    return m;
}

SimResult simulation_displacement(const geom::TriMesh& hand, const geom::TriMesh& object, const SimConfig& cfg)
{
    if (!geom::is_watertight(hand).watertight)
        throw ContractError("simulation_displacement: hand mesh must be watertight");
    if (!geom::is_watertight(object).watertight)
        throw ContractError("simulation_displacement: object mesh must be watertight");
    if (cfg.steps < 0 || !(cfg.dt > 0.0) || cfg.samples < 1 || !(cfg.cap > 0.0))
        throw InputError("simulation_displacement: invalid configuration");

    const geom::GridSdf hand_sdf(hand, cfg.sdf_resolution, 0.02);
    const geom::Aabb hand_box = geom::bounding_box(hand);
    const auto pts = geom::sample_surface(object, cfg.samples, cfg.seed).points;
    const Vec3 g(0.0, 0.0, -cfg.gravity);
    Vec3 x = Vec3::Zero(), v = Vec3::Zero();
    std::vector<geom::SdfSample> s(pts.size());

    SimResult res;
    for (int step = 0; step < cfg.steps; ++step) {
        v += cfg.dt * g;
        x += cfg.dt * v;
        for (int pass = 0; pass < cfg.projection_passes; ++pass) {
            parallel_for(pts.size(), [&](std::size_t i) {
                const Vec3 q = pts[i] + x;
                // Points outside the hand's box cannot be inside the hand.
                if (!hand_box.contains(q)) {
                    s[i] = {1.0, Vec3::UnitZ()};
                    return;
                }
                s[i] = hand_sdf.sample(q);
            });
            std::size_t deepest = 0;
            for (std::size_t i = 1; i < s.size(); ++i)
                if (s[i].d < s[deepest].d) deepest = i;
            if (s[deepest].d >= 0.0) break;
            const Vec3 n = s[deepest].grad.normalized();
            x -= s[deepest].d * n;
            const double vn = v.dot(n);
            if (vn < 0.0) v -= vn * n;
        }
        res.steps = step + 1;
        if (x.norm() >= cfg.cap) {
            res.escaped = true;
            break;
        }
    }
    res.displacement_cm = 100.0 * std::min(x.norm(), cfg.cap);
    return res;
}

GraspMetrics grasp_metrics(const geom::TriMesh& hand, const geom::TriMesh& object, double pitch,
                           const SimConfig& sim)
{
    GraspMetrics m;
    m.int_vol = geom::intersection_volume(hand, object, pitch);
    m.sim_disp = simulation_displacement(hand, object, sim).displacement_cm;
    return m;
}

}  // namespace hoi::eval
