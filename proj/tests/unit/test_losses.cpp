#include <cmath>
#include <random>

#include "doctest.h"
#include "hoi/geometry/primitives.hpp"
#include "hoi/losses/hand_losses.hpp"
#include "hoi/losses/mask_losses.hpp"
#include "hoi/rotation.hpp"
#include "../support/transport_oracle.hpp"

using namespace hoi;
using namespace hoi::losses;
using render::Mask;

namespace {

Mask points_mask(int w, int h, const std::vector<std::pair<int, int>>& px, double v = 1.0)
{
    Mask m(w, h);
    for (auto [x, y] : px) m.at(x, y) = v;
    return m;
}

Mask disk(int w, int h, double cx, double cy, double r)
{
    Mask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            m.at(x, y) = std::clamp(r - std::sqrt(dx * dx + dy * dy) + 0.5, 0.0, 1.0);
        }
    return m;
}

std::vector<testing::WeightedPoint> weighted_points(const Mask& m, int denom)
{
    std::vector<testing::WeightedPoint> out;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y) > 0.0)
                out.push_back({x + 0.5, y + 0.5, static_cast<std::int64_t>(std::lround(m.at(x, y) * denom))});
    return out;
}

// Mask with `count` distinct pixels of value k/5, k in 1..5.
Mask random_sparse(std::mt19937_64& rng, int w, int h, int count)
{
    Mask m(w, h);
    std::uniform_int_distribution<int> px(0, w * h - 1), level(1, 5);
    int placed = 0;
    while (placed < count) {
        const int i = px(rng);
        if (m.values[i] > 0.0) continue;
        m.values[i] = level(rng) / 5.0;
        ++placed;
    }
    return m;
}

// d = distance to the nearest of a point set (never negative).
class PointSetSdf final : public geom::SdfQuery {
public:
    explicit PointSetSdf(std::vector<Vec3> pts) : pts_(std::move(pts)) {}
    geom::SdfSample sample(const Vec3& p) const override
    {
        geom::SdfSample s{std::numeric_limits<double>::infinity(), Vec3::Zero()};
        for (const Vec3& q : pts_) {
            const double d = (p - q).norm();
            if (d < s.d) {
                s.d = d;
                s.grad = d > 0.0 ? Vec3((p - q) / d) : Vec3::UnitX();
            }
        }
        return s;
    }

private:
    std::vector<Vec3> pts_;
};

class SphereSdf final : public geom::SdfQuery {
public:
    SphereSdf(Vec3 c, double r) : c_(std::move(c)), r_(r) {}
    geom::SdfSample sample(const Vec3& p) const override
    {
        const Vec3 d = p - c_;
        return {d.norm() - r_, d.normalized()};
    }

private:
    Vec3 c_;
    double r_;
};

render::Camera view_camera(int size)
{
    return render::look_at(Vec3(0.0, -0.05, 0.45), Vec3(0.0, 0.06, 0.0), Vec3(0, 1, 0), 1.6 * size, size, size);
}

}  // namespace

TEST_CASE("soft IoU loss values")
{
    const Mask a = points_mask(4, 4, {{0, 0}, {1, 0}});
    const Mask b = points_mask(4, 4, {{1, 0}, {2, 0}});
    CHECK(soft_iou_loss(a, a).value == 0.0);
    CHECK(soft_iou_loss(a, points_mask(4, 4, {{3, 3}})).value == 1.0);
    CHECK(soft_iou_loss(a, b).value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(soft_iou_loss(a, Mask(4, 4)), InputError);
    CHECK_THROWS_AS(soft_iou_loss(a, Mask(5, 4, 1.0)), InputError);
}

TEST_CASE("soft IoU is bounded, symmetric and has the right gradient")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Mask r(9, 7), t(9, 7);
        for (auto& v : r.values) v = u(rng) < 0.4 ? 0.0 : u(rng);
        for (auto& v : t.values) v = u(rng) < 0.4 ? 0.0 : u(rng);
        t.values[0] = 0.5;
        r.values[1] = 0.5;
        const MaskLoss l = soft_iou_loss(r, t);
        CHECK(l.value >= 0.0);
        CHECK(l.value <= 1.0);
        CHECK(soft_iou_loss(t, r).value == doctest::Approx(l.value).epsilon(1e-14));
        for (int k = 0; k < 5; ++k) {
            const std::size_t i = rng() % r.size();
            Mask rp = r, rm = r;
            rp.values[i] += 1e-6;
            rm.values[i] -= 1e-6;
            const double fd = (soft_iou_loss(rp, t).value - soft_iou_loss(rm, t).value) / 2e-6;
            CHECK(l.grad.values[i] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("soft IoU ignores invalid pixels")
{
    const Mask r = points_mask(4, 1, {{0, 0}, {1, 0}, {3, 0}});
    const Mask t = points_mask(4, 1, {{0, 0}, {1, 0}});
    const Mask valid = points_mask(4, 1, {{0, 0}, {1, 0}, {2, 0}});
    const MaskLoss l = soft_iou_loss(r, t, &valid);
    CHECK(l.value == 0.0);
    CHECK(l.grad.values[3] == 0.0);
}

TEST_CASE("IoU gradient vanishes at alignment")
{
    const geom::TriMesh ball = geom::make_icosphere(Vec3::Zero(), 0.1, 3);
    render::Camera cam;
    cam.width = cam.height = 96;
    cam.fx = cam.fy = 200;
    cam.cx = cam.cy = 48;
    cam.translation = Vec3(0, 0, 1);
    const render::SoftRenderConfig cfg;
    const Mask target = render::binarized(render::render_silhouette(ball, cam, cfg).mask);
    auto grad_norm = [&](const render::Camera& c) {
        const render::SoftRasterizer r(ball, c, cfg);
        const MaskLoss l = soft_iou_loss(r.mask(), target);
        const render::RenderGradients g = r.backward(l.grad);
        return std::hypot(g.camera.translation.x(), g.camera.translation.y());
    };
    render::Camera off = cam;
    off.translation.x() += 10.0 / cam.fx;
    const double at_truth = grad_norm(cam), misaligned = grad_norm(off);
    CHECK(misaligned > 0.0);
    CHECK(at_truth < 1e-3 * misaligned);
}

TEST_CASE("sinkhorn closed-form cases")
{
    SinkhornConfig cfg;
    cfg.epsilon = 0.01;
    cfg.max_iters = 5000;
    cfg.tol = 1e-9;
    const SinkhornResult two = sinkhorn_loss(points_mask(8, 8, {{2, 1}}), points_mask(8, 8, {{2, 4}}), cfg);
    CHECK(two.converged);
    CHECK(two.value == doctest::Approx(3.0).epsilon(0.05 / 3.0));

    const Mask block = points_mask(8, 8, {{3, 3}, {4, 3}, {3, 4}, {4, 4}});
    const Mask shifted = points_mask(8, 8, {{3, 4}, {4, 4}, {3, 5}, {4, 5}});
    const SinkhornResult sh = sinkhorn_loss(block, shifted, cfg);
    CHECK(sh.converged);
    CHECK(std::abs(sh.value - 1.0) < 0.05);

    // Identity: the entropic cost is bounded by eps * log(support size).
    const SinkhornResult same = sinkhorn_loss(block, block, cfg);
    CHECK(same.value <= std::sqrt(cfg.epsilon * std::log(4.0)) + 1e-9);
}

TEST_CASE("sinkhorn matches an exact transport oracle")
{
    std::mt19937_64 rng(2024);
    int failures = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> count(1, 16);
        const Mask a = random_sparse(rng, 12, 12, count(rng));
        const Mask b = random_sparse(rng, 12, 12, count(rng));
        const auto pa = weighted_points(a, 5), pb = weighted_points(b, 5);
        double mean_cost = 0.0;
        for (const auto& p : pa)
            for (const auto& q : pb) mean_cost += (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
        mean_cost /= static_cast<double>(pa.size() * pb.size());
        SinkhornConfig cfg;
        cfg.epsilon = std::max(1e-6, 0.01 * mean_cost);
        cfg.max_iters = 20000;
        cfg.tol = 1e-9;
        const SinkhornResult s = sinkhorn_loss(a, b, cfg);
        const double exact = std::sqrt(testing::exact_transport_cost(pa, pb));
        const double bias = std::sqrt(exact * exact + cfg.epsilon * std::log(static_cast<double>(
                                                                         std::min(pa.size(), pb.size())))) -
                            exact;
        const double tol = std::max(0.05 * exact, bias) + 1e-9;
        if (!(std::abs(s.value - exact) <= tol)) {
            ++failures;
            MESSAGE("trial " << trial << ": sinkhorn " << s.value << " exact " << exact << " tol " << tol);
        }
    }
    CHECK(failures == 0);
}

TEST_CASE("sinkhorn is invariant to joint translation")
{
    const Mask a = disk(40, 40, 12, 14, 4), b = disk(40, 40, 20, 18, 5);
    const Mask a2 = disk(40, 40, 19, 23, 4), b2 = disk(40, 40, 27, 27, 5);
    const SinkhornResult s1 = sinkhorn_loss(a, b), s2 = sinkhorn_loss(a2, b2);
    CHECK(std::abs(s1.value - s2.value) < 1e-6);
}

TEST_CASE("sinkhorn gradient and coarsening")
{
    const Mask a = disk(32, 32, 10, 12, 4), b = disk(32, 32, 21, 18, 5);
    SinkhornConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_iters = 5000;
    const SinkhornResult s = sinkhorn_loss(a, b, cfg);
    CHECK(s.converged);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k) {
        std::size_t i;
        do i = rng() % a.size();
        while (a.values[i] <= 0.0 || a.values[i] >= 1.0);
        Mask ap = a, am = a;
        ap.values[i] += 1e-4;
        am.values[i] -= 1e-4;
        const double fd = (sinkhorn_loss(ap, b, cfg).value - sinkhorn_loss(am, b, cfg).value) / 2e-4;
        CHECK(s.grad.values[i] == doctest::Approx(fd).epsilon(1e-3));
    }
    // Moving mass along the negative gradient lowers the distance.
    Mask stepped = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        stepped.values[i] = std::clamp(a.values[i] - 20.0 * s.grad.values[i], 0.0, 1.0);
    CHECK(sinkhorn_loss(stepped, b, cfg).value < s.value);

    // 128x128 masks are transported on a 64x64 grid; a pure shift keeps its length.
    const Mask big_a = disk(128, 128, 40, 50, 12), big_b = disk(128, 128, 70, 90, 12);
    const SinkhornResult big = sinkhorn_loss(big_a, big_b);
    CHECK(big.grid_factor == 2);
    CHECK(big.value == doctest::Approx(50.0).epsilon(0.02));
}

TEST_CASE("sinkhorn input errors")
{
    CHECK_THROWS_AS(sinkhorn_loss(Mask(4, 4), points_mask(4, 4, {{1, 1}})), InputError);
    CHECK_THROWS_AS(sinkhorn_loss(points_mask(4, 4, {{1, 1}}), points_mask(5, 4, {{1, 1}})), InputError);
    SinkhornConfig bad;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(validate(bad), InputError);
    SinkhornConfig few;
    few.max_iters = 1;
    few.epsilon = 1e-3;
    few.tol = 1e-15;
    const SinkhornResult r = sinkhorn_loss(disk(16, 16, 5, 5, 3), disk(16, 16, 10, 9, 3), few);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
    CHECK(std::isfinite(r.value));
}

TEST_CASE("penetration loss")
{
    const geom::ExactSdf cube(geom::make_box(Vec3::Zero(), Vec3::Ones()));
    const geom::TriMesh tet = geom::make_mesh({{0.5, 0.5, 0.99}, {0.5, 0.5, 1.5}, {0.6, 0.5, 1.5}, {0.5, 0.6, 1.5}},
                                              {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}});
    const VertexLoss l = penetration_loss(tet, cube);
    CHECK(l.value == doctest::Approx(0.0025).epsilon(1e-9));
    CHECK((l.grad[0] - Vec3(0, 0, -0.25)).norm() < 1e-12);
    CHECK(l.grad[1].norm() == 0.0);
    CHECK(penetration_loss(geom::translated(tet, Vec3(0, 0, 1)), cube).value == 0.0);

    // Retreating from a convex object never increases the loss.
    const hand::HandModel model = hand::generate_desk_hand();
    const SphereSdf ball(Vec3(0.0, 0.05, -0.04), 0.045);
    double prev = std::numeric_limits<double>::infinity();
    for (int step = 0; step <= 20; ++step) {
        const geom::TriMesh h = geom::translated(hand::template_mesh(model), Vec3(0, 0, 0.004 * step));
        const double v = penetration_loss(h, ball).value;
        CHECK(v >= 0.0);
        CHECK(v <= prev);
        prev = v;
    }
    CHECK(prev == 0.0);
}

TEST_CASE("contact loss")
{
    const geom::ExactSdf cube(geom::make_box(Vec3::Zero(), Vec3::Ones()));
    const geom::TriMesh pts = geom::make_mesh({{0.5, 0.5, 1.0}, {0.2, 0.5, 1.005}, {0.5, 0.2, 1.0}, {0.5, 0.5, 0.5}},
                                              {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}});
    CHECK(contact_loss(pts, {0, 2}, cube).value < 1e-6);
    const VertexLoss l = contact_loss(pts, {0, 1, 2}, cube);
    CHECK(l.value == doctest::Approx(0.005).epsilon(1e-9));
    CHECK((l.grad[1] - Vec3::UnitZ()).norm() < 1e-9);
    CHECK(contact_loss(pts, {3}, cube).value == 0.0);
    CHECK_THROWS_AS(contact_loss(pts, {}, cube), InputError);
    CHECK_THROWS_AS(contact_loss(pts, {7}, cube), InputError);

    // A hand hovering above the object pays contact but no penetration.
    const hand::HandModel model = hand::generate_desk_hand();
    const SphereSdf ball(Vec3(0.0, 0.05, -0.08), 0.045);
    const geom::TriMesh h = hand::template_mesh(model);
    CHECK(penetration_loss(h, ball).value == 0.0);
    CHECK(contact_loss(h, model.contact_zone_vertices, ball).value > 0.0);
}

TEST_CASE("regularization loss and weights")
{
    Vec45 t0 = Vec45::Random();
    CHECK(regularization_loss(t0, t0).value == 0.0);
    CHECK(regularization_loss(t0, t0).grad.isZero());
    Vec45 one = t0;
    one[7] += 0.1;
    CHECK(regularization_loss(one, t0).value == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(regularization_loss(one, t0).grad[7] == 1.0);
    const Vec45 all = t0 + Vec45::Constant(0.01);
    CHECK(regularization_loss(all, t0).value == doctest::Approx(0.45).epsilon(1e-12));
    CHECK_THROWS_AS(regularization_loss(Eigen::VectorXd::Zero(44), t0), InputError);

    const LossWeights w = parse_weights("5,10,5,0.1");
    CHECK(w.lambda2 == 10.0);
    CHECK(w.lambda4 == 0.1);
    CHECK_THROWS_AS(parse_weights("1,2,3"), InputError);
    CHECK_THROWS_AS(parse_weights("1,2,x,4"), InputError);
    CHECK_THROWS_AS(parse_weights("1,-2,3,4"), InputError);
}

TEST_CASE("total refinement loss vanishes at a perfect configuration")
{
    const hand::HandModel model = hand::generate_desk_hand();
    hand::HandPose pose;
    const geom::TriMesh h = hand::pose_mesh(model, pose);
    std::vector<Vec3> zone;
    for (int v : model.contact_zone_vertices) zone.push_back(h.vertices[v]);
    const PointSetSdf sdf(zone);
    RefinementProblem p;
    p.model = &model;
    p.object_sdf = &sdf;
    p.camera = view_camera(64);
    p.render.sigma = 1e-4;
    p.hand_target = render::binarized(render::render_silhouette(h, p.camera, p.render).mask);
    p.theta0 = pose.theta;
    const RefinementEval e = total_refinement_loss(p, pose, LossWeights{});
    CHECK(e.terms.total < 1e-9);
    CHECK(e.terms.contact == 0.0);
    CHECK(e.terms.penetration == 0.0);
}

TEST_CASE("total refinement loss is linear in the weights")
{
    const hand::HandModel model = hand::generate_desk_hand();
    const SphereSdf ball(Vec3(0.0, 0.05, -0.02), 0.03);
    RefinementProblem p;
    p.model = &model;
    p.object_sdf = &ball;
    p.camera = view_camera(48);
    hand::HandPose pose;
    pose.theta.setConstant(0.1);
    p.hand_target = render::binarized(render::render_silhouette(hand::pose_mesh(model, {}), p.camera, p.render).mask);
    LossWeights w;
    const RefinementEval e1 = total_refinement_loss(p, pose, w, false);
    w.lambda2 *= 2.0;
    const RefinementEval e2 = total_refinement_loss(p, pose, w, false);
    CHECK(e1.terms.penetration > 0.0);
    CHECK(e2.terms.penetration == e1.terms.penetration);
    CHECK(e2.terms.total - e1.terms.total == doctest::Approx(10.0 * e1.terms.penetration).epsilon(1e-12));
}

TEST_CASE("total refinement loss gradient matches finite differences")
{
    const hand::HandModel model = hand::generate_desk_hand();
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int scene = 0; scene < 4; ++scene) {
        const SphereSdf ball(Vec3(0.01 * n01(rng), 0.05, -0.03 + 0.005 * n01(rng)), 0.035);
        RefinementProblem p;
        p.model = &model;
        p.object_sdf = &ball;
        p.camera = view_camera(64);
        hand::HandPose truth;
        for (int i = 0; i < 45; ++i) truth.theta[i] = 0.15 * n01(rng);
        p.hand_target = render::binarized(render::render_silhouette(hand::pose_mesh(model, truth), p.camera,
                                                                    p.render).mask);
        p.theta0 = truth.theta;
        hand::HandPose pose = truth;
        for (int i = 0; i < 3; ++i) pose.phi[i] = 0.05 * n01(rng);
        for (int i = 3; i < 6; ++i) pose.phi[i] = 0.004 * n01(rng);
        for (int i = 0; i < 45; ++i) pose.theta[i] += 0.1 * n01(rng);

        const RefinementEval e = total_refinement_loss(p, pose, LossWeights{});
        // Directional derivative along a random direction scaled per block.
        Vec6 dphi;
        Vec45 dth;
        for (int i = 0; i < 6; ++i) dphi[i] = n01(rng) * (i < 3 ? 1.0 : 0.1);
        for (int i = 0; i < 45; ++i) dth[i] = n01(rng);
        const double h = 1e-5;
        hand::HandPose pp = pose, pm = pose;
        pp.phi += h * dphi;
        pm.phi -= h * dphi;
        pp.theta += h * dth;
        pm.theta -= h * dth;
        const double fd = (total_refinement_loss(p, pp, LossWeights{}, false).terms.total -
                           total_refinement_loss(p, pm, LossWeights{}, false).terms.total) /
                          (2 * h);
        const double an = e.grad.phi.dot(dphi) + e.grad.theta.dot(dth);
        CHECK(std::abs(an - fd) <= 1e-2 * std::max(std::abs(fd), 1e-8));
    }
}
