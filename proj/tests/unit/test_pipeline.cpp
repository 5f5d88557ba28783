#include <cmath>

#include "doctest.h"
#include "hoi/geometry/volume.hpp"
#include "hoi/io/scene_io.hpp"
#include "hoi/render/visibility.hpp"

using namespace hoi;
using namespace hoi::pipeline;

namespace {

io::SyntheticScene synth(io::GraspPreset preset, std::uint64_t seed, int resolution = 128)
{
    io::SynthSpec s;
    s.preset = preset;
    s.primitive = io::default_primitive(preset);
    s.seed = seed;
    s.resolution = resolution;
    return io::generate_synthetic_scene(s);
}

// Scene whose start state is the ground truth.
Scene at_truth(const io::SyntheticScene& s)
{
    Scene scene = s.scene;
    scene.camera = s.true_camera;
    scene.pose = s.true_pose;
    scene.theta0 = s.true_pose.theta;
    return scene;
}

Vec3 mean_vertex(const geom::TriMesh& m)
{
    Vec3 c = Vec3::Zero();
    for (const Vec3& v : m.vertices) c += v;
    return c / static_cast<double>(m.vertices.size());
}

void check_trace(const StageTrace& t, int max_iters)
{
    CHECK(static_cast<int>(t.points.size()) <= max_iters);
    for (std::size_t i = 1; i < t.points.size(); ++i) CHECK(t.points[i].iteration > t.points[i - 1].iteration);
    if (!t.points.empty()) CHECK(t.best_loss <= t.initial_loss());
}

}  // namespace

TEST_CASE("config round trip, hashing and validation")
{
    StageConfig c;
    c.weights = {1.0, 2.0, 3.0, 4.0};
    c.icp_iterations_at = {10, 20};
    c.render.sigma = 0.7;
    const StageConfig back = parse_config(format_config(c), StageConfig{}, "cfg");
    CHECK(format_config(back) == format_config(c));
    CHECK(config_hash(back, 3) == config_hash(c, 3));
    CHECK(config_hash(c, 3) != config_hash(c, 4));

    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})", StageConfig{}, "cfg"), InputError);
    CHECK_THROWS_AS(parse_config(R"({"render": {"bogus": 1}})", StageConfig{}, "cfg"), InputError);
    CHECK_THROWS_AS(parse_config(R"({"weights": [1, 2]})", StageConfig{}, "cfg"), InputError);
    CHECK_THROWS_AS(parse_config(R"({"lr_camera": 0})", StageConfig{}, "cfg"), InputError);
    CHECK_THROWS_AS(parse_config(R"({"max_iters": 150})", StageConfig{}, "cfg"), InputError);  // ICP at 200
    CHECK_THROWS_AS(parse_config("[1]", StageConfig{}, "cfg"), InputError);
}

TEST_CASE("Adam first step moves each coordinate by its learning rate")
{
    Eigen::VectorXd lr(3);
    lr << 0.1, 0.01, 1.0;
    Adam adam(lr);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3), g(3);
    g << 5.0, -1e-3, 0.0;
    adam.step(x, g);
    CHECK(x[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(x[1] == doctest::Approx(0.01).epsilon(1e-4));
    CHECK(x[2] == 0.0);
    CHECK(adam.steps() == 1);
    adam.reset();
    CHECK(adam.steps() == 0);
}

TEST_CASE("working size keeps aspect and never upscales")
{
    CHECK(working_size(640, 480, 256) == std::pair<int, int>(256, 192));
    CHECK(working_size(100, 50, 256) == std::pair<int, int>(100, 50));
}

TEST_CASE("stage 1 at the true camera stops within two iterations")
{
    const io::SyntheticScene s = synth(io::GraspPreset::Wrap, 11);
    const Scene scene = at_truth(s);
    const StageConfig cfg;
    const Stage1Result r = stage1_camera_setup(scene, cfg);
    REQUIRE(!r.trace.points.empty());
    CHECK(r.trace.points.size() <= 2);
    CHECK(r.trace.points.front().loss < 0.1);
    CHECK(r.trace.stop_reason == "converged");
    CHECK(!r.reinitialized);
}

TEST_CASE("transport term gives a camera gradient when the render misses the mask")
{
    const io::SyntheticScene s = synth(io::GraspPreset::Wrap, 12);
    StageConfig cfg;
    // Slide the view sideways until the object is well clear of the target region.
    render::Camera cam = s.true_camera;
    CameraObjective with_ot;
    int clear = 0;
    for (int k = 1; k <= 40 && clear < 3; ++k) {
        cam = s.true_camera;
        cam.translation.x() += 0.01 * k;
        with_ot = camera_objective(s.scene.object, cam, s.scene.masks.object_inpainted, cfg);
        if (with_ot.hard_iou == 0.0) ++clear;
    }
    CHECK(!with_ot.empty_render);
    CHECK(with_ot.hard_iou == 0.0);
    CHECK(with_ot.ot > 0.0);
    CHECK(with_ot.grad.norm() > 1e-3);

    cfg.ot_weight = 0.0;
    const CameraObjective iou_only = camera_objective(s.scene.object, cam, s.scene.masks.object_inpainted, cfg);
    CHECK(iou_only.grad.norm() < 1e-6 * with_ot.grad.norm());
}

TEST_CASE("stage 1 recovers a perturbed camera")
{
    io::SynthSpec spec;
    spec.seed = 13;
    spec.resolution = 128;
    spec.camera_rot_deg = 10.0;
    spec.camera_depth = 0.1;
    const io::SyntheticScene s = io::generate_synthetic_scene(spec);
    StageConfig cfg;
    const Stage1Result r = stage1_camera_setup(s.scene, cfg);
    check_trace(r.trace, cfg.max_iters);
    geom::MeshIndex index(s.scene.object);
    const double iou = render::hard_iou(render::hard_silhouette(index, r.camera), s.scene.masks.object_inpainted);
    CHECK(iou > 0.9);
}

TEST_CASE("stage 1 without a camera rebuilds one")
{
    const io::SyntheticScene s = synth(io::GraspPreset::Palm, 14);
    Scene scene = s.scene;
    scene.has_camera = false;
    StageConfig cfg;
    cfg.init_iters = 5;
    cfg.max_iters = 30;
    cfg.icp_iterations_at = {10};
    const Stage1Result r = stage1_camera_setup(scene, cfg);
    CHECK(r.reinitialized);
    CHECK(r.camera.width == scene.masks.object.width);
    CHECK(r.camera.height == scene.masks.object.height);
    check_trace(r.trace, cfg.max_iters);
}

TEST_CASE("stage 2 keeps the articulation and leaves an aligned hand alone")
{
    const io::SyntheticScene s = synth(io::GraspPreset::Wrap, 21);
    const Scene scene = at_truth(s);
    StageConfig cfg;
    cfg.icp_iterations_at.clear();
    const Stage2Result r = stage2_contact_alignment(scene, scene.camera, cfg);
    CHECK(r.pose.theta == scene.pose.theta);
    CHECK((r.pose.phi - scene.pose.phi).cwiseAbs().maxCoeff() < 1e-3);
    check_trace(r.trace, cfg.max_iters);
}

TEST_CASE("stage 2 registrations only ever reduce the candidate distance")
{
    io::SynthSpec spec;
    spec.seed = 22;
    spec.resolution = 128;
    spec.hand_depth = 0.03;
    const io::SyntheticScene s = io::generate_synthetic_scene(spec);
    Scene scene = s.scene;
    scene.camera = s.true_camera;
    StageConfig cfg;
    cfg.max_iters = 120;
    cfg.icp_iterations_at = {20, 60};
    const Stage2Result r = stage2_contact_alignment(scene, scene.camera, cfg);
    CHECK(r.pose.theta == scene.pose.theta);
    check_trace(r.trace, cfg.max_iters);
    REQUIRE(!r.icp.empty());
    for (const IcpEvent& e : r.icp) {
        if (e.applied) CHECK(e.mean_after < e.mean_before);
        else CHECK(e.translation == Vec3::Zero());
    }
}

TEST_CASE("stage 3 with a dominant regularizer keeps the articulation")
{
    const io::SyntheticScene s = synth(io::GraspPreset::Wrap, 31);
    Scene scene = s.scene;
    scene.camera = s.true_camera;
    StageConfig cfg;
    cfg.weights.lambda4 = 1e6;
    cfg.stage3_iters = 40;
    const Stage3Result r = stage3_refinement(scene, scene.camera, scene.pose, cfg);
    CHECK((r.pose.theta - scene.theta0).cwiseAbs().sum() < 1e-3);
    check_trace(r.trace, cfg.stage3_iters);
}

TEST_CASE("stage 3 removes most of a deep interpenetration")
{
    const io::SyntheticScene s = synth(io::GraspPreset::Wrap, 32);
    Scene scene = at_truth(s);
    // Push the true grasp along the viewing ray into the object until it overlaps by 8 cm^3.
    const geom::TriMesh truth = hand::pose_mesh(scene.hand_model, scene.pose);
    const Vec3 hc = mean_vertex(truth), oc = mean_vertex(scene.object);
    Vec3 ray = (hc - scene.camera.center()).normalized();
    if (ray.dot(oc - hc) < 0.0) ray = -ray;
    hand::HandPose start = scene.pose;
    double iv = 0.0;
    for (int k = 1; k <= 60 && iv < 8.0; ++k) {
        start = scene.pose;
        start.phi.tail<3>() += 0.001 * k * ray;
        iv = geom::intersection_volume(hand::pose_mesh(scene.hand_model, start), scene.object);
    }
    REQUIRE(iv >= 8.0);

    const StageConfig cfg;
    const Stage3Result r = stage3_refinement(scene, scene.camera, start, cfg);
    CHECK(r.initial.penetration > 0.0);
    CHECK(r.best.penetration < 0.1 * r.initial.penetration);
    CHECK(r.trace.best_loss <= r.trace.initial_loss());
}

TEST_CASE("run is deterministic, bounded and respects stage ownership")
{
    io::SynthSpec spec;
    spec.seed = 41;
    spec.resolution = 96;
    spec.camera_rot_deg = 5.0;
    spec.hand_trans = 0.005;
    const io::SyntheticScene s = io::generate_synthetic_scene(spec);
    StageConfig cfg;
    cfg.max_iters = 60;
    cfg.icp_iterations_at = {20, 40};
    cfg.stage3_iters = 30;
    const RunReport a = run_full(s.scene, cfg);
    const RunReport b = run_full(s.scene, cfg);
    CHECK(format_report(a) == format_report(b));
    CHECK(a.stage1.status == "ok");
    CHECK(a.stage2.status == "ok");
    CHECK(a.stage3.status == "ok");
    for (const StageOutcome* o : {&a.stage1, &a.stage2, &a.stage3}) check_trace(o->trace, cfg.max_iters);

    // Stage 3 alone never changes the camera; stage 2 alone never changes theta.
    const RunReport only3 = run(s.scene, cfg, StageSet::Stage3);
    CHECK(render::format_camera(only3.camera) == render::format_camera(s.scene.camera));
    CHECK(only3.stage1.status == "skipped");
    const RunReport only2 = run(s.scene, cfg, StageSet::Stage2);
    CHECK(only2.pose.theta == s.scene.pose.theta);
}

TEST_CASE("a failing stage is recorded and the run continues")
{
    const io::SyntheticScene s = synth(io::GraspPreset::Wrap, 42, 64);
    Scene scene = s.scene;
    scene.has_camera = false;
    StageConfig cfg;
    cfg.max_iters = 20;
    cfg.icp_iterations_at = {10};
    const RunReport r = run(scene, cfg, StageSet::Stage2);
    CHECK(r.stage2.status == "failed");
    CHECK(!r.stage2.error.empty());
    CHECK(r.stage3.status == "skipped");
    REQUIRE(!r.warnings.empty());
}

TEST_CASE("stage 3 is stationary where penetration and regularization vanish")
{
    const io::SyntheticScene s = synth(io::GraspPreset::Wrap, 33);
    const Scene scene = at_truth(s);
    StageConfig cfg;
    cfg.weights.lambda1 = 0.0;
    cfg.weights.lambda3 = 0.0;
    const Stage3Result r = stage3_refinement(scene, scene.camera, scene.pose, cfg);
    CHECK(r.initial.penetration == 0.0);
    CHECK((r.pose.phi - scene.pose.phi).cwiseAbs().maxCoeff() < 1e-3);
    CHECK((r.pose.theta - scene.pose.theta).cwiseAbs().maxCoeff() < 1e-3);
}
