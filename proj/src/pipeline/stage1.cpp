#include <algorithm>
#include <cmath>
#include <limits>

#include "hoi/pipeline/pipeline.hpp"
#include "hoi/rotation.hpp"

namespace hoi::pipeline {

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;

struct PixelBox {
    double u0, v0, u1, v1;
    double width() const { return u1 - u0; }
    double height() const { return v1 - v0; }
    double size() const { return std::max(width(), height()); }
};

PixelBox mask_box(const render::Mask& m)
{
    PixelBox b{1e300, 1e300, -1e300, -1e300};
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y) >= 0.5) {
                b.u0 = std::min(b.u0, double(x));
                b.v0 = std::min(b.v0, double(y));
                b.u1 = std::max(b.u1, x + 1.0);
                b.v1 = std::max(b.v1, y + 1.0);
            }
    if (b.u1 < b.u0) throw InputError("stage 1: target mask is empty");
    return b;
}

PixelBox projected_box(const geom::TriMesh& mesh, const render::Camera& cam)
{
    PixelBox b{1e300, 1e300, -1e300, -1e300};
    for (const render::Projection& p : render::project_points(mesh.vertices, cam)) {
        if (!p.in_front) continue;
        b.u0 = std::min(b.u0, p.px.x());
        b.v0 = std::min(b.v0, p.px.y());
        b.u1 = std::max(b.u1, p.px.x());
        b.v1 = std::max(b.v1, p.px.y());
    }
    return b;
}

render::Camera from_params(const render::Camera& base, const Vec7& x)
{
    render::Camera c = base;
    c.rotation = x.head<3>();
    c.translation = x.segment<3>(3);
    c.fx = base.fx * std::exp(x[6]);
    c.fy = base.fy * std::exp(x[6]);
    return c;
}

struct CameraRun {
    render::Camera best;
    StageTrace trace;
};

CameraRun optimize_camera(const geom::TriMesh& object, const render::Camera& start, const render::Mask& target,
                          const StageConfig& cfg, int iters)
{
    CameraRun run;
    run.trace.term_names = {"mask", "ot", "hard_iou"};
    run.trace.stop_reason = "max_iters";
    run.best = start;
    Eigen::VectorXd x(7), best_x(7);
    x << start.rotation, start.translation, 0.0;
    best_x = x;
    Adam adam(Eigen::VectorXd::Constant(7, cfg.lr_camera));

    for (int it = 0; it < iters; ++it) {
        const render::Camera cam = from_params(start, x);
        const CameraObjective o = camera_objective(object, cam, target, cfg);
        run.trace.points.push_back({it, o.combined, {o.mask_loss, o.ot, o.hard_iou}});
        if (o.combined < run.trace.best_loss) {
            run.trace.best_loss = o.combined;
            run.trace.best_iteration = it;
            run.trace.returned_iteration = it;
            run.best = cam;
            best_x = x;
        }
        if (!o.empty_render && o.mask_loss < cfg.stop_loss) {
            run.trace.stop_reason = "converged";
            break;
        }
        if (o.empty_render) {
            run.trace.events.push_back("iteration " + std::to_string(it) + ": object left the view, restored best");
            x = best_x;
            adam.reset();
            continue;
        }
        adam.step(x, o.grad);
    }
    return run;
}

}  // namespace

CameraObjective camera_objective(const geom::TriMesh& object, const render::Camera& cam, const render::Mask& target,
                                 const StageConfig& cfg, bool with_grad)
{
    CameraObjective o;
    const render::SoftRasterizer ras(object, cam, cfg.render);
    const render::Mask& r = ras.mask();
    if (ras.behind_camera() || r.sum() < 1e-9) {
        o.empty_render = true;
        o.mask_loss = 1.0;
        o.ot = cfg.ot_weight > 0.0 ? 1.0 : 0.0;
        o.combined = o.mask_loss + cfg.ot_weight * o.ot;
        return o;
    }
    const losses::MaskLoss iou = losses::soft_iou_loss(r, target);
    o.mask_loss = iou.value;
    o.hard_iou = render::hard_iou(r, target);
    render::Mask upstream = iou.grad;
    if (cfg.ot_weight > 0.0 && o.hard_iou <= cfg.ot_anneal_iou) {
        const losses::SinkhornResult s = losses::sinkhorn_loss(r, target, cfg.sinkhorn);
        const double diag = std::hypot(double(r.width), double(r.height));
        o.ot = s.value / diag;
        const double k = cfg.ot_weight / diag;
        for (std::size_t i = 0; i < upstream.size(); ++i) upstream.values[i] += k * s.grad.values[i];
    }
    o.combined = o.mask_loss + cfg.ot_weight * o.ot;
    if (with_grad) {
        const render::RenderGradients g = ras.backward(upstream);
        o.grad.head<3>() = g.camera.rotation;
        o.grad.segment<3>(3) = g.camera.translation;
        o.grad[6] = cam.fx * g.camera.fx + cam.fy * g.camera.fy;
    }
    return o;
}

render::Camera initial_camera(const geom::TriMesh& object, const render::Mask& target, double focal, double yaw)
{
    const PixelBox tb = mask_box(target);
    const geom::Aabb box = geom::bounding_box(object);
    const Vec3 c = box.center();
    double rho = 0.0;
    for (const Vec3& v : object.vertices) rho = std::max(rho, (v - c).norm());
    const double d = 2.0 * rho * focal / std::max(tb.size(), 1.0);
    const double el = kPi / 6.0;
    const Vec3 dir(std::cos(el) * std::cos(yaw), std::cos(el) * std::sin(yaw), std::sin(el));
    render::Camera cam = render::look_at(c + d * dir, c, Vec3::UnitZ(), focal, target.width, target.height);

    const double tu = 0.5 * (tb.u0 + tb.u1), tv = 0.5 * (tb.v0 + tb.v1);
    for (int pass = 0; pass < 4; ++pass) {
        const PixelBox pb = projected_box(object, cam);
        if (pb.u1 < pb.u0) break;
        Vec3 pc = cam.R() * c + cam.translation;
        pc.z() *= pb.size() / std::max(tb.size(), 1.0);
        pc.x() += (tu - 0.5 * (pb.u0 + pb.u1)) * pc.z() / cam.fx;
        pc.y() += (tv - 0.5 * (pb.v0 + pb.v1)) * pc.z() / cam.fy;
        cam.translation = pc - cam.R() * c;
    }
    return cam;
}

Stage1Result stage1_camera_setup(const Scene& scene, const StageConfig& cfg)
{
    validate(cfg);
    geom::validate_mesh(scene.object);
    if (scene.object.empty()) throw InputError("stage 1: object mesh is empty");
    const render::Mask& full = scene.masks.object_inpainted;
    if (full.sum() < 0.5) throw InputError("stage 1: complete object mask is empty");
    const auto [w, h] = working_size(full.width, full.height, cfg.resolution);
    const render::Mask target = render::resampled(full, w, h);

    Stage1Result res;
    render::Camera start;
    bool rebuild = !scene.has_camera;
    std::vector<std::string> events;
    if (scene.has_camera) {
        start = render::resized(scene.camera, w, h);
        if (camera_objective(scene.object, start, target, cfg, false).empty_render) {
            rebuild = true;
            events.push_back("object not in front of the initial camera; rebuilding the camera");
        }
    } else {
        events.push_back("no initial camera; building one from the mask");
    }

    if (rebuild) {
        const double focal = scene.has_camera ? start.fx : 1.2 * std::max(w, h);
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 4; ++k) {
            const double yaw = k * kPi / 2.0;
            const CameraRun trial = optimize_camera(scene.object, initial_camera(scene.object, target, focal, yaw),
                                                    target, cfg, std::max(cfg.init_iters, 1));
            events.push_back("yaw " + std::to_string(90 * k) + ": best loss " + std::to_string(trial.trace.best_loss));
            if (trial.trace.best_loss < best) {
                best = trial.trace.best_loss;
                start = trial.best;
            }
        }
        res.reinitialized = true;
    }

    CameraRun run = optimize_camera(scene.object, start, target, cfg, cfg.max_iters);
    res.trace = std::move(run.trace);
    res.trace.events.insert(res.trace.events.begin(), events.begin(), events.end());
    res.camera = render::resized(run.best, full.width, full.height);
    return res;
}

}  // namespace hoi::pipeline
