#include <algorithm>
#include <limits>
#include <memory>

#include "hoi/geometry/mesh_index.hpp"
#include "hoi/pipeline/pipeline.hpp"
#include "hoi/render/visibility.hpp"
#include "working.hpp"

namespace hoi::pipeline {

namespace {

hand::HandPose with_phi(hand::HandPose pose, const Eigen::VectorXd& x)
{
    pose.phi = x;
    return pose;
}

}  // namespace

Stage2Result stage2_contact_alignment(const Scene& scene, const render::Camera& camera, const StageConfig& cfg)
{
    validate(cfg);
    render::validate(camera);
    if (scene.masks.hand.sum() < 0.5) throw InputError("stage 2: hand mask is empty");
    const WorkingView view = working_view(scene, camera, cfg.resolution);
    const render::Camera& cam = view.camera;
    const geom::MeshIndex object_index(scene.object);
    const hand::HandModel& model = scene.hand_model;

    Stage2Result res;
    res.pose = scene.pose;
    res.trace.term_names = {"hand_mask"};
    res.trace.stop_reason = "max_iters";
    Eigen::VectorXd x = scene.pose.phi, best_x = x;
    double segment_best = std::numeric_limits<double>::infinity();
    Adam adam(Eigen::VectorXd::Constant(6, cfg.lr_global_stage2));
    std::vector<int> pending = cfg.icp_iterations_at;
    std::sort(pending.begin(), pending.end());
    pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
    bool below_stop = false;

    for (int it = 0; it < cfg.max_iters; ++it) {
        // A registration runs at its scheduled iteration, or as soon as the mask loss is below stop_loss.
        if (!pending.empty() && (it == pending.front() || below_stop)) {
            pending.erase(pending.begin());
            IcpEvent ev;
            ev.iteration = it;
            const geom::TriMesh hand_mesh = hand::pose_mesh(model, with_phi(scene.pose, x));
            const geom::MeshIndex hand_index(hand_mesh);
            const render::Mask complete_hand = render::hard_silhouette(hand_index, cam);
            const contact::ContactMasks cm =
                contact::derive_contact_masks(view.object_visible, view.object_complete, view.hand_visible, complete_hand);
            const contact::ContactPointSet pts =
                contact::extract_contact_points(cm, cam, object_index, hand_index, model.palmar_faces, cfg.contact);
            ev.candidates = static_cast<int>(pts.hand_points.size());
            if (pts.empty()) {
                ev.reason = "no contact candidates";
                res.trace.events.push_back("iteration " + std::to_string(it) + ": ICP skipped, no contact candidates");
            } else {
                const contact::IcpResult icp =
                    contact::icp_translation(pts.hand_points, pts.object_points, cfg.icp_max_iters);
                ev.translation = icp.translation;
                ev.mean_before = icp.initial_mean;
                ev.mean_after = icp.final_mean;
                if (icp.final_mean < icp.initial_mean) {
                    ev.applied = true;
                    ev.reason = "applied";
                    x.tail<3>() += icp.translation;
                    adam.reset();
                    segment_best = std::numeric_limits<double>::infinity();
                } else {
                    ev.reason = "no decrease";
                }
            }
            res.icp.push_back(ev);
        }

        const hand::HandPose pose = with_phi(scene.pose, x);
        const geom::TriMesh hand_mesh = hand::pose_mesh(model, pose);
        const render::SoftRasterizer ras(hand_mesh, cam, cfg.render);
        const losses::MaskLoss loss = losses::soft_iou_loss(ras.mask(), view.hand_target, &view.valid);
        res.trace.points.push_back({it, loss.value, {loss.value}});
        if (loss.value < res.trace.best_loss) {
            res.trace.best_loss = loss.value;
            res.trace.best_iteration = it;
        }
        if (loss.value < segment_best) {
            segment_best = loss.value;
            res.trace.returned_iteration = it;
            best_x = x;
        }
        below_stop = loss.value < cfg.stop_loss;
        if (below_stop) {
            if (pending.empty()) {
                res.trace.stop_reason = "converged";
                break;
            }
            continue;
        }
        const render::RenderGradients g = ras.backward(loss.grad);
        const hand::PoseGradient pg = hand::pose_vjp(model, pose, g.vertices);
        adam.step(x, pg.phi);
    }
    res.pose = with_phi(scene.pose, best_x);
    return res;
}

}  // namespace hoi::pipeline
