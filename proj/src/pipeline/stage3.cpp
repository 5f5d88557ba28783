#include <algorithm>
#include <memory>

#include "hoi/pipeline/pipeline.hpp"
#include "working.hpp"

namespace hoi::pipeline {

Stage3Result stage3_refinement(const Scene& scene, const render::Camera& camera, const hand::HandPose& start,
                               const StageConfig& cfg, const geom::SdfQuery* object_sdf)
{
    validate(cfg);
    render::validate(camera);
    hand::validate(start);
    std::unique_ptr<geom::GridSdf> own;
    if (!object_sdf) {
        own = std::make_unique<geom::GridSdf>(scene.object, cfg.sdf_resolution);
        object_sdf = own.get();
    }
    const WorkingView view = working_view(scene, camera, cfg.resolution);
    losses::RefinementProblem problem;
    problem.model = &scene.hand_model;
    problem.object_sdf = object_sdf;
    problem.camera = view.camera;
    problem.hand_target = view.hand_target;
    problem.valid = view.valid;
    problem.theta0 = scene.theta0;
    problem.render = cfg.render;

    Stage3Result res;
    res.pose = start;
    res.trace.term_names = {"hand_mask", "penetration", "contact", "regularization"};
    res.trace.stop_reason = "max_iters";

    Eigen::VectorXd x(51), lr(51);
    x << start.phi, start.theta;
    lr << Eigen::VectorXd::Constant(6, cfg.lr_global_stage3), Eigen::VectorXd::Constant(45, cfg.lr_theta_stage3);
    Adam adam(lr);
    auto pose_of = [&](const Eigen::VectorXd& v) {
        hand::HandPose p;
        p.phi = v.head<6>();
        p.theta = v.tail<45>();
        return p;
    };

    const int iters = std::min(cfg.stage3_iters, cfg.max_iters);
    for (int it = 0; it < iters; ++it) {
        const hand::HandPose pose = pose_of(x);
        const losses::RefinementEval e = losses::total_refinement_loss(problem, pose, cfg.weights);
        const losses::RefinementTerms& t = e.terms;
        res.trace.points.push_back({it, t.total, {t.hand_mask, t.penetration, t.contact, t.regularization}});
        if (it == 0) res.initial = t;
        if (t.total < res.trace.best_loss) {
            res.trace.best_loss = t.total;
            res.trace.best_iteration = it;
            res.trace.returned_iteration = it;
            res.best = t;
            res.pose = pose;
        }
        Eigen::VectorXd g(51);
        g << e.grad.phi, e.grad.theta;
        adam.step(x, g);
    }
    return res;
}

}  // namespace hoi::pipeline
