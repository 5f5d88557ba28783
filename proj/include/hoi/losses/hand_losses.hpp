#pragma once

#include <string>
#include <vector>

#include "hoi/geometry/sdf.hpp"
#include "hoi/hand/hand_model.hpp"
#include "hoi/render/soft_render.hpp"

namespace hoi::losses {

/// Scalar loss with its gradient w.r.t. every hand vertex.
struct VertexLoss {
    double value = 0.0;
    std::vector<Vec3> grad;
};

/// Mean over all N hand vertices of max(0, -d(v)).
VertexLoss penetration_loss(const geom::TriMesh& hand, const geom::SdfQuery& object_sdf);

/// Sum over the zone vertices of max(0, d(v)).
VertexLoss contact_loss(const geom::TriMesh& hand, const std::vector<int>& contact_zone,
                        const geom::SdfQuery& object_sdf);

struct RegLoss {
    double value = 0.0;
    Vec45 grad = Vec45::Zero();
};

/// L1 distance to the initial articulation; subgradient 0 at ties.
RegLoss regularization_loss(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta0);

/// Weights of the hand-mask, penetration, contact and regularization terms.
struct LossWeights {
    double lambda1 = 5.0;
    double lambda2 = 10.0;
    double lambda3 = 5.0;
    double lambda4 = 0.1;
};

void validate(const LossWeights& w);

/// Parses "l1,l2,l3,l4".
LossWeights parse_weights(const std::string& text);

/// Fixed inputs of the refinement objective.
struct RefinementProblem {
    const hand::HandModel* model = nullptr;
    const geom::SdfQuery* object_sdf = nullptr;
    render::Camera camera;
    render::Mask hand_target;     // visible hand mask
    render::Mask valid;           // pixels scored by the hand-mask term (empty = all)
    Vec45 theta0 = Vec45::Zero();
    render::SoftRenderConfig render;
};

struct RefinementTerms {
    double hand_mask = 0.0;
    double penetration = 0.0;
    double contact = 0.0;
    double regularization = 0.0;
    double total = 0.0;
};

struct RefinementEval {
    RefinementTerms terms;
    hand::PoseGradient grad;
};

/// lambda1 L_mask + lambda2 L_pen + lambda3 L_contact + lambda4 L_reg and its
/// gradient w.r.t. (phi, theta), chained through skinning and the renderer.
RefinementEval total_refinement_loss(const RefinementProblem& problem, const hand::HandPose& pose,
                                     const LossWeights& weights, bool with_grad = true);

}  // namespace hoi::losses
