#include "hoi/losses/hand_losses.hpp"

#include <cmath>
#include <sstream>

#include "hoi/losses/mask_losses.hpp"

namespace hoi::losses {

VertexLoss penetration_loss(const geom::TriMesh& hand, const geom::SdfQuery& object_sdf)
{
    if (hand.vertices.empty()) throw InputError("penetration_loss: hand mesh is empty");
    const std::size_t n = hand.vertices.size();
    VertexLoss out;
    out.grad.assign(n, Vec3::Zero());
    std::vector<geom::SdfSample> s(n);
    parallel_for(n, [&](std::size_t i) { s[i] = object_sdf.sample(hand.vertices[i]); });
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (s[i].d < 0.0) {
            out.value -= s[i].d * inv_n;
            out.grad[i] = -s[i].grad * inv_n;
        }
    }
    return out;
}

VertexLoss contact_loss(const geom::TriMesh& hand, const std::vector<int>& contact_zone,
                        const geom::SdfQuery& object_sdf)
{
    if (contact_zone.empty()) throw InputError("contact_loss: contact zone is empty");
    const int n = static_cast<int>(hand.vertices.size());
    for (int v : contact_zone)
        if (v < 0 || v >= n) throw InputError("contact_loss: zone vertex " + std::to_string(v) + " out of range");
    VertexLoss out;
    out.grad.assign(hand.vertices.size(), Vec3::Zero());
    std::vector<geom::SdfSample> s(contact_zone.size());
    parallel_for(s.size(), [&](std::size_t k) { s[k] = object_sdf.sample(hand.vertices[contact_zone[k]]); });
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k].d > 0.0) {
            out.value += s[k].d;
            out.grad[contact_zone[k]] += s[k].grad;
        }
    }
    return out;
}

RegLoss regularization_loss(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta0)
{
    if (theta.size() != 45 || theta0.size() != 45)
        throw InputError("regularization_loss: expected length 45, got " + std::to_string(theta.size()) + " and " +
                         std::to_string(theta0.size()));
    RegLoss out;
    for (int i = 0; i < 45; ++i) {
        const double d = theta[i] - theta0[i];
        out.value += std::abs(d);
        out.grad[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    }
    return out;
}

void validate(const LossWeights& w)
{
    for (double v : {w.lambda1, w.lambda2, w.lambda3, w.lambda4})
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("LossWeights: weights must be finite and >= 0");
}

LossWeights parse_weights(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("weights: '" + item + "' is not a number");
        }
    }
    if (v.size() != 4) throw InputError("weights: expected 4 comma-separated values, got " + std::to_string(v.size()));
    LossWeights w{v[0], v[1], v[2], v[3]};
    validate(w);
    return w;
}

RefinementEval total_refinement_loss(const RefinementProblem& problem, const hand::HandPose& pose,
                                     const LossWeights& weights, bool with_grad)
{
    if (!problem.model || !problem.object_sdf) throw ContractError("total_refinement_loss: incomplete problem");
    const hand::HandModel& model = *problem.model;
    const geom::TriMesh hand = hand::pose_mesh(model, pose);

    RefinementEval out;
    std::vector<Vec3> vgrad(hand.vertices.size(), Vec3::Zero());

    if (weights.lambda1 > 0.0) {
        const render::SoftRasterizer raster(hand, problem.camera, problem.render);
        const render::Mask* valid = problem.valid.size() ? &problem.valid : nullptr;
        MaskLoss iou = soft_iou_loss(raster.mask(), problem.hand_target, valid);
        out.terms.hand_mask = iou.value;
        if (with_grad) {
            for (double& g : iou.grad.values) g *= weights.lambda1;
            const render::RenderGradients rg = raster.backward(iou.grad);
            for (std::size_t i = 0; i < vgrad.size(); ++i) vgrad[i] += rg.vertices[i];
        }
    }
    const VertexLoss pen = penetration_loss(hand, *problem.object_sdf);
    const VertexLoss con = contact_loss(hand, model.contact_zone_vertices, *problem.object_sdf);
    out.terms.penetration = pen.value;
    out.terms.contact = con.value;
    for (std::size_t i = 0; i < vgrad.size(); ++i)
        vgrad[i] += weights.lambda2 * pen.grad[i] + weights.lambda3 * con.grad[i];
    const RegLoss reg = regularization_loss(pose.theta, problem.theta0);
    out.terms.regularization = reg.value;

    out.terms.total = weights.lambda1 * out.terms.hand_mask + weights.lambda2 * out.terms.penetration +
                      weights.lambda3 * out.terms.contact + weights.lambda4 * out.terms.regularization;
    if (with_grad) {
        out.grad = hand::pose_vjp(model, pose, vgrad);
        out.grad.theta += weights.lambda4 * reg.grad;
    }
    return out;
}

}  // namespace hoi::losses
