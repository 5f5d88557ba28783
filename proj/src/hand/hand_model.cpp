#include "hoi/hand/hand_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hoi/rotation.hpp"

namespace hoi::hand {

namespace {

struct Kinematics {
    std::array<Mat3, kJointCount> W;          // world rotation of each joint
    std::array<Mat3, kJointCount> W_minus_I;  // exact zero at rest
    std::array<Vec3, kJointCount> delta;      // joint displacement from rest
    std::array<Mat3, kJointCount> Jr;         // right Jacobian of the local rotation
    Mat3 Rg = Mat3::Identity();
    Mat3 Rg_minus_I = Mat3::Zero();
};

Vec3 theta_block(const HandPose& pose, int joint) { return pose.theta.segment<3>(3 * (joint - 1)); }

Kinematics forward(const HandModel& model, const HandPose& pose)
{
    Kinematics k;
    for (int j : joint_order(model)) {
        const int par = model.joints[j].parent;
        if (par < 0) {
            k.W[j] = Mat3::Identity();
            k.delta[j] = Vec3::Zero();
            k.Jr[j] = Mat3::Identity();
        } else {
            const Vec3 r = theta_block(pose, j);
            k.W[j] = k.W[par] * rotation_from_axis_angle(r);
            k.delta[j] = k.delta[par] + k.W_minus_I[par] * (model.joints[j].position - model.joints[par].position);
            k.Jr[j] = so3_right_jacobian(r);
        }
        k.W_minus_I[j] = k.W[j] - Mat3::Identity();
    }
    k.Rg = rotation_from_axis_angle(pose.phi.head<3>());
    k.Rg_minus_I = k.Rg - Mat3::Identity();
    return k;
}

Vec3 skinned(const HandModel& model, const Kinematics& k, int i)
{
    const Vec3& v = model.template_vertices[i];
    Vec3 offset = Vec3::Zero();
    for (const auto& [m, w] : model.skin_weights[i])
        offset += w * (k.W_minus_I[m] * (v - model.joints[m].position) + k.delta[m]);
    return v + offset;
}

Vec3 global(const HandModel& model, const Kinematics& k, const HandPose& pose, const Vec3& vs)
{
    return vs + k.Rg_minus_I * (vs - model.joints[0].position) + pose.phi.tail<3>();
}

// Non-root joints that influence vertex i (ancestors of its weighted joints).
std::vector<int> influencing_joints(const HandModel& model, int i)
{
    std::vector<int> out;
    for (const auto& [m, w] : model.skin_weights[i]) {
        if (w == 0.0) continue;
        for (int j = m; j >= 0 && model.joints[j].parent >= 0; j = model.joints[j].parent)
            if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// z = W_k^T (S_k - Wsum_k p_k) for vertex i and joint k.
Vec3 lever(const HandModel& model, const Kinematics& kin, int i, int k)
{
    const Vec3& v = model.template_vertices[i];
    const Vec3 pk = model.joints[k].position + kin.delta[k];
    Vec3 acc = Vec3::Zero();
    for (const auto& [m, w] : model.skin_weights[i]) {
        if (w == 0.0 || !in_subtree(model, m, k)) continue;
        const Vec3& jm = model.joints[m].position;
        acc += w * (kin.W[m] * (v - jm) + jm + kin.delta[m] - pk);
    }
    return kin.W[k].transpose() * acc;
}

}  // namespace

std::vector<int> joint_order(const HandModel& model)
{
    const int n = static_cast<int>(model.joints.size());
    std::vector<int> order;
    std::vector<char> done(n, 0);
    order.reserve(n);
    while (static_cast<int>(order.size()) < n) {
        bool progress = false;
        for (int j = 0; j < n; ++j) {
            if (done[j]) continue;
            const int p = model.joints[j].parent;
            if (p < 0 || (p < n && done[p])) {
                done[j] = 1;
                order.push_back(j);
                progress = true;
            }
        }
        if (!progress) throw InputError("hand model: joint parent tree has a cycle");
    }
    return order;
}

bool in_subtree(const HandModel& model, int joint, int ancestor)
{
    for (int j = joint; j >= 0; j = model.joints[j].parent)
        if (j == ancestor) return true;
    return false;
}

void validate(const HandModel& model)
{
    if (model.joints.size() != static_cast<std::size_t>(kJointCount))
        throw InputError("hand model: expected 16 joints, got " + std::to_string(model.joints.size()));
    if (model.joints[0].parent != -1) throw InputError("hand model: joint 0 (wrist) must be the root");
    for (int j = 1; j < kJointCount; ++j) {
        const int p = model.joints[j].parent;
        if (p < 0 || p >= kJointCount || p == j)
            throw InputError("hand model: joint " + std::to_string(j) + " has invalid parent " + std::to_string(p));
        if (!model.joints[j].position.allFinite())
            throw InputError("hand model: joint " + std::to_string(j) + " position is not finite");
    }
    joint_order(model);
    try {
        geom::validate_mesh(template_mesh(model));
    } catch (const InputError& e) {
        throw InputError(std::string("hand model: ") + e.what());
    }
    const std::size_t n = model.template_vertices.size();
    if (model.skin_weights.size() != n)
        throw InputError("hand model: skin_weights has " + std::to_string(model.skin_weights.size()) + " rows for " +
                         std::to_string(n) + " vertices");
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const auto& [j, w] : model.skin_weights[i]) {
            if (j < 0 || j >= kJointCount)
                throw InputError("hand model: vertex " + std::to_string(i) + " weights joint " + std::to_string(j));
            if (!(w >= 0.0) || !std::isfinite(w))
                throw InputError("hand model: vertex " + std::to_string(i) + " has a negative or non-finite weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw InputError("hand model: skin weights of vertex " + std::to_string(i) + " sum to " + std::to_string(sum));
    }
    std::vector<char> palmar(model.faces.size(), 0);
    for (int f : model.palmar_faces) {
        if (f < 0 || f >= static_cast<int>(model.faces.size()))
            throw InputError("hand model: palmar face index " + std::to_string(f) + " out of range");
        palmar[f] = 1;
    }
    std::vector<char> dorsal_incident(n, 0);
    for (std::size_t f = 0; f < model.faces.size(); ++f)
        if (!palmar[f])
            for (int v : model.faces[f]) dorsal_incident[v] = 1;
    for (int v : model.contact_zone_vertices) {
        if (v < 0 || v >= static_cast<int>(n))
            throw InputError("hand model: contact zone vertex " + std::to_string(v) + " out of range");
        if (dorsal_incident[v])
            throw InputError("hand model: contact zone vertex " + std::to_string(v) + " touches a non-palmar face");
    }
    if (!(model.units_scale > 0.0)) throw InputError("hand model: units_scale must be positive");
}

HandPose wrapped(const HandPose& pose)
{
    HandPose out = pose;
    out.phi.head<3>() = wrap_axis_angle(pose.phi.head<3>());
    for (int j = 0; j < 15; ++j) out.theta.segment<3>(3 * j) = wrap_axis_angle(pose.theta.segment<3>(3 * j));
    return out;
}

void validate(const HandPose& pose)
{
    if (!pose.phi.allFinite()) throw InputError("hand pose: phi is not finite");
    if (!pose.theta.allFinite()) throw InputError("hand pose: theta is not finite");
}

geom::TriMesh template_mesh(const HandModel& model)
{
    geom::TriMesh m;
    m.vertices = model.template_vertices;
    m.faces = model.faces;
    m.units_scale = model.units_scale;
    return m;
}

std::vector<Vec3> pose_vertices(const HandModel& model, const HandPose& pose)
{
    const Kinematics k = forward(model, pose);
    std::vector<Vec3> out(model.template_vertices.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = global(model, k, pose, skinned(model, k, static_cast<int>(i)));
    return out;
}

geom::TriMesh pose_mesh(const HandModel& model, const HandPose& pose)
{
    geom::TriMesh m;
    m.vertices = pose_vertices(model, pose);
    m.faces = model.faces;
    m.units_scale = model.units_scale;
    return m;
}

HandPose compose_rigid(const HandModel& model, const HandPose& pose, const Mat3& R, const Vec3& t)
{
    HandPose out = pose;
    const Vec3 j0 = model.joints[0].position;
    out.phi.head<3>() = axis_angle_from_rotation(R * rotation_from_axis_angle(pose.phi.head<3>()));
    out.phi.tail<3>() = R * (j0 + pose.phi.tail<3>()) + t - j0;
    return out;
}

Eigen::MatrixXd pose_jacobian(const HandModel& model, const HandPose& pose, Wrt wrt)
{
    const Kinematics kin = forward(model, pose);
    const int n = static_cast<int>(model.template_vertices.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3 * n, wrt == Wrt::Phi ? 6 : 45);
    const Vec3 rg = pose.phi.head<3>();
    for (int i = 0; i < n; ++i) {
        if (wrt == Wrt::Phi) {
            const Vec3 vs = skinned(model, kin, i);
            J.block<3, 3>(3 * i, 0) = rotate_point_jacobian(rg, vs - model.joints[0].position);
            J.block<3, 3>(3 * i, 3) = Mat3::Identity();
        } else {
            for (int k : influencing_joints(model, i)) {
                const Vec3 z = lever(model, kin, i, k);
                J.block<3, 3>(3 * i, 3 * (k - 1)) = -kin.Rg * kin.W[k] * skew(z) * kin.Jr[k];
            }
        }
    }
    return J;
}

PoseGradient pose_vjp(const HandModel& model, const HandPose& pose, const std::vector<Vec3>& vertex_grad)
{
    const int n = static_cast<int>(model.template_vertices.size());
    if (static_cast<int>(vertex_grad.size()) != n) throw InputError("pose_vjp: gradient size mismatch");
    const Kinematics kin = forward(model, pose);
    const Mat3 Jg = so3_right_jacobian(pose.phi.head<3>());
    std::array<Mat3, kJointCount> RgW;
    for (int k = 0; k < kJointCount; ++k) RgW[k] = kin.Rg * kin.W[k];
    PoseGradient g;
    Vec3 rot_acc = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
        const Vec3& gi = vertex_grad[i];
        if (gi.isZero(0.0)) continue;
        g.phi.tail<3>() += gi;
        const Vec3 vs = skinned(model, kin, i) - model.joints[0].position;
        // d(Rg z)/dr = -Rg [z]x Jr, transposed against gi.
        rot_acc += vs.cross(kin.Rg.transpose() * gi);
        for (int k : influencing_joints(model, i)) {
            const Vec3 z = lever(model, kin, i, k);
            g.theta.segment<3>(3 * (k - 1)) += kin.Jr[k].transpose() * z.cross(RgW[k].transpose() * gi);
        }
    }
    g.phi.head<3>() = Jg.transpose() * rot_acc;
    return g;
}

int vertex_group(const HandModel& model, int vertex)
{
    int best = 0;
    double best_w = -1.0;
    for (const auto& [j, w] : model.skin_weights[vertex])
        if (w > best_w) {
            best_w = w;
            best = j;
        }
    return best == 0 ? 0 : (best - 1) / 3 + 1;
}

const char* group_name(int group)
{
    static const char* names[] = {"palm", "index", "middle", "pinky", "ring", "thumb"};
    return group >= 0 && group < 6 ? names[group] : "unknown";
}

}  // namespace hoi::hand
