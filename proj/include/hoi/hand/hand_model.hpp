#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hoi/geometry/mesh.hpp"

namespace hoi::hand {

inline constexpr int kJointCount = 16;

struct Joint {
    Vec3 position = Vec3::Zero();  // rest position (m)
    int parent = -1;               // -1 for the wrist root
};

/// Sparse skinning row: (joint, weight) pairs.
using SkinRow = std::vector<std::pair<int, double>>;

/// Articulated hand template. Joint order follows the usual 16-joint layout:
/// wrist 0, then index, middle, pinky, ring and thumb chains of three.
struct HandModel {
    std::vector<Vec3> template_vertices;
    std::vector<Face> faces;
    std::vector<Joint> joints;
    std::vector<SkinRow> skin_weights;
    std::vector<int> palmar_faces;
    std::vector<int> contact_zone_vertices;
    double units_scale = 1.0;
};

/// Global pose phi = (axis-angle, translation) and articulation theta
/// (15 joints x axis-angle, joint k at theta[3(k-1) .. 3(k-1)+2]).
struct HandPose {
    Vec6 phi = Vec6::Zero();
    Vec45 theta = Vec45::Zero();
};

/// Throws InputError naming the first violated invariant (bad weight rows
/// report their vertex index).
void validate(const HandModel& model);

/// Joints ordered parents-first.
std::vector<int> joint_order(const HandModel& model);

/// True if `joint` equals `ancestor` or lies below it in the tree.
bool in_subtree(const HandModel& model, int joint, int ancestor);

/// Finite check plus wrapping of every axis-angle to magnitude below pi.
HandPose wrapped(const HandPose& pose);
void validate(const HandPose& pose);

geom::TriMesh template_mesh(const HandModel& model);

/// Linear blend skinning followed by the global rigid transform about the wrist.
geom::TriMesh pose_mesh(const HandModel& model, const HandPose& pose);
std::vector<Vec3> pose_vertices(const HandModel& model, const HandPose& pose);

/// Pose whose mesh equals G applied to pose_mesh(pose), G(x) = R x + t.
HandPose compose_rigid(const HandModel& model, const HandPose& pose, const Mat3& R, const Vec3& t);

enum class Wrt { Phi, Theta };

/// Dense Jacobian of the stacked posed vertices: 3N x 6 (phi) or 3N x 45 (theta).
Eigen::MatrixXd pose_jacobian(const HandModel& model, const HandPose& pose, Wrt wrt);

struct PoseGradient {
    Vec6 phi = Vec6::Zero();
    Vec45 theta = Vec45::Zero();
};

/// Vector-Jacobian product: gradient of a scalar w.r.t. (phi, theta) given its
/// gradient w.r.t. every posed vertex.
PoseGradient pose_vjp(const HandModel& model, const HandPose& pose, const std::vector<Vec3>& vertex_grad);

/// Finger group of a vertex from its dominant joint: 0 palm, 1 index,
/// 2 middle, 3 pinky, 4 ring, 5 thumb.
int vertex_group(const HandModel& model, int vertex);
const char* group_name(int group);

/// Deterministic procedural hand (~860 vertices): a palm box plus three
/// capsule segments per finger, rigid per segment with blended proximal caps.
HandModel generate_desk_hand();

/// Flexion axis (unit) of the chain containing joint k in the desk hand's frame.
Vec3 desk_flexion_axis(int joint);

/// JSON I/O (keys: vertices, faces, joints{position,parent}, skin_weights,
/// palmar_faces, contact_zone_vertices, units_scale). Positions are scaled to
/// meters by units_scale on load.
HandModel load_hand_model(const std::string& path);
HandModel parse_hand_model(const std::string& text, const std::string& name);
std::string format_hand_model(const HandModel& model);
void save_hand_model(const std::string& path, const HandModel& model);

HandPose load_pose(const std::string& path);
HandPose parse_pose(const std::string& text, const std::string& name);
std::string format_pose(const HandPose& pose);
void save_pose(const std::string& path, const HandPose& pose);

}  // namespace hoi::hand
