#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hoi/contact/contact.hpp"
#include "hoi/geometry/sdf.hpp"
#include "hoi/hand/hand_model.hpp"
#include "hoi/losses/hand_losses.hpp"
#include "hoi/losses/mask_losses.hpp"
#include "hoi/render/camera.hpp"
#include "hoi/render/mask.hpp"
#include "hoi/render/soft_render.hpp"

namespace hoi::pipeline {

struct SceneMasks {
    render::Mask object;            // M_o, visible object
    render::Mask object_inpainted;  // complete object
    render::Mask hand;              // M_h, visible hand
};

/// Everything one optimization run needs, expressed in the object frame.
struct Scene {
    geom::TriMesh object;
    hand::HandModel hand_model;
    hand::HandPose pose;
    render::Camera camera;
    bool has_camera = true;  // false: stage 1 builds its own initial camera
    SceneMasks masks;
    Vec45 theta0 = Vec45::Zero();
    std::uint64_t seed = 0;
};

/// Mask sizes agree (and match the camera when present), theta0 finite,
/// object and hand model valid.
void validate(const Scene& scene);

/// Soft render settings used while optimizing.
inline render::SoftRenderConfig pipeline_render()
{
    render::SoftRenderConfig r;
    r.sigma = 0.3;
    return r;
}

struct StageConfig {
    double lr_camera = 1e-2;
    double lr_global_stage2 = 1e-2;
    double lr_global_stage3 = 1e-4;
    double lr_theta_stage3 = 1e-2;
    double stop_loss = 0.1;
    int max_iters = 1000;
    std::vector<int> icp_iterations_at = {100, 200};
    losses::LossWeights weights;
    double ot_weight = 1.0;
    double ot_anneal_iou = 0.5;  // OT term dropped once the hard IoU exceeds this
    int stage3_iters = 500;
    int resolution = 256;        // longest image side used while optimizing
    int sdf_resolution = 96;
    int init_iters = 50;         // per yaw hypothesis when the camera is rebuilt
    int icp_max_iters = 50;
    render::SoftRenderConfig render = pipeline_render();  // sigma 0.3 px
    losses::SinkhornConfig sinkhorn;
    contact::ExtractOptions contact;
};

/// InputError on non-positive rates, ICP triggers outside [1, max_iters), and
/// similar contract breaks.
void validate(const StageConfig& cfg);

/// Adam with per-coordinate learning rates.
class Adam {
public:
    explicit Adam(Eigen::VectorXd lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    /// x -= lr * m_hat / (sqrt(v_hat) + eps)
    void step(Eigen::VectorXd& x, const Eigen::VectorXd& grad);
    /// Clears the moments (used after a discrete jump of the parameters).
    void reset();
    int steps() const { return t_; }

private:
    Eigen::VectorXd lr_, m_, v_;
    double b1_, b2_, eps_;
    int t_ = 0;
};

struct TracePoint {
    int iteration = 0;
    double loss = 0.0;
    std::vector<double> terms;  // named by StageTrace::term_names
};

struct StageTrace {
    std::vector<std::string> term_names;
    std::vector<TracePoint> points;
    int best_iteration = -1;  // lowest loss in the trace
    double best_loss = std::numeric_limits<double>::infinity();
    int returned_iteration = -1;  // iterate handed to the next stage
    std::string stop_reason;  // converged | max_iters | failed
    std::vector<std::string> events;

    double initial_loss() const { return points.empty() ? best_loss : points.front().loss; }
};

/// Working image size: the mask size scaled so its longest side is at most
/// `resolution` (never upscaled).
std::pair<int, int> working_size(int width, int height, int resolution);

struct Stage1Result {
    render::Camera camera;  // at the mask resolution
    StageTrace trace;
    bool reinitialized = false;
};

/// Camera loss at one camera: (1 - soft IoU) + ot_weight * W / diag while
/// the hard IoU is at most ot_anneal_iou, W the Sinkhorn distance in pixels.
struct CameraObjective {
    double combined = 0.0;
    double mask_loss = 0.0;
    double ot = 0.0;        // normalized distance, 0 when annealed off
    double hard_iou = 0.0;
    bool empty_render = false;
    Eigen::Matrix<double, 7, 1> grad = Eigen::Matrix<double, 7, 1>::Zero();  // rotation, translation, log focal
};

CameraObjective camera_objective(const geom::TriMesh& object, const render::Camera& cam, const render::Mask& target,
                                 const StageConfig& cfg, bool with_grad = true);

/// Camera whose view centres the object and matches the target mask's
/// bounding box size, looking from the given yaw (about +z) at 30 degrees elevation.
render::Camera initial_camera(const geom::TriMesh& object, const render::Mask& target, double focal, double yaw);

Stage1Result stage1_camera_setup(const Scene& scene, const StageConfig& cfg);

struct IcpEvent {
    int iteration = 0;
    bool applied = false;
    std::string reason;
    int candidates = 0;
    Vec3 translation = Vec3::Zero();
    double mean_before = 0.0, mean_after = 0.0;
};

struct Stage2Result {
    hand::HandPose pose;
    StageTrace trace;
    std::vector<IcpEvent> icp;
};

/// Optimizes phi only, against the visible hand mask outside the visible
/// object, with contact ICP at the configured iterations. Returns the best
/// iterate since the last applied registration.
Stage2Result stage2_contact_alignment(const Scene& scene, const render::Camera& camera, const StageConfig& cfg);

struct Stage3Result {
    hand::HandPose pose;
    StageTrace trace;
    losses::RefinementTerms initial, best;
};

/// Joint refinement of (phi, theta). `object_sdf` may be supplied to reuse a
/// cached grid; otherwise one is built at cfg.sdf_resolution.
Stage3Result stage3_refinement(const Scene& scene, const render::Camera& camera, const hand::HandPose& start,
                               const StageConfig& cfg, const geom::SdfQuery* object_sdf = nullptr);

struct FinalMetrics {
    double object_iou = 0.0;  // hard silhouette vs the complete object mask
    double hand_iou = 0.0;    // visible hand vs the hand mask
    double intersection_volume = 0.0;  // cm^3
    double sim_displacement = -1.0;    // cm, -1 when not computable
    double penetration = 0.0;          // exact-SDF penetration loss (m)
    double contact = 0.0;              // exact-SDF contact loss (m)
};

FinalMetrics final_metrics(const Scene& scene, const render::Camera& camera, const hand::HandPose& pose,
                           std::vector<std::string>* warnings = nullptr);

struct StageOutcome {
    std::string status = "skipped";  // ok | failed | skipped
    std::string error;
    StageTrace trace;
    double seconds = 0.0;
};

struct RunReport {
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string config_json;
    StageOutcome stage1, stage2, stage3;
    bool camera_reinitialized = false;
    std::vector<IcpEvent> icp;
    render::Camera camera;
    hand::HandPose pose;
    FinalMetrics metrics;
    std::vector<std::string> warnings;
    bool timing = false;
    double seconds = 0.0;
};

enum class StageSet { All, Stage1, Stage2, Stage3 };

/// Runs the selected stages; a failing stage is recorded and later stages
/// continue from the best state so far.
RunReport run(const Scene& scene, const StageConfig& cfg, StageSet stages = StageSet::All, bool timing = false);
RunReport run_full(const Scene& scene, const StageConfig& cfg, bool timing = false);

std::string format_config(const StageConfig& cfg);
/// Applies the keys present in a JSON object onto `cfg` (unknown keys rejected).
StageConfig parse_config(const std::string& json_text, const StageConfig& base, const std::string& name);
std::string config_hash(const StageConfig& cfg, std::uint64_t seed);
std::string format_report(const RunReport& report);

std::string version_string();

}  // namespace hoi::pipeline
