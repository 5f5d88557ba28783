#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hoi/pipeline/pipeline.hpp"

namespace hoi::io {

struct LoadedScene {
    pipeline::Scene scene;
    pipeline::StageConfig config;  // defaults with the bundle's overrides applied
};

/// Reads scene.json (or the scene.json inside a directory) and every file it
/// names, relative to its directory. Keys: object, units_scale, hand_model,
/// pose_init, camera_init (optional), masks{object, object_inpainted, hand},
/// theta0 (optional, defaults to the initial articulation), seed, config.
/// Every invariant is checked before returning; errors name the file.
LoadedScene load_scene(const std::string& path, const pipeline::StageConfig& base = {});

/// Writes a bundle directory in the layout load_scene reads. Masks are stored
/// as 8-bit PNG, so they round-trip exactly when their values are k/255.
void save_scene(const std::string& dir, const pipeline::Scene& scene, const pipeline::StageConfig* config = nullptr);

enum class Primitive { Cube, Cylinder, Sphere, Composite };
enum class GraspPreset { Wrap, Pinch, Palm };

Primitive parse_primitive(const std::string& name);
GraspPreset parse_preset(const std::string& name);
const char* primitive_name(Primitive p);
const char* preset_name(GraspPreset g);
/// Cylinder for wrap, sphere for pinch, cube for palm.
Primitive default_primitive(GraspPreset g);

struct SynthSpec {
    Primitive primitive = Primitive::Cylinder;
    GraspPreset preset = GraspPreset::Wrap;
    int resolution = 256;  // square image side
    std::uint64_t seed = 0;
    double camera_rot_deg = 0.0;  // object-centred rotation of the view
    double camera_depth = 0.0;    // relative change of the camera distance
    double camera_focal = 0.0;    // relative change of the focal length
    double hand_rot_deg = 0.0;    // rotation about the hand centroid
    double hand_trans = 0.0;      // m, random direction
    double hand_depth = 0.0;      // m, along the true viewing ray through the hand centroid
    double theta_noise = 0.0;     // rad, std-dev per articulation coordinate
};

/// InputError when a magnitude is negative or the resolution is too small.
void validate(const SynthSpec& spec);

struct GateReport {
    std::vector<std::pair<std::string, double>> group_distance;  // closest |d| of each required zone group (m)
    double intersection_volume = 0.0;                            // cm^3
    bool passed = false;
};

struct SyntheticScene {
    pipeline::Scene scene;  // perturbed start state with true masks
    render::Camera true_camera;
    hand::HandPose true_pose;
    GateReport gates;
    SynthSpec spec;
};

/// Builds a primitive, closes the desk hand on it with the preset, verifies
/// the contact and penetration gates (RuntimeFailure when they fail), renders
/// the true masks, then perturbs camera and pose as requested.
SyntheticScene generate_synthetic_scene(const SynthSpec& spec);

/// Re-checks the gates of a posed hand against an object.
GateReport check_gates(const hand::HandModel& model, const hand::HandPose& pose, const geom::TriMesh& object,
                       GraspPreset preset);

std::string format_ground_truth(const SyntheticScene& s);

/// save_scene plus ground_truth.json.
void save_synthetic_scene(const std::string& dir, const SyntheticScene& s);

}  // namespace hoi::io
