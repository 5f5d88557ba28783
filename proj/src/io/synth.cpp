#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "hoi/geometry/mesh_index.hpp"
#include "hoi/geometry/primitives.hpp"
#include "hoi/geometry/sdf.hpp"
#include "hoi/geometry/volume.hpp"
#include "hoi/io/scene_io.hpp"
#include "hoi/render/visibility.hpp"
#include "hoi/rotation.hpp"
#include "json.hpp"

namespace hoi::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPalmSurface = -0.013;  // palmar face of the desk hand palm (hand frame z)
constexpr double kGap = 0.0005;          // clearance left at each contact (m)
constexpr double kGateDistance = 0.002;
constexpr double kGateVolume = 0.1;
constexpr int kPalmGroup = 0, kIndexGroup = 1, kThumbGroup = 5;

double deg(double d)
{
    return d * kPi / 180.0;
}

geom::TriMesh x_axis_cylinder(double radius, double length)
{
    return geom::transformed(geom::make_cylinder(Vec3::Zero(), radius, length, 24),
                             rotation_from_axis_angle(Vec3(0.0, kPi / 2.0, 0.0)), Vec3::Zero());
}

geom::TriMesh build_object(Primitive p, double scale)
{
    switch (p) {
    case Primitive::Cube:
        return geom::make_box(Vec3::Constant(-0.03 * scale), Vec3::Constant(0.03 * scale));
    case Primitive::Cylinder:
        return x_axis_cylinder(0.035 * scale, 0.12 * scale);
    case Primitive::Sphere:
        return geom::make_icosphere(Vec3::Zero(), 0.04 * scale, 2);
    case Primitive::Composite:
        return geom::merge({x_axis_cylinder(0.03 * scale, 0.10 * scale),
                            geom::make_box(Vec3(-0.015, -0.015, 0.02) * scale, Vec3(0.015, 0.015, 0.05) * scale)});
    }
    throw InputError("unknown primitive");
}

std::vector<int> required_groups(GraspPreset g)
{
    switch (g) {
    case GraspPreset::Wrap: return {0, 1, 2, 3, 4};
    case GraspPreset::Pinch: return {kIndexGroup, kThumbGroup};
    case GraspPreset::Palm: return {kPalmGroup};
    }
    return {};
}

/// Hand-frame search state: the object placed in the desk hand's frame.
struct Closer {
    const hand::HandModel& model;
    geom::TriMesh object;
    geom::Aabb box;
    geom::ExactSdf sdf;
    std::vector<std::vector<int>> group_vertices, group_zone;

    Closer(const hand::HandModel& m, const geom::TriMesh& object_in_hand)
        : model(m), object(object_in_hand), box(geom::bounding_box(object_in_hand)), sdf(object_in_hand)
    {
        group_vertices.resize(6);
        group_zone.resize(6);
        for (int v = 0; v < static_cast<int>(m.template_vertices.size()); ++v)
            group_vertices[hand::vertex_group(m, v)].push_back(v);
        for (int v : m.contact_zone_vertices) group_zone[hand::vertex_group(m, v)].push_back(v);
    }

    /// True when some listed vertex is closer than `gap` to the object (or inside it).
    bool touches(const std::vector<Vec3>& verts, const std::vector<int>& ids, double gap) const
    {
        for (int v : ids) {
            const Vec3 outside = (box.min - verts[v]).cwiseMax(verts[v] - box.max).cwiseMax(0.0);
            if (outside.norm() >= gap) continue;
            if (sdf.distance(verts[v]) < gap) return true;
        }
        return false;
    }

    double overlap(const hand::HandPose& pose) const
    {
        return geom::intersection_volume(hand::pose_mesh(model, pose), object);
    }

    double zone_distance(const std::vector<Vec3>& verts, int group) const
    {
        double d = 1e300;
        for (int v : group_zone[group]) d = std::min(d, std::abs(sdf.distance(verts[v])));
        return d;
    }
};

struct Profile {
    double w[3];
    double abduction;
};

void set_chain(Vec45& theta, int chain, double curl, const Profile& p)
{
    for (int s = 0; s < 3; ++s) {
        const int joint = 1 + 3 * chain + s;
        const Vec3 axis = hand::desk_flexion_axis(joint);
        Vec3 r = curl * p.w[s] * axis;
        if (s == 0 && p.abduction != 0.0)
            r = axis_angle_from_rotation(rotation_from_axis_angle(Vec3(0.0, 0.0, p.abduction)) *
                                         rotation_from_axis_angle(r));
        theta.segment<3>(3 * (joint - 1)) = r;
    }
}

/// Curls one chain until its first vertex reaches kGap from the surface.
/// Returns the zone distance reached, or a large value when no profile makes contact.
double close_chain(const Closer& c, hand::HandPose& pose, int chain, const std::vector<Profile>& profiles)
{
    const int group = chain + 1;
    double best = 1e300;
    Vec45 best_theta = pose.theta;
    const double base_overlap = c.overlap(pose);
    for (const Profile& prof : profiles) {
        hand::HandPose trial = pose;
        auto open_at = [&](double curl) {
            set_chain(trial.theta, chain, curl, prof);
            return !c.touches(hand::pose_vertices(c.model, trial), c.group_vertices[group], kGap);
        };
        if (!open_at(0.0)) continue;
        double lo = 0.0, hi = -1.0;
        for (double curl = 0.04; curl <= 1.8 + 1e-9; curl += 0.04) {
            if (!open_at(curl)) {
                hi = curl;
                break;
            }
            lo = curl;
        }
        if (hi < 0.0) continue;
        for (int k = 0; k < 20; ++k) {
            const double mid = 0.5 * (lo + hi);
            (open_at(mid) ? lo : hi) = mid;
        }
        set_chain(trial.theta, chain, lo, prof);
        const double zd = c.zone_distance(hand::pose_vertices(c.model, trial), group);
        if (zd < best && c.overlap(trial) <= base_overlap) {
            best = zd;
            best_theta = trial.theta;
        }
        if (best <= 2.0 * kGap) break;
    }
    pose.theta = best_theta;
    return best;
}

/// Sets a chain to a mild curl, backing off if it would touch the object.
void relax_chain(const Closer& c, hand::HandPose& pose, int chain, double curl)
{
    const Profile straight{{1.0, 1.0, 1.0}, 0.0};
    for (double k = curl; k >= 0.0; k -= 0.05) {
        set_chain(pose.theta, chain, k, straight);
        if (!c.touches(hand::pose_vertices(c.model, pose), c.group_vertices[chain + 1], kGap)) return;
    }
    set_chain(pose.theta, chain, 0.0, straight);
}

std::vector<Profile> finger_profiles()
{
    return {{{1.0, 1.0, 1.0}, 0.0}, {{0.6, 1.2, 1.0}, 0.0}, {{0.3, 1.2, 1.2}, 0.0}, {{1.2, 0.8, 0.5}, 0.0},
            {{1.0, 0.4, 0.3}, 0.0}, {{0.2, 1.0, 1.6}, 0.0}, {{0.8, 1.0, 1.4}, 0.0}, {{0.5, 0.8, 1.8}, 0.0},
            {{1.0, 1.4, 0.6}, 0.0}};
}

std::vector<Profile> spread_profiles()
{
    std::vector<Profile> out;
    for (double ab : {0.0, 0.15, -0.15})
        for (const Profile& p : finger_profiles()) out.push_back({{p.w[0], p.w[1], p.w[2]}, ab});
    return out;
}

std::vector<Profile> thumb_profiles()
{
    std::vector<Profile> out;
    for (double ab : {0.0, -0.5, 0.4, -0.9, 0.8, 1.2})
        for (const Profile& p : finger_profiles()) out.push_back({{p.w[0], p.w[1], p.w[2]}, ab});
    return out;
}

struct Grasp {
    hand::HandPose pose;  // in the object frame
    GateReport gates;
};

/// Object pose in the hand frame: x_hand = R x_obj + p, palm facing up (+z of the object).
const Mat3& palm_up()
{
    static const Mat3 R = Vec3(-1.0, 1.0, -1.0).asDiagonal();
    return R;
}

Grasp try_grasp(const hand::HandModel& model, const geom::TriMesh& object, GraspPreset preset, const Vec3& p)
{
    const Mat3& R = palm_up();
    const Closer closer(model, geom::transformed(object, R, p));
    hand::HandPose pose;
    switch (preset) {
    case GraspPreset::Palm:
        for (int chain = 0; chain < 4; ++chain) relax_chain(closer, pose, chain, 0.15);
        relax_chain(closer, pose, 4, 0.1);
        break;
    case GraspPreset::Wrap:
        for (int chain = 0; chain < 4; ++chain) close_chain(closer, pose, chain, spread_profiles());
        if (close_chain(closer, pose, 4, thumb_profiles()) > kGateDistance) relax_chain(closer, pose, 4, 0.2);
        break;
    case GraspPreset::Pinch:
        close_chain(closer, pose, 0, finger_profiles());
        close_chain(closer, pose, 4, thumb_profiles());
        for (int chain = 1; chain < 4; ++chain) relax_chain(closer, pose, chain, 0.3);
        break;
    }
    Grasp g;
    g.pose = hand::compose_rigid(model, pose, R.transpose(), -R.transpose() * p);
    g.gates = check_gates(model, g.pose, object, preset);
    return g;
}

std::vector<Vec3> placements(GraspPreset preset, const geom::TriMesh& object)
{
    const geom::Aabb box = geom::bounding_box(object);
    // Object bottom (min z) rests kGap above the palmar face.
    const double pz = kPalmSurface - kGap + box.min.z();
    switch (preset) {
    case GraspPreset::Palm: return {Vec3(0.0, 0.055, pz), Vec3(0.0, 0.05, pz)};
    case GraspPreset::Wrap: return {Vec3(0.0, 0.065, pz), Vec3(0.0, 0.07, pz), Vec3(0.0, 0.06, pz)};
    case GraspPreset::Pinch: {
        std::vector<Vec3> out;
        for (double z : {-0.035, -0.045, -0.055})
            for (double y : {0.13, 0.12, 0.14, 0.11})
                for (double x : {0.03, 0.04, 0.02}) out.emplace_back(x, y, z);
        return out;
    }
    }
    return {};
}

Vec3 random_axis(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 a(n(rng), n(rng), n(rng));
    return a.norm() > 1e-12 ? Vec3(a.normalized()) : Vec3(Vec3::UnitZ());
}

double random_sign(std::mt19937_64& rng)
{
    return std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0;
}

render::Camera true_camera(const geom::TriMesh& object, const geom::TriMesh& hand_mesh, int res, std::mt19937_64& rng)
{
    geom::Aabb box = geom::bounding_box(object);
    box.extend(geom::bounding_box(hand_mesh));
    const Vec3 target = box.center();
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    const double yaw = deg(60.0 + 25.0 * jitter(rng));
    const double el = deg(20.0 + 10.0 * jitter(rng));
    const double dist = 0.45;
    const Vec3 eye = target + dist * Vec3(std::cos(el) * std::cos(yaw), std::cos(el) * std::sin(yaw), std::sin(el));
    double focal = res * dist / box.diagonal();
    std::vector<Vec3> pts = object.vertices;
    pts.insert(pts.end(), hand_mesh.vertices.begin(), hand_mesh.vertices.end());
    for (int attempt = 0; attempt < 20; ++attempt) {
        const render::Camera cam = render::look_at(eye, target, Vec3::UnitZ(), focal, res, res);
        bool inside = true;
        for (const render::Projection& p : render::project_points(pts, cam))
            if (!p.in_front || p.px.minCoeff() < 3.0 || p.px.maxCoeff() > res - 3.0) inside = false;
        if (inside) return cam;
        focal *= 0.9;
    }
    throw RuntimeFailure("synthetic scene: could not fit the grasp in the image");
}

}  // namespace

Primitive parse_primitive(const std::string& name)
{
    if (name == "cube") return Primitive::Cube;
    if (name == "cylinder") return Primitive::Cylinder;
    if (name == "sphere") return Primitive::Sphere;
    if (name == "composite") return Primitive::Composite;
    throw InputError("unknown primitive '" + name + "' (cube, cylinder, sphere, composite)");
}

GraspPreset parse_preset(const std::string& name)
{
    if (name == "wrap") return GraspPreset::Wrap;
    if (name == "pinch") return GraspPreset::Pinch;
    if (name == "palm") return GraspPreset::Palm;
    throw InputError("unknown grasp preset '" + name + "' (wrap, pinch, palm)");
}

const char* primitive_name(Primitive p)
{
    switch (p) {
    case Primitive::Cube: return "cube";
    case Primitive::Cylinder: return "cylinder";
    case Primitive::Sphere: return "sphere";
    case Primitive::Composite: return "composite";
    }
    return "?";
}

const char* preset_name(GraspPreset g)
{
    switch (g) {
    case GraspPreset::Wrap: return "wrap";
    case GraspPreset::Pinch: return "pinch";
    case GraspPreset::Palm: return "palm";
    }
    return "?";
}

Primitive default_primitive(GraspPreset g)
{
    switch (g) {
    case GraspPreset::Wrap: return Primitive::Cylinder;
    case GraspPreset::Pinch: return Primitive::Sphere;
    case GraspPreset::Palm: return Primitive::Cube;
    }
    return Primitive::Cube;
}

void validate(const SynthSpec& s)
{
    if (s.resolution < 32) throw InputError("synth: resolution must be >= 32");
    for (double v : {s.camera_rot_deg, s.camera_depth, s.camera_focal, s.hand_rot_deg, s.hand_trans, s.hand_depth,
                     s.theta_noise})
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("synth: perturbation magnitudes must be finite and >= 0");
    if (s.camera_depth >= 1.0 || s.camera_focal >= 1.0)
        throw InputError("synth: relative depth and focal perturbations must be < 1");
}

GateReport check_gates(const hand::HandModel& model, const hand::HandPose& pose, const geom::TriMesh& object,
                       GraspPreset preset)
{
    const geom::TriMesh hand_mesh = hand::pose_mesh(model, pose);
    const geom::ExactSdf sdf(object);
    GateReport r;
    r.passed = true;
    for (int g : required_groups(preset)) {
        double d = 1e300;
        for (int v : model.contact_zone_vertices)
            if (hand::vertex_group(model, v) == g) d = std::min(d, std::abs(sdf.distance(hand_mesh.vertices[v])));
        r.group_distance.emplace_back(hand::group_name(g), d);
        if (!(d <= kGateDistance)) r.passed = false;
    }
    r.intersection_volume = geom::intersection_volume(hand_mesh, object);
    if (!(r.intersection_volume < kGateVolume)) r.passed = false;
    return r;
}

SyntheticScene generate_synthetic_scene(const SynthSpec& spec)
{
    validate(spec);
    SyntheticScene out;
    out.spec = spec;
    pipeline::Scene& scene = out.scene;
    scene.seed = spec.seed;
    scene.hand_model = hand::generate_desk_hand();
    const double scale = spec.preset == GraspPreset::Pinch ? 0.7 : 1.0;
    scene.object = build_object(spec.primitive, scale);

    bool found = false;
    Grasp last;
    for (const Vec3& p : placements(spec.preset, scene.object)) {
        last = try_grasp(scene.hand_model, scene.object, spec.preset, p);
        if (last.gates.passed) {
            found = true;
            break;
        }
    }
    out.gates = last.gates;
    if (!found) {
        std::string detail;
        for (const auto& [g, d] : last.gates.group_distance) detail += " " + g + "=" + std::to_string(d * 1000.0) + "mm";
        throw RuntimeFailure(std::string("synthetic scene: ") + preset_name(spec.preset) + " on " +
                             primitive_name(spec.primitive) + " fails verification (zone distances" + detail +
                             ", intersection " + std::to_string(last.gates.intersection_volume) + " cm^3)");
    }
    out.true_pose = last.pose;

    std::mt19937_64 rng(spec.seed);
    const geom::TriMesh hand_mesh = hand::pose_mesh(scene.hand_model, out.true_pose);
    out.true_camera = true_camera(scene.object, hand_mesh, spec.resolution, rng);
    const render::Camera& cam = out.true_camera;

    const geom::MeshIndex object_index(scene.object), hand_index(hand_mesh);
    const std::vector<int> labels = render::visibility_labels({&object_index, &hand_index}, cam);
    scene.masks.object = render::label_mask(labels, cam.width, cam.height, 0);
    scene.masks.hand = render::label_mask(labels, cam.width, cam.height, 1);
    scene.masks.object_inpainted = render::hard_silhouette(object_index, cam);
    if (scene.masks.object.sum() < 1.0 || scene.masks.hand.sum() < 1.0)
        throw RuntimeFailure("synthetic scene: hand or object is fully hidden in the true view");

    // Draws happen in a fixed order, independent of the magnitudes.
    const Vec3 cam_axis = random_axis(rng);
    const double depth_sign = random_sign(rng), focal_sign = random_sign(rng);
    const Vec3 hand_axis = random_axis(rng);
    const Vec3 hand_dir = random_axis(rng);
    const double hand_depth_sign = random_sign(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec45 noise;
    for (int i = 0; i < 45; ++i) noise[i] = normal(rng);

    render::Camera start = cam;
    start.rotation = axis_angle_from_rotation(cam.R() * rotation_from_axis_angle(deg(spec.camera_rot_deg) * cam_axis));
    start.translation = cam.translation * (1.0 + depth_sign * spec.camera_depth);
    start.fx = cam.fx * (1.0 + focal_sign * spec.camera_focal);
    start.fy = cam.fy * (1.0 + focal_sign * spec.camera_focal);
    scene.camera = start;
    scene.has_camera = true;

    Vec3 centroid = Vec3::Zero();
    for (const Vec3& v : hand_mesh.vertices) centroid += v;
    centroid /= static_cast<double>(hand_mesh.vertices.size());
    const Mat3 Rh = rotation_from_axis_angle(deg(spec.hand_rot_deg) * hand_axis);
    const Vec3 ray = (centroid - cam.center()).normalized();
    const Vec3 shift = spec.hand_trans * hand_dir + hand_depth_sign * spec.hand_depth * ray;
    scene.pose = hand::compose_rigid(scene.hand_model, out.true_pose, Rh, centroid - Rh * centroid + shift);
    scene.pose.theta = out.true_pose.theta + spec.theta_noise * noise;
    scene.theta0 = scene.pose.theta;
    pipeline::validate(scene);
    return out;
}

std::string format_ground_truth(const SyntheticScene& s)
{
    json j;
    j["camera"] = json::parse(render::format_camera(s.true_camera));
    j["pose"] = json::parse(hand::format_pose(s.true_pose));
    j["preset"] = preset_name(s.spec.preset);
    j["primitive"] = primitive_name(s.spec.primitive);
    j["seed"] = s.spec.seed;
    j["resolution"] = s.spec.resolution;
    j["perturbation"] = {{"camera_rot_deg", s.spec.camera_rot_deg}, {"camera_depth", s.spec.camera_depth},
                         {"camera_focal", s.spec.camera_focal},     {"hand_rot_deg", s.spec.hand_rot_deg},
                         {"hand_trans_m", s.spec.hand_trans},       {"hand_depth_m", s.spec.hand_depth},
                         {"theta_noise_rad", s.spec.theta_noise}};
    json groups = json::object();
    for (const auto& [g, d] : s.gates.group_distance) groups[g] = d;
    j["gates"] = {{"zone_distance_m", groups},
                  {"intersection_volume_cm3", s.gates.intersection_volume},
                  {"passed", s.gates.passed}};
    return j.dump(2) + "\n";
}

void save_synthetic_scene(const std::string& dir, const SyntheticScene& s)
{
    save_scene(dir, s.scene);
    write_file_atomic((fs::path(dir) / "ground_truth.json").string(), format_ground_truth(s));
}

}  // namespace hoi::io
