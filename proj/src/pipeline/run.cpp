#include <chrono>
#include <memory>

#include <Eigen/Core>

#include "hoi/eval/metrics.hpp"
#include "hoi/geometry/mesh_index.hpp"
#include "hoi/geometry/volume.hpp"
#include "hoi/pipeline/pipeline.hpp"
#include "hoi/render/visibility.hpp"
#include "json.hpp"

namespace hoi::pipeline {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
void run_stage(StageOutcome& out, std::vector<std::string>& warnings, const char* name, F&& body)
{
    const auto t0 = Clock::now();
    try {
        body();
        out.status = "ok";
    } catch (const std::exception& e) {
        out.status = "failed";
        out.error = e.what();
        out.trace.stop_reason = "failed";
        warnings.push_back(std::string(name) + " failed: " + e.what());
    }
    out.seconds = seconds_since(t0);
}

json vec_json(const Eigen::VectorXd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json trace_json(const StageOutcome& s, bool timing)
{
    json j;
    j["status"] = s.status;
    if (!s.error.empty()) j["error"] = s.error;
    const StageTrace& t = s.trace;
    j["iterations"] = t.points.size();
    j["stop_reason"] = t.stop_reason;
    j["best_iteration"] = t.best_iteration;
    j["best_loss"] = t.points.empty() ? json(nullptr) : json(t.best_loss);
    j["returned_iteration"] = t.returned_iteration;
    j["initial_loss"] = t.points.empty() ? json(nullptr) : json(t.initial_loss());
    j["events"] = t.events;
    json pts = json::array();
    for (const TracePoint& p : t.points) {
        json e;
        e["iteration"] = p.iteration;
        e["loss"] = p.loss;
        for (std::size_t k = 0; k < p.terms.size() && k < t.term_names.size(); ++k) e[t.term_names[k]] = p.terms[k];
        pts.push_back(e);
    }
    j["trace"] = pts;
    if (timing) j["seconds"] = s.seconds;
    return j;
}

}  // namespace

FinalMetrics final_metrics(const Scene& scene, const render::Camera& camera, const hand::HandPose& pose,
                           std::vector<std::string>* warnings)
{
    FinalMetrics m;
    const geom::TriMesh hand_mesh = hand::pose_mesh(scene.hand_model, pose);
    const geom::MeshIndex object_index(scene.object), hand_index(hand_mesh);
    m.object_iou = render::hard_iou(render::hard_silhouette(object_index, camera), scene.masks.object_inpainted);
    const std::vector<int> labels = render::visibility_labels({&object_index, &hand_index}, camera);
    m.hand_iou = render::hard_iou(render::label_mask(labels, camera.width, camera.height, 1), scene.masks.hand);

    const geom::ExactSdf sdf(scene.object);
    m.penetration = losses::penetration_loss(hand_mesh, sdf).value;
    m.contact = losses::contact_loss(hand_mesh, scene.hand_model.contact_zone_vertices, sdf).value;
    try {
        m.intersection_volume = geom::intersection_volume(hand_mesh, scene.object);
        eval::SimConfig sim;
        sim.seed = scene.seed;
        m.sim_displacement = eval::simulation_displacement(hand_mesh, scene.object, sim).displacement_cm;
    } catch (const ContractError& e) {
        if (warnings) warnings->push_back(std::string("physical metrics skipped: ") + e.what());
    }
    return m;
}

RunReport run(const Scene& scene, const StageConfig& cfg, StageSet stages, bool timing)
{
    validate(scene);
    validate(cfg);
    const auto t0 = Clock::now();
    RunReport r;
    r.seed = scene.seed;
    r.config_json = format_config(cfg);
    r.config_hash = config_hash(cfg, scene.seed);
    r.timing = timing;
    r.camera = scene.camera;
    r.pose = scene.pose;
    bool have_camera = scene.has_camera;

    if (stages == StageSet::All || stages == StageSet::Stage1)
        run_stage(r.stage1, r.warnings, "stage 1", [&] {
            Stage1Result s = stage1_camera_setup(scene, cfg);
            r.stage1.trace = std::move(s.trace);
            r.camera_reinitialized = s.reinitialized;
            r.camera = s.camera;
            have_camera = true;
        });
    if (stages == StageSet::All || stages == StageSet::Stage2)
        run_stage(r.stage2, r.warnings, "stage 2", [&] {
            if (!have_camera) throw InputError("stage 2 needs a camera");
            Stage2Result s = stage2_contact_alignment(scene, r.camera, cfg);
            r.stage2.trace = std::move(s.trace);
            r.icp = std::move(s.icp);
            r.pose = s.pose;
        });
    if (stages == StageSet::All || stages == StageSet::Stage3)
        run_stage(r.stage3, r.warnings, "stage 3", [&] {
            if (!have_camera) throw InputError("stage 3 needs a camera");
            Stage3Result s = stage3_refinement(scene, r.camera, r.pose, cfg);
            r.stage3.trace = std::move(s.trace);
            r.pose = s.pose;
        });
    for (const StageOutcome* s : {&r.stage1, &r.stage2, &r.stage3})
        for (const std::string& e : s->trace.events)
            if (e.find("skipped") != std::string::npos) r.warnings.push_back(e);

    if (have_camera) {
        try {
            r.metrics = final_metrics(scene, r.camera, r.pose, &r.warnings);
        } catch (const std::exception& e) {
            r.warnings.push_back(std::string("metrics failed: ") + e.what());
        }
    }
    r.seconds = seconds_since(t0);
    return r;
}

RunReport run_full(const Scene& scene, const StageConfig& cfg, bool timing)
{
    return run(scene, cfg, StageSet::All, timing);
}

std::string format_report(const RunReport& r)
{
    json j;
    j["versions"] = {{"hoi_align", version_string()},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"libpng", render::png_library_version()}};
    j["seed"] = r.seed;
    j["config_hash"] = r.config_hash;
    j["config"] = json::parse(r.config_json);
    j["stages"] = {{"stage1", trace_json(r.stage1, r.timing)},
                   {"stage2", trace_json(r.stage2, r.timing)},
                   {"stage3", trace_json(r.stage3, r.timing)}};
    j["stages"]["stage1"]["camera_reinitialized"] = r.camera_reinitialized;
    json icp = json::array();
    for (const IcpEvent& e : r.icp)
        icp.push_back({{"iteration", e.iteration},
                       {"applied", e.applied},
                       {"reason", e.reason},
                       {"candidates", e.candidates},
                       {"translation", vec_json(e.translation)},
                       {"mean_before", e.mean_before},
                       {"mean_after", e.mean_after}});
    j["stages"]["stage2"]["icp"] = icp;
    j["camera"] = json::parse(render::format_camera(r.camera));
    j["pose"] = {{"phi", vec_json(r.pose.phi)}, {"theta", vec_json(r.pose.theta)}};
    j["metrics"] = {{"object_iou", r.metrics.object_iou},
                    {"hand_iou", r.metrics.hand_iou},
                    {"intersection_volume_cm3", r.metrics.intersection_volume},
                    {"simulation_displacement_cm", r.metrics.sim_displacement},
                    {"penetration_m", r.metrics.penetration},
                    {"contact_m", r.metrics.contact}};
    j["warnings"] = r.warnings;
    if (r.timing) j["seconds"] = r.seconds;
    return j.dump(2) + "\n";
}

}  // namespace hoi::pipeline
