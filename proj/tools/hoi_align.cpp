#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hoi/eval/metrics.hpp"
#include "hoi/geometry/mesh_io.hpp"
#include "hoi/io/scene_io.hpp"
#include "json.hpp"

using namespace hoi;
using nlohmann::json;

namespace {

struct RunOptions {
    std::string scene;
    std::string report;
    std::string hand_out;
    std::string camera_out;
    std::string config;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int max_iters = 0;
    std::string weights;
    int resolution = 0;
    double ot_weight = -1.0;
    bool timing = false;
};

struct SynthOptions {
    std::string out;
    std::string preset = "wrap";
    std::string primitive;
    int resolution = 256;
    std::uint64_t seed = 0;
    double rot = 0.0, depth = 0.0, focal = 0.0;
    double hand_rot = 0.0, hand_trans = 0.0, hand_depth = 0.0, theta = 0.0;
};

struct EvalOptions {
    std::string pred, gt, hand, object, report;
    int samples = 10000;
    std::uint64_t seed = 0;
};

void add_run_flags(CLI::App* cmd, RunOptions& o)
{
    cmd->add_option("scene", o.scene, "scene.json or bundle directory")->required();
    cmd->add_option("--report", o.report, "write the run report (JSON) here");
    cmd->add_option("--hand-out", o.hand_out, "write the final posed hand (OBJ) here");
    cmd->add_option("--camera-out", o.camera_out, "write the final camera (JSON) here");
    cmd->add_option("--config", o.config, "JSON file with config overrides");
    cmd->add_option("--seed", o.seed, "override the scene seed")->each([&o](const std::string&) { o.has_seed = true; });
    cmd->add_option("--max-iters", o.max_iters, "iteration cap per stage")->check(CLI::PositiveNumber);
    cmd->add_option("--weights", o.weights, "refinement weights l1,l2,l3,l4");
    cmd->add_option("--resolution", o.resolution, "longest working image side")->check(CLI::Range(8, 1 << 14));
    cmd->add_option("--ot-weight", o.ot_weight, "transport term weight")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--timing", o.timing, "record wall-clock seconds in the report");
}

io::LoadedScene load_with_overrides(const RunOptions& o)
{
    pipeline::StageConfig base;
    if (!o.config.empty()) base = pipeline::parse_config(read_file(o.config), base, o.config);
    io::LoadedScene ls = io::load_scene(o.scene, base);
    pipeline::StageConfig& c = ls.config;
    if (o.has_seed) ls.scene.seed = o.seed;
    if (o.max_iters > 0) {
        c.max_iters = o.max_iters;
        std::vector<int> kept;
        for (int it : c.icp_iterations_at)
            if (it < c.max_iters) kept.push_back(it);
        if (kept.size() != c.icp_iterations_at.size())
            std::cerr << "note: ICP triggers at or beyond --max-iters dropped\n";
        c.icp_iterations_at = kept;
    }
    if (!o.weights.empty()) c.weights = losses::parse_weights(o.weights);
    if (o.resolution > 0) c.resolution = o.resolution;
    if (o.ot_weight >= 0.0) c.ot_weight = o.ot_weight;
    pipeline::validate(c);
    return ls;
}

int run_command(const RunOptions& o, pipeline::StageSet stages)
{
    const io::LoadedScene ls = load_with_overrides(o);
    if (stages != pipeline::StageSet::All && stages != pipeline::StageSet::Stage1 && !ls.scene.has_camera)
        throw InputError(o.scene + ": this stage needs camera_init in the bundle");
    const pipeline::RunReport r = pipeline::run(ls.scene, ls.config, stages, o.timing);
    const std::string text = pipeline::format_report(r);
    if (!o.report.empty()) write_file_atomic(o.report, text);
    if (!o.hand_out.empty()) geom::write_mesh(o.hand_out, hand::pose_mesh(ls.scene.hand_model, r.pose));
    if (!o.camera_out.empty()) render::save_camera(o.camera_out, r.camera);

    std::printf("object IoU %.4f  hand IoU %.4f  intersection %.4f cm^3  sim %.3f cm\n", r.metrics.object_iou,
                r.metrics.hand_iou, r.metrics.intersection_volume, r.metrics.sim_displacement);
    for (const std::string& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const pipeline::StageOutcome* s : {&r.stage1, &r.stage2, &r.stage3})
        if (s->status == "failed") return 2;
    return 0;
}

int synth_command(const SynthOptions& o)
{
    io::SynthSpec s;
    s.preset = io::parse_preset(o.preset);
    s.primitive = o.primitive.empty() ? io::default_primitive(s.preset) : io::parse_primitive(o.primitive);
    s.resolution = o.resolution;
    s.seed = o.seed;
    s.camera_rot_deg = o.rot;
    s.camera_depth = o.depth;
    s.camera_focal = o.focal;
    s.hand_rot_deg = o.hand_rot;
    s.hand_trans = o.hand_trans;
    s.hand_depth = o.hand_depth;
    s.theta_noise = o.theta;
    io::validate(s);
    const io::SyntheticScene scene = io::generate_synthetic_scene(s);
    io::save_synthetic_scene(o.out, scene);
    std::printf("%s %s seed %llu -> %s (intersection %.4f cm^3)\n", io::preset_name(s.preset),
                io::primitive_name(s.primitive), static_cast<unsigned long long>(s.seed), o.out.c_str(),
                scene.gates.intersection_volume);
    return 0;
}

int eval_command(const EvalOptions& o)
{
    const bool mesh_pair = !o.pred.empty() || !o.gt.empty();
    const bool grasp = !o.hand.empty() || !o.object.empty();
    if (!mesh_pair && !grasp) throw InputError("eval needs --pred/--gt or --hand/--object");
    if (mesh_pair && (o.pred.empty() || o.gt.empty())) throw InputError("eval: --pred and --gt go together");
    if (grasp && (o.hand.empty() || o.object.empty())) throw InputError("eval: --hand and --object go together");
    json j;
    if (mesh_pair) {
        const eval::MeshMetrics m =
            eval::chamfer_fscore(geom::read_mesh(o.pred), geom::read_mesh(o.gt), o.samples, o.seed);
        std::printf("chamfer %.6g m  f5 %.4f  f10 %.4f\n", m.chamfer, m.f5, m.f10);
        j["chamfer_m"] = m.chamfer;
        j["f5"] = m.f5;
        j["f10"] = m.f10;
        j["samples"] = m.samples;
    }
    if (grasp) {
        eval::SimConfig sim;
        sim.seed = o.seed;
        const eval::GraspMetrics g =
            eval::grasp_metrics(geom::read_mesh(o.hand), geom::read_mesh(o.object), 0.002, sim);
        std::printf("intersection %.4f cm^3  sim %.3f cm\n", g.int_vol, g.sim_disp);
        j["intersection_volume_cm3"] = g.int_vol;
        j["simulation_displacement_cm"] = g.sim_disp;
    }
    j["seed"] = o.seed;
    if (!o.report.empty()) write_file_atomic(o.report, j.dump(2) + "\n");
    return 0;
}

int check_command(const std::string& path)
{
    const io::LoadedScene ls = io::load_scene(path);
    const pipeline::Scene& s = ls.scene;
    std::printf("%s: ok  object %zu vertices, hand %zu vertices, masks %dx%d, camera %s, seed %llu\n", path.c_str(),
                s.object.vertices.size(), s.hand_model.template_vertices.size(), s.masks.object.width,
                s.masks.object.height, s.has_camera ? "given" : "rebuilt by stage 1",
                static_cast<unsigned long long>(s.seed));
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hand-object alignment from masks"};
    app.set_version_flag("--version", pipeline::version_string());
    app.require_subcommand(1);

    RunOptions run_opts;
    CLI::App* optimize = app.add_subcommand("optimize", "run all three stages");
    CLI::App* stage1 = app.add_subcommand("stage1", "camera setup only");
    CLI::App* align = app.add_subcommand("align", "contact alignment only (needs camera_init)");
    CLI::App* refine = app.add_subcommand("refine", "hand refinement only (needs camera_init)");
    for (CLI::App* c : {optimize, stage1, align, refine}) add_run_flags(c, run_opts);

    SynthOptions synth_opts;
    CLI::App* synth = app.add_subcommand("synth", "write a synthetic bundle with ground truth");
    synth->add_option("out", synth_opts.out, "output directory")->required();
    synth->add_option("--preset", synth_opts.preset, "wrap | pinch | palm");
    synth->add_option("--primitive", synth_opts.primitive, "cube | cylinder | sphere | composite");
    synth->add_option("--resolution", synth_opts.resolution, "image side")->check(CLI::Range(16, 1 << 14));
    synth->add_option("--seed", synth_opts.seed, "generator seed");
    synth->add_option("--perturb-rot", synth_opts.rot, "camera rotation (deg)");
    synth->add_option("--perturb-depth", synth_opts.depth, "relative camera distance change");
    synth->add_option("--perturb-focal", synth_opts.focal, "relative focal change");
    synth->add_option("--perturb-hand-rot", synth_opts.hand_rot, "hand rotation (deg)");
    synth->add_option("--perturb-hand-trans", synth_opts.hand_trans, "hand translation (m)");
    synth->add_option("--perturb-hand-depth", synth_opts.hand_depth, "hand offset along the viewing ray (m)");
    synth->add_option("--perturb-theta", synth_opts.theta, "articulation noise std-dev (rad)");

    EvalOptions eval_opts;
    CLI::App* evalc = app.add_subcommand("eval", "metrics over mesh files");
    evalc->add_option("--pred", eval_opts.pred, "predicted mesh");
    evalc->add_option("--gt", eval_opts.gt, "ground-truth mesh");
    evalc->add_option("--hand", eval_opts.hand, "posed hand mesh");
    evalc->add_option("--object", eval_opts.object, "object mesh");
    evalc->add_option("--samples", eval_opts.samples, "surface samples")->check(CLI::PositiveNumber);
    evalc->add_option("--seed", eval_opts.seed, "sampling seed");
    evalc->add_option("--report", eval_opts.report, "write metrics (JSON) here");

    std::string check_path;
    CLI::App* check = app.add_subcommand("check", "validate a bundle");
    check->add_option("scene", check_path, "scene.json or bundle directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (optimize->parsed()) return run_command(run_opts, pipeline::StageSet::All);
        if (stage1->parsed()) return run_command(run_opts, pipeline::StageSet::Stage1);
        if (align->parsed()) return run_command(run_opts, pipeline::StageSet::Stage2);
        if (refine->parsed()) return run_command(run_opts, pipeline::StageSet::Stage3);
        if (synth->parsed()) return synth_command(synth_opts);
        if (evalc->parsed()) return eval_command(eval_opts);
        if (check->parsed()) return check_command(check_path);
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
