#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Core>

#include "hoi/pipeline/pipeline.hpp"
#include "json.hpp"

namespace hoi::pipeline {

using nlohmann::json;

namespace {

std::string size_text(const render::Mask& m)
{
    return std::to_string(m.width) + "x" + std::to_string(m.height);
}

void require_same(const render::Mask& a, const std::string& an, const render::Mask& b, const std::string& bn)
{
    if (!a.same_size(b))
        throw InputError("scene: " + an + " mask is " + size_text(a) + " but " + bn + " mask is " + size_text(b));
}

}  // namespace

void validate(const Scene& scene)
{
    geom::validate_mesh(scene.object);
    if (scene.object.empty()) throw InputError("scene: object mesh is empty");
    hand::validate(scene.hand_model);
    hand::validate(scene.pose);
    if (!scene.theta0.allFinite()) throw InputError("scene: theta0 has non-finite entries");
    render::validate(scene.masks.object, "object mask");
    render::validate(scene.masks.object_inpainted, "inpainted object mask");
    render::validate(scene.masks.hand, "hand mask");
    if (scene.masks.object.size() == 0) throw InputError("scene: object mask is empty");
    require_same(scene.masks.object_inpainted, "inpainted object", scene.masks.object, "object");
    require_same(scene.masks.hand, "hand", scene.masks.object, "object");
    if (scene.has_camera) {
        render::validate(scene.camera);
        if (scene.camera.width != scene.masks.object.width || scene.camera.height != scene.masks.object.height)
            throw InputError("scene: camera is " + std::to_string(scene.camera.width) + "x" +
                             std::to_string(scene.camera.height) + " but masks are " + size_text(scene.masks.object));
    }
}

void validate(const StageConfig& cfg)
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("config: ") + name + " must be > 0");
    };
    positive(cfg.lr_camera, "lr_camera");
    positive(cfg.lr_global_stage2, "lr_global_stage2");
    positive(cfg.lr_global_stage3, "lr_global_stage3");
    positive(cfg.lr_theta_stage3, "lr_theta_stage3");
    if (!(cfg.stop_loss >= 0.0)) throw InputError("config: stop_loss must be >= 0");
    if (cfg.max_iters < 1) throw InputError("config: max_iters must be >= 1");
    for (int it : cfg.icp_iterations_at)
        if (it < 1 || it >= cfg.max_iters)
            throw InputError("config: ICP trigger " + std::to_string(it) + " outside [1, max_iters)");
    losses::validate(cfg.weights);
    if (!(cfg.ot_weight >= 0.0)) throw InputError("config: ot_weight must be >= 0");
    if (cfg.stage3_iters < 0) throw InputError("config: stage3_iters must be >= 0");
    if (cfg.resolution < 8) throw InputError("config: resolution must be >= 8");
    if (cfg.sdf_resolution < 8) throw InputError("config: sdf_resolution must be >= 8");
    if (cfg.init_iters < 0 || cfg.icp_max_iters < 1) throw InputError("config: bad iteration budget");
    if (cfg.contact.layers < 1 || cfg.contact.max_rays < 1) throw InputError("config: bad contact options");
    render::validate(cfg.render);
    losses::validate(cfg.sinkhorn);
}

Adam::Adam(Eigen::VectorXd lr, double beta1, double beta2, double eps)
    : lr_(std::move(lr)), m_(Eigen::VectorXd::Zero(lr_.size())), v_(Eigen::VectorXd::Zero(lr_.size())),
      b1_(beta1), b2_(beta2), eps_(eps)
{
}

void Adam::step(Eigen::VectorXd& x, const Eigen::VectorXd& grad)
{
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1_, t_), c2 = 1.0 - std::pow(b2_, t_);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] -= lr_[i] * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
}

void Adam::reset()
{
    m_.setZero();
    v_.setZero();
    t_ = 0;
}

std::pair<int, int> working_size(int width, int height, int resolution)
{
    const int side = std::max(width, height);
    if (side <= resolution) return {width, height};
    const double s = static_cast<double>(resolution) / side;
    return {std::max(1, static_cast<int>(std::lround(width * s))), std::max(1, static_cast<int>(std::lround(height * s)))};
}

namespace {

json config_json(const StageConfig& c)
{
    json j;
    j["lr_camera"] = c.lr_camera;
    j["lr_global_stage2"] = c.lr_global_stage2;
    j["lr_global_stage3"] = c.lr_global_stage3;
    j["lr_theta_stage3"] = c.lr_theta_stage3;
    j["stop_loss"] = c.stop_loss;
    j["max_iters"] = c.max_iters;
    j["icp_iterations_at"] = c.icp_iterations_at;
    j["weights"] = {c.weights.lambda1, c.weights.lambda2, c.weights.lambda3, c.weights.lambda4};
    j["ot_weight"] = c.ot_weight;
    j["ot_anneal_iou"] = c.ot_anneal_iou;
    j["stage3_iters"] = c.stage3_iters;
    j["resolution"] = c.resolution;
    j["sdf_resolution"] = c.sdf_resolution;
    j["init_iters"] = c.init_iters;
    j["icp_max_iters"] = c.icp_max_iters;
    j["render"] = {{"sigma", c.render.sigma},
                   {"background_eps", c.render.background_eps},
                   {"cutoff", c.render.cutoff},
                   {"cull_backfaces", c.render.cull_backfaces},
                   {"znear", c.render.znear}};
    j["sinkhorn"] = {{"epsilon", c.sinkhorn.epsilon},
                     {"max_iters", c.sinkhorn.max_iters},
                     {"tol", c.sinkhorn.tol},
                     {"max_grid", c.sinkhorn.max_grid}};
    j["contact"] = {{"layers", c.contact.layers}, {"max_rays", c.contact.max_rays}};
    return j;
}

template <typename T>
void take(const json& j, const char* key, T& out, const std::string& name)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(name + ": config key '" + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, const json& known, const std::string& name, const std::string& prefix)
{
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.contains(it.key())) throw InputError(name + ": unknown config key '" + prefix + it.key() + "'");
}

}  // namespace

std::string format_config(const StageConfig& cfg)
{
    return config_json(cfg).dump(2) + "\n";
}

StageConfig parse_config(const std::string& json_text, const StageConfig& base, const std::string& name)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(name + ": " + e.what());
    }
    if (!j.is_object()) throw InputError(name + ": config must be a JSON object");
    StageConfig c = base;
    const json known = config_json(base);
    reject_unknown(j, known, name, "");
    take(j, "lr_camera", c.lr_camera, name);
    take(j, "lr_global_stage2", c.lr_global_stage2, name);
    take(j, "lr_global_stage3", c.lr_global_stage3, name);
    take(j, "lr_theta_stage3", c.lr_theta_stage3, name);
    take(j, "stop_loss", c.stop_loss, name);
    take(j, "max_iters", c.max_iters, name);
    take(j, "icp_iterations_at", c.icp_iterations_at, name);
    if (j.contains("weights")) {
        std::vector<double> w;
        take(j, "weights", w, name);
        if (w.size() != 4) throw InputError(name + ": weights needs 4 entries");
        c.weights = {w[0], w[1], w[2], w[3]};
    }
    take(j, "ot_weight", c.ot_weight, name);
    take(j, "ot_anneal_iou", c.ot_anneal_iou, name);
    take(j, "stage3_iters", c.stage3_iters, name);
    take(j, "resolution", c.resolution, name);
    take(j, "sdf_resolution", c.sdf_resolution, name);
    take(j, "init_iters", c.init_iters, name);
    take(j, "icp_max_iters", c.icp_max_iters, name);
    if (j.contains("render")) {
        const json& r = j["render"];
        reject_unknown(r, known["render"], name, "render.");
        take(r, "sigma", c.render.sigma, name);
        take(r, "background_eps", c.render.background_eps, name);
        take(r, "cutoff", c.render.cutoff, name);
        take(r, "cull_backfaces", c.render.cull_backfaces, name);
        take(r, "znear", c.render.znear, name);
    }
    if (j.contains("sinkhorn")) {
        const json& s = j["sinkhorn"];
        reject_unknown(s, known["sinkhorn"], name, "sinkhorn.");
        take(s, "epsilon", c.sinkhorn.epsilon, name);
        take(s, "max_iters", c.sinkhorn.max_iters, name);
        take(s, "tol", c.sinkhorn.tol, name);
        take(s, "max_grid", c.sinkhorn.max_grid, name);
    }
    if (j.contains("contact")) {
        const json& s = j["contact"];
        reject_unknown(s, known["contact"], name, "contact.");
        take(s, "layers", c.contact.layers, name);
        take(s, "max_rays", c.contact.max_rays, name);
    }
    validate(c);
    return c;
}

std::string config_hash(const StageConfig& cfg, std::uint64_t seed)
{
    json j = config_json(cfg);
    j["seed"] = seed;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

std::string version_string()
{
    return "0.3.0";
}

}  // namespace hoi::pipeline
