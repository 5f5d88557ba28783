#include <filesystem>

#include "hoi/geometry/mesh_io.hpp"
#include "hoi/io/scene_io.hpp"
#include "json.hpp"

namespace hoi::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const fs::path& base, const json& doc, const std::string& key, const std::string& name)
{
    if (!doc.contains(key) || !doc.at(key).is_string())
        throw InputError(name + ": missing string key '" + key + "'");
    const fs::path p = base / doc.at(key).get<std::string>();
    if (!fs::exists(p))
        throw InputError(name + ": '" + key + "' refers to missing file " + p.string());
    return p.string();
}

}  // namespace

LoadedScene load_scene(const std::string& path, const pipeline::StageConfig& base)
{
    fs::path file = path;
    if (fs::is_directory(file)) file /= "scene.json";
    const std::string name = file.string();
    if (!fs::exists(file)) throw InputError(name + ": scene file not found");
    const fs::path dir = file.parent_path();

    json doc;
    try {
        doc = json::parse(read_file(name));
    } catch (const json::parse_error& e) {
        throw InputError(name + ": " + e.what());
    }
    if (!doc.is_object()) throw InputError(name + ": top level must be an object");

    LoadedScene out;
    pipeline::Scene& s = out.scene;
    double units = 1.0;
    if (doc.contains("units_scale")) {
        if (!doc["units_scale"].is_number()) throw InputError(name + ": units_scale must be a number");
        units = doc["units_scale"].get<double>();
        if (!(units > 0.0)) throw InputError(name + ": units_scale must be > 0");
    }
    s.object = geom::read_mesh(resolve(dir, doc, "object", name), units);
    s.hand_model = hand::load_hand_model(resolve(dir, doc, "hand_model", name));
    s.pose = hand::load_pose(resolve(dir, doc, "pose_init", name));
    s.has_camera = doc.contains("camera_init");
    if (s.has_camera) s.camera = render::load_camera(resolve(dir, doc, "camera_init", name));

    if (!doc.contains("masks") || !doc["masks"].is_object()) throw InputError(name + ": missing object 'masks'");
    const json& masks = doc["masks"];
    const std::string mname = name + " masks";
    s.masks.object = render::load_mask(resolve(dir, masks, "object", mname));
    s.masks.object_inpainted = render::load_mask(resolve(dir, masks, "object_inpainted", mname));
    s.masks.hand = render::load_mask(resolve(dir, masks, "hand", mname));

    s.theta0 = s.pose.theta;
    if (doc.contains("theta0")) {
        const json& t = doc["theta0"];
        if (!t.is_array() || t.size() != 45) throw InputError(name + ": theta0 must be an array of 45 numbers");
        for (int i = 0; i < 45; ++i) {
            if (!t[i].is_number()) throw InputError(name + ": theta0[" + std::to_string(i) + "] is not a number");
            s.theta0[i] = t[i].get<double>();
        }
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw InputError(name + ": seed must be a non-negative integer");
        s.seed = doc["seed"].get<std::uint64_t>();
    }
    out.config = base;
    if (doc.contains("config")) out.config = pipeline::parse_config(doc["config"].dump(), base, name + " config");

    try {
        pipeline::validate(s);
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    }
    return out;
}

void save_scene(const std::string& dir, const pipeline::Scene& scene, const pipeline::StageConfig* config)
{
    pipeline::validate(scene);
    const fs::path root = dir;
    fs::create_directories(root / "masks");
    geom::write_obj((root / "object.obj").string(), scene.object);
    hand::save_hand_model((root / "hand_model.json").string(), scene.hand_model);
    hand::save_pose((root / "pose_init.json").string(), scene.pose);
    render::save_png((root / "masks" / "object.png").string(), scene.masks.object);
    render::save_png((root / "masks" / "object_inpainted.png").string(), scene.masks.object_inpainted);
    render::save_png((root / "masks" / "hand.png").string(), scene.masks.hand);

    json doc;
    doc["object"] = "object.obj";
    doc["units_scale"] = 1.0;
    doc["hand_model"] = "hand_model.json";
    doc["pose_init"] = "pose_init.json";
    if (scene.has_camera) {
        render::save_camera((root / "camera_init.json").string(), scene.camera);
        doc["camera_init"] = "camera_init.json";
    }
    doc["masks"] = {{"object", "masks/object.png"},
                    {"object_inpainted", "masks/object_inpainted.png"},
                    {"hand", "masks/hand.png"}};
    json theta0 = json::array();
    for (int i = 0; i < 45; ++i) theta0.push_back(scene.theta0[i]);
    doc["theta0"] = theta0;
    doc["seed"] = scene.seed;
    if (config) doc["config"] = json::parse(pipeline::format_config(*config));
    write_file_atomic((root / "scene.json").string(), doc.dump(2) + "\n");
}

}  // namespace hoi::io
