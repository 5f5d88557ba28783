#include "json.hpp"

#include "hoi/hand/hand_model.hpp"

namespace hoi::hand {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& name)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(name + ": " + e.what());
    }
}

Vec3 vec3_of(const json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 3) throw InputError(what + ": expected an array of 3 numbers");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json json_of(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

HandModel parse_hand_model(const std::string& text, const std::string& name)
{
    const json doc = parse_json(text, name);
    HandModel m;
    try {
        m.units_scale = doc.value("units_scale", 1.0);
        if (!(m.units_scale > 0.0)) throw InputError("units_scale must be positive");
        const auto& verts = doc.at("vertices");
        for (std::size_t i = 0; i < verts.size(); ++i)
            m.template_vertices.push_back(vec3_of(verts[i], "vertices[" + std::to_string(i) + "]") * m.units_scale);
        for (const auto& f : doc.at("faces")) {
            if (!f.is_array() || f.size() != 3) throw InputError("faces: expected index triples");
            m.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
        }
        const auto& joints = doc.at("joints");
        for (std::size_t j = 0; j < joints.size(); ++j)
            m.joints.push_back({vec3_of(joints[j].at("position"), "joints[" + std::to_string(j) + "].position") *
                                    m.units_scale,
                                joints[j].at("parent").get<int>()});
        for (const auto& row : doc.at("skin_weights")) {
            SkinRow r;
            for (const auto& e : row) {
                if (!e.is_array() || e.size() != 2) throw InputError("skin_weights: expected [joint, weight] pairs");
                r.emplace_back(e[0].get<int>(), e[1].get<double>());
            }
            m.skin_weights.push_back(std::move(r));
        }
        m.palmar_faces = doc.at("palmar_faces").get<std::vector<int>>();
        m.contact_zone_vertices = doc.at("contact_zone_vertices").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw InputError(name + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    }
    try {
        validate(m);
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    }
    return m;
}

HandModel load_hand_model(const std::string& path) { return parse_hand_model(read_file(path), path); }

std::string format_hand_model(const HandModel& model)
{
    json doc;
    const double inv = 1.0 / model.units_scale;
    doc["units_scale"] = model.units_scale;
    json verts = json::array();
    for (const Vec3& v : model.template_vertices) verts.push_back(json_of(v * inv));
    doc["vertices"] = verts;
    json faces = json::array();
    for (const Face& f : model.faces) faces.push_back({f[0], f[1], f[2]});
    doc["faces"] = faces;
    json joints = json::array();
    for (const Joint& j : model.joints) joints.push_back({{"position", json_of(j.position * inv)}, {"parent", j.parent}});
    doc["joints"] = joints;
    json skin = json::array();
    for (const SkinRow& row : model.skin_weights) {
        json r = json::array();
        for (const auto& [j, w] : row) r.push_back({j, w});
        skin.push_back(r);
    }
    doc["skin_weights"] = skin;
    doc["palmar_faces"] = model.palmar_faces;
    doc["contact_zone_vertices"] = model.contact_zone_vertices;
    return doc.dump() + "\n";
}

void save_hand_model(const std::string& path, const HandModel& model)
{
    write_file_atomic(path, format_hand_model(model));
}

HandPose parse_pose(const std::string& text, const std::string& name)
{
    const json doc = parse_json(text, name);
    HandPose p;
    try {
        const auto phi = doc.at("phi").get<std::vector<double>>();
        const auto theta = doc.at("theta").get<std::vector<double>>();
        if (phi.size() != 6) throw InputError("phi must have 6 entries, got " + std::to_string(phi.size()));
        if (theta.size() != 45) throw InputError("theta must have 45 entries, got " + std::to_string(theta.size()));
        for (int i = 0; i < 6; ++i) p.phi[i] = phi[i];
        for (int i = 0; i < 45; ++i) p.theta[i] = theta[i];
        validate(p);
    } catch (const json::exception& e) {
        throw InputError(name + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    }
    return p;
}

HandPose load_pose(const std::string& path) { return parse_pose(read_file(path), path); }

std::string format_pose(const HandPose& pose)
{
    json doc;
    doc["phi"] = std::vector<double>(pose.phi.data(), pose.phi.data() + 6);
    doc["theta"] = std::vector<double>(pose.theta.data(), pose.theta.data() + 45);
    return doc.dump(2) + "\n";
}

void save_pose(const std::string& path, const HandPose& pose) { write_file_atomic(path, format_pose(pose)); }

}  // namespace hoi::hand
