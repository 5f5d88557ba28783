#include "hoi/geometry/mesh_io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace hoi::geom {

namespace {

std::string fmt(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string lower_ext(const std::string& path)
{
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

// Validates and names the offending record on failure.
void check_mesh(const TriMesh& mesh, const std::string& name)
{
    try {
        validate_mesh(mesh);
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    }
}

}  // namespace

TriMesh parse_obj(const std::string& text, const std::string& name, double units_scale)
{
    if (!(units_scale > 0.0)) throw InputError(name + ": units_scale must be positive");
    TriMesh mesh;
    mesh.units_scale = units_scale;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) { throw InputError(name + ":" + std::to_string(lineno) + ": " + msg); };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) fail("vertex needs three coordinates");
            const Vec3 p = Vec3(x, y, z) * units_scale;
            if (!p.allFinite()) fail("non-finite vertex coordinate");
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                const std::string head = tok.substr(0, tok.find('/'));
                int v = 0;
                auto res = std::from_chars(head.data(), head.data() + head.size(), v);
                if (res.ec != std::errc() || res.ptr != head.data() + head.size() || v == 0)
                    fail("bad face index '" + tok + "'");
                const int n = static_cast<int>(mesh.vertices.size());
                const int resolved = v > 0 ? v - 1 : n + v;
                if (resolved < 0 || resolved >= n) fail("face index " + std::to_string(v) + " out of range");
                idx.push_back(resolved);
            }
            if (idx.size() < 3) fail("face needs at least three vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    if (mesh.faces.empty()) throw InputError(name + ": no faces");
    check_mesh(mesh, name);
    return mesh;
}

TriMesh read_obj(const std::string& path, double units_scale)
{
    return parse_obj(read_file(path), path, units_scale);
}

std::string format_obj(const TriMesh& mesh)
{
    std::string out;
    out.reserve(mesh.vertices.size() * 60 + mesh.faces.size() * 24);
    for (const Vec3& v : mesh.vertices) out += "v " + fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()) + "\n";
    for (const Face& f : mesh.faces)
        out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " + std::to_string(f[2] + 1) + "\n";
    return out;
}

void write_obj(const std::string& path, const TriMesh& mesh) { write_file_atomic(path, format_obj(mesh)); }

namespace {

int type_size(const std::string& t)
{
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    return 0;
}

double read_scalar(const char* p, const std::string& t)
{
    auto get = [p](auto v) {
        std::memcpy(&v, p, sizeof v);
        return static_cast<double>(v);
    };
    if (t == "char" || t == "int8") return get(std::int8_t{});
    if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
    if (t == "short" || t == "int16") return get(std::int16_t{});
    if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
    if (t == "int" || t == "int32") return get(std::int32_t{});
    if (t == "uint" || t == "uint32") return get(std::uint32_t{});
    if (t == "float" || t == "float32") return get(float{});
    return get(double{});
}

struct PlyProperty {
    std::string name, type, count_type;
    bool list = false;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

}  // namespace

TriMesh read_ply(const std::string& path, double units_scale)
{
    if (!(units_scale > 0.0)) throw InputError(path + ": units_scale must be positive");
    const std::string data = read_file(path);
    const std::string marker = "end_header";
    const auto end = data.find(marker);
    if (data.rfind("ply", 0) != 0 || end == std::string::npos) throw InputError(path + ": not a PLY file");
    std::size_t body = data.find('\n', end);
    if (body == std::string::npos) throw InputError(path + ": truncated header");
    ++body;

    std::istringstream hs(data.substr(0, end));
    std::string line;
    int lineno = 0;
    std::vector<PlyElement> elements;
    auto fail = [&](const std::string& msg) { throw InputError(path + ":" + std::to_string(lineno) + ": " + msg); };
    while (std::getline(hs, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "format") {
            std::string f;
            ls >> f;
            if (f != "binary_little_endian") fail("only binary_little_endian PLY is supported");
        } else if (tag == "element") {
            PlyElement e;
            if (!(ls >> e.name >> e.count)) fail("bad element line");
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty()) fail("property before element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                p.list = true;
                ls >> p.count_type >> p.type >> p.name;
                if (!type_size(p.count_type)) fail("unknown type " + p.count_type);
            } else {
                p.type = t;
                ls >> p.name;
            }
            if (!type_size(p.type)) fail("unknown type " + p.type);
            elements.back().props.push_back(p);
        }
    }

    TriMesh mesh;
    mesh.units_scale = units_scale;
    std::size_t pos = body;
    auto need = [&](std::size_t n) {
        if (pos + n > data.size()) throw InputError(path + ": truncated binary body");
    };
    for (const PlyElement& e : elements) {
        for (std::size_t r = 0; r < e.count; ++r) {
            Vec3 v = Vec3::Zero();
            for (const PlyProperty& p : e.props) {
                if (p.list) {
                    need(type_size(p.count_type));
                    const auto n = static_cast<std::size_t>(read_scalar(data.data() + pos, p.count_type));
                    pos += type_size(p.count_type);
                    need(n * type_size(p.type));
                    std::vector<int> idx(n);
                    for (std::size_t k = 0; k < n; ++k) {
                        idx[k] = static_cast<int>(read_scalar(data.data() + pos, p.type));
                        pos += type_size(p.type);
                    }
                    if (e.name == "face" && (p.name == "vertex_indices" || p.name == "vertex_index")) {
                        if (n < 3) throw InputError(path + ": face " + std::to_string(r) + " has fewer than 3 vertices");
                        for (std::size_t k = 1; k + 1 < n; ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
                    }
                } else {
                    need(type_size(p.type));
                    const double val = read_scalar(data.data() + pos, p.type);
                    pos += type_size(p.type);
                    if (e.name == "vertex") {
                        if (p.name == "x") v.x() = val;
                        if (p.name == "y") v.y() = val;
                        if (p.name == "z") v.z() = val;
                    }
                }
            }
            if (e.name == "vertex") mesh.vertices.push_back(v * units_scale);
        }
    }
    if (mesh.faces.empty()) throw InputError(path + ": no faces");
    check_mesh(mesh, path);
    return mesh;
}

void write_ply(const std::string& path, const TriMesh& mesh)
{
    std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(mesh.vertices.size()) +
                      "\nproperty double x\nproperty double y\nproperty double z\nelement face " +
                      std::to_string(mesh.faces.size()) + "\nproperty list uchar int vertex_indices\nend_header\n";
    auto put = [&out](const auto& v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); };
    for (const Vec3& v : mesh.vertices) {
        put(v.x());
        put(v.y());
        put(v.z());
    }
    for (const Face& f : mesh.faces) {
        put(std::uint8_t{3});
        for (int k = 0; k < 3; ++k) put(static_cast<std::int32_t>(f[k]));
    }
    write_file_atomic(path, out);
}

TriMesh read_mesh(const std::string& path, double units_scale)
{
    const std::string ext = lower_ext(path);
    if (ext == "obj") return read_obj(path, units_scale);
    if (ext == "ply") return read_ply(path, units_scale);
    throw InputError(path + ": unsupported mesh format (expected .obj or .ply)");
}

void write_mesh(const std::string& path, const TriMesh& mesh)
{
    const std::string ext = lower_ext(path);
    if (ext == "obj") return write_obj(path, mesh);
    if (ext == "ply") return write_ply(path, mesh);
    throw InputError(path + ": unsupported mesh format (expected .obj or .ply)");
}

}  // namespace hoi::geom
