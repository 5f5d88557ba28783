#include "hoi/render/camera.hpp"

#include <cmath>

#include "json.hpp"
#include "hoi/rotation.hpp"

namespace hoi::render {

using nlohmann::json;

Mat3 Camera::R() const { return rotation_from_axis_angle(rotation); }

Vec3 Camera::center() const { return -(R().transpose() * translation); }

void validate(const Camera& cam)
{
    if (!std::isfinite(cam.fx) || !std::isfinite(cam.fy) || !(cam.fx > 0.0) || !(cam.fy > 0.0))
        throw InputError("camera: focal lengths must be positive and finite");
    if (cam.width <= 0 || cam.height <= 0) throw InputError("camera: image size must be positive");
    if (!(cam.cx >= 0.0 && cam.cx < cam.width) || !(cam.cy >= 0.0 && cam.cy < cam.height))
        throw InputError("camera: principal point must lie inside the image");
    if (!cam.rotation.allFinite() || !cam.translation.allFinite())
        throw InputError("camera: extrinsics must be finite");
}

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width, int height)
{
    const Vec3 z = (target - eye).normalized();
    const Vec3 y = -(up - up.dot(z) * z).normalized();
    const Vec3 x = y.cross(z);
    Mat3 R;
    R.row(0) = x;
    R.row(1) = y;
    R.row(2) = z;
    Camera cam;
    cam.fx = cam.fy = focal;
    cam.width = width;
    cam.height = height;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.rotation = axis_angle_from_rotation(R);
    cam.translation = -(rotation_from_axis_angle(cam.rotation) * eye);
    validate(cam);
    return cam;
}

Camera resized(const Camera& cam, int width, int height)
{
    if (width <= 0 || height <= 0) throw InputError("resized: image size must be positive");
    Camera out = cam;
    const double sx = static_cast<double>(width) / cam.width;
    const double sy = static_cast<double>(height) / cam.height;
    out.fx *= sx;
    out.cx *= sx;
    out.fy *= sy;
    out.cy *= sy;
    out.width = width;
    out.height = height;
    return out;
}

Projection project_point(const Vec3& point, const Camera& cam)
{
    const Vec3 X = cam.R() * point + cam.translation;
    Projection p;
    p.depth = X.z();
    p.in_front = X.z() > 0.0;
    if (p.in_front) p.px = Vec2(cam.fx * X.x() / X.z() + cam.cx, cam.fy * X.y() / X.z() + cam.cy);
    return p;
}

std::vector<Projection> project_points(const std::vector<Vec3>& points, const Camera& cam)
{
    const Mat3 R = cam.R();
    std::vector<Projection> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 X = R * points[i] + cam.translation;
        Projection& p = out[i];
        p.depth = X.z();
        p.in_front = X.z() > 0.0;
        if (p.in_front) p.px = Vec2(cam.fx * X.x() / X.z() + cam.cx, cam.fy * X.y() / X.z() + cam.cy);
    }
    return out;
}

geom::Ray pixel_ray(const Camera& cam, double u, double v)
{
    const Mat3 Rt = cam.R().transpose();
    const Vec3 d_cam((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
    return geom::Ray{-(Rt * cam.translation), (Rt * d_cam).normalized()};
}

Camera parse_camera(const std::string& text, const std::string& name)
{
    Camera cam;
    try {
        const json doc = json::parse(text);
        cam.fx = doc.at("fx").get<double>();
        cam.fy = doc.at("fy").get<double>();
        cam.cx = doc.at("cx").get<double>();
        cam.cy = doc.at("cy").get<double>();
        const auto r = doc.at("rotation").get<std::vector<double>>();
        const auto t = doc.at("translation").get<std::vector<double>>();
        if (r.size() != 3 || t.size() != 3) throw InputError("rotation and translation need 3 entries");
        cam.rotation = Vec3(r[0], r[1], r[2]);
        cam.translation = Vec3(t[0], t[1], t[2]);
        cam.width = doc.at("width").get<int>();
        cam.height = doc.at("height").get<int>();
        validate(cam);
    } catch (const json::exception& e) {
        throw InputError(name + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    }
    return cam;
}

Camera load_camera(const std::string& path) { return parse_camera(read_file(path), path); }

std::string format_camera(const Camera& cam)
{
    json doc;
    doc["fx"] = cam.fx;
    doc["fy"] = cam.fy;
    doc["cx"] = cam.cx;
    doc["cy"] = cam.cy;
    doc["rotation"] = {cam.rotation.x(), cam.rotation.y(), cam.rotation.z()};
    doc["translation"] = {cam.translation.x(), cam.translation.y(), cam.translation.z()};
    doc["width"] = cam.width;
    doc["height"] = cam.height;
    return doc.dump(2) + "\n";
}

void save_camera(const std::string& path, const Camera& cam) { write_file_atomic(path, format_camera(cam)); }

}  // namespace hoi::render
