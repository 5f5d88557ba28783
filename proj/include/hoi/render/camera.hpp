#pragma once

#include <string>
#include <vector>

#include "hoi/geometry/mesh_index.hpp"

namespace hoi::render {

/// Pinhole camera in the object frame: x_cam = R(rotation) x + translation,
/// u = fx X/Z + cx, v = fy Y/Z + cy. Pixel (i, j) spans [i, i+1) x [j, j+1).
struct Camera {
    double fx = 500.0, fy = 500.0;
    double cx = 0.0, cy = 0.0;
    Vec3 rotation = Vec3::Zero();
    Vec3 translation = Vec3::Zero();
    int width = 0, height = 0;

    Mat3 R() const;
    Vec3 center() const;  // camera origin in the object frame
};

/// InputError unless fx, fy > 0, 0 <= cx < width, 0 <= cy < height, all finite.
void validate(const Camera& cam);

/// Camera at `eye` looking at `target` with `up` pointing up in the image;
/// principal point at the image centre.
Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal, int width, int height);

/// Same view at a new image size (intrinsics scaled per axis).
Camera resized(const Camera& cam, int width, int height);

struct Projection {
    Vec2 px = Vec2::Zero();
    double depth = 0.0;
    bool in_front = false;  // false when camera-frame z <= 0
};

std::vector<Projection> project_points(const std::vector<Vec3>& points, const Camera& cam);
Projection project_point(const Vec3& point, const Camera& cam);

/// Ray in the object frame through image coordinate (u, v).
geom::Ray pixel_ray(const Camera& cam, double u, double v);

Camera parse_camera(const std::string& text, const std::string& name);
Camera load_camera(const std::string& path);
std::string format_camera(const Camera& cam);
void save_camera(const std::string& path, const Camera& cam);

}  // namespace hoi::render
