#pragma once

#include <vector>

#include "hoi/geometry/mesh.hpp"
#include "hoi/render/camera.hpp"
#include "hoi/render/mask.hpp"

namespace hoi::render {

/// Soft silhouette: p = 1 - prod_f (1 - s_f), s_f a sigmoid of the signed 2D
/// distance to the projected face over sigma, truncated to zero at -cutoff
/// (rescaled so it stays continuous there).
struct SoftRenderConfig {
    double sigma = 1.5;            // px
    double background_eps = 1e-4;  // floor: mask = max(0, (p - eps) / (1 - eps))
    double cutoff = 6.0;           // in units of sigma
    bool cull_backfaces = false;   // valid for closed, outward-oriented meshes
    double znear = 1e-3;           // faces with a vertex nearer than this are dropped (m)
};

void validate(const SoftRenderConfig& cfg);

struct CameraGrad {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
    Vec3 rotation = Vec3::Zero();
    Vec3 translation = Vec3::Zero();
};

struct RenderGradients {
    CameraGrad camera;
    std::vector<Vec3> vertices;  // object frame
};

/// Renders once and keeps what the backward pass needs.
class SoftRasterizer {
public:
    SoftRasterizer(const geom::TriMesh& mesh, const Camera& cam, const SoftRenderConfig& cfg);

    const Mask& mask() const { return mask_; }
    /// True when no vertex lies in front of the camera (mask is all zero).
    bool behind_camera() const { return behind_; }

    /// Gradients of sum(upstream * mask) w.r.t. camera parameters and vertices.
    RenderGradients backward(const Mask& upstream) const;

private:
    struct FaceData {
        int v[3];
        Vec2 p[3];
        Vec2 e[3];           // p[(k+1)%3] - p[k]
        double inv_len2[3];  // 1 / |e[k]|^2, 0 for degenerate edges
        double orient;       // sign of the 2D signed area, 0 for edge-on faces
        int x0, x1, y0, y1;
    };

    /// One pixel-face pair inside the cutoff, kept for the backward pass.
    struct Sample {
        std::size_t pixel;
        int face;
        int edge;
        double t;
        Vec2 normal;
        double xs;  // d / sigma
    };

    struct Nearest {
        double d;       // signed distance, positive inside
        int edge;       // edge k runs from p[k] to p[(k+1)%3]
        double t;       // parameter of the nearest edge point
        Vec2 normal;    // unit d(distance)/d(point) direction
    };

    Nearest nearest(const FaceData& f, const Vec2& q) const;

    std::vector<Vec3> vertices_;
    Camera cam_;
    SoftRenderConfig cfg_;
    std::vector<Vec3> cam_points_;
    std::vector<FaceData> faces_;
    std::vector<Sample> samples_;
    std::vector<double> log_q_;
    Mask mask_;
    bool behind_ = false;
};

struct RenderResult {
    Mask mask;
    bool behind_camera = false;
};

RenderResult render_silhouette(const geom::TriMesh& mesh, const Camera& cam, const SoftRenderConfig& cfg);
RenderGradients render_gradients(const geom::TriMesh& mesh, const Camera& cam, const SoftRenderConfig& cfg,
                                 const Mask& upstream);

}  // namespace hoi::render
