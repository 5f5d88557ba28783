#include "hoi/render/soft_render.hpp"

#include <algorithm>
#include <cmath>

#include "hoi/rotation.hpp"

namespace hoi::render {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x)
{
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

void validate(const SoftRenderConfig& cfg)
{
    if (!(cfg.sigma > 0.0)) throw InputError("soft render: sigma must be positive");
    if (!(cfg.cutoff > 0.0)) throw InputError("soft render: cutoff must be positive");
    if (!(cfg.background_eps >= 0.0 && cfg.background_eps < 1.0))
        throw InputError("soft render: background_eps must lie in [0, 1)");
}

SoftRasterizer::SoftRasterizer(const geom::TriMesh& mesh, const Camera& cam, const SoftRenderConfig& cfg)
    : vertices_(mesh.vertices), cam_(cam), cfg_(cfg), mask_(cam.width, cam.height)
{
    validate(cam);
    validate(cfg);
    const Mat3 R = cam.R();
    cam_points_.resize(mesh.vertices.size());
    bool any_front = false;
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        cam_points_[i] = R * mesh.vertices[i] + cam.translation;
        any_front = any_front || cam_points_[i].z() > 0.0;
    }
    behind_ = !any_front;

    const double margin = cfg.cutoff * cfg.sigma;
    faces_.reserve(mesh.faces.size());
    for (const Face& f : mesh.faces) {
        const Vec3 &X0 = cam_points_[f[0]], &X1 = cam_points_[f[1]], &X2 = cam_points_[f[2]];
        if (X0.z() < cfg.znear || X1.z() < cfg.znear || X2.z() < cfg.znear) continue;
        if (cfg.cull_backfaces && (X1 - X0).cross(X2 - X0).dot(X0) >= 0.0) continue;
        FaceData fd;
        double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
        for (int k = 0; k < 3; ++k) {
            const Vec3& X = cam_points_[f[k]];
            fd.v[k] = f[k];
            fd.p[k] = Vec2(cam.fx * X.x() / X.z() + cam.cx, cam.fy * X.y() / X.z() + cam.cy);
            lo_x = std::min(lo_x, fd.p[k].x());
            hi_x = std::max(hi_x, fd.p[k].x());
            lo_y = std::min(lo_y, fd.p[k].y());
            hi_y = std::max(hi_y, fd.p[k].y());
        }
        for (int k = 0; k < 3; ++k) {
            fd.e[k] = fd.p[(k + 1) % 3] - fd.p[k];
            const double len2 = fd.e[k].squaredNorm();
            fd.inv_len2[k] = len2 > 0.0 ? 1.0 / len2 : 0.0;
        }
        const double area = cross2(fd.p[1] - fd.p[0], fd.p[2] - fd.p[0]);
        fd.orient = area > 0.0 ? 1.0 : (area < 0.0 ? -1.0 : 0.0);
        // Pixel centres x + 0.5 within the margin of the projected triangle.
        fd.x0 = std::max(0, static_cast<int>(std::ceil(lo_x - margin - 0.5)));
        fd.x1 = std::min(cam.width - 1, static_cast<int>(std::floor(hi_x + margin - 0.5)));
        fd.y0 = std::max(0, static_cast<int>(std::ceil(lo_y - margin - 0.5)));
        fd.y1 = std::min(cam.height - 1, static_cast<int>(std::floor(hi_y + margin - 0.5)));
        if (fd.x0 > fd.x1 || fd.y0 > fd.y1) continue;
        faces_.push_back(fd);
    }

    log_q_.assign(mask_.size(), 0.0);
    std::size_t pairs = 0;
    for (const FaceData& fd : faces_) pairs += static_cast<std::size_t>(fd.x1 - fd.x0 + 1) * (fd.y1 - fd.y0 + 1);
    samples_.reserve(pairs);
    const double c = cfg.cutoff;
    const double sp_c = softplus(-c);
    const double inv_sigma = 1.0 / cfg.sigma;
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
        const FaceData& fd = faces_[fi];
        for (int y = fd.y0; y <= fd.y1; ++y) {
            for (int x = fd.x0; x <= fd.x1; ++x) {
                const Nearest n = nearest(fd, Vec2(x + 0.5, y + 0.5));
                const double xs = n.d * inv_sigma;
                if (xs <= -c) continue;
                const std::size_t pixel = static_cast<std::size_t>(y) * cam.width + x;
                log_q_[pixel] += sp_c - softplus(xs);
                samples_.push_back({pixel, static_cast<int>(fi), n.edge, n.t, n.normal, xs});
            }
        }
    }
    for (std::size_t i = 0; i < mask_.size(); ++i) {
        // Occupancy below the floor maps to exactly zero; continuous above it.
        const double p = -std::expm1(log_q_[i]);
        mask_.values[i] = std::clamp((p - cfg.background_eps) / (1.0 - cfg.background_eps), 0.0, 1.0);
    }
}

SoftRasterizer::Nearest SoftRasterizer::nearest(const FaceData& f, const Vec2& q) const
{
    double best = 1e300;
    int edge = 0;
    double best_t = 0.0;
    Vec2 best_diff = Vec2::Zero();
    bool inside = f.orient != 0.0;
    for (int k = 0; k < 3; ++k) {
        const Vec2& e = f.e[k];
        const Vec2 w = q - f.p[k];
        if (cross2(e, w) * f.orient < 0.0) inside = false;
        const double t = std::clamp(w.dot(e) * f.inv_len2[k], 0.0, 1.0);
        const Vec2 diff = w - t * e;
        const double d2 = diff.squaredNorm();
        if (d2 < best) {
            best = d2;
            edge = k;
            best_t = t;
            best_diff = diff;
        }
    }
    Nearest n;
    const double dist = std::sqrt(best);
    n.edge = edge;
    n.t = best_t;
    if (dist > 0.0) {
        n.d = inside ? dist : -dist;
        n.normal = (inside ? 1.0 : -1.0) * best_diff / dist;
    } else {
        // On the boundary: the distance grows toward the interior.
        const Vec2 e = f.p[(edge + 1) % 3] - f.p[edge];
        const double len = e.norm();
        n.d = 0.0;
        n.normal = len > 0.0 && f.orient != 0.0 ? Vec2(Vec2(-e.y(), e.x()) * (f.orient / len)) : Vec2(Vec2::Zero());
    }
    return n;
}

RenderGradients SoftRasterizer::backward(const Mask& upstream) const
{
    if (!upstream.same_size(mask_)) throw InputError("render backward: upstream size mismatch");
    RenderGradients out;
    out.vertices.assign(vertices_.size(), Vec3::Zero());
    std::vector<double> coeff(mask_.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < mask_.size(); ++i) {
        if (mask_.values[i] == 0.0 || upstream.values[i] == 0.0) continue;
        coeff[i] = upstream.values[i] * std::exp(log_q_[i]) / (1.0 - cfg_.background_eps);
        any = true;
    }
    if (!any) return out;

    std::vector<Vec2> g2(vertices_.size(), Vec2::Zero());
    const double inv_sigma = 1.0 / cfg_.sigma;
    for (const Sample& s : samples_) {
        const double cp = coeff[s.pixel];
        if (cp == 0.0) continue;
        // dp/dd = Q sigmoid(d / sigma) / sigma; dd/d(vertex) = -normal * weight.
        const double gd = cp * sigmoid(s.xs) * inv_sigma;
        const FaceData& fd = faces_[s.face];
        g2[fd.v[s.edge]] -= gd * (1.0 - s.t) * s.normal;
        g2[fd.v[(s.edge + 1) % 3]] -= gd * s.t * s.normal;
    }

    const Mat3 R = cam_.R();
    Vec3 rot_acc = Vec3::Zero();
    for (std::size_t i = 0; i < g2.size(); ++i) {
        const Vec2& g = g2[i];
        if (g.isZero(0.0)) continue;
        const Vec3& X = cam_points_[i];
        const double iz = 1.0 / X.z();
        out.camera.fx += g.x() * X.x() * iz;
        out.camera.fy += g.y() * X.y() * iz;
        out.camera.cx += g.x();
        out.camera.cy += g.y();
        const Vec3 gX(g.x() * cam_.fx * iz, g.y() * cam_.fy * iz,
                      -(g.x() * cam_.fx * X.x() + g.y() * cam_.fy * X.y()) * iz * iz);
        out.camera.translation += gX;
        const Vec3 gw = R.transpose() * gX;
        out.vertices[i] = gw;
        rot_acc += vertices_[i].cross(gw);
    }
    out.camera.rotation = so3_right_jacobian(cam_.rotation).transpose() * rot_acc;
    return out;
}

RenderResult render_silhouette(const geom::TriMesh& mesh, const Camera& cam, const SoftRenderConfig& cfg)
{
    SoftRasterizer r(mesh, cam, cfg);
    return {r.mask(), r.behind_camera()};
}

RenderGradients render_gradients(const geom::TriMesh& mesh, const Camera& cam, const SoftRenderConfig& cfg,
                                 const Mask& upstream)
{
    return SoftRasterizer(mesh, cam, cfg).backward(upstream);
}

}  // namespace hoi::render
