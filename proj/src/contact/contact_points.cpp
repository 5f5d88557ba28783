#include <optional>

#include "hoi/contact/contact.hpp"

namespace hoi::contact {

namespace {

struct PixelRay {
    int x, y;
    Side side;
};

std::optional<Vec3> pick(const geom::DepthHits& hits, const geom::Ray& ray, LayerKind layer,
                         const std::vector<char>* allowed)
{
    std::optional<double> depth;
    for (const geom::RayHit& h : hits.hits) {
        if (allowed && !(*allowed)[h.face]) continue;
        if (!depth || layer == LayerKind::Farthest) depth = h.depth;
        if (layer == LayerKind::Nearest) break;
    }
    if (!depth) return std::nullopt;
    return ray.origin + *depth * ray.direction;
}

}  // namespace

ContactPointSet extract_contact_points(const ContactMasks& masks, const render::Camera& cam,
                                       const geom::MeshIndex& object, const geom::MeshIndex& hand,
                                       const std::vector<int>& palmar_faces, const ExtractOptions& opt)
{
    if (opt.layers < 1) throw InputError("extract_contact_points: layers must be >= 1");
    if (opt.max_rays < 1) throw InputError("extract_contact_points: max_rays must be >= 1");
    for (const render::Mask* m : {&masks.front, &masks.back})
        if (m->width != cam.width || m->height != cam.height)
            throw InputError("extract_contact_points: contact mask is " + std::to_string(m->width) + "x" +
                             std::to_string(m->height) + " but the camera is " + std::to_string(cam.width) + "x" +
                             std::to_string(cam.height));
    const int hand_faces = static_cast<int>(hand.mesh().faces.size());
    std::vector<char> palmar(hand_faces, 0);
    for (int f : palmar_faces) {
        if (f < 0 || f >= hand_faces) throw InputError("extract_contact_points: palmar face out of range");
        palmar[f] = 1;
    }

    std::vector<PixelRay> pixels;
    for (Side side : {Side::Front, Side::Back}) {
        const render::Mask& m = side == Side::Front ? masks.front : masks.back;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.at(x, y) >= 0.5) pixels.push_back({x, y, side});
    }
    // Uniform stride subsampling keeps at most max_rays pixels.
    if (pixels.size() > static_cast<std::size_t>(opt.max_rays)) {
        std::vector<PixelRay> kept;
        const double stride = static_cast<double>(pixels.size()) / opt.max_rays;
        for (int k = 0; k < opt.max_rays; ++k) kept.push_back(pixels[static_cast<std::size_t>(k * stride)]);
        pixels = std::move(kept);
    }

    struct Pair {
        bool ok = false;
        Vec3 hand, object;
    };
    std::vector<Pair> pairs(pixels.size());
    parallel_for(pixels.size(), [&](std::size_t k) {
        const PixelRay& p = pixels[k];
        const geom::Ray ray = render::pixel_ray(cam, p.x + 0.5, p.y + 0.5);
        const LayerKind layer = p.side == Side::Front ? LayerKind::Nearest : LayerKind::Farthest;
        const auto o = pick(object.cast_peeled(ray, opt.layers), ray, layer, nullptr);
        if (!o) return;
        const auto h = pick(hand.cast_peeled(ray, opt.layers), ray, layer, &palmar);
        if (!h) return;
        pairs[k] = {true, *h, *o};
    });

    ContactPointSet out;
    for (std::size_t k = 0; k < pixels.size(); ++k) {
        if (!pairs[k].ok) continue;
        out.hand_points.push_back(pairs[k].hand);
        out.object_points.push_back(pairs[k].object);
        const LayerKind layer = pixels[k].side == Side::Front ? LayerKind::Nearest : LayerKind::Farthest;
        out.provenance.push_back({pixels[k].x, pixels[k].y, layer, pixels[k].side});
    }
    return out;
}

}  // namespace hoi::contact
