#include "hoi/render/visibility.hpp"

namespace hoi::render {

std::vector<int> visibility_labels(const std::vector<const geom::MeshIndex*>& meshes, const Camera& cam)
{
    validate(cam);
    std::vector<int> labels(static_cast<std::size_t>(cam.width) * cam.height, -1);
    parallel_for(labels.size(), [&](std::size_t i) {
        const int x = static_cast<int>(i % cam.width);
        const int y = static_cast<int>(i / cam.width);
        const geom::Ray ray = pixel_ray(cam, x + 0.5, y + 0.5);
        double best = 1e300;
        for (std::size_t m = 0; m < meshes.size(); ++m) {
            const geom::DepthHits h = meshes[m]->cast_peeled(ray, 1);
            if (!h.empty() && h.hits[0].depth < best) {
                best = h.hits[0].depth;
                labels[i] = static_cast<int>(m);
            }
        }
    });
    return labels;
}

Mask label_mask(const std::vector<int>& labels, int width, int height, int which)
{
    Mask m(width, height);
    for (std::size_t i = 0; i < labels.size(); ++i) m.values[i] = labels[i] == which ? 1.0 : 0.0;
    return m;
}

Mask hard_silhouette(const geom::MeshIndex& mesh, const Camera& cam)
{
    return label_mask(visibility_labels({&mesh}, cam), cam.width, cam.height, 0);
}

}  // namespace hoi::render
