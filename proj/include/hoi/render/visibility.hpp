#pragma once

#include <vector>

#include "hoi/geometry/mesh_index.hpp"
#include "hoi/render/camera.hpp"
#include "hoi/render/mask.hpp"

namespace hoi::render {

/// Per-pixel index of the mesh whose surface is nearest along the pixel-centre
/// ray, or -1 when every ray misses.
std::vector<int> visibility_labels(const std::vector<const geom::MeshIndex*>& meshes, const Camera& cam);

/// Binary mask of pixels whose centre ray hits `mesh`.
Mask hard_silhouette(const geom::MeshIndex& mesh, const Camera& cam);

/// Binary mask of pixels labelled `which`.
Mask label_mask(const std::vector<int>& labels, int width, int height, int which);

}  // namespace hoi::render
