#pragma once

#include "hoi/pipeline/pipeline.hpp"

namespace hoi::pipeline {

/// Scene masks and camera at the optimization resolution.
struct WorkingView {
    render::Camera camera;
    render::Mask hand_target;  // soft, area-averaged
    render::Mask valid;        // 1 outside the visible object
    render::Mask object_visible;
    render::Mask object_complete;
    render::Mask hand_visible;
};

WorkingView working_view(const Scene& scene, const render::Camera& camera, int resolution);

}  // namespace hoi::pipeline
