#include "working.hpp"

namespace hoi::pipeline {

WorkingView working_view(const Scene& scene, const render::Camera& camera, int resolution)
{
    const SceneMasks& sm = scene.masks;
    const auto [w, h] = working_size(sm.hand.width, sm.hand.height, resolution);
    WorkingView v;
    v.camera = render::resized(camera, w, h);
    v.hand_target = render::resampled(sm.hand, w, h);
    v.object_visible = render::binarized(render::resampled(sm.object, w, h));
    v.object_complete = render::binarized(render::resampled(sm.object_inpainted, w, h));
    v.hand_visible = render::binarized(v.hand_target);
    v.valid = render::Mask(w, h);
    for (std::size_t i = 0; i < v.valid.size(); ++i) v.valid.values[i] = v.object_visible.values[i] >= 0.5 ? 0.0 : 1.0;
    return v;
}

}  // namespace hoi::pipeline
