#include "hoi/losses/mask_losses.hpp"

namespace hoi::losses {

MaskLoss soft_iou_loss(const render::Mask& rendered, const render::Mask& target, const render::Mask* valid)
{
    if (!rendered.same_size(target))
        throw InputError("soft_iou_loss: rendered is " + std::to_string(rendered.width) + "x" +
                         std::to_string(rendered.height) + " but target is " + std::to_string(target.width) +
                         "x" + std::to_string(target.height));
    if (valid && !valid->same_size(target)) throw InputError("soft_iou_loss: valid mask size mismatch");
    const std::size_t n = target.size();
    double inter = 0.0, sum_r = 0.0, sum_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = valid ? valid->values[i] : 1.0;
        const double r = w * rendered.values[i], t = w * target.values[i];
        inter += r * t;
        sum_r += r;
        sum_t += t;
    }
    if (!(sum_t > 0.0)) throw InputError("soft_iou_loss: target mask is empty");
    const double uni = sum_r + sum_t - inter;
    MaskLoss out;
    out.value = 1.0 - inter / uni;
    out.grad = render::Mask(target.width, target.height);
    const double inv = 1.0 / (uni * uni);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = valid ? valid->values[i] : 1.0;
        const double t = w * target.values[i];
        out.grad.values[i] = -w * (t * uni - inter * (1.0 - t)) * inv;
    }
    return out;
}

}  // namespace hoi::losses
