#pragma once

#include "hoi/render/mask.hpp"

namespace hoi::losses {

/// Scalar loss with its gradient w.r.t. the rendered mask.
struct MaskLoss {
    double value = 0.0;
    render::Mask grad;
};

/// 1 - sum(r t) / (sum r + sum t - sum(r t)). When `valid` is given, both
/// masks are multiplied by it first (pixels with valid = 0 are ignored).
MaskLoss soft_iou_loss(const render::Mask& rendered, const render::Mask& target,
                       const render::Mask* valid = nullptr);

struct SinkhornConfig {
    double epsilon = 1.0;  // px^2 on the (possibly coarsened) transport grid
    int max_iters = 500;
    double tol = 1e-6;     // L1 violation of the row marginal
    int max_grid = 64;     // larger masks are block-summed down to at most this side
};

void validate(const SinkhornConfig& cfg);

struct SinkhornResult {
    /// Square root of the entropic transport cost between the normalized
    /// masks, in pixels of the input resolution.
    double value = 0.0;
    double cost = 0.0;  // value^2, px^2
    render::Mask grad;  // d value / d rendered
    bool converged = false;
    int iterations = 0;
    double marginal_error = 0.0;
    int grid_factor = 1;  // block size used for coarsening
};

/// Log-domain Sinkhorn with squared-distance ground cost and epsilon
/// annealing. Gradient from the dual potential of `rendered`.
SinkhornResult sinkhorn_loss(const render::Mask& rendered, const render::Mask& target,
                             const SinkhornConfig& cfg = {});

}  // namespace hoi::losses
