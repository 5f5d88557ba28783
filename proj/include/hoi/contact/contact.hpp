#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hoi/geometry/mesh_index.hpp"
#include "hoi/render/camera.hpp"
#include "hoi/render/mask.hpp"

namespace hoi::contact {

/// front: object pixels hidden by the hand. back: hand pixels hidden by the object.
struct ContactMasks {
    render::Mask front;
    render::Mask back;
};

/// Grey-level opening with a 3x3 square (erosion then dilation).
render::Mask opened(const render::Mask& m);

/// front = open(clamp(inpainted_object - object)), back = open(clamp(complete_hand - hand)).
ContactMasks derive_contact_masks(const render::Mask& object, const render::Mask& inpainted_object,
                                  const render::Mask& hand, const render::Mask& complete_hand);

enum class LayerKind { Nearest, Farthest };
enum class Side { Front, Back };

struct Provenance {
    int x = 0, y = 0;  // pixel
    LayerKind layer = LayerKind::Nearest;
    Side side = Side::Front;
};

/// Paired candidates: hand_points[k] and object_points[k] come from the same
/// pixel ray, described by provenance[k].
struct ContactPointSet {
    std::vector<Vec3> hand_points;
    std::vector<Vec3> object_points;
    std::vector<Provenance> provenance;
    bool empty() const { return hand_points.empty(); }
};

struct ExtractOptions {
    int layers = 4;         // depth-peeling budget per mesh
    int max_rays = 5000;    // foreground pixels are strided down to this count
};

/// Casts one ray per foreground pixel (value >= 0.5) of each contact mask.
/// Front pixels take nearest hits, back pixels farthest hits; hand hits are
/// restricted to palmar faces. Pixels missing either mesh are dropped.
ContactPointSet extract_contact_points(const ContactMasks& masks, const render::Camera& cam,
                                       const geom::MeshIndex& object, const geom::MeshIndex& hand,
                                       const std::vector<int>& palmar_faces, const ExtractOptions& opt = {});

struct IcpResult {
    Vec3 translation = Vec3::Zero();
    int iterations = 0;
    double initial_mean = 0.0;  // mean nearest-neighbour distance before
    double final_mean = 0.0;    // and after applying `translation`
};

/// Translation-only ICP moving hand_points onto object_points. Each step
/// matches every hand point to its nearest object point and moves by the
/// centroid difference; steps that would raise the mean nearest-neighbour
/// distance are halved, and the loop stops when none helps.
IcpResult icp_translation(const std::vector<Vec3>& hand_points, const std::vector<Vec3>& object_points,
                          int max_iters = 50, double tol = 1e-9);

/// Mean distance from each point (shifted by t) to its nearest target.
double mean_nearest_distance(const std::vector<Vec3>& points, const std::vector<Vec3>& targets, const Vec3& t);

/// Foreground pixels (>= 0.5) with a background pixel or the image border
/// among their 8 neighbours.
std::vector<std::pair<int, int>> contour_pixels(const render::Mask& m);

/// Indices of the object masks whose contour comes within adjacency_px of
/// the hand contour, in input order.
std::vector<int> contour_filter(const render::Mask& hand, const std::vector<render::Mask>& objects,
                                double adjacency_px = 3.0);

struct SegPrompts {
    std::vector<Vec2> points;  // pixel centres
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive pixel bounds
};

/// 8-connected components of the binarized mask, labelled in raster order.
std::vector<int> label_components(const render::Mask& m, int* count);

/// Samples points uniformly inside each component and a union bounding box
/// dilated by `bbox_margin` (clamped to the image).
SegPrompts make_seg_prompts(const render::Mask& occluded, int samples_per_component = 3, int bbox_margin = 5,
                            std::uint64_t seed = 0);

/// {"points": [[x, y], ...], "bbox": [x0, y0, x1, y1]}
std::string format_seg_prompts(const SegPrompts& p);

}  // namespace hoi::contact
