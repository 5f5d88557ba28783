#include "hoi/contact/contact.hpp"
#include "hoi/geometry/kdtree.hpp"

namespace hoi::contact {

namespace {

double mean_distance(const std::vector<Vec3>& points, const geom::KdTree& tree, const Vec3& t,
                     std::vector<int>* matches)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto hit = tree.nearest(points[i] + t);
        sum += hit.distance;
        if (matches) (*matches)[i] = hit.index;
    }
    return sum / static_cast<double>(points.size());
}

}  // namespace

double mean_nearest_distance(const std::vector<Vec3>& points, const std::vector<Vec3>& targets, const Vec3& t)
{
    if (points.empty() || targets.empty()) throw InputError("mean_nearest_distance: empty point set");
    return mean_distance(points, geom::KdTree(targets), t, nullptr);
}

IcpResult icp_translation(const std::vector<Vec3>& hand_points, const std::vector<Vec3>& object_points,
                          int max_iters, double tol)
{
    if (hand_points.empty()) throw InputError("icp_translation: no hand points");
    if (object_points.empty()) throw InputError("icp_translation: no object points");
    const geom::KdTree tree(object_points);
    std::vector<int> match(hand_points.size());

    IcpResult res;
    double current = mean_distance(hand_points, tree, res.translation, &match);
    res.initial_mean = current;
    for (int it = 0; it < max_iters; ++it) {
        Vec3 step = Vec3::Zero();
        for (std::size_t i = 0; i < hand_points.size(); ++i)
            step += object_points[match[i]] - (hand_points[i] + res.translation);
        step /= static_cast<double>(hand_points.size());
        if (step.norm() < tol) break;

        bool improved = false;
        std::vector<int> next_match(hand_points.size());
        for (int halving = 0; halving < 20; ++halving) {
            const double trial = mean_distance(hand_points, tree, res.translation + step, &next_match);
            if (trial <= current) {
                res.translation += step;
                current = trial;
                match.swap(next_match);
                improved = true;
                break;
            }
            step *= 0.5;
            if (step.norm() < tol) break;
        }
        res.iterations = it + 1;
        if (!improved || step.norm() < tol) break;
    }
    res.final_mean = current;
    return res;
}

}  // namespace hoi::contact
