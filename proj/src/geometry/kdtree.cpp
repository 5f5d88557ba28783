#include "hoi/geometry/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hoi::geom {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points))
{
    if (points_.empty()) throw InputError("KdTree: no points");
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
    nodes_.reserve(points_.size());
    root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree::build(int first, int last, int depth)
{
    if (first >= last) return -1;
    Vec3 lo = points_[order_[first]], hi = lo;
    for (int i = first; i < last; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = first + (last - first) / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + last, [&](int a, int b) {
        const double pa = points_[a][axis], pb = points_[b][axis];
        return pa < pb || (pa == pb && a < b);
    });
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({order_[mid], axis, -1, -1});
    const int left = build(first, mid, depth + 1);
    const int right = build(mid + 1, last, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(int node, const Vec3& q, Hit& best, double& best_d2) const
{
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Vec3& p = points_[n.point];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && n.point < best.index)) {
        best_d2 = d2;
        best.index = n.point;
    }
    const double delta = q[n.axis] - p[n.axis];
    const int near = delta < 0.0 ? n.left : n.right;
    const int far = delta < 0.0 ? n.right : n.left;
    search(near, q, best, best_d2);
    if (delta * delta <= best_d2) search(far, q, best, best_d2);
}

KdTree::Hit KdTree::nearest(const Vec3& q) const
{
    Hit best;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(root_, q, best, best_d2);
    best.distance = std::sqrt(best_d2);
    return best;
}

}  // namespace hoi::geom
