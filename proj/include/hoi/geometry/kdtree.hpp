#pragma once

#include <vector>

#include "hoi/common.hpp"

namespace hoi::geom {

/// Static 3-d tree for exact nearest-neighbour queries.
class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points);

    struct Hit {
        int index = -1;
        double distance = 0.0;
    };

    /// Nearest stored point; ties resolve to the lowest index.
    Hit nearest(const Vec3& q) const;

    const std::vector<Vec3>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }

private:
    struct Node {
        int point = -1;
        int axis = 0;
        int left = -1;
        int right = -1;
    };

    int build(int first, int last, int depth);
    void search(int node, const Vec3& q, Hit& best, double& best_d2) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace hoi::geom
