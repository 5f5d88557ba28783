#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

// Exact discrete optimal transport by successive shortest paths on integer
// supplies, independent of the Sinkhorn solver under test.
namespace hoi::testing {

struct WeightedPoint {
    double x, y;
    std::int64_t mass;
};

/// Minimum of sum c_ij f_ij / (S_a S_b) over transport plans between the two
/// normalized point sets, c = squared Euclidean distance. Masses are scaled
/// by the other side's total so both sides sum to S_a S_b.
inline double exact_transport_cost(const std::vector<WeightedPoint>& a, const std::vector<WeightedPoint>& b)
{
    const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
    std::int64_t sa = 0, sb = 0;
    for (const auto& p : a) sa += p.mass;
    for (const auto& p : b) sb += p.mass;
    std::vector<std::int64_t> supply(n), demand(m);
    for (int i = 0; i < n; ++i) supply[i] = a[i].mass * sb;
    for (int j = 0; j < m; ++j) demand[j] = b[j].mass * sa;
    std::vector<double> cost(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double dx = a[i].x - b[j].x, dy = a[i].y - b[j].y;
            cost[static_cast<std::size_t>(i) * m + j] = dx * dx + dy * dy;
        }
    std::vector<std::int64_t> flow(static_cast<std::size_t>(n) * m, 0);
    const double inf = std::numeric_limits<double>::infinity();

    while (true) {
        // Bellman-Ford over sources (0..n-1) and sinks (n..n+m-1) from a virtual root.
        std::vector<double> dist(n + m, inf);
        std::vector<int> prev(n + m, -1);
        for (int i = 0; i < n; ++i)
            if (supply[i] > 0) dist[i] = 0.0;
        for (int round = 0; round < n + m; ++round) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < m; ++j) {
                    const double c = cost[static_cast<std::size_t>(i) * m + j];
                    if (dist[i] < inf && dist[i] + c < dist[n + j] - 1e-12) {
                        dist[n + j] = dist[i] + c;
                        prev[n + j] = i;
                        changed = true;
                    }
                    if (flow[static_cast<std::size_t>(i) * m + j] > 0 && dist[n + j] < inf &&
                        dist[n + j] - c < dist[i] - 1e-12) {
                        dist[i] = dist[n + j] - c;
                        prev[i] = n + j;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        int sink = -1;
        for (int j = 0; j < m; ++j)
            if (demand[j] > 0 && dist[n + j] < inf && (sink < 0 || dist[n + j] < dist[n + sink])) sink = j;
        if (sink < 0) break;
        // Bottleneck along the path back to a source.
        std::int64_t push = demand[sink];
        int node = n + sink;
        while (prev[node] != -1) {
            const int p = prev[node];
            if (node < n) push = std::min(push, flow[static_cast<std::size_t>(node) * m + (p - n)]);
            node = p;
        }
        push = std::min(push, supply[node]);
        node = n + sink;
        while (prev[node] != -1) {
            const int p = prev[node];
            if (node >= n)
                flow[static_cast<std::size_t>(p) * m + (node - n)] += push;
            else
                flow[static_cast<std::size_t>(node) * m + (p - n)] -= push;
            node = p;
        }
        supply[node] -= push;
        demand[sink] -= push;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < flow.size(); ++k) total += cost[k] * static_cast<double>(flow[k]);
    return total / (static_cast<double>(sa) * static_cast<double>(sb));
}

}  // namespace hoi::testing
