#include "hoi/geometry/topology.hpp"

#include <algorithm>
#include <map>

namespace hoi::geom {

WatertightReport is_watertight(const TriMesh& mesh)
{
    // undirected edge -> (uses in a<b direction, uses in b<a direction)
    std::map<std::pair<int, int>, std::pair<int, int>> edges;
    for (const Face& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            const int a = f[k];
            const int b = f[(k + 1) % 3];
            auto& e = edges[{std::min(a, b), std::max(a, b)}];
            if (a < b)
                ++e.first;
            else
                ++e.second;
        }
    }
    WatertightReport report;
    for (const auto& [key, uses] : edges) {
        const int total = uses.first + uses.second;
        if (total == 1)
            report.boundary_edges.push_back(key);
        else if (total > 2)
            report.nonmanifold_edges.push_back(key);
        else if (uses.first != 1)
            report.misoriented_edges.push_back(key);
    }
    report.watertight = !mesh.faces.empty() && report.boundary_edges.empty() &&
                        report.nonmanifold_edges.empty() && report.misoriented_edges.empty();
    return report;
}

}  // namespace hoi::geom
