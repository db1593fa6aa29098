#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "scalelab/errors.hpp"

namespace scalelab {

/// A (training compute, loss) observation. `source_run` indexes the
/// originating record in its RunDataset.
struct CostLossPoint {
    double cost = 0.0; ///< MACs
    double loss = 0.0;
    std::size_t source_run = 0;

    friend bool operator==(const CostLossPoint&, const CostLossPoint&) = default;
};

/// Points not weakly dominated by any other point, sorted by ascending cost.
/// q dominates p when (q.cost <= p.cost and q.loss < p.loss) or
/// (q.cost < p.cost and q.loss <= p.loss). Exact duplicates keep the first
/// occurrence.
inline std::vector<CostLossPoint> pareto_frontier(const std::vector<CostLossPoint>& points) {
    if (points.empty()) throw EmptyInput("pareto frontier of an empty point set");

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Ascending cost, then ascending loss; stable so duplicates keep input order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].cost != points[b].cost) return points[a].cost < points[b].cost;
        return points[a].loss < points[b].loss;
    });

    // Staircase sweep: a point survives iff its loss beats every cheaper point.
    std::vector<CostLossPoint> frontier;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
        if (points[i].loss < best) {
            frontier.push_back(points[i]);
            best = points[i].loss;
        }
    }
    return frontier;
}

} // namespace scalelab
