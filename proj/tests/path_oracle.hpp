#pragma once

// Test-only oracle: exhaustive minimax over all simple grid paths, on the
// same edge set as the solver. Independent of the binary-search machinery.

#include <limits>
#include <vector>

#include "johnkit/grid.hpp"
#include "johnkit/john.hpp"

namespace johnkit_test {

struct PathOracle {
    const johnkit::GridDomain& dom;
    const johnkit::GraphModel& gm;
    int x0;
    double best = std::numeric_limits<double>::max();
    std::vector<std::uint8_t> visited;

    PathOracle(const johnkit::GridDomain& d, const johnkit::GraphModel& g, int target)
        : dom(d), gm(g), x0(target), visited(static_cast<std::size_t>(d.spec().size()), 0) {}

    void dfs(int v, double cum, double curmax) {
        if (curmax >= best) return; // the max only grows along a path
        if (v == x0) {
            best = curmax;
            return;
        }
        visited[static_cast<std::size_t>(v)] = 1;
        const johnkit::GridSpec& spec = dom.spec();
        int vi = spec.ix(v), vj = spec.iy(v);
        auto ins = [&](int i, int j) { return dom.inside(i, j); };
        const auto& moves = gm.nb.moves();
        for (std::size_t mi = 0; mi < moves.size(); ++mi) {
            const johnkit::Move& m = moves[mi];
            if (!gm.nb.allowed(ins, vi, vj, m)) continue;
            int u = spec.index(vi + m.dx, vj + m.dy);
            if (visited[static_cast<std::size_t>(u)]) continue;
            double nl = cum + gm.move_weight[mi];
            dfs(u, nl, std::max(curmax, nl / dom.dist(u)));
        }
        visited[static_cast<std::size_t>(v)] = 0;
    }

    double run(int x) {
        best = std::numeric_limits<double>::max();
        dfs(x, 0.0, 0.0);
        return best;
    }
};

} // namespace johnkit_test
