#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "johnkit/curve.hpp"
#include "johnkit/gauge.hpp"
#include "johnkit/geometry.hpp"
#include "johnkit/grid.hpp"

namespace johnkit {

// ---------------------------------------------------------------------------
// The curve family is the set of directed grid paths over inside cells; the
// continuum infimum over rectifiable curves is approached from above, and
// refinement studies quantify the gap. The quantity optimized is
//
//   J(x, Omega; x0) = min over paths x -> x0 of max over path nodes v of
//                     (cumulative gauge length to v) / dist(v, boundary),
//
// decided by binary search on J with a label-setting search that prunes
// nodes whose minimal cumulative length already violates L <= J*dist. The
// ratio at the start vertex is 0 by definition, so values below 1 occur on
// degenerate inputs and are reported raw.
// ---------------------------------------------------------------------------

struct ProfilePoint {
    double cum_len = 0.0;
    double dist = 0.0;
    double ratio = 0.0;
};

struct JohnCertificate {
    double value = 0.0;
    Polyline witness;               // from x to x0
    double witness_param = 0.0;     // normalized gauge-arclength of the argmax
    std::vector<ProfilePoint> per_vertex;
};

struct GraphModel {
    const GridDomain* dom = nullptr;
    const ConvexGauge* gauge = nullptr;
    Neighborhood nb;
    std::vector<double> move_weight; // gauge length of each move, precomputed

    GraphModel(const GridDomain& d, const ConvexGauge& g, Neighborhood::Kind kind)
        : dom(&d), gauge(&g), nb(kind) {
        for (const Move& m : nb.moves())
            move_weight.push_back(g.eval(Vec2{d.spec().h * m.dx, d.spec().h * m.dy}));
    }

    bool inside(int i, int j) const { return dom->inside(i, j); }
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::max();

struct MinQueueEntry {
    double key;
    int idx;
    bool operator>(const MinQueueEntry& o) const {
        return key > o.key || (key == o.key && idx > o.idx);
    }
};

using MinQueue = std::priority_queue<MinQueueEntry, std::vector<MinQueueEntry>, std::greater<MinQueueEntry>>;

// Unconstrained min-length Dijkstra from src; early exit at dst (pass -1 to
// sweep everything). reverse=true computes min length of paths v -> src.
inline void shortest_lengths(const GraphModel& gm, int src, int dst, bool reverse,
                             std::vector<double>& len, std::vector<int>& parent) {
    const GridSpec& spec = gm.dom->spec();
    len.assign(static_cast<std::size_t>(spec.size()), kInf);
    parent.assign(static_cast<std::size_t>(spec.size()), -1);
    auto ins = [&](int i, int j) { return gm.inside(i, j); };
    MinQueue pq;
    len[static_cast<std::size_t>(src)] = 0.0;
    pq.push({0.0, src});
    std::vector<std::uint8_t> done(static_cast<std::size_t>(spec.size()), 0);
    while (!pq.empty()) {
        auto [L, v] = pq.top();
        pq.pop();
        if (done[static_cast<std::size_t>(v)]) continue;
        done[static_cast<std::size_t>(v)] = 1;
        if (v == dst) return;
        int vi = spec.ix(v), vj = spec.iy(v);
        const auto& moves = gm.nb.moves();
        for (std::size_t mi = 0; mi < moves.size(); ++mi) {
            const Move& m = moves[mi];
            int ui, uj;
            if (!reverse) {
                if (!gm.nb.allowed(ins, vi, vj, m)) continue;
                ui = vi + m.dx;
                uj = vj + m.dy;
            } else {
                // predecessor u with an allowed move u -> v
                ui = vi - m.dx;
                uj = vj - m.dy;
                if (!spec.in_bounds(ui, uj) || !gm.inside(ui, uj)) continue;
                if (!gm.nb.allowed(ins, ui, uj, m)) continue;
            }
            int u = spec.index(ui, uj);
            double nl = L + gm.move_weight[mi];
            if (nl < len[static_cast<std::size_t>(u)]) {
                len[static_cast<std::size_t>(u)] = nl;
                parent[static_cast<std::size_t>(u)] = v;
                pq.push({nl, u});
            }
        }
    }
}

// Pruned forward search: true iff a path src -> dst exists with
// L(v) <= J*dist(v) at every node. Ties pass (resolved toward feasibility).
inline bool feasible_path(const GraphModel& gm, int src, int dst, double J,
                          std::vector<double>& len, std::vector<int>& parent) {
    const GridSpec& spec = gm.dom->spec();
    len.assign(static_cast<std::size_t>(spec.size()), kInf);
    parent.assign(static_cast<std::size_t>(spec.size()), -1);
    auto ins = [&](int i, int j) { return gm.inside(i, j); };
    MinQueue pq;
    len[static_cast<std::size_t>(src)] = 0.0;
    pq.push({0.0, src});
    std::vector<std::uint8_t> done(static_cast<std::size_t>(spec.size()), 0);
    while (!pq.empty()) {
        auto [L, v] = pq.top();
        pq.pop();
        if (done[static_cast<std::size_t>(v)]) continue;
        done[static_cast<std::size_t>(v)] = 1;
        if (v == dst) return true;
        int vi = spec.ix(v), vj = spec.iy(v);
        const auto& moves = gm.nb.moves();
        for (std::size_t mi = 0; mi < moves.size(); ++mi) {
            const Move& m = moves[mi];
            if (!gm.nb.allowed(ins, vi, vj, m)) continue;
            int u = spec.index(vi + m.dx, vj + m.dy);
            double nl = L + gm.move_weight[mi];
            if (nl > J * gm.dom->dist(u) + 1e-12 * (1.0 + nl)) continue;
            if (nl < len[static_cast<std::size_t>(u)]) {
                len[static_cast<std::size_t>(u)] = nl;
                parent[static_cast<std::size_t>(u)] = v;
                pq.push({nl, u});
            }
        }
    }
    return false;
}

struct MaxQueueEntry {
    double key;
    int idx;
    bool operator<(const MaxQueueEntry& o) const {
        return key < o.key || (key == o.key && idx > o.idx);
    }
};

// Backward slack sweep from the center: slack(v) is the largest budget a
// prefix arriving at v may spend so that some tail v -> x0 keeps
// L(u) <= J*dist(u) at every tail node. Feasibility of J for every start
// cell is slack >= 0 everywhere; nodes that never settle are infeasible.
// Returns the number of settled cells; *worst is the last settled cell.
inline long long center_sweep(const GraphModel& gm, int x0, double J, std::vector<double>& slack,
                              int* worst) {
    const GridSpec& spec = gm.dom->spec();
    slack.assign(static_cast<std::size_t>(spec.size()), -kInf);
    auto ins = [&](int i, int j) { return gm.inside(i, j); };
    std::priority_queue<MaxQueueEntry> pq;
    slack[static_cast<std::size_t>(x0)] = J * gm.dom->dist(x0);
    pq.push({slack[static_cast<std::size_t>(x0)], x0});
    std::vector<std::uint8_t> done(static_cast<std::size_t>(spec.size()), 0);
    long long settled = 0;
    int last = x0;
    while (!pq.empty()) {
        auto top = pq.top();
        pq.pop();
        int u = top.idx;
        if (done[static_cast<std::size_t>(u)]) continue;
        done[static_cast<std::size_t>(u)] = 1;
        ++settled;
        last = u;
        int uiX = spec.ix(u), ujY = spec.iy(u);
        const auto& moves = gm.nb.moves();
        for (std::size_t mi = 0; mi < moves.size(); ++mi) {
            const Move& m = moves[mi];
            int vi = uiX - m.dx, vj = ujY - m.dy;
            if (!spec.in_bounds(vi, vj) || !gm.inside(vi, vj)) continue;
            if (!gm.nb.allowed(ins, vi, vj, m)) continue; // move v -> u
            int v = spec.index(vi, vj);
            double cand = std::min(J * gm.dom->dist(v), top.key - gm.move_weight[mi]);
            if (cand < -1e-12) continue;
            if (cand > slack[static_cast<std::size_t>(v)]) {
                slack[static_cast<std::size_t>(v)] = cand;
                pq.push({cand, v});
            }
        }
    }
    if (worst) *worst = last;
    return settled;
}

inline JohnCertificate certificate_from_path(const GraphModel& gm, const std::vector<int>& parent,
                                             int src, int dst) {
    const GridSpec& spec = gm.dom->spec();
    std::vector<int> cells;
    for (int v = dst; v >= 0; v = parent[static_cast<std::size_t>(v)]) {
        cells.push_back(v);
        if (v == src) break;
    }
    std::reverse(cells.begin(), cells.end());
    require(!cells.empty() && cells.front() == src, "john: witness reconstruction failed");

    JohnCertificate cert;
    std::vector<Vec2> vs;
    vs.reserve(cells.size());
    for (int c : cells) vs.push_back(spec.center(c));
    cert.witness = Polyline(std::move(vs));

    double cum = 0.0;
    double best = -1.0;
    double best_len = 0.0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k > 0) cum += gm.gauge->eval(spec.center(cells[k]) - spec.center(cells[k - 1]));
        double d = gm.dom->dist(cells[k]);
        double ratio = (k == 0) ? 0.0 : cum / d;
        cert.per_vertex.push_back({cum, d, ratio});
        if (ratio > best) {
            best = ratio;
            best_len = cum;
        }
    }
    cert.value = std::max(0.0, best);
    cert.witness_param = cum > 0 ? best_len / cum : 0.0;
    return cert;
}

} // namespace detail

// ---------------------------------------------------------------------------
// ratio_profile: the raw sup of length/dist along a given curve, evaluated
// at core samples against the exact discrete boundary point cloud.
// ---------------------------------------------------------------------------

struct RatioProfile {
    std::vector<ProfilePoint> points;
    double sup = 0.0;
    double arg_t = 0.0; // first attaining normalized parameter
};

inline RatioProfile ratio_profile(const GridDomain& dom, const ConvexGauge& g, const Polyline& curve,
                                  double pitch = -1.0) {
    if (pitch <= 0) pitch = dom.spec().h / 2.0;
    std::vector<Vec2> sites;
    for (int idx : dom.outer_boundary()) sites.push_back(dom.spec().center(idx));
    require(!sites.empty(), "ratio_profile: domain has no boundary");
    SiteIndex index(std::move(sites));

    RatioProfile prof;
    std::vector<CoreSample> samples = sample_core(g, curve, pitch);
    double total = samples.empty() ? 0.0 : samples.back().s_fwd;
    for (const CoreSample& s : samples) {
        if (!dom.inside_point(s.p))
            throw std::invalid_argument("ratio_profile: curve exits the domain at (" +
                                        std::to_string(s.p.x) + "," + std::to_string(s.p.y) + ")");
        double d = index.min_gauge_from(s.p, g);
        double ratio = s.s_fwd > 0 ? s.s_fwd / d : 0.0;
        prof.points.push_back({s.s_fwd, d, ratio});
        if (ratio > prof.sup + 1e-15) {
            prof.sup = ratio;
            prof.arg_t = total > 0 ? s.s_fwd / total : 0.0;
        }
    }
    return prof;
}

// ---------------------------------------------------------------------------
// john_point
// ---------------------------------------------------------------------------

inline JohnCertificate john_point(GridDomain& dom, const ConvexGauge& g, int x, int x0,
                                  double tol_J = -1.0,
                                  Neighborhood::Kind kind = Neighborhood::kEight) {
    require(dom.inside(x) && dom.inside(x0), "john_point: endpoints must be inside the domain");
    dom.ensure_distance(g);
    GraphModel gm(dom, g, kind);
    const GridSpec& spec = dom.spec();

    if (x == x0) {
        JohnCertificate cert;
        cert.witness = Polyline({spec.center(x)});
        cert.per_vertex.push_back({0.0, dom.dist(x), 0.0});
        return cert;
    }

    std::vector<double> len;
    std::vector<int> parent;
    detail::shortest_lengths(gm, x, x0, false, len, parent);
    if (len[static_cast<std::size_t>(x0)] >= detail::kInf)
        throw std::runtime_error("john_point: not connected");

    JohnCertificate best = detail::certificate_from_path(gm, parent, x, x0);
    double hi = best.value;
    double lo = g.eval(spec.center(x0) - spec.center(x)) / dom.dist(x0);
    lo = std::min(lo, hi);
    if (tol_J <= 0) tol_J = 1e-3 * std::max(1e-12, hi - lo);

    std::vector<double> plen;
    std::vector<int> pparent;
    while (hi - lo > tol_J) {
        double mid = 0.5 * (lo + hi);
        if (detail::feasible_path(gm, x, x0, mid, plen, pparent)) {
            JohnCertificate cand = detail::certificate_from_path(gm, pparent, x, x0);
            if (cand.value < best.value) best = cand;
            hi = std::min(mid, best.value);
        } else {
            lo = mid;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// john_center: sup over inside cells of john_point, via the shared backward
// sweep. worst_x is the last cell to be covered at the accepted J.
// ---------------------------------------------------------------------------

struct CenterResult {
    double value = 0.0;
    int worst_x = -1;
};

inline CenterResult john_center(GridDomain& dom, const ConvexGauge& g, int x0, double tol_J = -1.0,
                                Neighborhood::Kind kind = Neighborhood::kEight,
                                double warm_hint = -1.0) {
    require(dom.inside(x0), "john_center: center must be inside the domain");
    dom.ensure_distance(g);
    GraphModel gm(dom, g, kind);
    const GridSpec& spec = dom.spec();

    long long n_inside = dom.inside_count();
    if (n_inside == 1) return {0.0, x0};

    // Cheap valid lower bound: any curve into x0 is at least as long as the
    // straight gauge displacement, and gauge(v) >= |v| / rho_max.
    double lo = 0.0;
    {
        double far = 0.0;
        for (int idx = 0; idx < spec.size(); ++idx)
            if (dom.inside(idx)) far = std::max(far, norm(spec.center(x0) - spec.center(idx)));
        lo = far / (g.rho_max() * dom.dist(x0));
    }

    std::vector<double> slack;
    int worst = -1;
    double hi = warm_hint > lo ? warm_hint : std::max(lo * 1.25, lo + 0.05);
    int worst_feasible = -1;
    bool found = false;
    for (int guard = 0; guard < 200 && !found; ++guard) {
        long long settled = detail::center_sweep(gm, x0, hi, slack, &worst);
        if (settled == n_inside) {
            worst_feasible = worst;
            found = true;
            break;
        }
        if (hi > 1e12) {
            // distinguish disconnection from a too-small J: an unconstrained
            // sweep settles everything iff the domain is connected
            std::vector<double> ulen;
            std::vector<int> uparent;
            detail::shortest_lengths(gm, x0, -1, true, ulen, uparent);
            long long reach = 0;
            for (int idx = 0; idx < spec.size(); ++idx)
                if (dom.inside(idx) && ulen[static_cast<std::size_t>(idx)] < detail::kInf) ++reach;
            if (reach < n_inside) throw std::runtime_error("john_center: not connected");
        }
        lo = hi;
        hi = hi * 1.6 + 0.05;
    }
    if (!found) throw std::runtime_error("john_center: no feasible value found");

    if (tol_J <= 0) tol_J = 1e-3 * std::max(1e-12, hi - lo);
    while (hi - lo > tol_J) {
        double mid = 0.5 * (lo + hi);
        long long settled = detail::center_sweep(gm, x0, mid, slack, &worst);
        if (settled == n_inside) {
            hi = mid;
            worst_feasible = worst;
        } else {
            lo = mid;
        }
    }
    return {hi, worst_feasible};
}

// ---------------------------------------------------------------------------
// optimal_john: minimize john_center over candidate centers deep enough per
// the inradius bound r0 = r / (1 + 2*C*J(Omega; x_inradius)).
// ---------------------------------------------------------------------------

struct OptimalJohnResult {
    double value = 0.0;
    int center = -1;
    int worst_x = -1;
    double r0 = 0.0;
    double inradius = 0.0;
    int inradius_cell = -1;
    long long candidates = 0;
    long long evaluated = 0;
};

inline OptimalJohnResult optimal_john(GridDomain& dom, const ConvexGauge& g, double tol_J = 1e-3,
                                      Neighborhood::Kind kind = Neighborhood::kEight,
                                      bool exhaustive = false) {
    dom.ensure_distance(g);
    const GridSpec& spec = dom.spec();
    OptimalJohnResult out;

    auto [x_in, r_in] = inradius_point(dom, g);
    out.inradius = r_in;
    out.inradius_cell = x_in;
    double coarse_tol = std::max(tol_J, 5e-3);
    CenterResult at_inradius = john_center(dom, g, x_in, coarse_tol, kind);
    double C = g.asymmetry_constant();
    out.r0 = r_in / (1.0 + 2.0 * C * at_inradius.value);

    std::vector<int> candidates;
    for (int idx = 0; idx < spec.size(); ++idx)
        if (dom.inside(idx) && dom.dist(idx) >= out.r0 - 1e-12) candidates.push_back(idx);
    out.candidates = static_cast<long long>(candidates.size());

    double best_v = at_inradius.value;
    int best_c = x_in;
    double warm = at_inradius.value;
    long long evals = 1;

    auto eval_cell = [&](int idx, double tol) {
        CenterResult r = john_center(dom, g, idx, tol, kind, warm * 1.02 + tol);
        warm = r.value;
        ++evals;
        if (r.value < best_v - 1e-12) {
            best_v = r.value;
            best_c = idx;
        }
        return r;
    };

    bool small = exhaustive || spec.nx * spec.ny <= 64 * 64;
    if (small) {
        for (int idx : candidates)
            if (idx != x_in) eval_cell(idx, coarse_tol);
    } else {
        int stride = 1;
        while (static_cast<long long>(candidates.size()) / (static_cast<long long>(stride) * stride) > 300)
            stride *= 2;
        for (int idx : candidates) {
            int i = spec.ix(idx), j = spec.iy(idx);
            if (i % stride == 0 && j % stride == 0) eval_cell(idx, coarse_tol);
        }
        for (int s = stride; s >= 1; s /= 2) {
            int ci = spec.ix(best_c), cj = spec.iy(best_c);
            for (int dj = -2; dj <= 2; ++dj)
                for (int di = -2; di <= 2; ++di) {
                    int i = ci + di * std::max(1, s / 2);
                    int j = cj + dj * std::max(1, s / 2);
                    if (!spec.in_bounds(i, j)) continue;
                    int idx = spec.index(i, j);
                    if (!dom.inside(idx) || dom.dist(idx) < out.r0 - 1e-12) continue;
                    if (idx == best_c) continue;
                    eval_cell(idx, coarse_tol);
                }
            if (s == 1) break;
        }
    }

    CenterResult fin = john_center(dom, g, best_c, tol_J, kind, best_v * 1.02 + tol_J);
    ++evals;
    out.value = fin.value;
    out.center = best_c;
    out.worst_x = fin.worst_x;
    out.evaluated = evals;
    return out;
}

// ---------------------------------------------------------------------------
// Probes for the continuity and lower-bound estimates.
// ---------------------------------------------------------------------------

struct LipschitzPair {
    int x, y, xh, yh;
};

struct LipschitzSample {
    LipschitzPair pair;
    bool skipped = false;
    std::string reason;
    double j1 = 0.0, j2 = 0.0;
    double ratio = 0.0; // |dJ| * d(x) / (||x-xh|| + ||y-yh||)
};

struct LipschitzReport {
    std::vector<LipschitzSample> samples;
    double max_ratio = 0.0;
    int used = 0;
};

inline LipschitzReport lipschitz_probe(GridDomain& dom, const ConvexGauge& g,
                                       const std::vector<LipschitzPair>& pairs, double tol_J,
                                       Neighborhood::Kind kind = Neighborhood::kEight) {
    dom.ensure_distance(g);
    const GridSpec& spec = dom.spec();
    LipschitzReport rep;
    for (const LipschitzPair& pr : pairs) {
        LipschitzSample s;
        s.pair = pr;
        if (!dom.inside(pr.x) || !dom.inside(pr.y) || !dom.inside(pr.xh) || !dom.inside(pr.yh)) {
            s.skipped = true;
            s.reason = "point outside domain";
            rep.samples.push_back(s);
            continue;
        }
        double dx = g.eval(spec.center(pr.x) - spec.center(pr.xh));
        double dy = g.eval(spec.center(pr.y) - spec.center(pr.yh));
        double delta = dx + dy;
        double lim = 0.5 * std::min(dom.dist(pr.x), dom.dist(pr.y));
        if (delta > lim) {
            s.skipped = true;
            s.reason = "perturbation exceeds half the boundary clearance";
            rep.samples.push_back(s);
            continue;
        }
        s.j1 = john_point(dom, g, pr.x, pr.y, tol_J, kind).value;
        s.j2 = john_point(dom, g, pr.xh, pr.yh, tol_J, kind).value;
        if (delta > 0) {
            s.ratio = std::abs(s.j1 - s.j2) * dom.dist(pr.x) / delta;
            rep.max_ratio = std::max(rep.max_ratio, s.ratio);
        }
        ++rep.used;
        rep.samples.push_back(s);
    }
    return rep;
}

struct LowerBoundSample {
    int y = -1;
    double rhs = 0.0;
    double lhs = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct LowerBoundReport {
    std::vector<LowerBoundSample> samples;
    bool all_pass = true;
};

// J(Omega; y) >= (r_in - d(y)) / (C * d(y)) at sampled centers, with a
// tolerance absorbing the discretization.
inline LowerBoundReport lower_bound_check(GridDomain& dom, const ConvexGauge& g,
                                          const std::vector<int>& ys, double tol_J,
                                          Neighborhood::Kind kind = Neighborhood::kEight,
                                          double base_tol = 0.1) {
    dom.ensure_distance(g);
    auto [x_in, r_in] = inradius_point(dom, g);
    (void)x_in;
    double C = g.asymmetry_constant();
    const double h = dom.spec().h;
    LowerBoundReport rep;
    for (int y : ys) {
        LowerBoundSample s;
        s.y = y;
        double dy = dom.dist(y);
        s.rhs = (r_in - dy) / (C * dy);
        s.lhs = john_center(dom, g, y, tol_J, kind).value;
        s.tol = base_tol + 4.0 * h / dy;
        s.pass = s.lhs >= s.rhs - s.tol;
        rep.all_pass = rep.all_pass && s.pass;
        rep.samples.push_back(s);
    }
    return rep;
}

} // namespace johnkit
