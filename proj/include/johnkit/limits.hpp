#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "johnkit/gauge.hpp"
#include "johnkit/grid.hpp"
#include "johnkit/john.hpp"

namespace johnkit {

// Unit disk minus the closed slit [0,1] x [-2^-k, 2^-k]. The slit must span
// at least two cells of half-width, otherwise the rasterization cannot
// separate its two sides.
inline GridDomain slit_disk(int k, const GridSpec& spec) {
    require(k >= 1, "slit_disk: k must be >= 1");
    double w = std::pow(2.0, -k);
    if (w < 2.0 * spec.h - 1e-12)
        throw std::invalid_argument("slit_disk: refine grid (slit half-width below 2h)");
    return GridDomain::from_predicate(spec, [&](const Vec2& p) {
        if (norm(p) >= 1.0) return false;
        if (p.x >= 0.0 && p.x <= 1.0 && std::abs(p.y) <= w) return false;
        return true;
    });
}

struct SequenceScenario {
    std::string name;
    GridSpec spec;
    std::function<GridDomain(int)> generator;
    std::optional<GridDomain> limit_hint; // analytic limit when the discrete
                                          // limsup would keep O(h) artifacts
    ConvexGauge gauge = ConvexGauge::euclidean();
    int k_min = 1;
    int k_max = 4;
    double tol = 0.1;
    double tol_J = 2e-3;
    Neighborhood::Kind kind = Neighborhood::kSixteen;
};

struct LscRow {
    int k = 0;
    double john = 0.0;
    double dh_to_limit = 0.0;
};

struct LscReport {
    std::vector<LscRow> rows;
    double john_limit = 0.0;
    double min_john = 0.0;
    double gap = 0.0;          // min_k John(Omega_k) - John(limit)
    double inradius_limit = 0.0;
    bool lsc_ok = false;
    bool limit_connected = true;
    int limit_components = 1;
    double dh_limsup_vs_limit = 0.0;
    bool dh_monotone = true;
    std::string note;
};

// Runs the sequence, solves every John constant, and checks the
// lower-semicontinuity inequality John(limit) <= min_k John(Omega_k) + tol.
// The limit domain comes from limit_hint when provided; the truncated
// limsup of the closures is reported against it either way.
inline LscReport lsc_experiment(const SequenceScenario& sc) {
    LscReport rep;
    std::vector<CompactSet> closures;
    std::vector<GridDomain> domains;
    for (int k = sc.k_min; k <= sc.k_max; ++k) {
        domains.push_back(sc.generator(k));
        require(domains.back().spec().same_as(sc.spec), "lsc: generator changed the grid");
        closures.push_back(CompactSet::closure_of(domains.back()));
    }

    GridDomain limit;
    CompactSet limsup = limsup_closure(closures);
    if (sc.limit_hint) {
        limit = *sc.limit_hint;
        rep.dh_limsup_vs_limit =
            hausdorff_distance(limsup, CompactSet::closure_of(limit), sc.gauge);
    } else {
        // interior of the limsup mask: drop cells touching the complement
        const GridSpec& spec = sc.spec;
        std::vector<std::uint8_t> interior(static_cast<std::size_t>(spec.size()), 0);
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                if (!limsup.get(spec.index(i, j))) continue;
                bool deep = true;
                for (int dj = -1; dj <= 1 && deep; ++dj)
                    for (int di = -1; di <= 1 && deep; ++di)
                        if (!limsup.get(i + di, j + dj)) deep = false;
                if (deep) interior[static_cast<std::size_t>(spec.index(i, j))] = 1;
            }
        limit = GridDomain(spec, std::move(interior));
    }

    Neighborhood nb(sc.kind);
    limit.components(nb, &rep.limit_components);
    rep.limit_connected = rep.limit_components <= 1;
    if (!rep.limit_connected) {
        rep.note = "limit not a domain";
        return rep;
    }

    CompactSet limit_closure = CompactSet::closure_of(limit);
    double prev_dh = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < domains.size(); ++i) {
        int k = sc.k_min + static_cast<int>(i);
        require(domains[i].is_connected(nb), "lsc: scenario domain disconnected at k=" + std::to_string(k));
        OptimalJohnResult r = optimal_john(domains[i], sc.gauge, sc.tol_J, sc.kind);
        double dh = hausdorff_distance(closures[i], limit_closure, sc.gauge);
        rep.rows.push_back({k, r.value, dh});
        if (dh > prev_dh + 1e-12) rep.dh_monotone = false;
        prev_dh = dh;
    }

    OptimalJohnResult rl = optimal_john(limit, sc.gauge, sc.tol_J, sc.kind);
    rep.john_limit = rl.value;
    rep.inradius_limit = rl.inradius;
    rep.min_john = std::numeric_limits<double>::max();
    for (const LscRow& row : rep.rows) rep.min_john = std::min(rep.min_john, row.john);
    rep.gap = rep.min_john - rep.john_limit;
    rep.lsc_ok = rep.john_limit <= rep.min_john + sc.tol && rep.inradius_limit > 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Minimality of the reflected unit body among equal-volume domains. The
// minimizer of John(.) is D = -body because balls are measured with the
// center-minus-point convention.
// ---------------------------------------------------------------------------

struct BallMinimalityRow {
    std::string name;
    double area_ratio = 0.0;
    double john = 0.0;
    bool skipped = false;
};

struct BallMinimalityReport {
    double john_D = 0.0;
    std::vector<BallMinimalityRow> rows;
    bool minimal = true;
    bool john_D_near_one = true;
};

inline GridDomain reflected_body_domain(const ConvexGauge& g, const GridSpec& spec, double scale = 1.0) {
    return GridDomain::from_predicate(spec, [&](const Vec2& p) { return g.eval(-p) < scale; });
}

inline BallMinimalityReport ball_minimality_check(const ConvexGauge& g,
                                                  const std::vector<std::pair<std::string, GridDomain>>& competitors,
                                                  const GridSpec& spec, double tol = 0.1,
                                                  double tol_J = 2e-3,
                                                  Neighborhood::Kind kind = Neighborhood::kSixteen,
                                                  double ball_tol = 0.35) {
    BallMinimalityReport rep;
    GridDomain D = reflected_body_domain(g, spec);
    double areaD = static_cast<double>(D.inside_count());
    OptimalJohnResult rd = optimal_john(D, g, tol_J, kind);
    rep.john_D = rd.value;
    rep.john_D_near_one = std::abs(rd.value - 1.0) <= ball_tol;
    for (const auto& [name, dom] : competitors) {
        BallMinimalityRow row;
        row.name = name;
        row.area_ratio = static_cast<double>(dom.inside_count()) / areaD;
        if (std::abs(row.area_ratio - 1.0) > 0.02) {
            row.skipped = true;
            rep.rows.push_back(row);
            continue;
        }
        GridDomain mut = dom;
        OptimalJohnResult rc = optimal_john(mut, g, tol_J, kind);
        row.john = rc.value;
        if (rep.john_D > row.john + tol) rep.minimal = false;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace johnkit
