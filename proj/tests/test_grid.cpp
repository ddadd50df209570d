#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "johnkit/gauge.hpp"
#include "johnkit/grid.hpp"

using namespace johnkit;

namespace {

const std::vector<Vec2> kTriangle{{1, 0}, {0, 1}, {-1, -1}};

// brute-force oracle: min over boundary sites of eval(x - b)
double brute_distance(const GridDomain& dom, const ConvexGauge& g, int idx) {
    double best = 1e300;
    for (int b : dom.outer_boundary())
        best = std::min(best, g.eval(dom.spec().center(idx) - dom.spec().center(b)));
    return best;
}

double brute_hausdorff(const CompactSet& A, const CompactSet& B, const ConvexGauge& g) {
    auto directed = [&](const CompactSet& X, const CompactSet& Y, bool x_minus_y) {
        double worst = 0.0;
        for (const Vec2& x : X.points()) {
            double best = 1e300;
            for (const Vec2& y : Y.points())
                best = std::min(best, x_minus_y ? g.eval(x - y) : g.eval(y - x));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(A, B, true), directed(B, A, false));
}

CompactSet random_mask(const GridSpec& spec, Rng& rng, double fill) {
    CompactSet s(spec);
    bool any = false;
    for (int idx = 0; idx < spec.size(); ++idx)
        if (rng.next_double() < fill) {
            s.cells[static_cast<std::size_t>(idx)] = 1;
            any = true;
        }
    if (!any) s.cells[0] = 1;
    return s;
}

} // namespace

TEST_CASE("squared EDT agrees with the brute force on random site sets") {
    GridSpec spec({0, 0}, 1.0, 24, 17);
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::uint8_t> sites(static_cast<std::size_t>(spec.size()), 0);
        int nsites = 1 + static_cast<int>(rng.next_below(20));
        for (int s = 0; s < nsites; ++s)
            sites[static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(spec.size())))] = 1;
        std::vector<double> d2 = squared_edt(spec, sites);
        for (int idx = 0; idx < spec.size(); ++idx) {
            double best = 1e300;
            for (int sdx = 0; sdx < spec.size(); ++sdx) {
                if (!sites[static_cast<std::size_t>(sdx)]) continue;
                double dx = spec.ix(idx) - spec.ix(sdx);
                double dy = spec.iy(idx) - spec.iy(sdx);
                best = std::min(best, dx * dx + dy * dy);
            }
            REQUIRE(d2[static_cast<std::size_t>(idx)] == Catch::Approx(best).margin(1e-9));
        }
    }
}

TEST_CASE("boundary distance field: disk center clearance is the inradius") {
    double h = 1.0 / 64;
    GridSpec spec = GridSpec::centered(1.0 + 4 * h, h);
    GridDomain dom = disk_domain(spec);
    dom.ensure_distance(ConvexGauge::euclidean());
    int ci, cj;
    spec.cell_of({0, 0}, &ci, &cj);
    REQUIRE(dom.dist(spec.index(ci, cj)) == Catch::Approx(1.0).margin(2 * h));
}

TEST_CASE("boundary distance field: square under the max-norm gauge") {
    double h = 1.0 / 32;
    GridSpec spec = GridSpec::centered(1.0 + 4 * h, h);
    GridDomain dom = square_domain(spec, 1.0);
    dom.ensure_distance(ConvexGauge::linf());
    int ci, cj;
    spec.cell_of({0, 0}, &ci, &cj);
    REQUIRE(dom.dist(spec.index(ci, cj)) == Catch::Approx(1.0).margin(2 * h));
}

TEST_CASE("triangle-gauge distance field equals the brute-force oracle exactly") {
    GridSpec spec = GridSpec::centered(1.1, 1.0 / 16); // ~35x35
    GridDomain dom = disk_domain(spec);
    ConvexGauge g(kTriangle);
    dom.ensure_distance(g);
    for (int idx = 0; idx < spec.size(); ++idx) {
        if (!dom.inside(idx)) continue;
        REQUIRE(dom.dist(idx) == Catch::Approx(brute_distance(dom, g, idx)).margin(1e-12));
    }
}

TEST_CASE("distance field positivity and near-boundary level") {
    GridSpec spec = GridSpec::centered(1.1, 1.0 / 32);
    GridDomain dom = disk_domain(spec);
    ConvexGauge g(kTriangle);
    dom.ensure_distance(g);
    double min_inner = 1e300;
    for (int idx : dom.inner_boundary()) min_inner = std::min(min_inner, dom.dist(idx));
    for (int idx = 0; idx < spec.size(); ++idx)
        if (dom.inside(idx)) REQUIRE(dom.dist(idx) > 0.0);
    REQUIRE(min_inner <= std::sqrt(2.0) * spec.h / g.rho_min() + 1e-12);
}

TEST_CASE("distance field rejects a domain that fills the grid") {
    GridSpec spec({0, 0}, 0.5, 4, 4);
    GridDomain dom = GridDomain::from_predicate(spec, [](const Vec2&) { return true; });
    REQUIRE_THROWS_WITH(dom.ensure_distance(ConvexGauge::euclidean()),
                        Catch::Matchers::ContainsSubstring("unbounded domain"));
}

TEST_CASE("inradius point: disk, annulus, ties") {
    double h = 1.0 / 32;
    GridSpec spec = GridSpec::centered(1.0 + 4 * h, h);
    ConvexGauge g = ConvexGauge::euclidean();

    GridDomain disk = disk_domain(spec);
    disk.ensure_distance(g);
    auto [dc, dr] = inradius_point(disk, g);
    REQUIRE(norm(spec.center(dc)) <= 2 * h);
    REQUIRE(dr == Catch::Approx(1.0).margin(2 * h));

    GridDomain ann = annulus_domain(spec, 0.5, 1.0);
    ann.ensure_distance(g);
    auto [ac, ar] = inradius_point(ann, g);
    REQUIRE(norm(spec.center(ac)) == Catch::Approx(0.75).margin(2 * h));
    REQUIRE(ar == Catch::Approx(0.25).margin(2 * h));
    // deterministic tie-break: re-run gives the same cell
    auto [ac2, ar2] = inradius_point(ann, g);
    REQUIRE(ac2 == ac);
    REQUIRE(ar2 == ar);
}

TEST_CASE("hausdorff distance basic identities and disk pair") {
    double h = 1.0 / 32;
    GridSpec spec = GridSpec::centered(1.2, h);
    ConvexGauge g = ConvexGauge::euclidean();
    CompactSet big = CompactSet::closure_of(disk_domain(spec, {0, 0}, 1.0));
    CompactSet small = CompactSet::closure_of(disk_domain(spec, {0, 0}, 0.5));
    REQUIRE(hausdorff_distance(big, big, g) == 0.0);
    REQUIRE(hausdorff_distance(big, small, g) == Catch::Approx(0.5).margin(2 * h));

    CompactSet a(spec), b(spec);
    int i0, j0;
    spec.cell_of({0, 0}, &i0, &j0);
    a.cells[static_cast<std::size_t>(spec.index(i0, j0))] = 1;
    spec.cell_of({1, 0}, &i0, &j0);
    b.cells[static_cast<std::size_t>(spec.index(i0, j0))] = 1;
    REQUIRE(hausdorff_distance(a, b, g) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("hausdorff distance matches brute force and is a metric for symmetric gauges") {
    GridSpec spec({0, 0}, 0.25, 14, 14);
    ConvexGauge g = ConvexGauge::regular_polygon(16);
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        CompactSet A = random_mask(spec, rng, 0.2);
        CompactSet B = random_mask(spec, rng, 0.2);
        CompactSet C = random_mask(spec, rng, 0.2);
        double ab = hausdorff_distance(A, B, g);
        double ba = hausdorff_distance(B, A, g);
        double ac = hausdorff_distance(A, C, g);
        double cb = hausdorff_distance(C, B, g);
        REQUIRE(ab == Catch::Approx(brute_hausdorff(A, B, g)).margin(1e-10));
        REQUIRE(ab == Catch::Approx(ba).margin(1e-9));          // symmetry
        REQUIRE(ab <= ac + cb + 1e-9);                           // triangle
        REQUIRE(hausdorff_distance(A, A, g) == 0.0);             // identity
    }
}

TEST_CASE("hausdorff uses opposite argument orders under an asymmetric gauge") {
    GridSpec spec({0, 0}, 1.0, 8, 8);
    ConvexGauge g(kTriangle);
    CompactSet a(spec), b(spec);
    a.cells[static_cast<std::size_t>(spec.index(1, 1))] = 1;
    b.cells[static_cast<std::size_t>(spec.index(5, 1))] = 1;
    double d = hausdorff_distance(a, b, g);
    Vec2 pa = spec.center(1, 1), pb = spec.center(5, 1);
    REQUIRE(d == Catch::Approx(std::max(g.eval(pa - pb), g.eval(pb - pa))).margin(1e-12));
}

TEST_CASE("limsup closure of a finite prefix") {
    GridSpec spec = GridSpec::centered(1.6, 1.0 / 16);
    // constant sequence
    std::vector<CompactSet> constant(6, CompactSet::closure_of(disk_domain(spec)));
    CompactSet lim = limsup_closure(constant);
    REQUIRE(hausdorff_distance(lim, constant[0], ConvexGauge::euclidean()) == 0.0);

    // shrinking disks 1 + 1/j
    std::vector<CompactSet> shrink;
    for (int j = 1; j <= 16; ++j)
        shrink.push_back(CompactSet::closure_of(disk_domain(spec, {0, 0}, 1.0 + 1.0 / j)));
    CompactSet lim2 = limsup_closure(shrink);
    CompactSet unit = CompactSet::closure_of(disk_domain(spec, {0, 0}, 1.0));
    REQUIRE(hausdorff_distance(lim2, unit, ConvexGauge::euclidean()) <=
            2.0 / 8.0 + 2 * spec.h); // radius 1 + 1/m_max with m_max = 8

    // alternating sequence: truncated tail keeps the union
    CompactSet A = CompactSet::closure_of(disk_domain(spec, {-0.5, 0}, 0.4));
    CompactSet B = CompactSet::closure_of(disk_domain(spec, {0.5, 0}, 0.4));
    std::vector<CompactSet> alt;
    for (int j = 0; j < 8; ++j) alt.push_back(j % 2 ? A : B);
    CompactSet lim3 = limsup_closure(alt);
    CompactSet uni(spec);
    for (int idx = 0; idx < spec.size(); ++idx)
        if (A.get(idx) || B.get(idx)) uni.cells[static_cast<std::size_t>(idx)] = 1;
    REQUIRE(hausdorff_distance(lim3, uni, ConvexGauge::euclidean()) == 0.0);

    REQUIRE_THROWS_AS(limsup_closure({}), std::invalid_argument);
}

TEST_CASE("keep-distance check: constant disks keep the center deep") {
    double h = 1.0 / 32;
    GridSpec spec = GridSpec::centered(1.3, h);
    ConvexGauge g = ConvexGauge::euclidean();
    std::vector<CompactSet> seq(8, CompactSet::closure_of(disk_domain(spec)));
    std::vector<Vec2> xs(8, Vec2{0, 0});
    KeepDistanceReport rep = keep_distance_check(seq, xs, 1.0 - 2 * h, g);
    REQUIRE(rep.hypothesis_ok);
    REQUIRE(rep.pass);
    REQUIRE(std::abs(rep.margin) <= 6 * h);
}

TEST_CASE("keep-distance check: shrinking disks still pass") {
    double h = 1.0 / 32;
    GridSpec spec = GridSpec::centered(1.6, h);
    ConvexGauge g = ConvexGauge::euclidean();
    std::vector<CompactSet> seq;
    std::vector<Vec2> xs;
    for (int j = 1; j <= 10; ++j) {
        seq.push_back(CompactSet::closure_of(disk_domain(spec, {0, 0}, 1.0 + 1.0 / j)));
        xs.push_back({0, 0});
    }
    KeepDistanceReport rep = keep_distance_check(seq, xs, 1.0 - 2 * h, g);
    REQUIRE(rep.hypothesis_ok);
    REQUIRE(rep.pass);
}

TEST_CASE("keep-distance check flags a sequence drifting to the boundary") {
    double h = 1.0 / 32;
    GridSpec spec = GridSpec::centered(1.3, h);
    ConvexGauge g = ConvexGauge::euclidean();
    std::vector<CompactSet> seq;
    std::vector<Vec2> xs;
    for (int j = 1; j <= 8; ++j) {
        seq.push_back(CompactSet::closure_of(disk_domain(spec)));
        xs.push_back({1.0 - 1.0 / (16.0 * j), 0});
    }
    KeepDistanceReport rep = keep_distance_check(seq, xs, h, g);
    REQUIRE_FALSE(rep.hypothesis_ok);
    REQUIRE(rep.reason.find("hypothesis_failed") != std::string::npos);
}

TEST_CASE("gauge ball cells: euclidean r=1 at spacing 0.5, and r=0 empty") {
    GridSpec spec = GridSpec::centered(2.0, 0.5);
    ConvexGauge g = ConvexGauge::euclidean();
    std::vector<int> cells = gauge_ball_cells(g, {0, 0}, 1.0, spec);
    // cells with |c| < 1: offsets (0,0), (±0.5,0), (0,±0.5), (±0.5,±0.5)
    REQUIRE(cells.size() == 9);
    for (int idx : cells) REQUIRE(norm(spec.center(idx)) < 1.0);
    REQUIRE(gauge_ball_cells(g, {0, 0}, 0.0, spec).empty());
    REQUIRE(gauge_ball_cells(g, {0, 0}, -1.0, spec).empty());
}

TEST_CASE("gauge ball cells equal the per-cell oracle for the triangle gauge") {
    GridSpec spec = GridSpec::centered(2.5, 0.2);
    ConvexGauge g(kTriangle);
    for (BallOrientation orient : {BallOrientation::kCenterMinusPoint, BallOrientation::kPointMinusCenter}) {
        std::vector<int> cells = gauge_ball_cells(g, {0.3, -0.2}, 1.0, spec, orient);
        std::vector<int> oracle;
        for (int idx = 0; idx < spec.size(); ++idx) {
            Vec2 c = spec.center(idx);
            double v = orient == BallOrientation::kCenterMinusPoint ? g.eval(Vec2{0.3, -0.2} - c)
                                                                    : g.eval(c - Vec2{0.3, -0.2});
            if (v < 1.0) oracle.push_back(idx);
        }
        REQUIRE(cells == oracle);
    }
}

TEST_CASE("components distinguish a two-piece domain") {
    GridSpec spec({0, 0}, 1.0, 9, 5);
    GridDomain dom = GridDomain::from_predicate(spec, [](const Vec2& p) {
        return p.x <= 2.5 || p.x >= 5.5; // two vertical slabs, 3 columns apart
    });
    Neighborhood nb(Neighborhood::kEight);
    int n = 0;
    dom.components(nb, &n);
    REQUIRE(n == 2);
    REQUIRE_FALSE(dom.is_connected(nb));
}
