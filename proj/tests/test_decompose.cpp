#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "johnkit/decompose.hpp"

using namespace johnkit;

namespace {

std::vector<std::uint8_t> point_K(const GridSpec& spec) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(spec.size()), 0);
    int i, j;
    spec.cell_of({0, 0}, &i, &j);
    m[static_cast<std::size_t>(spec.index(i, j))] = 1;
    return m;
}

std::vector<std::uint8_t> halflines_K(const GridSpec& spec) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(spec.size()), 0);
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            Vec2 p = spec.center(i, j);
            if (std::abs(p.y) <= spec.h / 2.0 + 1e-12 && std::abs(p.x) >= 1.0)
                m[static_cast<std::size_t>(spec.index(i, j))] = 1;
        }
    return m;
}

std::vector<std::uint8_t> spiral_K(const GridSpec& spec) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(spec.size()), 0);
    auto mark = [&](const Vec2& p) {
        int i, j;
        spec.cell_of(p, &i, &j);
        if (spec.in_bounds(i, j)) m[static_cast<std::size_t>(spec.index(i, j))] = 1;
    };
    mark({0, 0});
    double theta = 0.0;
    while (theta <= 6.0 * M_PI) {
        double r = 0.25 + 0.5 * theta / (2.0 * M_PI);
        mark({r * std::cos(theta), r * std::sin(theta)});
        theta += spec.h / (2.0 * std::max(0.25, r));
    }
    return m;
}

} // namespace

TEST_CASE("point obstacle: one family swallows everything") {
    double h = 1.0 / 16;
    SceneConfig cfg;
    cfg.window_radius = 13.0;
    cfg.schedule = {1.0, 2.0, 4.0};
    cfg.sample_width = 32;
    cfg.boman_pairs = 20;
    GridSpec spec = GridSpec::centered(cfg.window_radius, h);
    ObstacleScene scene(spec, point_K(spec), cfg);

    REQUIRE(scene.scene_J() >= 1.0);
    REQUIRE(scene.scene_J() <= 1.2); // radial escapes, metrication only

    // radial escape from (1,0): the exit at 3R is two units of length away
    int ci, cj;
    spec.cell_of({1, 0}, &ci, &cj);
    Polyline curve = scene.escape_curve(spec.index(ci, cj));
    ExitRecord exit1 = exit_point(curve, 1.0, scene);
    REQUIRE(exit1.len >= 2.0 - 1e-9);
    REQUIRE(exit1.len <= 2.0 * 1.09);
    REQUIRE(norm(exit1.point) == Catch::Approx(3.0).margin(1e-9));
    REQUIRE(exit1.dist == Catch::Approx(3.0).margin(h));

    CoverDecomposition dec = build_W(scene);
    REQUIRE(dec.n_permanent == 1);
    REQUIRE(dec.slots.size() == 1);
    // one component at every scale; greedy ball counts stay packing-bounded
    for (const BallCover& cv : dec.covers) {
        REQUIRE(cv.n_comps == 1);
        REQUIRE(cv.n_comps <= static_cast<int>(cv.centers.size()));
        int bound = 2 * static_cast<int>(std::ceil(6.0 * M_PI * scene.scene_J()));
        REQUIRE(static_cast<int>(cv.centers.size()) <= bound);
        REQUIRE(cv.multiplicity <= cfg.overlap_bound);
    }

    DecompositionReport rep = verify_decomposition(scene, dec);
    for (const std::string& f : rep.failures) UNSCOPED_INFO(f);
    REQUIRE(rep.pass());
    REQUIRE(rep.boman_pass == 20);
    REQUIRE(rep.radii_left_min_slack >= 0.0);
    REQUIRE(rep.radii_right_min_slack >= 0.0);
    // scale-free volume ratios stay within a factor 4 band
    double lo = 1e300, hi = 0;
    for (const VolumeRow& r : rep.volume_rows) {
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
    }
    REQUIRE(hi / lo <= 4.0);
}

TEST_CASE("two half-lines: two families, one above and one below") {
    double h = 1.0 / 32;
    SceneConfig cfg;
    cfg.window_radius = 6.5;
    cfg.schedule = {1.0, 2.0};
    cfg.sample_width = 32;
    cfg.boman_pairs = 15;
    GridSpec spec = GridSpec::centered(cfg.window_radius, h);
    ObstacleScene scene(spec, halflines_K(spec), cfg);

    // the escape constant stays near 1 (the scene satisfies the 1-carrot
    // condition in the continuum)
    REQUIRE(scene.scene_J() <= 1.25);

    // a point in the gap escapes near-vertically with ratio close to 1
    int gi, gj;
    spec.cell_of({0, 0.5}, &gi, &gj);
    Polyline esc = john_curve_to_infinity(scene, spec.index(gi, gj));
    REQUIRE(esc.toward_infinity);
    double worst = 0.0;
    for (const CoreSample& s : sample_core(scene.gauge(), esc, h)) {
        if (norm(s.p) > 3.0 * cfg.window_radius) break;
        if (s.s_fwd <= 0) continue;
        worst = std::max(worst, s.s_fwd / scene.dist_to_K(s.p));
    }
    REQUIRE(worst <= 1.15);
    Vec2 dir = esc.vertices.back() - esc.vertices.front();
    REQUIRE(std::abs(dir.y) > std::abs(dir.x));

    CoverDecomposition dec = build_W(scene);
    REQUIRE(dec.n_permanent == 2);
    // exits cluster above and below the obstacle line
    for (const BallCover& cv : dec.covers) REQUIRE(cv.n_comps == 2);

    DecompositionReport rep = verify_decomposition(scene, dec);
    for (const std::string& f : rep.failures) UNSCOPED_INFO(f);
    REQUIRE(rep.pass());
    REQUIRE(rep.boman_pass == 15);

    // dyadic overlaps are positive for both families
    REQUIRE(rep.overlap_rows.size() == 2);
    for (const OverlapRow& r : rep.overlap_rows) REQUIRE(r.ratio > 0.0);
}

TEST_CASE("spiral obstacle: decomposition runs and stays within the family bound") {
    double h = 1.0 / 24;
    SceneConfig cfg;
    cfg.window_radius = 7.0;
    cfg.schedule = {1.0, 2.0};
    cfg.sample_width = 28;
    cfg.boman_pairs = 10;
    GridSpec spec = GridSpec::centered(cfg.window_radius, h);
    ObstacleScene scene(spec, spiral_K(spec), cfg);
    CoverDecomposition dec = build_W(scene);
    REQUIRE_FALSE(dec.nhat_exceeded);
    REQUIRE(dec.n_permanent >= 1);
    REQUIRE(static_cast<int>(dec.slots.size()) <= cfg.nhat);
    DecompositionReport rep = verify_decomposition(scene, dec);
    for (const std::string& f : rep.failures) UNSCOPED_INFO(f);
    REQUIRE(rep.pass());
    // the escape threads the channel between windings: about three turns of
    // traveled length against a half-gap clearance of 0.25
    REQUIRE(scene.scene_J() == Catch::Approx(57.59).margin(1.0));
}

TEST_CASE("exit point: truncated curves and window gates") {
    double h = 1.0 / 8;
    SceneConfig cfg;
    cfg.window_radius = 13.0;
    cfg.schedule = {1.0};
    cfg.sample_width = 16;
    GridSpec spec = GridSpec::centered(cfg.window_radius, h);
    ObstacleScene scene(spec, point_K(spec), cfg);

    Polyline stub({{1, 0}, {2, 0}}); // ends inside B_3
    REQUIRE_THROWS_WITH(exit_point(stub, 1.0, scene), Catch::Matchers::ContainsSubstring("increase R_max"));
    REQUIRE_THROWS_WITH(curve_to_exit(stub, 1.0), Catch::Matchers::ContainsSubstring("increase R_max"));

    SceneConfig bad = cfg;
    bad.schedule = {5.0}; // window 13 < 3*5
    REQUIRE_THROWS_WITH(ObstacleScene(spec, point_K(spec), bad),
                        Catch::Matchers::ContainsSubstring("increase R_max"));
}

TEST_CASE("scene requires the obstacle near the origin") {
    double h = 1.0 / 8;
    SceneConfig cfg;
    cfg.window_radius = 13.0;
    cfg.schedule = {1.0};
    GridSpec spec = GridSpec::centered(cfg.window_radius, h);
    std::vector<std::uint8_t> far_K(static_cast<std::size_t>(spec.size()), 0);
    int i, j;
    spec.cell_of({5, 5}, &i, &j);
    far_K[static_cast<std::size_t>(spec.index(i, j))] = 1;
    REQUIRE_THROWS_WITH(ObstacleScene(spec, far_K, cfg),
                        Catch::Matchers::ContainsSubstring("origin"));
}

TEST_CASE("enclosed cells cannot escape") {
    double h = 1.0 / 8;
    SceneConfig cfg;
    cfg.window_radius = 13.0;
    cfg.schedule = {1.0};
    GridSpec spec = GridSpec::centered(cfg.window_radius, h);
    // a closed box around the origin: cells inside are walled off
    std::vector<std::uint8_t> box(static_cast<std::size_t>(spec.size()), 0);
    for (int jj = 0; jj < spec.ny; ++jj)
        for (int ii = 0; ii < spec.nx; ++ii) {
            Vec2 p = spec.center(ii, jj);
            double cheb = std::max(std::abs(p.x), std::abs(p.y));
            if (cheb >= 0.5 && cheb <= 0.5 + 2.5 * h)
                box[static_cast<std::size_t>(spec.index(ii, jj))] = 1;
        }
    REQUIRE_THROWS_WITH(ObstacleScene(spec, box, cfg),
                        Catch::Matchers::ContainsSubstring("no escape"));
}
