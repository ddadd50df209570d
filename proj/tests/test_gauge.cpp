#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "johnkit/gauge.hpp"
#include "johnkit/geometry.hpp"

using namespace johnkit;

namespace {

// Independent oracle: gauge by brute-force ray-segment intersection over all
// edges of the body. gauge(v) = 1/s where s*v is the boundary hit.
double gauge_by_ray_intersection(const std::vector<Vec2>& body, const Vec2& v) {
    if (v.x == 0.0 && v.y == 0.0) return 0.0;
    double best_s = -1.0;
    const std::size_t n = body.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = body[i];
        Vec2 b = body[(i + 1) % n];
        Vec2 e = b - a;
        double den = cross(v, e);
        if (std::abs(den) < 1e-300) continue;
        double s = cross(a, e) / den;
        if (s <= 0) continue;
        // point s*v must lie within the segment
        double t;
        if (std::abs(e.x) >= std::abs(e.y))
            t = (s * v.x - a.x) / e.x;
        else
            t = (s * v.y - a.y) / e.y;
        if (t < -1e-12 || t > 1.0 + 1e-12) continue;
        if (best_s < 0 || s < best_s) best_s = s;
    }
    REQUIRE(best_s > 0);
    return 1.0 / best_s;
}

const std::vector<Vec2> kTriangle{{1, 0}, {0, 1}, {-1, -1}};

} // namespace

TEST_CASE("gauge of the regular 64-gon matches the Euclidean norm to 0.2%") {
    ConvexGauge g = ConvexGauge::regular_polygon(64);
    double v = g.eval({3, 4});
    REQUIRE(v >= 5.0 - 1e-12); // inscribed polygon can only overestimate
    REQUIRE(v <= 5.0 * 1.002);
}

TEST_CASE("gauge of the square body is the max-norm") {
    ConvexGauge g = ConvexGauge::linf();
    REQUIRE(g.eval({2, 0}) == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(g.eval({0.5, -1.5}) == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("triangle gauge agrees with the ray-segment oracle") {
    ConvexGauge g(kTriangle);
    Rng rng(7);
    // a pinned diagonal direction plus random ones
    REQUIRE(g.eval({1, 1}) == Catch::Approx(gauge_by_ray_intersection(kTriangle, {1, 1})).margin(1e-12));
    for (int it = 0; it < 500; ++it) {
        Vec2 v{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        if (norm(v) < 1e-6) continue;
        REQUIRE(g.eval(v) == Catch::Approx(gauge_by_ray_intersection(kTriangle, v)).margin(1e-10));
    }
}

TEST_CASE("asymmetry constant: symmetric bodies give exactly 1") {
    REQUIRE(ConvexGauge::regular_polygon(64).asymmetry_constant() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(ConvexGauge::linf().asymmetry_constant() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(ConvexGauge::euclidean().asymmetry_constant() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("asymmetry constant of the triangle matches dense boundary sampling") {
    ConvexGauge g(kTriangle);
    // oracle: sample the unit sphere of the gauge densely, maximize eval(-x)
    double oracle = 0.0;
    const int N = 20000;
    for (int i = 0; i < N; ++i) {
        double a = 2.0 * M_PI * i / N;
        Vec2 dir{std::cos(a), std::sin(a)};
        Vec2 on_sphere = dir / g.eval(dir);
        oracle = std::max(oracle, g.eval(-on_sphere));
    }
    REQUIRE(g.asymmetry_constant() >= oracle - 1e-9);
    REQUIRE(g.asymmetry_constant() == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("positive homogeneity and triangle inequality hold on random samples") {
    ConvexGauge g(kTriangle);
    Rng rng(11);
    for (int it = 0; it < 1000; ++it) {
        Vec2 v{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        double lam = rng.uniform(1e-3, 10.0);
        double lhs = g.eval(lam * v);
        double rhs = lam * g.eval(v);
        REQUIRE(std::abs(lhs - rhs) <= 1e-12 * (1.0 + rhs));

        Vec2 u{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        REQUIRE(g.eval(u + v) <= g.eval(u) + g.eval(v) + 1e-12);
        REQUIRE(g.eval(-v) <= g.asymmetry_constant() * g.eval(v) + 1e-12);
    }
}

TEST_CASE("gauge eval is exactly zero at the origin and positive elsewhere") {
    ConvexGauge g(kTriangle);
    REQUIRE(g.eval({0, 0}) == 0.0);
    REQUIRE(g.eval({1e-12, 0}) > 0.0);
}

TEST_CASE("construction rejects degenerate bodies") {
    REQUIRE_THROWS_AS(ConvexGauge({{1, 0}, {2, 0}, {3, 0}}), std::invalid_argument);
    // origin on the boundary
    REQUIRE_THROWS_AS(ConvexGauge({{0, 0}, {1, 0}, {0, 1}}), std::invalid_argument);
    // clockwise input is rejected rather than silently reoriented
    REQUIRE_THROWS_AS(ConvexGauge({{1, 0}, {-1, -1}, {0, 1}}), std::invalid_argument);
    // non-convex
    REQUIRE_THROWS_AS(ConvexGauge({{1, 0}, {0.1, 0.1}, {0, 1}, {-1, -1}}), std::invalid_argument);
}

TEST_CASE("gauge presets parse") {
    REQUIRE(gauge_from_name("euclidean").is_euclidean());
    REQUIRE(gauge_from_name("euclidean:16").body_vertices().size() == 16);
    REQUIRE(gauge_from_name("l1").eval({0.5, 0.5}) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE_THROWS_AS(gauge_from_name("nope"), std::invalid_argument);
}
