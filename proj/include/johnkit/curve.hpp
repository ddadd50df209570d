#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "johnkit/gauge.hpp"
#include "johnkit/geometry.hpp"
#include "johnkit/grid.hpp"

namespace johnkit {

// Directed rectifiable curve as an ordered vertex list. Direction matters:
// under an asymmetric gauge, length(reverse(c)) can differ from length(c) by
// up to the asymmetry constant. toward_infinity marks the last vertex as an
// escape point; region constructions then require a truncation radius.
struct Polyline {
    std::vector<Vec2> vertices;
    bool toward_infinity = false;

    Polyline() = default;
    explicit Polyline(std::vector<Vec2> vs, bool to_inf = false) : toward_infinity(to_inf) {
        for (const Vec2& v : vs) {
            if (vertices.empty() || norm(v - vertices.back()) > 1e-12) vertices.push_back(v);
        }
        if (vertices.empty() && !vs.empty()) vertices.push_back(vs.front());
        require(!vertices.empty(), "polyline: no vertices");
    }

    std::size_t size() const { return vertices.size(); }
    const Vec2& front() const { return vertices.front(); }
    const Vec2& back() const { return vertices.back(); }
    bool degenerate() const { return vertices.size() < 2; }
};

inline Polyline reversed(const Polyline& p) {
    std::vector<Vec2> vs(p.vertices.rbegin(), p.vertices.rend());
    return Polyline(std::move(vs), false);
}

inline double polyline_length(const ConvexGauge& g, const Polyline& p) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i)
        s += g.eval(p.vertices[i + 1] - p.vertices[i]);
    return s;
}

// Length of the subcurve between normalized gauge-arclength parameters; for
// a polyline the supremum over partitions is the plain segment sum, so this
// is exact and additive.
inline double curve_length(const ConvexGauge& g, const Polyline& p, double a, double b) {
    require(a >= -1e-12 && b <= 1.0 + 1e-12 && a <= b + 1e-12,
            "curve_length: need 0 <= a <= b <= 1 (reverse the curve explicitly)");
    double total = polyline_length(g, p);
    return (std::min(1.0, std::max(0.0, b)) - std::min(1.0, std::max(0.0, a))) * total;
}

// Position at normalized gauge-arclength parameter t.
inline Vec2 polyline_point_at(const ConvexGauge& g, const Polyline& p, double t) {
    if (p.degenerate()) return p.front();
    double total = polyline_length(g, p);
    double target = std::min(1.0, std::max(0.0, t)) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i) {
        double seg = g.eval(p.vertices[i + 1] - p.vertices[i]);
        if (acc + seg >= target - 1e-15 || i + 2 == p.vertices.size()) {
            double f = seg > 0 ? (target - acc) / seg : 0.0;
            f = std::min(1.0, std::max(0.0, f));
            return p.vertices[i] + f * (p.vertices[i + 1] - p.vertices[i]);
        }
        acc += seg;
    }
    return p.back();
}

// Location of a point on a polyline: segment index + fraction. Snaps to the
// closest point of the curve; callers check the returned distance.
struct CurveLocation {
    std::size_t seg = 0;
    double frac = 0.0;
    double dist = 0.0; // Euclidean distance from the query to the snap
    Vec2 point{0, 0};
};

inline CurveLocation locate_on_polyline(const Polyline& p, const Vec2& q) {
    CurveLocation best;
    best.dist = std::numeric_limits<double>::max();
    if (p.degenerate()) {
        best.point = p.front();
        best.dist = norm(q - p.front());
        return best;
    }
    for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i) {
        Vec2 a = p.vertices[i], b = p.vertices[i + 1];
        Vec2 d = b - a;
        double len2 = norm2(d);
        double f = len2 > 0 ? std::min(1.0, std::max(0.0, dot(q - a, d) / len2)) : 0.0;
        Vec2 proj = a + f * d;
        double dd = norm(q - proj);
        if (dd < best.dist) {
            best.dist = dd;
            best.seg = i;
            best.frac = f;
            best.point = proj;
        }
    }
    return best;
}

// Vertices of p from location a to location b (a before b along p).
inline Polyline subcurve(const Polyline& p, const CurveLocation& a, const CurveLocation& b) {
    require(a.seg < b.seg || (a.seg == b.seg && a.frac <= b.frac + 1e-12),
            "subcurve: start after end");
    std::vector<Vec2> vs;
    vs.push_back(a.point);
    for (std::size_t i = a.seg + 1; i <= b.seg; ++i) vs.push_back(p.vertices[i]);
    vs.push_back(b.point);
    return Polyline(std::move(vs));
}

// Prefix of p up to location a.
inline Polyline prefix_curve(const Polyline& p, const CurveLocation& a) {
    CurveLocation start;
    start.seg = 0;
    start.frac = 0.0;
    start.point = p.front();
    return subcurve(p, start, a);
}

inline Polyline suffix_curve(const Polyline& p, const CurveLocation& a) {
    std::vector<Vec2> vs;
    vs.push_back(a.point);
    for (std::size_t i = a.seg + 1; i < p.vertices.size(); ++i) vs.push_back(p.vertices[i]);
    Polyline out(std::move(vs));
    out.toward_infinity = p.toward_infinity;
    return out;
}

// ---------------------------------------------------------------------------
// Core sampling. Samples carry the forward gauge length from the first
// vertex and the reverse gauge length from the last one (the reverse length
// sums gauge(previous - current), i.e. the traversal toward the front).
// ---------------------------------------------------------------------------

struct CoreSample {
    Vec2 p{0, 0};
    double s_fwd = 0.0;
    double s_rev = 0.0;
};

inline std::vector<CoreSample> sample_core(const ConvexGauge& g, const Polyline& poly, double pitch,
                                           double adaptive_h = -1.0, double carrot_J = 1.0) {
    std::vector<CoreSample> out;
    if (poly.vertices.empty()) return out;
    require(pitch > 0.0, "sample_core: pitch must be positive");

    // forward pass with (optionally) radius-adaptive spacing
    out.push_back({poly.front(), 0.0, 0.0});
    double acc_fwd = 0.0;
    for (std::size_t i = 0; i + 1 < poly.vertices.size(); ++i) {
        Vec2 a = poly.vertices[i], b = poly.vertices[i + 1];
        double seg_e = norm(b - a);
        if (seg_e <= 0) continue;
        Vec2 dir = (b - a) / seg_e;
        double gauge_rate = g.eval(b - a) / seg_e;
        double t = 0.0;
        while (t < seg_e) {
            double step = pitch;
            if (adaptive_h > 0.0) {
                double r = acc_fwd / carrot_J; // current carrot radius
                double cap = std::max(pitch, 0.5 * r);
                step = std::min(cap, std::max(pitch, std::sqrt(4.0 * adaptive_h * std::max(r, adaptive_h))));
            }
            double nt = std::min(seg_e, t + step);
            acc_fwd += (nt - t) * gauge_rate;
            out.push_back({a + nt * dir, acc_fwd, 0.0});
            t = nt;
        }
    }
    // reverse lengths: traversal from the back toward the front
    double acc_rev = 0.0;
    for (std::size_t k = out.size(); k-- > 1;) {
        out[k].s_rev = acc_rev;
        acc_rev += g.eval(out[k - 1].p - out[k].p);
    }
    out[0].s_rev = acc_rev;
    return out;
}

// ---------------------------------------------------------------------------
// Carrot and cigar regions: unions of gauge balls along a core. Rasterized
// by cell-center membership (an outer approximation); inclusion assertions
// downstream always allow a 1-cell dilation.
// ---------------------------------------------------------------------------

struct CarrotRegion {
    Polyline core;
    double J = 1.0;
    enum Kind { kCarrot, kCigar } kind = kCarrot;
    CellMask mask;
    double pitch = 0.0;
};

namespace detail {
inline double ball_sample_radius(const CoreSample& s, CarrotRegion::Kind kind, double J) {
    double len = (kind == CarrotRegion::kCarrot) ? s.s_fwd : std::min(s.s_fwd, s.s_rev);
    return len / J;
}
} // namespace detail

// Fills the union of sample balls into an existing mask. Cells holding a
// positive-radius core sample are marked too: the core minus its vertex lies
// inside the region (every such point sits in the ball of a slightly later
// sample), so this only sharpens the outer approximation near the tip where
// ball radii drop below the cell size.
inline void fill_core_region(CellMask& mask, const ConvexGauge& g, const Polyline& poly, double J,
                             CarrotRegion::Kind kind, std::optional<double> truncate_R = std::nullopt,
                             bool adaptive = false) {
    require(J >= 1.0, "carrot: J must be >= 1");
    const GridSpec& grid = mask.spec;
    if (poly.toward_infinity)
        require(truncate_R.has_value(), "carrot: curve toward infinity needs a truncation radius");
    double pitch = grid.h / 2.0;
    std::vector<CoreSample> samples = sample_core(g, poly, pitch, adaptive ? grid.h : -1.0, J);
    for (const CoreSample& s : samples) {
        if (truncate_R && norm(s.p) >= *truncate_R) continue;
        double r = detail::ball_sample_radius(s, kind, J);
        if (r <= 0.0) continue;
        int ci, cj;
        grid.cell_of(s.p, &ci, &cj);
        if (grid.in_bounds(ci, cj)) mask.set(grid.index(ci, cj));
        for_each_gauge_ball_cell(g, s.p, r, grid, BallOrientation::kCenterMinusPoint,
                                 [&](int idx) { mask.set(idx); });
    }
}

inline CarrotRegion rasterize_core_region(const ConvexGauge& g, const Polyline& poly, double J,
                                          const GridSpec& grid, CarrotRegion::Kind kind,
                                          std::optional<double> truncate_R = std::nullopt,
                                          bool adaptive = false) {
    CarrotRegion region;
    region.core = poly;
    region.J = J;
    region.kind = kind;
    region.mask = CellMask(grid);
    region.pitch = grid.h / 2.0;
    fill_core_region(region.mask, g, poly, J, kind, truncate_R, adaptive);
    return region;
}

inline CarrotRegion carrot_region(const ConvexGauge& g, const Polyline& poly, double J,
                                  const GridSpec& grid,
                                  std::optional<double> truncate_R = std::nullopt,
                                  bool adaptive = false) {
    return rasterize_core_region(g, poly, J, grid, CarrotRegion::kCarrot, truncate_R, adaptive);
}

inline CarrotRegion cigar_region(const ConvexGauge& g, const Polyline& poly, double J,
                                 const GridSpec& grid, bool adaptive = false) {
    return rasterize_core_region(g, poly, J, grid, CarrotRegion::kCigar, std::nullopt, adaptive);
}

// Membership of a single point, certified by a core sample. Returns the
// first certifying sample in core order, if any.
inline std::optional<CoreSample> region_certificate(const ConvexGauge& g, const Polyline& poly,
                                                    double J, const Vec2& z, double pitch,
                                                    CarrotRegion::Kind kind = CarrotRegion::kCarrot,
                                                    std::optional<double> truncate_R = std::nullopt) {
    for (const CoreSample& s : sample_core(g, poly, pitch)) {
        if (truncate_R && norm(s.p) >= *truncate_R) continue;
        double r = detail::ball_sample_radius(s, kind, J);
        if (r <= 0.0) continue;
        if (g.eval(s.p - z) < r) return s;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Carrot surgery. These three constructions follow the standard-norm
// geometry exactly, so they accept only the exact Euclidean gauge.
// ---------------------------------------------------------------------------

struct RerouteResult {
    Polyline curve;          // z -> end of the original core
    Vec2 eta{0, 0};          // certifying core point
    double max_excess = 0.0; // max over samples of len(new[z,a]) - len(old[x,a])
};

// Replaces the head of a carrot core with a straight jump from an interior
// point z to a certifying core point, and certifies the length comparison
// len(gamma_z[z,a]) <= len(gamma[x,a]) sample-by-sample.
inline RerouteResult carrot_reroute(const ConvexGauge& g, const Polyline& poly, double J,
                                    const Vec2& z, double pitch) {
    require(g.is_euclidean(), "carrot_reroute: implemented for the Euclidean gauge");
    require(J >= 1.0, "carrot_reroute: J must be >= 1");
    std::optional<CoreSample> cert = region_certificate(g, poly, J, z, pitch);
    require(cert.has_value(), "carrot_reroute: z is not certified inside car(core, J)");

    CurveLocation eta_loc = locate_on_polyline(poly, cert->p);
    Polyline tail = suffix_curve(poly, eta_loc);
    std::vector<Vec2> vs;
    vs.push_back(z);
    for (const Vec2& v : tail.vertices) vs.push_back(v);
    RerouteResult res;
    res.curve = Polyline(std::move(vs));
    res.curve.toward_infinity = poly.toward_infinity;
    res.eta = cert->p;

    // len(gamma_z[z,a]) - len(gamma[x,a]) = |z-eta| - len(gamma[x,eta]) at
    // every a on the shared tail, so the sample-wise comparison reduces to
    // the head difference; it is negative whenever the certificate is strict.
    double head_old = cert->s_fwd;
    double head_new = g.eval(cert->p - z);
    res.max_excess = head_new - head_old;
    return res;
}

struct ConcatResult {
    Polyline curve;       // z2 -> w
    double joint_slack;   // len(g1[z1,y2])/J1 - len(g2)/J2 (must be >= -tol)
};

// Joins a feeder curve gamma2 (ending on gamma1) with the stretch of gamma1
// from the junction to w. The feeder must satisfy the length hypothesis
// len(gamma2)/J2 <= len(gamma1[z1,y2])/J1.
inline ConcatResult carrot_concat(const ConvexGauge& g, const Polyline& gamma1,
                                  const Polyline& gamma2, double J1, double J2, const Vec2& w,
                                  double snap_tol) {
    require(g.is_euclidean(), "carrot_concat: implemented for the Euclidean gauge");
    require(J1 >= 1.0 && J1 <= J2, "carrot_concat: need 1 <= J1 <= J2");

    const Vec2 y2 = gamma2.back();
    CurveLocation junction = locate_on_polyline(gamma1, y2);
    require(junction.dist <= snap_tol, "carrot_concat: junction point not on gamma1");
    CurveLocation wloc = locate_on_polyline(gamma1, w);
    require(wloc.dist <= snap_tol, "carrot_concat: w not on gamma1");
    require(junction.seg < wloc.seg || (junction.seg == wloc.seg && junction.frac <= wloc.frac + 1e-12),
            "carrot_concat: w precedes the junction on gamma1");

    double len2 = polyline_length(g, gamma2);
    double len1_head = polyline_length(g, prefix_curve(gamma1, junction));
    ConcatResult res;
    res.joint_slack = len1_head / J1 - len2 / J2;
    require(res.joint_slack >= -1e-9 * (1.0 + len1_head),
            "carrot_concat: joint length hypothesis violated, slack " + std::to_string(res.joint_slack));

    std::vector<Vec2> vs = gamma2.vertices;
    Polyline mid = subcurve(gamma1, junction, wloc);
    for (const Vec2& v : mid.vertices) vs.push_back(v);
    res.curve = Polyline(std::move(vs));
    return res;
}

struct CigarBallResult {
    Vec2 center{0, 0};
    double radius = 0.0;
    double split_len = 0.0;   // arclength of the center along the longer curve
    bool swapped = false;     // true when gamma_yz was the longer curve
    Polyline half_x;          // curve x -> center
    Polyline half_y;          // curve y -> center
    double radius_mismatch = 0.0;
};

// Shared-ball construction for two curves meeting at z: finds the point a on
// the longer curve where the traveled lengths from both far endpoints agree,
// by monotone bisection on arclength. Returns the ball and the two halves.
inline CigarBallResult cigar_from_two_carrots(const ConvexGauge& g, const Polyline& gamma_xz,
                                              const Polyline& gamma_yz, double J,
                                              double endpoint_tol = 1e-9) {
    require(g.is_euclidean(), "cigar_from_two_carrots: implemented for the Euclidean gauge");
    require(J >= 1.0, "cigar_from_two_carrots: J must be >= 1");
    require(norm(gamma_xz.back() - gamma_yz.back()) <= endpoint_tol,
            "cigar_from_two_carrots: curves do not share the endpoint z");

    const Polyline* longer = &gamma_xz;
    const Polyline* shorter = &gamma_yz;
    bool swapped = false;
    double len_long = polyline_length(g, *longer);
    double len_short = polyline_length(g, *shorter);
    if (len_long < len_short) {
        std::swap(longer, shorter);
        std::swap(len_long, len_short);
        swapped = true;
    }

    // solve t = len_short + (len_long - t) on [0, len_long]
    double lo = 0.0, hi = len_long;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + len_long); ++it) {
        double mid = 0.5 * (lo + hi);
        double f = mid - (len_short + (len_long - mid));
        if (f < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);

    CigarBallResult res;
    res.swapped = swapped;
    res.split_len = t;
    double tt = len_long > 0 ? t / len_long : 0.0;
    res.center = polyline_point_at(g, *longer, tt);
    res.radius = t / J;

    // half from the longer curve's start: its prefix up to a
    CurveLocation aloc = locate_on_polyline(*longer, res.center);
    Polyline pre = prefix_curve(*longer, aloc);
    // half from the shorter curve's start: shorter + reversed tail of longer
    Polyline tail = suffix_curve(*longer, aloc); // a -> z
    std::vector<Vec2> vs = shorter->vertices;    // start -> z
    for (std::size_t k = tail.vertices.size(); k-- > 0;) vs.push_back(tail.vertices[k]);
    Polyline other(std::move(vs));

    double la = polyline_length(g, pre);
    double lb = polyline_length(g, other);
    res.radius_mismatch = std::abs(la - lb);

    res.half_x = swapped ? other : pre;
    res.half_y = swapped ? pre : other;
    return res;
}

} // namespace johnkit
