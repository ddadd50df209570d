#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "johnkit/geometry.hpp"

namespace johnkit {

// A general Minkowski norm given by its open convex unit body. The body is
// either a convex polygon (counterclockwise vertex list, origin strictly
// interior) or the exact Euclidean unit disk. eval() is the gauge of the
// body: eval(v) = inf{ lambda > 0 : v/lambda in body }. Asymmetric bodies
// give eval(v) != eval(-v); the asymmetry constant is max over the unit
// sphere of eval(-x).
//
// Immutable after construction; all derived quantities are computed up
// front, so concurrent reads are safe.
class ConvexGauge {
public:
    static constexpr double kGeomTol = 1e-9;

    // Exact Euclidean norm |.|. Used where a construction is only valid for
    // the standard norm, and as a fast path for distance transforms.
    static ConvexGauge euclidean() {
        ConvexGauge g;
        g.euclidean_ = true;
        g.name_ = "euclidean";
        g.asymmetry_ = 1.0;
        g.rho_min_ = g.rho_max_ = 1.0;
        g.body_min_ = {-1.0, -1.0};
        g.body_max_ = {1.0, 1.0};
        return g;
    }

    // Regular k-gon inscribed in the unit circle, vertex 0 at angle 0.
    static ConvexGauge regular_polygon(int k) {
        require(k >= 3, "gauge: regular polygon needs k >= 3");
        std::vector<Vec2> vs;
        vs.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(k);
            vs.push_back({std::cos(a), std::sin(a)});
        }
        ConvexGauge g(vs);
        g.name_ = "euclidean:" + std::to_string(k);
        return g;
    }

    static ConvexGauge linf() {
        ConvexGauge g(std::vector<Vec2>{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}});
        g.name_ = "linf";
        return g;
    }

    static ConvexGauge l1() {
        ConvexGauge g(std::vector<Vec2>{{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
        g.name_ = "l1";
        return g;
    }

    // Rejects non-convex or clockwise input and bodies whose interior does
    // not strictly contain the origin. Consecutive duplicates (within 1e-12)
    // are dropped first.
    explicit ConvexGauge(std::vector<Vec2> vertices, std::string name = "custom")
        : name_(std::move(name)) {
        std::vector<Vec2> vs;
        for (const Vec2& v : vertices) {
            if (vs.empty() || norm(v - vs.back()) > 1e-12) vs.push_back(v);
        }
        while (vs.size() > 1 && norm(vs.front() - vs.back()) <= 1e-12) vs.pop_back();
        require(vs.size() >= 3, "gauge: body needs at least 3 distinct vertices");

        double scale = 0.0;
        for (const Vec2& v : vs) scale = std::max(scale, norm(v));
        const double tol = kGeomTol * std::max(1.0, scale) * std::max(1.0, scale);

        const std::size_t n = vs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = vs[i];
            const Vec2& b = vs[(i + 1) % n];
            const Vec2& c = vs[(i + 2) % n];
            double turn = cross(b - a, c - b);
            require(turn > -tol, "gauge: body not convex/counterclockwise");
        }

        vertices_ = std::move(vs);
        body_min_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
        body_max_ = {-body_min_.x, -body_min_.y};
        rho_max_ = 0.0;
        rho_min_ = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = vertices_[i];
            const Vec2& b = vertices_[(i + 1) % n];
            Vec2 d = b - a;
            Vec2 nrm{d.y, -d.x}; // outward for a counterclockwise polygon
            double c = dot(nrm, a);
            require(c > kGeomTol * std::max(1.0, scale) * norm(nrm),
                    "gauge: origin not strictly interior to the body");
            normals_.push_back(nrm);
            inv_offsets_.push_back(1.0 / c);
            body_min_.x = std::min(body_min_.x, a.x);
            body_min_.y = std::min(body_min_.y, a.y);
            body_max_.x = std::max(body_max_.x, a.x);
            body_max_.y = std::max(body_max_.y, a.y);
            rho_max_ = std::max(rho_max_, norm(a));
            rho_min_ = std::min(rho_min_, c / norm(nrm)); // origin-to-edge distance
        }

        // Max over the body of the convex map x -> eval(-x) sits at a vertex.
        asymmetry_ = 1.0;
        for (const Vec2& v : vertices_) asymmetry_ = std::max(asymmetry_, eval(-v));
    }

    double eval(const Vec2& v) const {
        if (euclidean_) return norm(v);
        if (v.x == 0.0 && v.y == 0.0) return 0.0;
        double best = 0.0;
        const std::size_t n = normals_.size();
        for (std::size_t i = 0; i < n; ++i) {
            double t = dot(normals_[i], v) * inv_offsets_[i];
            if (t > best) best = t;
        }
        return best;
    }

    double asymmetry_constant() const { return asymmetry_; }
    bool is_euclidean() const { return euclidean_; }
    const std::string& name() const { return name_; }
    const std::vector<Vec2>& body_vertices() const { return vertices_; }

    // Radial bounds of the body: rho_min <= |p| <= rho_max on its boundary,
    // so |v|/rho_max <= eval(v) <= |v|/rho_min.
    double rho_min() const { return rho_min_; }
    double rho_max() const { return rho_max_; }

    // Axis-aligned bounds of the body; the ball {c : eval(y - c) < r} equals
    // y - r*body, so its bounding box is y - r*[bounds].
    Vec2 body_min() const { return body_min_; }
    Vec2 body_max() const { return body_max_; }

    // Horizontal chord of the body at height yy: returns false if empty,
    // otherwise [*lo, *hi] is the exact x-interval.
    bool chord(double yy, double* lo, double* hi) const {
        if (euclidean_) {
            if (std::abs(yy) >= 1.0) return false;
            double w = std::sqrt(1.0 - yy * yy);
            *lo = -w;
            *hi = w;
            return true;
        }
        double xlo = std::numeric_limits<double>::max();
        double xhi = -xlo;
        const std::size_t n = vertices_.size();
        bool hit = false;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = vertices_[i];
            const Vec2& b = vertices_[(i + 1) % n];
            if ((a.y <= yy && b.y >= yy) || (a.y >= yy && b.y <= yy)) {
                double x;
                if (std::abs(b.y - a.y) < 1e-300) {
                    xlo = std::min({xlo, a.x, b.x});
                    xhi = std::max({xhi, a.x, b.x});
                    hit = true;
                    continue;
                }
                x = a.x + (b.x - a.x) * (yy - a.y) / (b.y - a.y);
                xlo = std::min(xlo, x);
                xhi = std::max(xhi, x);
                hit = true;
            }
        }
        if (!hit || xlo > xhi) return false;
        *lo = xlo;
        *hi = xhi;
        return true;
    }

private:
    ConvexGauge() = default;

    std::vector<Vec2> vertices_;
    std::vector<Vec2> normals_;
    std::vector<double> inv_offsets_;
    Vec2 body_min_, body_max_;
    double asymmetry_ = 1.0;
    double rho_min_ = 1.0;
    double rho_max_ = 1.0;
    bool euclidean_ = false;
    std::string name_;
};

// Named presets: "euclidean" (exact), "euclidean:<k>", "linf", "l1".
inline ConvexGauge gauge_from_name(const std::string& name) {
    if (name == "euclidean") return ConvexGauge::euclidean();
    if (name.rfind("euclidean:", 0) == 0) {
        int k = std::stoi(name.substr(10));
        return ConvexGauge::regular_polygon(k);
    }
    if (name == "linf") return ConvexGauge::linf();
    if (name == "l1") return ConvexGauge::l1();
    throw std::invalid_argument("unknown gauge preset: " + name);
}

} // namespace johnkit
