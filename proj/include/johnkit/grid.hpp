#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "johnkit/gauge.hpp"
#include "johnkit/geometry.hpp"

namespace johnkit {

// ---------------------------------------------------------------------------
// Grid geometry. Cell (i,j) has center origin + h*(i,j); the linear index is
// j*nx + i, which is also the canonical ("lexicographic") cell order used by
// every deterministic tie-break in the library.
// ---------------------------------------------------------------------------

struct GridSpec {
    Vec2 origin{0.0, 0.0};
    double h = 1.0;
    int nx = 0;
    int ny = 0;

    GridSpec() = default;
    GridSpec(Vec2 org, double spacing, int w, int hgt) : origin(org), h(spacing), nx(w), ny(hgt) {
        require(h > 0.0, "grid: spacing must be positive");
        require(nx >= 2 && ny >= 2, "grid: extent must be at least 2x2");
    }

    // Square window [-L, L]^2 with an odd cell count so that a cell center
    // sits exactly at the origin.
    static GridSpec centered(double L, double spacing) {
        int half = static_cast<int>(std::ceil(L / spacing - 1e-12));
        int n = 2 * half + 1;
        return GridSpec({-spacing * half, -spacing * half}, spacing, n, n);
    }

    int size() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    int ix(int idx) const { return idx % nx; }
    int iy(int idx) const { return idx / nx; }
    bool in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    Vec2 center(int i, int j) const { return {origin.x + h * i, origin.y + h * j}; }
    Vec2 center(int idx) const { return center(ix(idx), iy(idx)); }

    // Nearest cell to a point (indices may fall outside the grid).
    void cell_of(const Vec2& p, int* i, int* j) const {
        *i = static_cast<int>(std::lround((p.x - origin.x) / h));
        *j = static_cast<int>(std::lround((p.y - origin.y) / h));
    }

    bool same_as(const GridSpec& o) const {
        return nx == o.nx && ny == o.ny && std::abs(h - o.h) <= 1e-12 * h &&
               norm(origin - o.origin) <= 1e-9 * h;
    }
};

struct CellMask {
    GridSpec spec;
    std::vector<std::uint8_t> bits;

    CellMask() = default;
    explicit CellMask(const GridSpec& s) : spec(s), bits(static_cast<std::size_t>(s.size()), 0) {}

    bool get(int idx) const { return bits[static_cast<std::size_t>(idx)] != 0; }
    bool get(int i, int j) const { return spec.in_bounds(i, j) && get(spec.index(i, j)); }
    void set(int idx, bool v = true) { bits[static_cast<std::size_t>(idx)] = v ? 1 : 0; }

    long long count() const {
        long long c = 0;
        for (auto b : bits) c += b;
        return c;
    }

    double area() const { return static_cast<double>(count()) * spec.h * spec.h; }
    bool empty() const { return count() == 0; }

    bool contains_point(const Vec2& p) const {
        int i, j;
        spec.cell_of(p, &i, &j);
        return get(i, j);
    }

    CellMask dilated(int cells) const {
        CellMask out(spec);
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                if (!get(spec.index(i, j))) continue;
                for (int dj = -cells; dj <= cells; ++dj)
                    for (int di = -cells; di <= cells; ++di)
                        if (spec.in_bounds(i + di, j + dj)) out.set(spec.index(i + di, j + dj));
            }
        return out;
    }

    // A subset of B after dilating B by tol_cells (Chebyshev). Returns the
    // number of violating cells.
    long long subset_violations(const CellMask& B, int tol_cells) const {
        long long bad = 0;
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                if (!get(spec.index(i, j))) continue;
                bool ok = false;
                for (int dj = -tol_cells; dj <= tol_cells && !ok; ++dj)
                    for (int di = -tol_cells; di <= tol_cells && !ok; ++di)
                        if (B.get(i + di, j + dj)) ok = true;
                if (!ok) ++bad;
            }
        return bad;
    }
};

// ---------------------------------------------------------------------------
// Grid graph moves. 8-neighbor by default; the 16-neighbor set adds knight
// moves, which cuts the direction-quantization error of path lengths from
// ~8.2% to ~2.0%. A move is allowed when both endpoints are inside and the
// listed support cells (those the straight segment passes next to) are
// inside, so paths cannot jump across one-cell-thick walls.
// ---------------------------------------------------------------------------

struct Move {
    int dx, dy;
    int sup[2][2]; // support cell offsets; {0,0} entries are unused for axis moves
    int nsup;
};

class Neighborhood {
public:
    enum Kind { kEight = 8, kSixteen = 16 };

    explicit Neighborhood(Kind k = kEight) : kind_(k) {
        auto add = [&](int dx, int dy) {
            Move m{dx, dy, {{0, 0}, {0, 0}}, 0};
            if (dx != 0 && dy != 0) {
                if (std::abs(dx) == 1 && std::abs(dy) == 1) {
                    m.sup[0][0] = dx;
                    m.sup[0][1] = 0;
                    m.sup[1][0] = 0;
                    m.sup[1][1] = dy;
                    m.nsup = -2; // "at least one of the two" rule for diagonals
                } else if (std::abs(dy) == 2) {
                    m.sup[0][0] = 0;
                    m.sup[0][1] = dy / 2;
                    m.sup[1][0] = dx;
                    m.sup[1][1] = dy / 2;
                    m.nsup = 2;
                } else {
                    m.sup[0][0] = dx / 2;
                    m.sup[0][1] = 0;
                    m.sup[1][0] = dx / 2;
                    m.sup[1][1] = dy;
                    m.nsup = 2;
                }
            }
            moves_.push_back(m);
        };
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                if (dx || dy) add(dx, dy);
        if (k == kSixteen) {
            add(1, 2);
            add(-1, 2);
            add(1, -2);
            add(-1, -2);
            add(2, 1);
            add(-2, 1);
            add(2, -1);
            add(-2, -1);
        }
    }

    Kind kind() const { return kind_; }
    const std::vector<Move>& moves() const { return moves_; }

    template <class InsideFn>
    bool allowed(const InsideFn& inside, int i, int j, const Move& m) const {
        if (!inside(i + m.dx, j + m.dy)) return false;
        if (m.nsup == 0) return true;
        if (m.nsup == -2)
            return inside(i + m.sup[0][0], j + m.sup[0][1]) ||
                   inside(i + m.sup[1][0], j + m.sup[1][1]);
        return inside(i + m.sup[0][0], j + m.sup[0][1]) &&
               inside(i + m.sup[1][0], j + m.sup[1][1]);
    }

private:
    Kind kind_;
    std::vector<Move> moves_;
};

// ---------------------------------------------------------------------------
// Exact squared Euclidean distance transform to a set of site cells
// (Felzenszwalb-Huttenlocher lower envelopes, two 1D passes). Distances are
// in index units; multiply by h for physical units.
// ---------------------------------------------------------------------------

inline std::vector<double> squared_edt(const GridSpec& spec, const std::vector<std::uint8_t>& sites) {
    const double INF = 1e30;
    const double INF_HALF = 5e29;
    const int nx = spec.nx, ny = spec.ny;
    std::vector<double> f(static_cast<std::size_t>(spec.size()), INF);
    for (int idx = 0; idx < spec.size(); ++idx)
        if (sites[static_cast<std::size_t>(idx)]) f[static_cast<std::size_t>(idx)] = 0.0;

    std::vector<double> d(f.size());
    const int nmax = std::max(nx, ny);
    std::vector<int> v(static_cast<std::size_t>(nmax));
    std::vector<double> z(static_cast<std::size_t>(nmax) + 1);

    // 1D lower envelope of parabolas; entries >= INF_HALF never contribute.
    auto transform_1d = [&](const std::vector<double>& g, int n, std::vector<double>& out) {
        int k = -1;
        for (int q = 0; q < n; ++q) {
            if (g[static_cast<std::size_t>(q)] >= INF_HALF) continue;
            if (k < 0) {
                k = 0;
                v[0] = q;
                z[0] = -INF;
                z[1] = INF;
                continue;
            }
            bool replaced = false;
            double s = 0.0;
            while (true) {
                int p = v[static_cast<std::size_t>(k)];
                s = ((g[static_cast<std::size_t>(q)] + static_cast<double>(q) * q) -
                     (g[static_cast<std::size_t>(p)] + static_cast<double>(p) * p)) /
                    (2.0 * (q - p));
                if (s <= z[static_cast<std::size_t>(k)]) {
                    --k;
                    if (k < 0) {
                        k = 0;
                        v[0] = q;
                        z[0] = -INF;
                        z[1] = INF;
                        replaced = true;
                        break;
                    }
                } else {
                    break;
                }
            }
            if (replaced) continue;
            ++k;
            v[static_cast<std::size_t>(k)] = q;
            z[static_cast<std::size_t>(k)] = s;
            z[static_cast<std::size_t>(k) + 1] = INF;
        }
        if (k < 0) {
            for (int q = 0; q < n; ++q) out[static_cast<std::size_t>(q)] = INF;
            return;
        }
        int kk = 0;
        for (int q = 0; q < n; ++q) {
            while (z[static_cast<std::size_t>(kk) + 1] < q) ++kk;
            int p = v[static_cast<std::size_t>(kk)];
            out[static_cast<std::size_t>(q)] = (q - p) * static_cast<double>(q - p) + g[static_cast<std::size_t>(p)];
        }
    };

    // columns
    std::vector<double> col(static_cast<std::size_t>(ny)), colo(static_cast<std::size_t>(ny));
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) col[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>(spec.index(i, j))];
        transform_1d(col, ny, colo);
        for (int j = 0; j < ny; ++j) d[static_cast<std::size_t>(spec.index(i, j))] = colo[static_cast<std::size_t>(j)];
    }
    // rows
    std::vector<double> rw(static_cast<std::size_t>(nx)), rwo(static_cast<std::size_t>(nx));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) rw[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(spec.index(i, j))];
        transform_1d(rw, nx, rwo);
        for (int i = 0; i < nx; ++i) d[static_cast<std::size_t>(spec.index(i, j))] = rwo[static_cast<std::size_t>(i)];
    }
    return d;
}

// ---------------------------------------------------------------------------
// Exact nearest-site queries under an arbitrary gauge: uniform buckets with
// ring expansion, pruned by the gauge's radial bounds. Exact because every
// candidate is re-evaluated with the gauge itself.
// ---------------------------------------------------------------------------

class SiteIndex {
public:
    SiteIndex() = default;

    explicit SiteIndex(std::vector<Vec2> pts) : pts_(std::move(pts)) {
        require(!pts_.empty(), "site index: empty site set");
        lo_ = hi_ = pts_[0];
        for (const Vec2& p : pts_) {
            lo_.x = std::min(lo_.x, p.x);
            lo_.y = std::min(lo_.y, p.y);
            hi_.x = std::max(hi_.x, p.x);
            hi_.y = std::max(hi_.y, p.y);
        }
        double span = std::max(hi_.x - lo_.x, hi_.y - lo_.y);
        double scale = std::max({span, std::abs(lo_.x), std::abs(lo_.y), 1e-9});
        s_ = std::max(span / 128.0, 1e-9 * scale);
        bx_ = static_cast<int>((hi_.x - lo_.x) / s_) + 1;
        by_ = static_cast<int>((hi_.y - lo_.y) / s_) + 1;
        buckets_.assign(static_cast<std::size_t>(bx_) * static_cast<std::size_t>(by_), {});
        for (std::size_t n = 0; n < pts_.size(); ++n) {
            int i = std::min(bx_ - 1, static_cast<int>((pts_[n].x - lo_.x) / s_));
            int j = std::min(by_ - 1, static_cast<int>((pts_[n].y - lo_.y) / s_));
            buckets_[static_cast<std::size_t>(j * bx_ + i)].push_back(static_cast<int>(n));
        }
    }

    std::size_t size() const { return pts_.size(); }
    const std::vector<Vec2>& points() const { return pts_; }

    // Minimum over sites p of dist(p). dist must satisfy
    // dist(p) >= |q - p| / rho_max; that is the pruning bound.
    template <class DistFn>
    double query(const Vec2& q, double rho_max, const DistFn& dist, int* arg = nullptr) const {
        // clamp the start bucket: queries far outside the box begin at the
        // rim, which only under-estimates ring distances (still a valid bound)
        double fx = std::floor((q.x - lo_.x) / s_);
        double fy = std::floor((q.y - lo_.y) / s_);
        int qi = static_cast<int>(std::min(std::max(fx, -1.0), static_cast<double>(bx_)));
        int qj = static_cast<int>(std::min(std::max(fy, -1.0), static_cast<double>(by_)));
        double best = std::numeric_limits<double>::max();
        int besti = -1;
        int max_ring = bx_ + by_ + 3;
        for (int r = 0; r <= max_ring; ++r) {
            if (r > 0 && (r - 1) * s_ / rho_max > best) break;
            for (int j = qj - r; j <= qj + r; ++j) {
                if (j < 0 || j >= by_) continue;
                bool edge_row = (j == qj - r || j == qj + r);
                int step = edge_row ? 1 : std::max(1, 2 * r);
                for (int i = qi - r; i <= qi + r; i += step) {
                    if (i < 0 || i >= bx_) continue;
                    for (int n : buckets_[static_cast<std::size_t>(j * bx_ + i)]) {
                        double v = dist(pts_[static_cast<std::size_t>(n)]);
                        if (v < best || (v == best && (besti < 0 || n < besti))) {
                            best = v;
                            besti = n;
                        }
                    }
                }
            }
        }
        if (arg) *arg = besti;
        return best;
    }

    // d(q, sites) with gauge argument order eval(q - p).
    double min_gauge_from(const Vec2& q, const ConvexGauge& g, int* arg = nullptr) const {
        return query(q, g.rho_max(), [&](const Vec2& p) { return g.eval(q - p); }, arg);
    }

    // min over sites of eval(p - q), the reversed order.
    double min_gauge_to(const Vec2& q, const ConvexGauge& g, int* arg = nullptr) const {
        return query(q, g.rho_max(), [&](const Vec2& p) { return g.eval(p - q); }, arg);
    }

private:
    std::vector<Vec2> pts_;
    Vec2 lo_{0, 0}, hi_{0, 0};
    double s_ = 1.0;
    int bx_ = 1, by_ = 1;
    std::vector<std::vector<int>> buckets_;
};

// ---------------------------------------------------------------------------
// Rasterized open domain with boundary classification and a per-gauge
// anisotropic boundary distance field. The discrete boundary is a two-layer
// point cloud: inside cells adjacent to the complement plus complement cells
// adjacent to the inside (8-adjacency). Distances are measured to the
// complement-side layer, which keeps the field strictly positive on inside
// cells; the O(h) gap to the continuum boundary is an explicit tolerance
// everywhere downstream.
// ---------------------------------------------------------------------------

class GridDomain {
public:
    GridDomain() = default;

    GridDomain(const GridSpec& spec, std::vector<std::uint8_t> inside)
        : spec_(spec), inside_(std::move(inside)) {
        require(static_cast<int>(inside_.size()) == spec.size(), "domain: mask size mismatch");
        compute_boundary();
    }

    static GridDomain from_predicate(const GridSpec& spec, const std::function<bool(const Vec2&)>& pred) {
        std::vector<std::uint8_t> m(static_cast<std::size_t>(spec.size()), 0);
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i)
                if (pred(spec.center(i, j))) m[static_cast<std::size_t>(spec.index(i, j))] = 1;
        return GridDomain(spec, std::move(m));
    }

    const GridSpec& spec() const { return spec_; }
    bool inside(int idx) const { return inside_[static_cast<std::size_t>(idx)] != 0; }
    bool inside(int i, int j) const { return spec_.in_bounds(i, j) && inside(spec_.index(i, j)); }
    bool inside_point(const Vec2& p) const {
        int i, j;
        spec_.cell_of(p, &i, &j);
        return inside(i, j);
    }
    const std::vector<std::uint8_t>& mask() const { return inside_; }
    long long inside_count() const {
        long long c = 0;
        for (auto b : inside_) c += b;
        return c;
    }

    const std::vector<int>& outer_boundary() const { return outer_boundary_; }
    const std::vector<int>& inner_boundary() const { return inner_boundary_; }

    // Discrete boundary as points (both layers), the set named by the type;
    // the distance field below uses only the complement-side layer.
    std::vector<Vec2> boundary_points() const {
        std::vector<Vec2> pts;
        pts.reserve(outer_boundary_.size() + inner_boundary_.size());
        for (int idx : inner_boundary_) pts.push_back(spec_.center(idx));
        for (int idx : outer_boundary_) pts.push_back(spec_.center(idx));
        return pts;
    }

    // Exact min over complement-side boundary points b of eval(x - b), for
    // every inside cell. Euclidean gauges take the O(N) transform; general
    // gauges take exact bucket queries. Throws if the domain fills the grid.
    void ensure_distance(const ConvexGauge& g) {
        if (!dist_.empty() && dist_gauge_ == g.name()) return;
        if (outer_boundary_.empty())
            throw std::runtime_error("unbounded domain needs explicit boundary");
        dist_.assign(static_cast<std::size_t>(spec_.size()), 0.0);
        if (g.is_euclidean()) {
            std::vector<std::uint8_t> sites(static_cast<std::size_t>(spec_.size()), 0);
            for (int idx : outer_boundary_) sites[static_cast<std::size_t>(idx)] = 1;
            std::vector<double> d2 = squared_edt(spec_, sites);
            for (int idx = 0; idx < spec_.size(); ++idx)
                if (inside(idx)) dist_[static_cast<std::size_t>(idx)] = std::sqrt(d2[static_cast<std::size_t>(idx)]) * spec_.h;
        } else {
            std::vector<Vec2> sites;
            sites.reserve(outer_boundary_.size());
            for (int idx : outer_boundary_) sites.push_back(spec_.center(idx));
            SiteIndex index(std::move(sites));
            for (int idx = 0; idx < spec_.size(); ++idx)
                if (inside(idx)) dist_[static_cast<std::size_t>(idx)] = index.min_gauge_from(spec_.center(idx), g);
        }
        dist_gauge_ = g.name();
    }

    bool has_distance(const ConvexGauge& g) const { return !dist_.empty() && dist_gauge_ == g.name(); }

    double dist(int idx) const { return dist_[static_cast<std::size_t>(idx)]; }
    const std::vector<double>& dist_field() const { return dist_; }

    // Connected components under the given move set; component ids in cell
    // order, -1 outside.
    std::vector<int> components(const Neighborhood& nb, int* count = nullptr) const {
        std::vector<int> comp(static_cast<std::size_t>(spec_.size()), -1);
        int c = 0;
        std::vector<int> stack;
        auto ins = [&](int i, int j) { return inside(i, j); };
        for (int seed = 0; seed < spec_.size(); ++seed) {
            if (!inside(seed) || comp[static_cast<std::size_t>(seed)] >= 0) continue;
            comp[static_cast<std::size_t>(seed)] = c;
            stack.push_back(seed);
            while (!stack.empty()) {
                int cur = stack.back();
                stack.pop_back();
                int ci = spec_.ix(cur), cj = spec_.iy(cur);
                for (const Move& m : nb.moves()) {
                    if (!nb.allowed(ins, ci, cj, m)) continue;
                    int nidx = spec_.index(ci + m.dx, cj + m.dy);
                    if (comp[static_cast<std::size_t>(nidx)] < 0) {
                        comp[static_cast<std::size_t>(nidx)] = c;
                        stack.push_back(nidx);
                    }
                }
            }
            ++c;
        }
        if (count) *count = c;
        return comp;
    }

    bool is_connected(const Neighborhood& nb) const {
        int c = 0;
        components(nb, &c);
        return c <= 1;
    }

private:
    void compute_boundary() {
        for (int j = 0; j < spec_.ny; ++j)
            for (int i = 0; i < spec_.nx; ++i) {
                int idx = spec_.index(i, j);
                bool in = inside(idx);
                bool mixed = false;
                for (int dj = -1; dj <= 1 && !mixed; ++dj)
                    for (int di = -1; di <= 1 && !mixed; ++di) {
                        if (!di && !dj) continue;
                        bool nin = inside(i + di, j + dj); // off-grid counts as complement
                        if (nin != in) mixed = true;
                    }
                // grid-border inside cells also touch the (implicit) complement
                if (in && (i == 0 || j == 0 || i == spec_.nx - 1 || j == spec_.ny - 1)) mixed = true;
                if (!mixed) continue;
                if (in)
                    inner_boundary_.push_back(idx);
                else
                    outer_boundary_.push_back(idx);
            }
        // inside cells on the grid border need a complement-side point too:
        // synthesize is unnecessary because centered windows always carry a
        // complement margin; from_predicate callers are expected to leave one.
    }

    GridSpec spec_;
    std::vector<std::uint8_t> inside_;
    std::vector<int> outer_boundary_;
    std::vector<int> inner_boundary_;
    std::vector<double> dist_;
    std::string dist_gauge_;
};

// Nonempty compact set as a union of closed cells.
struct CompactSet {
    GridSpec spec;
    std::vector<std::uint8_t> cells;

    CompactSet() = default;
    explicit CompactSet(const GridSpec& s) : spec(s), cells(static_cast<std::size_t>(s.size()), 0) {}
    CompactSet(const GridSpec& s, std::vector<std::uint8_t> m) : spec(s), cells(std::move(m)) {}

    static CompactSet closure_of(const GridDomain& dom) {
        return CompactSet(dom.spec(), dom.mask());
    }

    bool get(int idx) const { return cells[static_cast<std::size_t>(idx)] != 0; }
    bool get(int i, int j) const { return spec.in_bounds(i, j) && get(spec.index(i, j)); }
    bool empty() const {
        for (auto b : cells)
            if (b) return false;
        return true;
    }

    bool contains_point(const Vec2& p) const {
        int i, j;
        spec.cell_of(p, &i, &j);
        return get(i, j);
    }

    std::vector<Vec2> points() const {
        std::vector<Vec2> pts;
        for (int idx = 0; idx < spec.size(); ++idx)
            if (get(idx)) pts.push_back(spec.center(idx));
        return pts;
    }
};

// ---------------------------------------------------------------------------
// Module operations
// ---------------------------------------------------------------------------

inline std::vector<double> boundary_distance_field(GridDomain& dom, const ConvexGauge& g) {
    dom.ensure_distance(g);
    return dom.dist_field();
}

// Max of the distance field with the lexicographic tie-break.
inline std::pair<int, double> inradius_point(const GridDomain& dom, const ConvexGauge& g) {
    require(dom.has_distance(g), "inradius: distance field not computed for this gauge");
    int best = -1;
    double bv = -1.0;
    for (int idx = 0; idx < dom.spec().size(); ++idx) {
        if (!dom.inside(idx)) continue;
        double v = dom.dist(idx);
        if (v > bv) {
            bv = v;
            best = idx;
        }
    }
    if (best < 0) throw std::invalid_argument("inradius: empty domain");
    return {best, bv};
}

// Hausdorff distance between nonempty compact cell sets on one grid. The two
// directed terms use opposite gauge argument orders; they coincide for
// symmetric gauges.
inline double hausdorff_distance(const CompactSet& A, const CompactSet& B, const ConvexGauge& g) {
    require(A.spec.same_as(B.spec), "hausdorff: sets on different grids");
    std::vector<Vec2> pa = A.points();
    std::vector<Vec2> pb = B.points();
    require(!pa.empty() && !pb.empty(), "hausdorff: empty operand");
    SiteIndex ib(pb);
    SiteIndex ia(pa);
    double h1 = 0.0, h2 = 0.0;
    for (const Vec2& a : pa) h1 = std::max(h1, ib.query(a, g.rho_max(), [&](const Vec2& b) { return g.eval(a - b); }));
    for (const Vec2& b : pb) h2 = std::max(h2, ia.query(b, g.rho_max(), [&](const Vec2& a) { return g.eval(b - a); }));
    return std::max(h1, h2);
}

// Discrete stand-in for the limit identity K = cap_m Cl(cup_{j>=m} K_j) on a
// finite prefix. Tail unions of a finite prefix are nested, so the
// intersection truncated at m_max equals the union of the last
// (n - m_max + 1) sets; m_max defaults to ceil(n/2) so that a convergent
// tail dominates while early transients drop out.
inline CompactSet limsup_closure(const std::vector<CompactSet>& sets, int m_max = -1) {
    require(!sets.empty(), "limsup: empty sequence");
    const int n = static_cast<int>(sets.size());
    for (const CompactSet& s : sets) require(s.spec.same_as(sets[0].spec), "limsup: grid mismatch");
    if (m_max <= 0) m_max = (n + 1) / 2;
    m_max = std::min(m_max, n);
    CompactSet out(sets[0].spec);
    for (int j = m_max - 1; j < n; ++j)
        for (int idx = 0; idx < out.spec.size(); ++idx)
            if (sets[static_cast<std::size_t>(j)].get(idx)) out.cells[static_cast<std::size_t>(idx)] = 1;
    return out;
}

struct KeepDistanceReport {
    bool hypothesis_ok = false;
    std::string reason;
    bool pass = false;
    double margin = 0.0;      // measured d(x, boundary of limit interior) - r
    double limit_distance = 0.0;
};

// Checks that a distance-r-deep convergent sequence of points keeps depth r
// in the limit set. The limit is the truncated limsup of the masks; its
// interior drops the cells that touch the complement.
inline KeepDistanceReport keep_distance_check(const std::vector<CompactSet>& K_seq,
                                              const std::vector<Vec2>& x_seq, double r,
                                              const ConvexGauge& g, double tol = -1.0) {
    KeepDistanceReport rep;
    require(K_seq.size() == x_seq.size() && !K_seq.empty(), "keep_distance: size mismatch");
    const GridSpec& spec = K_seq[0].spec;
    const double h = spec.h;
    if (tol < 0) tol = 4.0 * h;

    auto mask_distance = [&](const CompactSet& K, const Vec2& x) {
        // distance from x to the complement-side boundary of K
        std::vector<Vec2> sites;
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                int idx = spec.index(i, j);
                if (K.get(idx)) continue;
                bool adj = false;
                for (int dj = -1; dj <= 1 && !adj; ++dj)
                    for (int di = -1; di <= 1 && !adj; ++di)
                        if (K.get(i + di, j + dj)) adj = true;
                if (adj) sites.push_back(spec.center(idx));
            }
        if (sites.empty()) return std::numeric_limits<double>::max();
        SiteIndex index(std::move(sites));
        return index.min_gauge_from(x, g);
    };

    for (std::size_t j = 0; j < K_seq.size(); ++j) {
        if (!K_seq[j].contains_point(x_seq[j])) {
            rep.reason = "hypothesis_failed: x_j outside K_j at j=" + std::to_string(j);
            return rep;
        }
        if (mask_distance(K_seq[j], x_seq[j]) < r - 1e-12) {
            rep.reason = "hypothesis_failed: d(x_j, boundary K_j) < r at j=" + std::to_string(j);
            return rep;
        }
    }
    const Vec2 x_limit = x_seq.back();
    for (std::size_t j = K_seq.size() / 2; j < x_seq.size(); ++j) {
        if (norm(x_seq[j] - x_limit) > 2.0 * h + 1e-12) {
            rep.reason = "hypothesis_failed: x_j not Cauchy within 2h at tail";
            return rep;
        }
    }
    rep.hypothesis_ok = true;

    CompactSet K = limsup_closure(K_seq);
    // interior: cells of K all of whose 8-neighbors are in K
    CompactSet interior(spec);
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            int idx = spec.index(i, j);
            if (!K.get(idx)) continue;
            bool deep = true;
            for (int dj = -1; dj <= 1 && deep; ++dj)
                for (int di = -1; di <= 1 && deep; ++di)
                    if (!(spec.in_bounds(i + di, j + dj) && K.get(spec.index(i + di, j + dj)))) deep = false;
            if (deep) interior.cells[static_cast<std::size_t>(idx)] = 1;
        }

    int xi, xj;
    spec.cell_of(x_limit, &xi, &xj);
    bool in_interior = spec.in_bounds(xi, xj) && interior.get(spec.index(xi, xj));
    rep.limit_distance = mask_distance(K, x_limit);
    rep.margin = rep.limit_distance - r;
    rep.pass = in_interior && rep.limit_distance >= r - tol;
    if (!rep.pass) rep.reason = in_interior ? "depth lost in the limit" : "limit point not interior";
    return rep;
}

// ---------------------------------------------------------------------------
// Gauge ball rasterization. The ball B(x,r) = {y : ||x-y|| < r} tests
// eval(center - cell); the reversed orientation is available for the few
// places that need {y : ||y-x|| < r}.
// ---------------------------------------------------------------------------

enum class BallOrientation { kCenterMinusPoint, kPointMinusCenter };

template <class CellFn>
inline void for_each_gauge_ball_cell(const ConvexGauge& g, const Vec2& center, double r,
                                     const GridSpec& spec, BallOrientation orient,
                                     const CellFn& fn) {
    if (r <= 0.0) return;
    const bool cmp = (orient == BallOrientation::kCenterMinusPoint);
    // ball = center -/+ r * body
    double ylo = cmp ? center.y - r * g.body_max().y : center.y + r * g.body_min().y;
    double yhi = cmp ? center.y - r * g.body_min().y : center.y + r * g.body_max().y;
    int j0 = std::max(0, static_cast<int>(std::ceil((ylo - spec.origin.y) / spec.h - 1e-12)));
    int j1 = std::min(spec.ny - 1, static_cast<int>(std::floor((yhi - spec.origin.y) / spec.h + 1e-12)));
    for (int j = j0; j <= j1; ++j) {
        double cy = spec.origin.y + spec.h * j;
        double wy = cmp ? (center.y - cy) / r : (cy - center.y) / r;
        double wlo, whi;
        if (!g.chord(wy, &wlo, &whi)) continue;
        double xlo = cmp ? center.x - r * whi : center.x + r * wlo;
        double xhi = cmp ? center.x - r * wlo : center.x + r * whi;
        int i0 = std::max(0, static_cast<int>(std::ceil((xlo - spec.origin.x) / spec.h - 1e-9)) - 1);
        int i1 = std::min(spec.nx - 1, static_cast<int>(std::floor((xhi - spec.origin.x) / spec.h + 1e-9)) + 1);
        for (int i = i0; i <= i1; ++i) {
            Vec2 c = spec.center(i, j);
            double v = cmp ? g.eval(center - c) : g.eval(c - center);
            if (v < r) fn(spec.index(i, j));
        }
    }
}

inline std::vector<int> gauge_ball_cells(const ConvexGauge& g, const Vec2& center, double r,
                                         const GridSpec& spec,
                                         BallOrientation orient = BallOrientation::kCenterMinusPoint) {
    std::vector<int> out;
    for_each_gauge_ball_cell(g, center, r, spec, orient, [&](int idx) { out.push_back(idx); });
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Stock shapes (Euclidean geometry; scenario generators build on these).
// ---------------------------------------------------------------------------

inline GridDomain disk_domain(const GridSpec& spec, const Vec2& center = {0, 0}, double R = 1.0) {
    return GridDomain::from_predicate(spec, [&](const Vec2& p) { return norm(p - center) < R; });
}

inline GridDomain square_domain(const GridSpec& spec, double half_side = 1.0, const Vec2& center = {0, 0}) {
    return GridDomain::from_predicate(spec, [&](const Vec2& p) {
        return std::abs(p.x - center.x) < half_side && std::abs(p.y - center.y) < half_side;
    });
}

inline GridDomain annulus_domain(const GridSpec& spec, double r_in, double r_out) {
    return GridDomain::from_predicate(spec, [&](const Vec2& p) {
        double r = norm(p);
        return r > r_in && r < r_out;
    });
}

} // namespace johnkit
