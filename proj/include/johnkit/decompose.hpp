#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "johnkit/curve.hpp"
#include "johnkit/gauge.hpp"
#include "johnkit/geometry.hpp"
#include "johnkit/grid.hpp"
#include "johnkit/john.hpp"

namespace johnkit {

// ---------------------------------------------------------------------------
// Cover decomposition of the complement of a closed obstacle set K under the
// carrot John condition with center infinity. Everything here is Euclidean.
//
// The scene holds K on a square window grid, the exact distance field to K,
// and one escape curve per free cell: a single backward slack sweep from the
// window rim fixes a forest of minimax escape paths, so every cell's curve
// is the parent chain (extended radially beyond the window). The achieved
// constant J is the binary-search value folded with the worst exit-point
// ratio, which makes the ball-radius bounds below hold exactly.
// ---------------------------------------------------------------------------

struct SceneConfig {
    double window_radius = 13.0;
    std::vector<double> schedule = {1.0, 2.0, 4.0, 8.0};
    double J_supplied = -1.0;     // informational; the achieved value governs
    int sample_width = 40;        // sample lattice cells across a B_R diameter
    int nhat = 8;                 // configured bound on the number of families
    int overlap_bound = 8;        // measured stand-in for the covering constant
    std::uint64_t seed = 1;
    int boman_pairs = 50;
    int subgrid_cells = 768;      // per-piece raster width
    double tol_J_escape = 5e-3;
    double volume_band_lo = 0.05; // |W|/R^2 band, locked after first runs
    double volume_band_hi = 120.0;
    double overlap_ratio_lo = 0.005;
};

struct ExitRecord {
    Vec2 point{0, 0};
    double len = 0.0;     // curve length from the cell to the exit
    double dist = 0.0;    // d(exit, K)
    bool on_extension = false;
};

class ObstacleScene {
public:
    ObstacleScene(const GridSpec& spec, std::vector<std::uint8_t> k_mask, SceneConfig cfg)
        : spec_(spec), kmask_(std::move(k_mask)), cfg_(std::move(cfg)), gauge_(ConvexGauge::euclidean()) {
        require(static_cast<int>(kmask_.size()) == spec.size(), "scene: K mask size mismatch");
        require(!cfg_.schedule.empty(), "scene: empty schedule");
        std::sort(cfg_.schedule.begin(), cfg_.schedule.end());

        std::vector<Vec2> kpts;
        for (int idx = 0; idx < spec_.size(); ++idx)
            if (kmask_[static_cast<std::size_t>(idx)]) kpts.push_back(spec_.center(idx));
        require(!kpts.empty(), "scene: K is empty");
        k_index_ = SiteIndex(std::move(kpts));

        double d0 = k_index_.min_gauge_from({0, 0}, gauge_);
        require(d0 <= cfg_.schedule.front() + 1e-9,
                "scene: K must meet the ball of radius min(schedule) around the origin");

        std::vector<double> d2 = squared_edt(spec_, kmask_);
        distK_.resize(static_cast<std::size_t>(spec_.size()));
        for (int idx = 0; idx < spec_.size(); ++idx)
            distK_[static_cast<std::size_t>(idx)] = std::sqrt(d2[static_cast<std::size_t>(idx)]) * spec_.h;

        build_escape_forest();
    }

    const GridSpec& spec() const { return spec_; }
    const SceneConfig& config() const { return cfg_; }
    const ConvexGauge& gauge() const { return gauge_; }
    bool in_K(int idx) const { return kmask_[static_cast<std::size_t>(idx)] != 0; }
    bool free_cell(int idx) const { return !in_K(idx); }
    double dist_to_K_cell(int idx) const { return distK_[static_cast<std::size_t>(idx)]; }
    double dist_to_K(const Vec2& p) const { return k_index_.min_gauge_from(p, gauge_); }
    double scene_J() const { return J_eff_; }
    void fold_exit_ratio(double ratio) { J_eff_ = std::max(J_eff_, ratio); }
    double max_schedule() const { return cfg_.schedule.back(); }

    const std::vector<std::uint8_t>& k_mask() const { return kmask_; }

    // Escape curve of a free cell: parent chain to the window rim, collinear
    // runs merged, then a radial extension far past every scheduled 3R.
    Polyline escape_curve(int cell) const {
        require(free_cell(cell), "escape_curve: cell lies in K");
        if (parent_[static_cast<std::size_t>(cell)] == -2)
            throw std::runtime_error("escape_curve: no escape in window (cell enclosed by K)");
        std::vector<Vec2> vs;
        int v = cell;
        Vec2 last_dir{0, 0};
        while (v >= 0) {
            Vec2 p = spec_.center(v);
            if (vs.size() >= 2) {
                Vec2 d = p - vs.back();
                if (std::abs(cross(last_dir, d)) < 1e-15 && dot(last_dir, d) > 0.0)
                    vs.back() = p; // extend the collinear run
                else {
                    last_dir = d;
                    vs.push_back(p);
                }
            } else {
                if (!vs.empty()) last_dir = p - vs.back();
                vs.push_back(p);
            }
            v = parent_[static_cast<std::size_t>(v)];
        }
        Vec2 p = vs.back();
        double pn = norm(p);
        require(pn > 1e-9, "escape_curve: degenerate rim point");
        double far = std::max(4.0 * 3.0 * max_schedule(), 2.0 * cfg_.window_radius);
        vs.push_back(p * (far / pn));
        Polyline out(std::move(vs));
        out.toward_infinity = true;
        return out;
    }

    // Sample lattice of free cells in B_R; seeds are handled separately.
    std::vector<int> samples_in_ball(double R) const {
        int stride = sample_stride(R);
        std::vector<int> out;
        for (int j = 0; j < spec_.ny; ++j) {
            if (j % stride) continue;
            for (int i = 0; i < spec_.nx; ++i) {
                if (i % stride) continue;
                int idx = spec_.index(i, j);
                if (!free_cell(idx)) continue;
                if (norm(spec_.center(idx)) < R) out.push_back(idx);
            }
        }
        return out;
    }

    int sample_stride(double R) const {
        int across = static_cast<int>(std::ceil(2.0 * R / spec_.h));
        return std::max(1, across / std::max(8, cfg_.sample_width));
    }

    int nearest_free_cell_to_origin() const {
        int best = -1;
        double bd = std::numeric_limits<double>::max();
        for (int idx = 0; idx < spec_.size(); ++idx) {
            if (!free_cell(idx)) continue;
            double d = norm(spec_.center(idx));
            if (d < bd - 1e-15) {
                bd = d;
                best = idx;
            }
        }
        require(best >= 0, "scene: no free cells");
        return best;
    }

private:
    void build_escape_forest() {
        const double rim = cfg_.window_radius - 2.0 * spec_.h;
        const double Rcheck = max_schedule();
        std::vector<int> targets;
        std::vector<int> check;
        for (int idx = 0; idx < spec_.size(); ++idx) {
            if (!free_cell(idx)) continue;
            double r = norm(spec_.center(idx));
            if (r >= rim) targets.push_back(idx);
            if (r <= Rcheck) check.push_back(idx);
        }
        if (targets.empty()) throw std::runtime_error("scene: window rim blocked by K");
        if (3.0 * cfg_.schedule.front() > cfg_.window_radius)
            throw std::runtime_error("increase R_max: window smaller than 3*min(schedule)");

        Neighborhood nb(Neighborhood::kEight);
        std::vector<double> move_w;
        for (const Move& m : nb.moves()) move_w.push_back(norm(Vec2{spec_.h * m.dx, spec_.h * m.dy}));
        auto fre = [&](int i, int j) { return spec_.in_bounds(i, j) && free_cell(spec_.index(i, j)); };

        std::vector<double> slack(static_cast<std::size_t>(spec_.size()));
        std::vector<int> par(static_cast<std::size_t>(spec_.size()));
        auto sweep = [&](double J) -> long long {
            std::fill(slack.begin(), slack.end(), -1e300);
            std::fill(par.begin(), par.end(), -2);
            std::priority_queue<detail::MaxQueueEntry> pq;
            for (int t : targets) {
                slack[static_cast<std::size_t>(t)] = J * distK_[static_cast<std::size_t>(t)];
                par[static_cast<std::size_t>(t)] = -1;
                pq.push({slack[static_cast<std::size_t>(t)], t});
            }
            std::vector<std::uint8_t> done(static_cast<std::size_t>(spec_.size()), 0);
            long long settled_checked = 0;
            std::vector<std::uint8_t> in_check(static_cast<std::size_t>(spec_.size()), 0);
            for (int c : check) in_check[static_cast<std::size_t>(c)] = 1;
            while (!pq.empty()) {
                auto top = pq.top();
                pq.pop();
                int u = top.idx;
                if (done[static_cast<std::size_t>(u)]) continue;
                done[static_cast<std::size_t>(u)] = 1;
                if (in_check[static_cast<std::size_t>(u)]) ++settled_checked;
                int uiX = spec_.ix(u), ujY = spec_.iy(u);
                const auto& moves = nb.moves();
                for (std::size_t mi = 0; mi < moves.size(); ++mi) {
                    const Move& m = moves[mi];
                    int vi = uiX - m.dx, vj = ujY - m.dy;
                    if (!fre(vi, vj)) continue;
                    if (!nb.allowed(fre, vi, vj, m)) continue;
                    int v = spec_.index(vi, vj);
                    double cand = std::min(J * distK_[static_cast<std::size_t>(v)], top.key - move_w[mi]);
                    if (cand < -1e-12) continue;
                    if (cand > slack[static_cast<std::size_t>(v)]) {
                        slack[static_cast<std::size_t>(v)] = cand;
                        par[static_cast<std::size_t>(v)] = u;
                        pq.push({cand, v});
                    }
                }
            }
            return settled_checked;
        };

        const long long need = static_cast<long long>(check.size());
        double lo = 1.0, hi = std::max(1.5, cfg_.J_supplied);
        bool found = false;
        for (int guard = 0; guard < 64; ++guard) {
            if (sweep(hi) == need) {
                found = true;
                break;
            }
            if (hi > 1e9) break;
            lo = hi;
            hi = hi * 1.6 + 0.1;
        }
        if (!found) throw std::runtime_error("scene: no escape in window for some cell (enclosed by K?)");
        while (hi - lo > cfg_.tol_J_escape) {
            double mid = 0.5 * (lo + hi);
            if (sweep(mid) == need)
                hi = mid;
            else
                lo = mid;
        }
        sweep(hi); // final forest at the accepted value
        parent_ = par;
        J_eff_ = hi;
    }

    GridSpec spec_;
    std::vector<std::uint8_t> kmask_;
    SceneConfig cfg_;
    ConvexGauge gauge_;
    std::vector<double> distK_;
    SiteIndex k_index_;
    std::vector<int> parent_;
    double J_eff_ = 1.0;
};

// The chosen escape curve of a free cell, toward infinity.
inline Polyline john_curve_to_infinity(const ObstacleScene& scene, int cell) {
    return scene.escape_curve(cell);
}

// First crossing of the sphere of radius 3R along the curve.
inline ExitRecord exit_point(const Polyline& curve, double R, const ObstacleScene& scene) {
    const double target = 3.0 * R;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < curve.vertices.size(); ++i) {
        Vec2 a = curve.vertices[i], b = curve.vertices[i + 1];
        double na = norm(a), nb = norm(b);
        double seg = norm(b - a);
        if (na < target && nb >= target) {
            // smallest t in [0,1] with |a + t(b-a)| = target
            Vec2 d = b - a;
            double A = norm2(d), B = 2.0 * dot(a, d), C = norm2(a) - target * target;
            double disc = std::max(0.0, B * B - 4.0 * A * C);
            double t = (-B + std::sqrt(disc)) / (2.0 * A);
            t = std::min(1.0, std::max(0.0, t));
            ExitRecord rec;
            rec.point = a + t * d;
            rec.len = cum + t * seg;
            rec.dist = scene.dist_to_K(rec.point);
            rec.on_extension = curve.toward_infinity && (i + 2 == curve.vertices.size());
            return rec;
        }
        cum += seg;
    }
    throw std::runtime_error("increase R_max: curve truncated before 3R");
}

// Prefix of the curve up to its 3R exit point.
inline Polyline curve_to_exit(const Polyline& curve, double R) {
    const double target = 3.0 * R;
    std::vector<Vec2> vs;
    for (std::size_t i = 0; i + 1 < curve.vertices.size(); ++i) {
        Vec2 a = curve.vertices[i], b = curve.vertices[i + 1];
        vs.push_back(a);
        if (norm(a) < target && norm(b) >= target) {
            Vec2 d = b - a;
            double A = norm2(d), B = 2.0 * dot(a, d), C = norm2(a) - target * target;
            double disc = std::max(0.0, B * B - 4.0 * A * C);
            double t = (-B + std::sqrt(disc)) / (2.0 * A);
            vs.push_back(a + std::min(1.0, std::max(0.0, t)) * d);
            return Polyline(std::move(vs));
        }
    }
    throw std::runtime_error("increase R_max: curve truncated before 3R");
}

// ---------------------------------------------------------------------------
// Greedy bounded-overlap ball cover at one scale, its components, and the
// V-decomposition. Balls are closed, centered at exit points on the 3R
// sphere, with radius d(exit, K)/2. The greedy pass guarantees that every
// sampled exit is covered; the achieved multiplicity is measured against the
// configured bound. Seeds added later extend the cover without merging
// components (a new ball is assigned to the first component it meets).
// ---------------------------------------------------------------------------

struct BallCover {
    double R = 0.0;
    std::vector<int> sample_cells;
    std::vector<ExitRecord> exits;          // aligned with sample_cells
    std::vector<Vec2> centers;              // chosen balls
    std::vector<double> radii;
    std::vector<int> ball_comp;             // component id per ball
    int n_comps = 0;
    std::vector<int> sample_ball;           // first covering chosen ball
    std::vector<int> sample_comp;
    int multiplicity = 0;
    double overlap_rate = 0.0;              // samples covered by >1 ball
    int extension_balls = 0;
    int merges_avoided = 0;
    std::vector<std::vector<int>> ball_adj; // intersection graph
    std::map<int, int> cell_to_sample;

    bool ball_contains(int b, const Vec2& p) const {
        return norm(centers[static_cast<std::size_t>(b)] - p) <=
               radii[static_cast<std::size_t>(b)] + 1e-12;
    }
};

inline BallCover build_cover(ObstacleScene& scene, double R) {
    BallCover cv;
    cv.R = R;
    cv.sample_cells = scene.samples_in_ball(R);
    require(!cv.sample_cells.empty(), "cover: no samples in B_R");

    for (std::size_t i = 0; i < cv.sample_cells.size(); ++i) {
        Polyline curve = scene.escape_curve(cv.sample_cells[i]);
        ExitRecord e = exit_point(curve, R, scene);
        scene.fold_exit_ratio(e.len / e.dist);
        cv.exits.push_back(e);
        cv.cell_to_sample[cv.sample_cells[i]] = static_cast<int>(i);
    }

    // greedy pass in cell order
    for (std::size_t i = 0; i < cv.exits.size(); ++i) {
        bool covered = false;
        for (std::size_t b = 0; b < cv.centers.size() && !covered; ++b)
            if (cv.ball_contains(static_cast<int>(b), cv.exits[i].point)) covered = true;
        if (!covered) {
            cv.centers.push_back(cv.exits[i].point);
            cv.radii.push_back(cv.exits[i].dist / 2.0);
        }
    }

    // components of the ball union
    const int nb = static_cast<int>(cv.centers.size());
    std::vector<int> uf(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) uf[static_cast<std::size_t>(b)] = b;
    std::function<int(int)> find = [&](int a) {
        while (uf[static_cast<std::size_t>(a)] != a) {
            uf[static_cast<std::size_t>(a)] = uf[static_cast<std::size_t>(uf[static_cast<std::size_t>(a)])];
            a = uf[static_cast<std::size_t>(a)];
        }
        return a;
    };
    cv.ball_adj.assign(static_cast<std::size_t>(nb), {});
    for (int a = 0; a < nb; ++a)
        for (int b = a + 1; b < nb; ++b)
            if (norm(cv.centers[static_cast<std::size_t>(a)] - cv.centers[static_cast<std::size_t>(b)]) <=
                cv.radii[static_cast<std::size_t>(a)] + cv.radii[static_cast<std::size_t>(b)] + 1e-12) {
                uf[static_cast<std::size_t>(find(a))] = find(b);
                cv.ball_adj[static_cast<std::size_t>(a)].push_back(b);
                cv.ball_adj[static_cast<std::size_t>(b)].push_back(a);
            }
    std::map<int, int> root_to_id;
    cv.ball_comp.assign(static_cast<std::size_t>(nb), -1);
    for (int b = 0; b < nb; ++b) {
        int r = find(b);
        auto it = root_to_id.find(r);
        if (it == root_to_id.end()) it = root_to_id.emplace(r, static_cast<int>(root_to_id.size())).first;
        cv.ball_comp[static_cast<std::size_t>(b)] = it->second;
    }
    cv.n_comps = static_cast<int>(root_to_id.size());

    // assignment, multiplicity, overlap
    long long multi = 0;
    for (std::size_t i = 0; i < cv.exits.size(); ++i) {
        int first = -1, hits = 0;
        for (int b = 0; b < nb; ++b)
            if (cv.ball_contains(b, cv.exits[i].point)) {
                if (first < 0) first = b;
                ++hits;
            }
        require(first >= 0, "cover: sampled exit point left uncovered");
        cv.sample_ball.push_back(first);
        cv.sample_comp.push_back(cv.ball_comp[static_cast<std::size_t>(first)]);
        cv.multiplicity = std::max(cv.multiplicity, hits);
        if (hits > 1) ++multi;
    }
    cv.overlap_rate = static_cast<double>(multi) / static_cast<double>(cv.exits.size());
    return cv;
}

// Adds a non-lattice cell (a seed) to the cover; returns its sample index.
inline int cover_ensure_cell(BallCover& cv, ObstacleScene& scene, int cell) {
    auto it = cv.cell_to_sample.find(cell);
    if (it != cv.cell_to_sample.end()) return it->second;
    Polyline curve = scene.escape_curve(cell);
    ExitRecord e = exit_point(curve, cv.R, scene);
    scene.fold_exit_ratio(e.len / e.dist);

    int first = -1, hits = 0;
    for (std::size_t b = 0; b < cv.centers.size(); ++b)
        if (cv.ball_contains(static_cast<int>(b), e.point)) {
            if (first < 0) first = static_cast<int>(b);
            ++hits;
        }
    if (first < 0) {
        // extend the greedy collection; never merge existing components
        cv.centers.push_back(e.point);
        cv.radii.push_back(e.dist / 2.0);
        int nbIdx = static_cast<int>(cv.centers.size()) - 1;
        cv.ball_adj.emplace_back();
        int comp = -1, distinct = 0, last = -1;
        for (int b = 0; b < nbIdx; ++b)
            if (norm(cv.centers[static_cast<std::size_t>(b)] - e.point) <=
                cv.radii[static_cast<std::size_t>(b)] + cv.radii.back() + 1e-12) {
                cv.ball_adj.back().push_back(b);
                cv.ball_adj[static_cast<std::size_t>(b)].push_back(nbIdx);
                if (cv.ball_comp[static_cast<std::size_t>(b)] != last) {
                    last = cv.ball_comp[static_cast<std::size_t>(b)];
                    if (comp < 0) comp = last;
                    ++distinct;
                }
            }
        if (distinct > 1) ++cv.merges_avoided;
        if (comp < 0) comp = cv.n_comps++;
        cv.ball_comp.push_back(comp);
        ++cv.extension_balls;
        first = nbIdx;
    }
    cv.exits.push_back(e);
    cv.sample_cells.push_back(cell);
    cv.sample_ball.push_back(first);
    cv.sample_comp.push_back(cv.ball_comp[static_cast<std::size_t>(first)]);
    int sidx = static_cast<int>(cv.sample_cells.size()) - 1;
    cv.cell_to_sample[cell] = sidx;
    return sidx;
}

// ---------------------------------------------------------------------------
// One John piece: the carrot union along the center's escape stretch plus a
// carrot over every feeder curve beta_z joining sampled z in V to the
// center's exit through the ball-center chain.
// ---------------------------------------------------------------------------

struct BetaCurve {
    int sample_cell = -1;
    Polyline curve;
    double length = 0.0;
};

struct OmegaRegion {
    int comp = -1;
    double R = 0.0;
    double C1 = 4.0;
    double Jp = 0.0;
    GridSpec wspec;
    CellMask mask;
    Vec2 yR{0, 0};
    int y_cell = -1;
    std::vector<BetaCurve> betas;
    long long v_violations = 0;    // sampled V points farther than 1 cell from the mask
    long long k_violations = 0;    // K points strictly interior to the mask
    double chain_min_clearance = std::numeric_limits<double>::max();
    double max_cell_radius = 0.0;  // max |center| over marked cells
};

inline Polyline build_beta(const ObstacleScene& scene, const BallCover& cv, int z_sample,
                           int y_sample) {
    Polyline head = curve_to_exit(scene.escape_curve(cv.sample_cells[static_cast<std::size_t>(z_sample)]), cv.R);
    int D2 = cv.sample_ball[static_cast<std::size_t>(z_sample)];
    int D1 = cv.sample_ball[static_cast<std::size_t>(y_sample)];

    // BFS through the ball intersection graph inside the shared component
    std::vector<int> par(cv.centers.size(), -3);
    std::vector<int> bfs{D2};
    par[static_cast<std::size_t>(D2)] = -1;
    for (std::size_t qh = 0; qh < bfs.size() && par[static_cast<std::size_t>(D1)] == -3; ++qh) {
        int b = bfs[qh];
        std::vector<int> nbrs = cv.ball_adj[static_cast<std::size_t>(b)];
        std::sort(nbrs.begin(), nbrs.end());
        for (int nb : nbrs)
            if (par[static_cast<std::size_t>(nb)] == -3) {
                par[static_cast<std::size_t>(nb)] = b;
                bfs.push_back(nb);
            }
    }
    require(par[static_cast<std::size_t>(D1)] != -3,
            "build_beta: ball chain does not connect inside the component");

    std::vector<Vec2> vs = head.vertices;
    std::vector<int> chain;
    for (int b = D1; b != -1; b = par[static_cast<std::size_t>(b)]) chain.push_back(b);
    std::reverse(chain.begin(), chain.end()); // D2 ... D1
    for (int b : chain) vs.push_back(cv.centers[static_cast<std::size_t>(b)]);
    vs.push_back(cv.exits[static_cast<std::size_t>(y_sample)].point);
    return Polyline(std::move(vs));
}

inline OmegaRegion omega_construct(ObstacleScene& scene, BallCover& cv, int comp, double R,
                                   int y_sample) {
    require(cv.sample_comp[static_cast<std::size_t>(y_sample)] == comp,
            "omega: center sample not in the requested component");
    const ConvexGauge& g = scene.gauge();
    OmegaRegion om;
    om.comp = comp;
    om.R = R;
    om.y_cell = cv.sample_cells[static_cast<std::size_t>(y_sample)];
    om.yR = cv.exits[static_cast<std::size_t>(y_sample)].point;

    double half = 6.0 * R;
    double hw = 2.0 * half / static_cast<double>(scene.config().subgrid_cells);
    om.wspec = GridSpec::centered(half, hw);
    om.mask = CellMask(om.wspec);

    std::vector<int> members;
    for (std::size_t i = 0; i < cv.sample_cells.size(); ++i)
        if (cv.sample_comp[i] == comp) members.push_back(static_cast<int>(i));

    // pass 1: feeder curves and the measured length constant
    double maxlen = 0.0;
    for (int zi : members) {
        BetaCurve bc;
        bc.sample_cell = cv.sample_cells[static_cast<std::size_t>(zi)];
        bc.curve = build_beta(scene, cv, zi, y_sample);
        bc.length = polyline_length(g, bc.curve);
        maxlen = std::max(maxlen, bc.length);
        om.betas.push_back(std::move(bc));
    }
    om.C1 = std::max(4.0, maxlen / R);
    om.Jp = om.C1 * scene.scene_J();

    // pass 2: rasterize the carrot union
    Polyline center_head = curve_to_exit(scene.escape_curve(om.y_cell), R);
    fill_core_region(om.mask, g, center_head, scene.scene_J(), CarrotRegion::kCarrot, std::nullopt, true);
    for (const BetaCurve& bc : om.betas)
        fill_core_region(om.mask, g, bc.curve, om.Jp, CarrotRegion::kCarrot, std::nullopt, true);

    // containment statistics
    for (const BetaCurve& bc : om.betas) {
        Vec2 z = scene.spec().center(bc.sample_cell);
        int zi, zj;
        om.wspec.cell_of(z, &zi, &zj);
        bool near = false;
        for (int dj = -1; dj <= 1 && !near; ++dj)
            for (int di = -1; di <= 1 && !near; ++di)
                if (om.mask.get(zi + di, zj + dj)) near = true;
        if (!near) ++om.v_violations;
        // chain clearance: feeder vertices past the escape part stay R/J deep
        for (std::size_t k = 0; k + 1 < bc.curve.vertices.size(); ++k) {
            const Vec2& v = bc.curve.vertices[k];
            if (norm(v) >= 3.0 * R - 1e-9)
                om.chain_min_clearance = std::min(om.chain_min_clearance, scene.dist_to_K(v));
        }
    }
    const GridSpec& sspec = scene.spec();
    for (int idx = 0; idx < sspec.size(); ++idx) {
        if (!scene.in_K(idx)) continue;
        Vec2 p = sspec.center(idx);
        int pi, pj;
        om.wspec.cell_of(p, &pi, &pj);
        if (!om.wspec.in_bounds(pi, pj) || !om.mask.get(om.wspec.index(pi, pj))) continue;
        bool deep = true;
        for (int dj = -1; dj <= 1 && deep; ++dj)
            for (int di = -1; di <= 1 && deep; ++di)
                if (!om.mask.get(pi + di, pj + dj)) deep = false;
        if (deep) ++om.k_violations;
    }
    for (int j = 0; j < om.wspec.ny; ++j)
        for (int i = 0; i < om.wspec.nx; ++i)
            if (om.mask.get(om.wspec.index(i, j)))
                om.max_cell_radius = std::max(om.max_cell_radius, norm(om.wspec.center(i, j)));
    return om;
}

// ---------------------------------------------------------------------------
// The inductive construction of the W families over the dyadic schedule.
// ---------------------------------------------------------------------------

struct Slot {
    int seed_cell = -1;
    bool permanent = false;
    double born_r = 0.0;
    double die_R = std::numeric_limits<double>::max(); // exclusive, transients only
};

struct WPiece {
    int slot = -1;
    int schedule_index = -1;
    OmegaRegion omega;
};

struct CoverDecomposition {
    SceneConfig cfg;
    std::vector<double> schedule;
    double J_eff = 1.0;
    double C1_max = 4.0;
    double Jp_global = 0.0;
    std::vector<BallCover> covers;  // per schedule index
    std::vector<Slot> slots;
    std::vector<WPiece> pieces;
    int n_permanent = 0;
    bool nhat_exceeded = false;
    bool truncation_flag = false;

    const WPiece* piece(int slot, int si) const {
        for (const WPiece& p : pieces)
            if (p.slot == slot && p.schedule_index == si) return &p;
        return nullptr;
    }

    // membership of a scene point in the dilated closure of W_{slot, si}
    bool in_piece_closure(int slot, int si, const Vec2& p, int dil = 1) const {
        const WPiece* w = piece(slot, si);
        if (!w) return false;
        int i, j;
        w->omega.wspec.cell_of(p, &i, &j);
        for (int dj = -dil; dj <= dil; ++dj)
            for (int di = -dil; di <= dil; ++di)
                if (w->omega.mask.get(i + di, j + dj)) return true;
        return false;
    }

    // Truncated union of the family's pieces; the extra dilation absorbs the
    // different cell sizes of the query grid and the stored piece grids.
    bool in_W_infinity(int slot, const Vec2& p) const {
        for (std::size_t si = 0; si < schedule.size(); ++si)
            if (in_piece_closure(slot, static_cast<int>(si), p, 2)) return true;
        return false;
    }
};

inline CoverDecomposition build_W(ObstacleScene& scene) {
    CoverDecomposition dec;
    dec.cfg = scene.config();
    dec.schedule = scene.config().schedule;
    const int ns = static_cast<int>(dec.schedule.size());

    for (int si = 0; si < ns; ++si) dec.covers.push_back(build_cover(scene, dec.schedule[si]));

    auto comp_of_cell = [&](int cell, int si) {
        int s = cover_ensure_cell(dec.covers[static_cast<std::size_t>(si)], scene, cell);
        return dec.covers[static_cast<std::size_t>(si)].sample_comp[static_cast<std::size_t>(s)];
    };
    auto sample_of_cell = [&](int cell, int si) {
        return cover_ensure_cell(dec.covers[static_cast<std::size_t>(si)], scene, cell);
    };

    auto add_piece = [&](int slot, int si) {
        int cell = dec.slots[static_cast<std::size_t>(slot)].seed_cell;
        int ysample = sample_of_cell(cell, si);
        int comp = dec.covers[static_cast<std::size_t>(si)].sample_comp[static_cast<std::size_t>(ysample)];
        WPiece p;
        p.slot = slot;
        p.schedule_index = si;
        p.omega = omega_construct(scene, dec.covers[static_cast<std::size_t>(si)], comp,
                                  dec.schedule[static_cast<std::size_t>(si)], ysample);
        dec.C1_max = std::max(dec.C1_max, p.omega.C1);
        dec.pieces.push_back(std::move(p));
    };

    // first family, seeded next to the origin
    dec.slots.push_back({scene.nearest_free_cell_to_origin(), true, dec.schedule.front()});
    for (int si = 0; si < ns; ++si) add_piece(0, si);

    for (int si = 0; si < ns; ++si) {
        double r = dec.schedule[static_cast<std::size_t>(si)];
        for (int guard = 0; guard < scene.config().nhat + 2; ++guard) {
            // first uncovered sampled free cell of B_r, in cell order
            int x_new = -1;
            const BallCover& cv = dec.covers[static_cast<std::size_t>(si)];
            std::vector<int> order(cv.sample_cells.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return cv.sample_cells[static_cast<std::size_t>(a)] < cv.sample_cells[static_cast<std::size_t>(b)];
            });
            for (int i : order) {
                int cell = cv.sample_cells[static_cast<std::size_t>(i)];
                Vec2 p = scene.spec().center(cell);
                if (norm(p) >= r) continue;
                bool covered = false;
                for (std::size_t sl = 0; sl < dec.slots.size() && !covered; ++sl)
                    if (dec.in_piece_closure(static_cast<int>(sl), si, p)) covered = true;
                if (!covered) {
                    x_new = cell;
                    break;
                }
            }
            if (x_new < 0) break;

            if (static_cast<int>(dec.slots.size()) >= scene.config().nhat) {
                dec.nhat_exceeded = true;
                break;
            }

            // does x_new join an existing family's V at some scheduled R >= r?
            int join_si = -1;
            for (int sj = si; sj < ns && join_si < 0; ++sj) {
                int cx = comp_of_cell(x_new, sj);
                for (std::size_t sl = 0; sl < dec.slots.size(); ++sl)
                    if (comp_of_cell(dec.slots[sl].seed_cell, sj) == cx) {
                        join_si = sj;
                        break;
                    }
            }

            int slot = static_cast<int>(dec.slots.size());
            if (join_si >= 0) {
                double dieR = dec.schedule[static_cast<std::size_t>(join_si)];
                dec.slots.push_back({x_new, false, r, dieR});
                if (join_si == si)
                    add_piece(slot, si);
                else
                    for (int sj = si; sj < join_si; ++sj) add_piece(slot, sj);
            } else {
                dec.slots.push_back({x_new, true, r});
                for (int sj = si; sj < ns; ++sj) add_piece(slot, sj);
            }
        }
        if (dec.nhat_exceeded) break;
    }

    for (const Slot& s : dec.slots)
        if (s.permanent) ++dec.n_permanent;
    dec.J_eff = scene.scene_J();
    dec.Jp_global = dec.C1_max * dec.J_eff;
    return dec;
}

// ---------------------------------------------------------------------------
// Verification: ball-radius bounds, sampled covers, scale-free volume bands,
// dyadic overlaps, per-piece containments, and the shared-ball (Boman)
// property on random pairs. Failures are itemized, never thrown.
// ---------------------------------------------------------------------------

struct VolumeRow {
    int slot = -1;
    double R = 0.0;
    double ratio = 0.0; // |W| / R^2
};

struct OverlapRow {
    int slot = -1;
    double R = 0.0;
    int slot_next = -1;
    double ratio = 0.0; // |W_l  cap  W_{l+1}| / |W_l|
};

struct BomanRow {
    int slot = -1;
    double Rz = 0.0, Rw = 0.0;
    double radius = 0.0;
    double radius_mismatch_rel = 0.0;
    bool pass = false;
    std::string fail_reason;
};

struct DecompositionReport {
    std::vector<std::string> failures;
    double multiplicity_max = 0.0;
    double overlap_rate_max = 0.0;
    double radii_left_min_slack = std::numeric_limits<double>::max();
    double radii_right_min_slack = std::numeric_limits<double>::max();
    std::vector<VolumeRow> volume_rows;
    std::vector<OverlapRow> overlap_rows;
    std::vector<BomanRow> boman_rows;
    int boman_pass = 0;
    long long cover_violations = 0;
    int n_slots = 0;
    int n_permanent = 0;
    double J_eff = 0.0;
    double C1_max = 0.0;
    double Jp_global = 0.0;
    bool pass() const { return failures.empty(); }
};

inline DecompositionReport verify_decomposition(ObstacleScene& scene, CoverDecomposition& dec) {
    DecompositionReport rep;
    const ConvexGauge& g = scene.gauge();
    const double J = scene.scene_J();
    dec.J_eff = J;
    dec.Jp_global = dec.C1_max * J;
    rep.J_eff = J;
    rep.C1_max = dec.C1_max;
    rep.Jp_global = dec.Jp_global;
    rep.n_slots = static_cast<int>(dec.slots.size());
    rep.n_permanent = dec.n_permanent;
    auto fail = [&](const std::string& s) { rep.failures.push_back(s); };

    if (dec.nhat_exceeded) fail("family count exceeded the configured bound");
    if (rep.n_slots > scene.config().nhat) fail("slot count above configured bound");

    // (1) ball radii: R/J <= radius <= 2R, and the exit-length bracket
    for (std::size_t si = 0; si < dec.covers.size(); ++si) {
        const BallCover& cv = dec.covers[si];
        const double R = cv.R;
        for (std::size_t b = 0; b < cv.radii.size(); ++b) {
            double left = cv.radii[b] - R / J;
            double right = 2.0 * R - cv.radii[b];
            rep.radii_left_min_slack = std::min(rep.radii_left_min_slack, left);
            rep.radii_right_min_slack = std::min(rep.radii_right_min_slack, right);
            if (left < -1e-9 * R)
                fail("ball radius below R/J at R=" + std::to_string(R) + " ball " + std::to_string(b));
            if (right < -1e-9 * R)
                fail("ball radius above 2R at R=" + std::to_string(R) + " ball " + std::to_string(b));
        }
        for (std::size_t i = 0; i < cv.exits.size(); ++i) {
            const ExitRecord& e = cv.exits[i];
            if (e.len < 2.0 * R - 1e-9 * R)
                fail("exit length below 2R at R=" + std::to_string(R));
            if (e.len > J * e.dist + 1e-9 * (1.0 + e.len))
                fail("exit length above J*d(exit,K) at R=" + std::to_string(R));
        }
        rep.multiplicity_max = std::max(rep.multiplicity_max, static_cast<double>(cv.multiplicity));
        rep.overlap_rate_max = std::max(rep.overlap_rate_max, cv.overlap_rate);
        if (cv.multiplicity > scene.config().overlap_bound)
            fail("cover multiplicity above bound at R=" + std::to_string(R));
    }

    // (2) sampled cover completeness per scale
    for (std::size_t si = 0; si < dec.covers.size(); ++si) {
        const BallCover& cv = dec.covers[si];
        double r = dec.schedule[si];
        for (std::size_t i = 0; i < cv.sample_cells.size(); ++i) {
            Vec2 p = scene.spec().center(cv.sample_cells[i]);
            if (norm(p) >= r) continue;
            bool covered = false;
            for (std::size_t sl = 0; sl < dec.slots.size() && !covered; ++sl)
                if (dec.in_piece_closure(static_cast<int>(sl), static_cast<int>(si), p)) covered = true;
            if (!covered) ++rep.cover_violations;
        }
    }
    if (rep.cover_violations > 0)
        fail("sampled cover incomplete: " + std::to_string(rep.cover_violations) + " cells");

    // (3) per-piece containments and volume bands
    for (const WPiece& p : dec.pieces) {
        const OmegaRegion& om = p.omega;
        if (om.v_violations > 0)
            fail("V not within closure of W (slot " + std::to_string(p.slot) + ", R=" + std::to_string(om.R) + ")");
        if (om.k_violations > 0)
            fail("W overlaps K (slot " + std::to_string(p.slot) + ", R=" + std::to_string(om.R) + ")");
        if (om.chain_min_clearance < om.R / J - 2.0 * scene.spec().h)
            fail("center-chain clearance below R/J (slot " + std::to_string(p.slot) + ")");
        if (om.max_cell_radius > 2.0 * om.C1 * om.R + om.wspec.h)
            fail("W escapes B(0, 2*C1*R) (slot " + std::to_string(p.slot) + ")");
        VolumeRow row;
        row.slot = p.slot;
        row.R = om.R;
        row.ratio = om.mask.area() / (om.R * om.R);
        rep.volume_rows.push_back(row);
        if (row.ratio < scene.config().volume_band_lo || row.ratio > scene.config().volume_band_hi)
            fail("volume ratio outside locked band (slot " + std::to_string(p.slot) + ", R=" +
                 std::to_string(om.R) + ", ratio=" + std::to_string(row.ratio) + ")");
    }

    // (4) dyadic overlaps along each permanent family's chain
    for (std::size_t sl = 0; sl < dec.slots.size(); ++sl) {
        if (!dec.slots[sl].permanent) continue;
        for (std::size_t si = 0; si + 1 < dec.schedule.size(); ++si) {
            const WPiece* a = dec.piece(static_cast<int>(sl), static_cast<int>(si));
            const WPiece* b = dec.piece(static_cast<int>(sl), static_cast<int>(si) + 1);
            if (!a || !b) continue;
            long long inter = 0, total = 0;
            const GridSpec& ws = a->omega.wspec;
            for (int j = 0; j < ws.ny; ++j)
                for (int i = 0; i < ws.nx; ++i) {
                    if (!a->omega.mask.get(ws.index(i, j))) continue;
                    ++total;
                    Vec2 c = ws.center(i, j);
                    int bi, bj;
                    b->omega.wspec.cell_of(c, &bi, &bj);
                    bool inb = false;
                    for (int dj = -1; dj <= 1 && !inb; ++dj)
                        for (int di = -1; di <= 1 && !inb; ++di)
                            if (b->omega.mask.get(bi + di, bj + dj)) inb = true;
                    if (inb) ++inter;
                }
            OverlapRow row;
            row.slot = static_cast<int>(sl);
            row.R = dec.schedule[si];
            row.slot_next = static_cast<int>(sl);
            row.ratio = total > 0 ? static_cast<double>(inter) / static_cast<double>(total) : 0.0;
            rep.overlap_rows.push_back(row);
            if (row.ratio <= 0.0 || row.ratio < scene.config().overlap_ratio_lo)
                fail("dyadic overlap below band (slot " + std::to_string(sl) + ", R=" +
                     std::to_string(dec.schedule[si]) + ")");
        }
    }

    // (5) shared-ball pairs inside each family
    Rng rng(scene.config().seed);
    const double Jp = dec.Jp_global;
    std::vector<int> permanent;
    for (std::size_t sl = 0; sl < dec.slots.size(); ++sl)
        if (dec.slots[sl].permanent) permanent.push_back(static_cast<int>(sl));

    for (int pair_i = 0; pair_i < scene.config().boman_pairs && !permanent.empty(); ++pair_i) {
        BomanRow row;
        int slot = permanent[static_cast<std::size_t>(rng.next_below(permanent.size()))];
        row.slot = slot;
        std::vector<const WPiece*> ps;
        for (const WPiece& p : dec.pieces)
            if (p.slot == slot && !p.omega.betas.empty()) ps.push_back(&p);
        if (ps.empty()) continue;
        const WPiece* pz = ps[static_cast<std::size_t>(rng.next_below(ps.size()))];
        const WPiece* pw = ps[static_cast<std::size_t>(rng.next_below(ps.size()))];
        if (pz->omega.R > pw->omega.R) std::swap(pz, pw);
        const BetaCurve& bz = pz->omega.betas[static_cast<std::size_t>(rng.next_below(pz->omega.betas.size()))];
        const BetaCurve& bw = pw->omega.betas[static_cast<std::size_t>(rng.next_below(pw->omega.betas.size()))];
        row.Rz = pz->omega.R;
        row.Rw = pw->omega.R;

        try {
            Polyline gamma1 = curve_to_exit(scene.escape_curve(dec.slots[static_cast<std::size_t>(slot)].seed_cell),
                                            pw->omega.R);
            // feeder hypothesis and concatenation toward the R_w exit
            ConcatResult conc = carrot_concat(g, gamma1, bz.curve, J, Jp, gamma1.back(),
                                              scene.spec().h);
            const Polyline& hat_z = conc.curve;
            const Polyline& hat_w = bw.curve;
            CigarBallResult ball = cigar_from_two_carrots(g, hat_z, hat_w, Jp, 1e-6);
            row.radius = ball.radius;
            double lref = std::max(ball.split_len, 1e-12);
            row.radius_mismatch_rel = ball.radius_mismatch / lref;

            double half = 6.0 * pw->omega.R;
            GridSpec bspec = GridSpec::centered(half, 2.0 * half / 512.0);
            CellMask m_hz(bspec), m_hw(bspec), m_cx(bspec), m_cy(bspec), m_ball(bspec);
            fill_core_region(m_hz, g, hat_z, Jp, CarrotRegion::kCarrot, std::nullopt, true);
            fill_core_region(m_hw, g, hat_w, Jp, CarrotRegion::kCarrot, std::nullopt, true);
            fill_core_region(m_cx, g, ball.half_x, Jp, CarrotRegion::kCarrot, std::nullopt, true);
            fill_core_region(m_cy, g, ball.half_y, Jp, CarrotRegion::kCarrot, std::nullopt, true);
            for_each_gauge_ball_cell(g, ball.center, ball.radius, bspec,
                                     BallOrientation::kCenterMinusPoint,
                                     [&](int idx) { m_ball.set(idx); });

            std::string why;
            if (row.radius_mismatch_rel > 1e-6) why = "radius identity";
            if (why.empty() && m_ball.subset_violations(m_cx, 1) > 0) why = "ball outside car(gamma_z)";
            if (why.empty() && m_ball.subset_violations(m_cy, 1) > 0) why = "ball outside car(gamma_w)";
            CellMask m_union(bspec);
            for (int idx = 0; idx < bspec.size(); ++idx)
                if (m_hz.get(idx) || m_hw.get(idx)) m_union.set(idx);
            if (why.empty() && m_cx.subset_violations(m_union, 1) > 0) why = "half-carrot escapes the pair union";
            if (why.empty() && m_cy.subset_violations(m_union, 1) > 0) why = "half-carrot escapes the pair union";
            if (why.empty()) {
                long long out = 0;
                for (int j = 0; j < bspec.ny && out == 0; ++j)
                    for (int i = 0; i < bspec.nx && out == 0; ++i) {
                        int idx = bspec.index(i, j);
                        if (!m_union.get(idx)) continue;
                        if (!dec.in_W_infinity(slot, bspec.center(i, j))) ++out;
                    }
                if (out > 0) why = "carrot escapes W_infinity";
            }
            row.pass = why.empty();
            row.fail_reason = why;
        } catch (const std::exception& e) {
            row.pass = false;
            row.fail_reason = e.what();
        }
        if (row.pass) ++rep.boman_pass;
        else
            fail("boman pair " + std::to_string(pair_i) + ": " + row.fail_reason);
        rep.boman_rows.push_back(row);
    }

    return rep;
}

} // namespace johnkit

