// johnkit command-line front-end: wires domains, scenarios and scenes into
// reproducible experiment runs with machine-readable reports.
//
// Exit codes: 0 ok, 2 invalid input, 3 disconnected domain,
//             4 verification/assertion failure, 5 truncation too small.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "johnkit/decompose.hpp"
#include "johnkit/gauge.hpp"
#include "johnkit/grid.hpp"
#include "johnkit/io.hpp"
#include "johnkit/john.hpp"
#include "johnkit/limits.hpp"

using namespace johnkit;

namespace {

struct GlobalOpts {
    std::string gauge = "euclidean:64";
    std::string out = ".";
    std::uint64_t seed = 1;
    int threads = 0; // 0: decide from JOHNKIT_THREADS / hardware; recorded only
};

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("JOHNKIT_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

void write_config(JsonWriter& w, const GlobalOpts& g, double tol, int neighborhood) {
    w.key("config").begin_obj();
    w.key("gauge").str_value(g.gauge);
    w.key("neighborhood").num(neighborhood);
    w.key("seed").num(static_cast<long long>(g.seed));
    w.key("threads").num(resolve_threads(g.threads));
    w.key("tol_J").num(tol);
    w.end_obj();
}

Neighborhood::Kind kind_of(int n) {
    require(n == 8 || n == 16, "neighborhood must be 8 or 16");
    return n == 8 ? Neighborhood::kEight : Neighborhood::kSixteen;
}

int cmd_john(const GlobalOpts& g, const std::string& domain_path, double tol, int neighborhood,
             bool point_mode, int xi, int xj, int x0i, int x0j) {
    GridDomain dom;
    ConvexGauge gauge = ConvexGauge::euclidean();
    try {
        dom = domain_from_file(domain_path);
        gauge = gauge_from_spec(g.gauge);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    Neighborhood::Kind kind = kind_of(neighborhood);
    try {
        dom.ensure_distance(gauge);
        JsonWriter w;
        w.begin_obj();
        w.key("command").str_value(point_mode ? "john-point" : "john");
        w.key("version").str_value(kVersion);
        write_config(w, g, tol, neighborhood);
        const GridSpec& spec = dom.spec();

        JohnCertificate cert;
        if (point_mode) {
            require(spec.in_bounds(xi, xj) && spec.in_bounds(x0i, x0j), "cell out of bounds");
            cert = john_point(dom, gauge, spec.index(xi, xj), spec.index(x0i, x0j), tol, kind);
            w.key("value").num(cert.value);
            w.key("center").begin_arr().num(x0i).num(x0j).end_arr();
            std::cout << "J(x, Omega; x0) = " << cert.value << "\n";
        } else {
            OptimalJohnResult res = optimal_john(dom, gauge, tol, kind);
            cert = john_point(dom, gauge, res.worst_x, res.center, tol, kind);
            w.key("value").num(res.value);
            w.key("center").begin_arr().num(spec.ix(res.center)).num(spec.iy(res.center)).end_arr();
            w.key("worst_x").begin_arr().num(spec.ix(res.worst_x)).num(spec.iy(res.worst_x)).end_arr();
            w.key("r0").num(res.r0);
            w.key("inradius").num(res.inradius);
            std::cout << "John(Omega) = " << res.value << " center = (" << spec.ix(res.center)
                      << ", " << spec.iy(res.center) << ")\n";
        }
        w.key("witness").begin_arr();
        for (const Vec2& v : cert.witness.vertices) {
            int i, j;
            spec.cell_of(v, &i, &j);
            w.begin_arr().num(i).num(j).end_arr();
        }
        w.end_arr();
        w.key("profile").begin_arr();
        for (const ProfilePoint& p : cert.per_vertex)
            w.begin_arr().num(p.cum_len).num(p.dist).num(p.ratio).end_arr();
        w.end_arr();
        w.key("params").begin_obj();
        w.key("tol_J").num(tol);
        w.key("neighborhood").num(neighborhood);
        w.key("h").num(spec.h);
        w.end_obj();
        w.end_obj();
        std::filesystem::create_directories(g.out);
        write_text_file(g.out + (point_mode ? "/john_point.json" : "/john.json"), w.str());
        return 0;
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        std::cerr << "error: " << msg << "\n";
        if (msg.find("not connected") != std::string::npos) return 3;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_lsc(const GlobalOpts& g, const std::string& scenario_path) {
    SequenceScenario sc;
    std::string limit_kind;
    try {
        Toml t = Toml::parse_file(scenario_path);
        sc.name = t.get_string("scenario.name", "scenario");
        double h = t.get_number("scenario.h", 1.0 / 64);
        double window = t.get_number("scenario.window", 1.1);
        sc.spec = GridSpec::centered(window, h);
        sc.k_min = static_cast<int>(t.get_number("scenario.k_min", 1));
        sc.k_max = static_cast<int>(t.get_number("scenario.k_max", 4));
        sc.tol = t.get_number("scenario.tol", 0.1);
        sc.tol_J = t.get_number("scenario.tol_j", 2e-3);
        sc.kind = kind_of(static_cast<int>(t.get_number("scenario.neighborhood", 16)));
        sc.gauge = gauge_from_spec(t.get_string("scenario.gauge", g.gauge));
        limit_kind = t.get_string("scenario.limit", "limsup");
        std::string gen = t.get_string("scenario.generator", "slit_disk");
        GridSpec spec = sc.spec;
        if (gen == "slit_disk") {
            sc.generator = [spec](int k) { return slit_disk(k, spec); };
        } else if (gen == "constant_disk") {
            sc.generator = [spec](int) { return disk_domain(spec); };
        } else if (gen == "shrinking_bump") {
            sc.generator = [spec](int k) {
                double r = 1.0 / k;
                return GridDomain::from_predicate(spec, [&](const Vec2& p) {
                    return norm(p) < 1.0 || norm(p - Vec2{1.0, 0.0}) < r;
                });
            };
        } else {
            throw std::invalid_argument("unknown generator: " + gen);
        }
        if (limit_kind == "disk") sc.limit_hint = disk_domain(spec);
        require(sc.k_min <= sc.k_max, "k range empty");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        LscReport rep = lsc_experiment(sc);
        std::filesystem::create_directories(g.out);

        std::string csv = "k,john,dh_to_limit\n";
        for (const LscRow& r : rep.rows) {
            char line[96];
            std::snprintf(line, sizeof line, "%d,%.9g,%.9g\n", r.k, r.john, r.dh_to_limit);
            csv += line;
        }
        write_text_file(g.out + "/lsc.csv", csv);

        JsonWriter w;
        w.begin_obj();
        w.key("command").str_value("lsc");
        w.key("version").str_value(kVersion);
        write_config(w, g, sc.tol_J, sc.kind == Neighborhood::kEight ? 8 : 16);
        w.key("scenario").str_value(sc.name);
        w.key("limit_mode").str_value(limit_kind);
        w.key("rows").begin_arr();
        for (const LscRow& r : rep.rows)
            w.begin_obj().key("k").num(r.k).key("john").num(r.john).key("dh").num(r.dh_to_limit).end_obj();
        w.end_arr();
        w.key("john_limit").num(rep.john_limit);
        w.key("min_john").num(rep.min_john);
        w.key("gap").num(rep.gap);
        w.key("inradius_limit").num(rep.inradius_limit);
        w.key("dh_limsup_vs_limit").num(rep.dh_limsup_vs_limit);
        w.key("dh_monotone").boolean(rep.dh_monotone);
        w.key("limit_connected").boolean(rep.limit_connected);
        w.key("limit_components").num(rep.limit_components);
        w.key("lsc_ok").boolean(rep.lsc_ok);
        w.key("note").str_value(rep.note);
        w.end_obj();
        write_text_file(g.out + "/lsc.json", w.str());

        std::cout << "lsc " << sc.name << ": John(limit) = " << rep.john_limit
                  << " min_k John = " << rep.min_john << " gap = " << rep.gap
                  << (rep.lsc_ok ? " [ok]" : " [FAIL]") << "\n";
        return rep.lsc_ok ? 0 : 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

std::vector<std::uint8_t> k_mask_from_source(const std::string& source, const GridSpec& spec) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(spec.size()), 0);
    auto mark_point = [&](const Vec2& p) {
        int i, j;
        spec.cell_of(p, &i, &j);
        if (spec.in_bounds(i, j)) mask[static_cast<std::size_t>(spec.index(i, j))] = 1;
    };
    if (source == "point") {
        mark_point({0, 0});
    } else if (source == "halflines") {
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                Vec2 p = spec.center(i, j);
                if (std::abs(p.y) <= spec.h / 2.0 + 1e-12 && std::abs(p.x) >= 1.0)
                    mask[static_cast<std::size_t>(spec.index(i, j))] = 1;
            }
    } else if (source == "spiral") {
        double theta = 0.0;
        const double tmax = 6.0 * M_PI;
        while (theta <= tmax) {
            double r = 0.25 + 0.5 * theta / (2.0 * M_PI);
            mark_point({r * std::cos(theta), r * std::sin(theta)});
            theta += spec.h / (2.0 * std::max(0.25, r));
        }
        mark_point({0, 0});
    } else if (source.rfind("pgm:", 0) == 0) {
        int nx, ny;
        std::vector<std::uint8_t> m = read_pgm(source.substr(4), &nx, &ny);
        require(nx == spec.nx && ny == spec.ny, "scene: K raster does not match the window grid");
        mask = std::move(m);
    } else if (source.rfind("polylines:", 0) == 0) {
        std::ifstream f(source.substr(10));
        require(f.good(), "scene: cannot read " + source.substr(10));
        nlohmann::json j = nlohmann::json::parse(f);
        for (const auto& pl : j.at("polylines")) {
            std::vector<Vec2> vs;
            for (const auto& v : pl) vs.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
            for (std::size_t s = 0; s + 1 < vs.size(); ++s) {
                double len = norm(vs[s + 1] - vs[s]);
                int steps = std::max(1, static_cast<int>(std::ceil(len / (spec.h / 2.0))));
                for (int q = 0; q <= steps; ++q)
                    mark_point(vs[s] + (static_cast<double>(q) / steps) * (vs[s + 1] - vs[s]));
            }
        }
    } else {
        throw std::invalid_argument("unknown K source: " + source);
    }
    return mask;
}

int cmd_decompose(const GlobalOpts& g, const std::string& scene_path, bool export_masks) {
    std::string name;
    GridSpec spec;
    std::vector<std::uint8_t> kmask;
    SceneConfig cfg;
    try {
        Toml t = Toml::parse_file(scene_path);
        name = t.get_string("scene.name", "scene");
        double h = t.get_number("scene.h", 1.0 / 64);
        cfg.window_radius = t.get_number("scene.window", 13.0);
        cfg.schedule = t.get_number_array("scene.schedule", {1, 2, 4, 8});
        cfg.J_supplied = t.get_number("scene.j", -1.0);
        cfg.sample_width = static_cast<int>(t.get_number("scene.sample_width", 40));
        cfg.nhat = static_cast<int>(t.get_number("scene.nhat", 8));
        cfg.overlap_bound = static_cast<int>(t.get_number("scene.overlap_bound", 8));
        cfg.seed = static_cast<std::uint64_t>(t.get_number("scene.seed", static_cast<double>(g.seed)));
        cfg.boman_pairs = static_cast<int>(t.get_number("scene.boman_pairs", 50));
        cfg.subgrid_cells = static_cast<int>(t.get_number("scene.subgrid", 768));
        std::vector<double> band = t.get_number_array("scene.volume_band", {0.05, 120.0});
        require(band.size() == 2, "volume_band needs [lo, hi]");
        cfg.volume_band_lo = band[0];
        cfg.volume_band_hi = band[1];
        cfg.overlap_ratio_lo = t.get_number("scene.overlap_ratio_lo", 0.005);
        spec = GridSpec::centered(cfg.window_radius, h);
        kmask = k_mask_from_source(t.get_string("scene.k_source", "point"), spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        ObstacleScene scene(spec, std::move(kmask), cfg);
        CoverDecomposition dec = build_W(scene);
        DecompositionReport rep = verify_decomposition(scene, dec);
        std::filesystem::create_directories(g.out);

        if (export_masks) {
            for (const WPiece& p : dec.pieces) {
                char fname[128];
                std::snprintf(fname, sizeof fname, "%s/W_%d_R%g.pgm", g.out.c_str(), p.slot,
                              dec.schedule[static_cast<std::size_t>(p.schedule_index)]);
                write_pgm(fname, p.omega.wspec, p.omega.mask.bits);
            }
        }

        std::string csv = "slot,R,volume_ratio\n";
        for (const VolumeRow& r : rep.volume_rows) {
            char line[96];
            std::snprintf(line, sizeof line, "%d,%.9g,%.9g\n", r.slot, r.R, r.ratio);
            csv += line;
        }
        write_text_file(g.out + "/volume_ratios.csv", csv);

        JsonWriter w;
        w.begin_obj();
        w.key("command").str_value(export_masks ? "decompose" : "verify");
        w.key("version").str_value(kVersion);
        write_config(w, g, cfg.tol_J_escape, 8);
        w.key("scene").str_value(name);
        w.key("J_achieved").num(rep.J_eff);
        w.key("J_supplied").num(cfg.J_supplied);
        w.key("C1_max").num(rep.C1_max);
        w.key("Jp").num(rep.Jp_global);
        w.key("n_families").num(rep.n_permanent);
        w.key("n_slots").num(rep.n_slots);
        w.key("multiplicity").num(rep.multiplicity_max);
        w.key("overlap_rate").num(rep.overlap_rate_max);
        w.key("cover_violations").num(rep.cover_violations);
        w.key("boman_pass").num(rep.boman_pass);
        w.key("boman_total").num(static_cast<long long>(rep.boman_rows.size()));
        w.key("volume_rows").begin_arr();
        for (const VolumeRow& r : rep.volume_rows)
            w.begin_obj().key("slot").num(r.slot).key("R").num(r.R).key("ratio").num(r.ratio).end_obj();
        w.end_arr();
        w.key("overlap_rows").begin_arr();
        for (const OverlapRow& r : rep.overlap_rows)
            w.begin_obj().key("slot").num(r.slot).key("R").num(r.R).key("ratio").num(r.ratio).end_obj();
        w.end_arr();
        w.key("failures").begin_arr();
        for (const std::string& fmsg : rep.failures) w.str_value(fmsg);
        w.end_arr();
        w.key("pass").boolean(rep.pass());
        w.end_obj();
        write_text_file(g.out + "/decomposition.json", w.str());

        std::cout << "decompose " << name << ": N = " << rep.n_permanent << " (slots " << rep.n_slots
                  << "), J = " << rep.J_eff << ", boman " << rep.boman_pass << "/"
                  << rep.boman_rows.size() << (rep.pass() ? " [ok]" : " [FAIL]") << "\n";
        for (const std::string& fmsg : rep.failures) std::cout << "  failure: " << fmsg << "\n";
        return rep.pass() ? 0 : 4;
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        std::cerr << "error: " << msg << "\n";
        if (msg.find("increase R_max") != std::string::npos) return 5;
        if (msg.find("no escape in window") != std::string::npos) return 5;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_gauge_info(const GlobalOpts& g) {
    try {
        ConvexGauge gauge = gauge_from_spec(g.gauge);
        JsonWriter w;
        w.begin_obj();
        w.key("command").str_value("gauge-info");
        w.key("version").str_value(kVersion);
        w.key("name").str_value(gauge.name());
        w.key("euclidean_exact").boolean(gauge.is_euclidean());
        w.key("vertices").num(static_cast<long long>(gauge.body_vertices().size()));
        w.key("asymmetry_constant").num(gauge.asymmetry_constant());
        w.key("rho_min").num(gauge.rho_min());
        w.key("rho_max").num(gauge.rho_max());
        w.end_obj();
        std::cout << w.str() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"John constants, Hausdorff-limit experiments and carrot-John cover decompositions"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--gauge", g.gauge, "gauge preset or JSON file");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--seed", g.seed, "seed for sampled verifications");
    app.add_option("--threads", g.threads, "worker threads (env JOHNKIT_THREADS)");

    std::string domain_path, scenario_path, scene_path;
    double tol = 1e-3;
    int neighborhood = 8;
    int xi = 0, xj = 0, x0i = 0, x0j = 0;

    CLI::App* john = app.add_subcommand("john", "optimal John constant of a domain");
    john->add_option("--domain", domain_path, "PGM or polygon JSON")->required();
    john->add_option("--tol", tol, "binary search tolerance");
    john->add_option("--neighborhood", neighborhood, "8 or 16");

    CLI::App* jp = app.add_subcommand("john-point", "J(x, Omega; x0) with witness");
    jp->add_option("--domain", domain_path)->required();
    jp->add_option("--tol", tol);
    jp->add_option("--neighborhood", neighborhood);
    jp->add_option("--x", xi)->required();
    jp->add_option("--y", xj)->required();
    jp->add_option("--x0", x0i)->required();
    jp->add_option("--y0", x0j)->required();

    CLI::App* lsc = app.add_subcommand("lsc", "lower-semicontinuity experiment");
    lsc->add_option("--scenario", scenario_path, "scenario TOML")->required();

    CLI::App* dec = app.add_subcommand("decompose", "cover decomposition of a scene");
    dec->add_option("--scene", scene_path, "scene TOML")->required();

    CLI::App* ver = app.add_subcommand("verify", "verification only, no mask export");
    ver->add_option("--scene", scene_path, "scene TOML")->required();

    app.add_subcommand("gauge-info", "print gauge characteristics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (john->parsed()) return cmd_john(g, domain_path, tol, neighborhood, false, 0, 0, 0, 0);
    if (jp->parsed()) return cmd_john(g, domain_path, tol, neighborhood, true, xi, xj, x0i, x0j);
    if (lsc->parsed()) return cmd_lsc(g, scenario_path);
    if (dec->parsed()) return cmd_decompose(g, scene_path, true);
    if (ver->parsed()) return cmd_decompose(g, scene_path, false);
    return cmd_gauge_info(g);
}
