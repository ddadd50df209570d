#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "johnkit/io.hpp"

using namespace johnkit;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(JOHNKIT_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TmpDir {
    std::string path;
    explicit TmpDir(const std::string& name) : path("/tmp/johnkit_cli_" + name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
};

void write_disk_domain(const std::string& stem, double h, double R) {
    GridSpec spec = GridSpec::centered(R + 4 * h, h);
    GridDomain dom = disk_domain(spec, {0, 0}, R);
    write_pgm(stem + ".pgm", spec, dom.mask());
    char side[128];
    std::snprintf(side, sizeof side, "{\"origin\":[%.17g,%.17g],\"spacing\":%.17g}", spec.origin.x,
                  spec.origin.y, h);
    write_text_file(stem + ".json", side);
}

} // namespace

TEST_CASE("cli: gauge-info") {
    REQUIRE(run("--gauge euclidean:32 gauge-info") == 0);
    REQUIRE(run("--gauge bogus gauge-info") == 2);
}

TEST_CASE("cli: john on a disk domain") {
    TmpDir dir("john");
    write_disk_domain(dir.path + "/disk", 1.0 / 24, 1.0);
    REQUIRE(run("--gauge euclidean:64 --out " + dir.path + " john --domain " + dir.path +
                "/disk.pgm --tol 1e-3 --neighborhood 16") == 0);
    std::string rep = slurp(dir.path + "/john.json");
    REQUIRE(rep.find("\"command\":\"john\"") != std::string::npos);
    REQUIRE(rep.find("\"value\":") != std::string::npos);

    // missing input file
    REQUIRE(run("john --domain " + dir.path + "/nothere.pgm") == 2);
}

TEST_CASE("cli: john-point") {
    TmpDir dir("jp");
    write_disk_domain(dir.path + "/disk", 1.0 / 16, 1.0);
    // center cell index of the generated grid
    GridDomain dom = domain_from_pgm(dir.path + "/disk.pgm");
    int ci, cj, xi, xj;
    dom.spec().cell_of({0, 0}, &ci, &cj);
    dom.spec().cell_of({0.5, 0}, &xi, &xj);
    std::ostringstream cmd;
    cmd << "--out " << dir.path << " john-point --domain " << dir.path << "/disk.pgm --x " << xi
        << " --y " << xj << " --x0 " << ci << " --y0 " << cj << " --tol 1e-4";
    REQUIRE(run(cmd.str()) == 0);
    REQUIRE(slurp(dir.path + "/john_point.json").find("\"witness\":") != std::string::npos);
}

TEST_CASE("cli: disconnected domain exits 3") {
    TmpDir dir("disc");
    GridSpec spec({0, 0}, 0.25, 12, 8);
    GridDomain dom = GridDomain::from_predicate(spec, [](const Vec2& p) {
        return (p.x > 0.2 && p.x < 0.8 && p.y > 0.2 && p.y < 1.6) ||
               (p.x > 1.9 && p.x < 2.6 && p.y > 0.2 && p.y < 1.6);
    });
    write_pgm(dir.path + "/two.pgm", spec, dom.mask());
    write_text_file(dir.path + "/two.json", "{\"origin\":[0,0],\"spacing\":0.25}");
    REQUIRE(run("--out " + dir.path + " john --domain " + dir.path + "/two.pgm") == 3);
}

TEST_CASE("cli: lsc scenario, determinism byte-for-byte") {
    TmpDir dir("lsc");
    write_text_file(dir.path + "/scen.toml", R"([scenario]
name = "constant"
generator = "constant_disk"
k_min = 1
k_max = 2
h = 0.03125
window = 1.2
gauge = "euclidean:64"
neighborhood = 16
limit = "disk"
)");
    REQUIRE(run("--out " + dir.path + "/a --seed 7 lsc --scenario " + dir.path + "/scen.toml") == 0);
    REQUIRE(run("--out " + dir.path + "/b --seed 7 lsc --scenario " + dir.path + "/scen.toml") == 0);
    REQUIRE(slurp(dir.path + "/a/lsc.json") == slurp(dir.path + "/b/lsc.json"));
    REQUIRE(slurp(dir.path + "/a/lsc.csv") == slurp(dir.path + "/b/lsc.csv"));
    REQUIRE(slurp(dir.path + "/a/lsc.json").find("\"lsc_ok\":true") != std::string::npos);

    write_text_file(dir.path + "/bad.toml", "[scenario\nname oops");
    REQUIRE(run("lsc --scenario " + dir.path + "/bad.toml") == 2);
    REQUIRE(run("lsc --scenario " + dir.path + "/missing.toml") == 2);
}

TEST_CASE("cli: decompose point scene, masks and determinism") {
    TmpDir dir("dec");
    write_text_file(dir.path + "/scene.toml", R"([scene]
name = "point"
k_source = "point"
h = 0.125
window = 6.5
schedule = [1.0, 2.0]
sample_width = 16
boman_pairs = 5
seed = 3
)");
    REQUIRE(run("--out " + dir.path + "/a decompose --scene " + dir.path + "/scene.toml") == 0);
    REQUIRE(run("--out " + dir.path + "/b decompose --scene " + dir.path + "/scene.toml") == 0);
    REQUIRE(slurp(dir.path + "/a/decomposition.json") == slurp(dir.path + "/b/decomposition.json"));
    REQUIRE(slurp(dir.path + "/a/volume_ratios.csv") == slurp(dir.path + "/b/volume_ratios.csv"));
    REQUIRE(std::filesystem::exists(dir.path + "/a/W_0_R1.pgm"));
    REQUIRE(std::filesystem::exists(dir.path + "/a/W_0_R2.pgm"));
    REQUIRE(slurp(dir.path + "/a/decomposition.json").find("\"pass\":true") != std::string::npos);

    // verify writes the report but not the masks
    REQUIRE(run("--out " + dir.path + "/v verify --scene " + dir.path + "/scene.toml") == 0);
    REQUIRE(std::filesystem::exists(dir.path + "/v/decomposition.json"));
    REQUIRE_FALSE(std::filesystem::exists(dir.path + "/v/W_0_R1.pgm"));
}

TEST_CASE("cli: scene with too small a window exits 5") {
    TmpDir dir("trunc");
    write_text_file(dir.path + "/scene.toml", R"([scene]
name = "point"
k_source = "point"
h = 0.125
window = 2.0
schedule = [1.0]
)");
    REQUIRE(run("decompose --scene " + dir.path + "/scene.toml") == 5);
}
