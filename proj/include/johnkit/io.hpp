#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "johnkit/curve.hpp"
#include "johnkit/gauge.hpp"
#include "johnkit/grid.hpp"

namespace johnkit {

inline constexpr const char* kVersion = "johnkit 0.1.0";

// ---------------------------------------------------------------------------
// Deterministic JSON writing. Reports must be byte-identical across runs, so
// numbers are always formatted with %.9g and keys are emitted in the fixed
// order the writing code uses. nlohmann/json is used for parsing inputs only.
// ---------------------------------------------------------------------------

class JsonWriter {
public:
    std::string str() const { return buf_; }

    JsonWriter& begin_obj() {
        sep();
        buf_ += '{';
        stack_.push_back(0);
        return *this;
    }
    JsonWriter& end_obj() {
        buf_ += '}';
        stack_.pop_back();
        bump();
        return *this;
    }
    JsonWriter& begin_arr() {
        sep();
        buf_ += '[';
        stack_.push_back(0);
        return *this;
    }
    JsonWriter& end_arr() {
        buf_ += ']';
        stack_.pop_back();
        bump();
        return *this;
    }
    JsonWriter& key(const std::string& k) {
        sep();
        append_string(k);
        buf_ += ':';
        pending_key_ = true;
        return *this;
    }
    JsonWriter& str_value(const std::string& v) {
        sep();
        append_string(v);
        bump();
        return *this;
    }
    JsonWriter& num(double v) {
        sep();
        char tmp[40];
        std::snprintf(tmp, sizeof tmp, "%.9g", v);
        buf_ += tmp;
        bump();
        return *this;
    }
    JsonWriter& num(long long v) {
        sep();
        buf_ += std::to_string(v);
        bump();
        return *this;
    }
    JsonWriter& num(int v) { return num(static_cast<long long>(v)); }
    JsonWriter& boolean(bool v) {
        sep();
        buf_ += v ? "true" : "false";
        bump();
        return *this;
    }

private:
    void sep() {
        if (pending_key_) {
            pending_key_ = false;
            return;
        }
        if (!stack_.empty() && stack_.back() > 0) buf_ += ',';
    }
    void bump() {
        if (!stack_.empty()) ++stack_.back();
    }
    void append_string(const std::string& s) {
        buf_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': buf_ += "\\\""; break;
                case '\\': buf_ += "\\\\"; break;
                case '\n': buf_ += "\\n"; break;
                case '\t': buf_ += "\\t"; break;
                default: buf_ += c;
            }
        }
        buf_ += '"';
    }

    std::string buf_;
    std::vector<int> stack_;
    bool pending_key_ = false;
};

// ---------------------------------------------------------------------------
// Binary PGM (P5), 0 = complement, 255 = set. File row 0 is the top of the
// grid (largest j).
// ---------------------------------------------------------------------------

inline void write_pgm(const std::string& path, const GridSpec& spec,
                      const std::vector<std::uint8_t>& mask) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "pgm: cannot write " + path);
    f << "P5\n" << spec.nx << " " << spec.ny << "\n255\n";
    for (int j = spec.ny - 1; j >= 0; --j)
        for (int i = 0; i < spec.nx; ++i) {
            unsigned char byte = mask[static_cast<std::size_t>(spec.index(i, j))] ? 255 : 0;
            f.write(reinterpret_cast<const char*>(&byte), 1);
        }
}

inline std::vector<std::uint8_t> read_pgm(const std::string& path, int* nx, int* ny) {
    std::ifstream f(path, std::ios::binary);
    if (!f.good()) throw std::invalid_argument("pgm: cannot read " + path);
    std::string magic;
    f >> magic;
    require(magic == "P5", "pgm: only binary P5 supported");
    auto skip_ws_comments = [&]() {
        while (true) {
            int c = f.peek();
            if (c == EOF) break;
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else if (std::isspace(c)) {
                f.get();
            } else {
                break;
            }
        }
    };
    int w, h, maxval;
    skip_ws_comments();
    f >> w;
    skip_ws_comments();
    f >> h;
    skip_ws_comments();
    f >> maxval;
    f.get(); // single whitespace after maxval
    require(w >= 2 && h >= 2 && maxval > 0 && maxval < 256, "pgm: bad header");
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    require(f.gcount() == static_cast<std::streamsize>(raw.size()), "pgm: truncated data");
    // flip rows: file top = largest j
    std::vector<std::uint8_t> mask(raw.size());
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i)
            mask[static_cast<std::size_t>(j) * w + i] =
                raw[static_cast<std::size_t>(h - 1 - j) * w + i] ? 1 : 0;
    *nx = w;
    *ny = h;
    return mask;
}

// Domain from a PGM raster plus its JSON sidecar {"origin":[x,y],"spacing":h}.
inline GridDomain domain_from_pgm(const std::string& path) {
    int nx, ny;
    std::vector<std::uint8_t> mask = read_pgm(path, &nx, &ny);
    std::string sidecar = path;
    auto dotpos = sidecar.rfind('.');
    if (dotpos != std::string::npos) sidecar = sidecar.substr(0, dotpos);
    sidecar += ".json";
    std::ifstream f(sidecar);
    if (!f.good()) throw std::invalid_argument("domain: missing sidecar " + sidecar);
    nlohmann::json j = nlohmann::json::parse(f);
    Vec2 origin{j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
    double h = j.at("spacing").get<double>();
    return GridDomain(GridSpec(origin, h, nx, ny), std::move(mask));
}

// Even-odd point-in-polygon at cell centers.
inline bool point_in_ring(const std::vector<Vec2>& ring, const Vec2& p) {
    bool in = false;
    std::size_t n = ring.size();
    for (std::size_t i = 0, k = n - 1; i < n; k = i++) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[k];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xint) in = !in;
        }
    }
    return in;
}

// Domain from polygon JSON {"outer":[[x,y],...],"holes":[...],
// "origin":[x,y],"spacing":h,"extent":[nx,ny]}.
inline GridDomain domain_from_polygon_json(const std::string& path) {
    std::ifstream f(path);
    if (!f.good()) throw std::invalid_argument("domain: cannot read " + path);
    nlohmann::json j = nlohmann::json::parse(f);
    auto ring_of = [&](const nlohmann::json& arr) {
        std::vector<Vec2> ring;
        for (const auto& v : arr) ring.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        return ring;
    };
    std::vector<Vec2> outer = ring_of(j.at("outer"));
    std::vector<std::vector<Vec2>> holes;
    if (j.contains("holes"))
        for (const auto& hjs : j.at("holes")) holes.push_back(ring_of(hjs));
    Vec2 origin{j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
    double h = j.at("spacing").get<double>();
    int nx = j.at("extent").at(0).get<int>();
    int ny = j.at("extent").at(1).get<int>();
    GridSpec spec(origin, h, nx, ny);
    return GridDomain::from_predicate(spec, [&](const Vec2& p) {
        int crossings = point_in_ring(outer, p) ? 1 : 0;
        for (const auto& hole : holes)
            if (point_in_ring(hole, p)) ++crossings;
        return crossings % 2 == 1;
    });
}

inline GridDomain domain_from_file(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm") return domain_from_pgm(path);
    return domain_from_polygon_json(path);
}

// Gauge spec: preset name, or a JSON file {"vertices":[[x,y],...]}.
inline ConvexGauge gauge_from_spec(const std::string& spec) {
    if (spec.size() >= 5 && spec.substr(spec.size() - 5) == ".json") {
        std::ifstream f(spec);
        if (!f.good()) throw std::invalid_argument("gauge: cannot read " + spec);
        nlohmann::json j = nlohmann::json::parse(f);
        std::vector<Vec2> vs;
        for (const auto& v : j.at("vertices")) vs.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        return ConvexGauge(std::move(vs), spec);
    }
    return gauge_from_name(spec);
}

inline Polyline curve_from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f.good()) throw std::invalid_argument("curve: cannot read " + path);
    nlohmann::json j = nlohmann::json::parse(f);
    std::vector<Vec2> vs;
    for (const auto& v : j.at("vertices")) vs.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    bool toinf = j.value("toward_infinity", false);
    Polyline p(std::move(vs));
    p.toward_infinity = toinf;
    return p;
}

// ---------------------------------------------------------------------------
// Minimal TOML subset: [sections], key = value with strings, numbers,
// booleans and flat arrays. Keys are exposed as "section.key".
// ---------------------------------------------------------------------------

struct TomlValue {
    enum Kind { kString, kNumber, kBool, kArray } kind = kNumber;
    std::string s;
    double d = 0.0;
    bool b = false;
    std::vector<TomlValue> arr;
};

class Toml {
public:
    static Toml parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f.good()) throw std::invalid_argument("toml: cannot read " + path);
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

    static Toml parse(const std::string& text) {
        Toml t;
        std::string section;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[') {
                auto end = s.find(']');
                require(end != std::string::npos, "toml: bad section at line " + std::to_string(lineno));
                section = strip(s.substr(1, end - 1));
                continue;
            }
            auto eq = s.find('=');
            require(eq != std::string::npos, "toml: expected key = value at line " + std::to_string(lineno));
            std::string key = strip(s.substr(0, eq));
            std::string val = strip(s.substr(eq + 1));
            std::string full = section.empty() ? key : section + "." + key;
            t.values_[full] = parse_value(val, lineno);
        }
        return t;
    }

    bool has(const std::string& k) const { return values_.count(k) > 0; }

    std::string get_string(const std::string& k, const std::string& dflt = "") const {
        auto it = values_.find(k);
        if (it == values_.end()) return dflt;
        require(it->second.kind == TomlValue::kString, "toml: " + k + " is not a string");
        return it->second.s;
    }
    double get_number(const std::string& k, double dflt) const {
        auto it = values_.find(k);
        if (it == values_.end()) return dflt;
        require(it->second.kind == TomlValue::kNumber, "toml: " + k + " is not a number");
        return it->second.d;
    }
    bool get_bool(const std::string& k, bool dflt) const {
        auto it = values_.find(k);
        if (it == values_.end()) return dflt;
        require(it->second.kind == TomlValue::kBool, "toml: " + k + " is not a bool");
        return it->second.b;
    }
    std::vector<double> get_number_array(const std::string& k, std::vector<double> dflt = {}) const {
        auto it = values_.find(k);
        if (it == values_.end()) return dflt;
        require(it->second.kind == TomlValue::kArray, "toml: " + k + " is not an array");
        std::vector<double> out;
        for (const TomlValue& v : it->second.arr) {
            require(v.kind == TomlValue::kNumber, "toml: " + k + " holds a non-number");
            out.push_back(v.d);
        }
        return out;
    }

private:
    static std::string strip(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r");
        std::string core = s.substr(a, b - a + 1);
        // trailing comment outside quotes
        bool in_quote = false;
        for (std::size_t i = 0; i < core.size(); ++i) {
            if (core[i] == '"') in_quote = !in_quote;
            if (core[i] == '#' && !in_quote) {
                core = core.substr(0, i);
                break;
            }
        }
        b = core.find_last_not_of(" \t\r");
        return b == std::string::npos ? "" : core.substr(0, b + 1);
    }

    static TomlValue parse_value(const std::string& v, int lineno) {
        TomlValue out;
        require(!v.empty(), "toml: empty value at line " + std::to_string(lineno));
        if (v.front() == '"') {
            require(v.size() >= 2 && v.back() == '"', "toml: unterminated string at line " + std::to_string(lineno));
            out.kind = TomlValue::kString;
            out.s = v.substr(1, v.size() - 2);
            return out;
        }
        if (v == "true" || v == "false") {
            out.kind = TomlValue::kBool;
            out.b = v == "true";
            return out;
        }
        if (v.front() == '[') {
            require(v.back() == ']', "toml: unterminated array at line " + std::to_string(lineno));
            out.kind = TomlValue::kArray;
            std::string inner = v.substr(1, v.size() - 2);
            std::string cur;
            int depth = 0;
            for (char c : inner) {
                if (c == '[') ++depth;
                if (c == ']') --depth;
                if (c == ',' && depth == 0) {
                    std::string item = strip(cur);
                    if (!item.empty()) out.arr.push_back(parse_value(item, lineno));
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            std::string item = strip(cur);
            if (!item.empty()) out.arr.push_back(parse_value(item, lineno));
            return out;
        }
        out.kind = TomlValue::kNumber;
        try {
            std::size_t used = 0;
            out.d = std::stod(v, &used);
            require(used == v.size(), "toml: bad number at line " + std::to_string(lineno));
        } catch (const std::exception&) {
            throw std::invalid_argument("toml: bad number '" + v + "' at line " + std::to_string(lineno));
        }
        return out;
    }

    std::map<std::string, TomlValue> values_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "cannot write " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

} // namespace johnkit
