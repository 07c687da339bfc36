#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "boundary.hpp"
#include "filter.hpp"

namespace pdisorder {

using json = nlohmann::json;

// std::stod with the library's error type.
inline auto parse_double(const std::string& text, const char* code) -> double {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (text.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(text);
        return v;
    } catch (const std::logic_error&) {
        throw Error(code, "not a number: '" + text + "'");
    }
}

// Shortest decimal that parses back to the same double.
inline auto fmt_double(double v) -> std::string {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline auto fnv1a64(const std::string& s) -> std::string {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw Error("BAD_CONFIG", where + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw Error("UNKNOWN_KEY", "unknown key '" + key + "' in " + where);
    }
}

inline auto params_to_json(const ModelParams& p) -> json {
    return {{"lambda", p.lambda}, {"mu", p.mu}, {"c", p.c}, {"m", p.m}, {"pi", p.pi}};
}

inline auto params_from_json(const json& j) -> ModelParams {
    reject_unknown_keys(j, {"lambda", "mu", "c", "m", "pi"}, "params");
    ModelParams p;
    auto get = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number()) throw Error("MISSING_KEY", std::string("params.") + key + " must be a number");
        return j.at(key).get<double>();
    };
    p.lambda = get("lambda");
    p.mu = get("mu");
    p.c = get("c");
    p.m = get("m");
    p.pi = get("pi");
    return validate(p);
}

inline auto spec_to_json(const GridSpec& s) -> json {
    return {{"x_max", s.x_max}, {"y_max", s.y_max}, {"nx", s.nx}, {"ny", s.ny}, {"dt_quad", s.dt_quad}};
}

inline auto spec_from_json(const json& j) -> GridSpec {
    return {j.at("x_max").get<double>(), j.at("y_max").get<double>(), j.at("nx").get<int>(), j.at("ny").get<int>(),
            j.at("dt_quad").get<double>()};
}

// Content hash of everything that determines a solved grid.
inline auto solve_hash(const ModelParams& p, const GridSpec& s, double epsilon) -> std::string {
    json key{{"params", params_to_json(p)}, {"grid", spec_to_json(s)}, {"epsilon", epsilon}};
    return fnv1a64(key.dump());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
    out << text;
}

inline auto read_text(const std::filesystem::path& path) -> std::string {
    std::ifstream in(path);
    if (!in) throw Error("MISSING_ARTIFACT", "cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_grid_csv(const std::filesystem::path& path, const ValueGrid& g) {
    std::string text = "x,y,v\n";
    text.reserve(g.values().size() * 40);
    for (int i = 0; i < g.spec().nx; ++i)
        for (int j = 0; j < g.spec().ny; ++j)
            text += fmt_double(g.x(i)) + ',' + fmt_double(g.y(j)) + ',' + fmt_double(g.at(i, j)) + '\n';
    write_text(path, text);
}

// Grid cache: <stem>.json sidecar plus <stem>.csv values.
struct GridCache {
    std::filesystem::path dir;
    std::string hash;

    [[nodiscard]] auto sidecar() const -> std::filesystem::path { return dir / ("grid_" + hash + ".json"); }
    [[nodiscard]] auto values() const -> std::filesystem::path { return dir / ("grid_" + hash + ".csv"); }
    [[nodiscard]] auto exists() const -> bool {
        return std::filesystem::exists(sidecar()) && std::filesystem::exists(values());
    }
};

inline void write_grid_cache(const GridCache& cache, const ValueGrid& g, double epsilon, const json& report) {
    json side{{"format", "pdisorder-grid-v1"},
              {"hash", cache.hash},
              {"params", params_to_json(g.params())},
              {"grid", spec_to_json(g.spec())},
              {"epsilon", epsilon},
              {"n_iter", g.n_iter()},
              {"sup_diff_history", g.sup_diff_history()},
              {"report", report}};
    write_grid_csv(cache.values(), g);
    write_text(cache.sidecar(), side.dump(2) + "\n");
}

inline auto read_grid_cache(const GridCache& cache) -> std::pair<ValueGrid, json> {
    if (!cache.exists()) throw Error("MISSING_ARTIFACT", "no grid cache for hash " + cache.hash);
    json side = json::parse(read_text(cache.sidecar()));
    auto params = params_from_json(side.at("params"));
    auto spec = spec_from_json(side.at("grid"));
    double epsilon = side.at("epsilon").get<double>();
    if (side.at("hash").get<std::string>() != cache.hash || solve_hash(params, spec, epsilon) != cache.hash)
        throw Error("CACHE_MISMATCH", "grid cache content does not match its hash");
    std::ifstream in(cache.values());
    std::string line;
    std::getline(in, line);
    if (line != "x,y,v") throw Error("CACHE_MISMATCH", "unexpected grid csv header");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(spec.nx) * spec.ny);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto pos = line.rfind(',');
        values.push_back(parse_double(line.substr(pos + 1), "CACHE_MISMATCH"));
    }
    Model model(params);
    ValueGrid g(model, spec, std::move(values), side.at("n_iter").get<int>(),
                side.at("sup_diff_history").get<std::vector<double>>());
    return {std::move(g), side};
}

inline void write_boundary_csv(const std::filesystem::path& path, const BoundaryCurve& c,
                               const std::vector<char>& classes = {}) {
    std::string text = "x,gamma,classification\n";
    for (std::size_t k = 0; k < c.xs.size(); ++k) {
        text += fmt_double(c.xs[k]) + ',' + fmt_double(c.ys[k]) + ',';
        if (k < classes.size() && classes[k] != 0) text += classes[k];
        text += '\n';
    }
    write_text(path, text);
}

inline auto read_boundary_csv(const std::filesystem::path& path) -> BoundaryCurve {
    std::istringstream in(read_text(path));
    std::string line;
    std::getline(in, line);
    if (line.rfind("x,gamma", 0) != 0) throw Error("BAD_ARTIFACT", "unexpected boundary csv header");
    BoundaryCurve c;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto p1 = line.find(',');
        auto p2 = line.find(',', p1 + 1);
        if (p1 == std::string::npos) throw Error("BAD_ARTIFACT", "malformed boundary csv row");
        c.xs.push_back(parse_double(line.substr(0, p1), "BAD_ARTIFACT"));
        c.ys.push_back(parse_double(line.substr(p1 + 1, p2 == std::string::npos ? std::string::npos : p2 - p1 - 1),
                                    "BAD_ARTIFACT"));
    }
    if (c.xs.empty()) throw Error("BAD_ARTIFACT", "empty boundary csv");
    c.xi = c.xs.back();
    for (std::size_t k = 0; k < c.xs.size(); ++k)
        if (c.ys[k] <= 0.0) {
            c.xi = c.xs[k];
            c.xs.resize(k + 1);
            c.ys.resize(k + 1);
            break;
        }
    c.degenerate = c.xi == 0.0;
    return c;
}

// One nonnegative ascending time per line.
inline auto read_event_times(const std::filesystem::path& path) -> std::vector<double> {
    std::istringstream in(read_text(path));
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        double v = parse_double(line, "BAD_EVENTS");
        if (!(v >= 0.0) || (!out.empty() && v < out.back()))
            throw Error("BAD_EVENTS", "event times must be nonnegative and ascending");
        out.push_back(v);
    }
    return out;
}

inline auto prior_from_json(const json& j) -> AtomPrior {
    reject_unknown_keys(j, {"atoms", "weights"}, "prior");
    AtomPrior p{j.at("atoms").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>()};
    validate(p);
    return p;
}

}  // namespace pdisorder
