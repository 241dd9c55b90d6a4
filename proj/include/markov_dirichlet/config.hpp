#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "conditions.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "kernel.hpp"

namespace mdir {

/// Named boundary data: constant c, cos-k-theta, coordinate-x,
/// coordinate-y, indicator b, from-file.
struct BoundaryPreset {
    enum class Kind { constant, cos_k_theta, coordinate_x, coordinate_y, indicator, from_file };
    Kind kind = Kind::cos_k_theta;
    Complex value{1.0};
    int k = 1;
    std::optional<Index> id; // indicator point; empty picks the first boundary id
    std::filesystem::path file;

    std::string name() const {
        switch (kind) {
        case Kind::constant: return "constant";
        case Kind::cos_k_theta: return "cos-" + std::to_string(k) + "-theta";
        case Kind::coordinate_x: return "coordinate-x";
        case Kind::coordinate_y: return "coordinate-y";
        case Kind::indicator: return "indicator";
        case Kind::from_file: return "from-file";
        }
        return "constant";
    }

    static BoundaryPreset constant(Complex c) { return {Kind::constant, c, 1, {}, {}}; }
    static BoundaryPreset cos_theta(int k) { return {Kind::cos_k_theta, {}, k, {}, {}}; }
    static BoundaryPreset coordinate(int axis) {
        return {axis == 0 ? Kind::coordinate_x : Kind::coordinate_y, {}, 1, {}, {}};
    }
    static BoundaryPreset indicator(std::optional<Index> id = {}) { return {Kind::indicator, {}, 1, id, {}}; }
};

/// Boundary values for a preset. Angles are measured about the domain
/// center; from-file reads {"values": [[id, re], [id, re, im], ...]}.
inline BoundaryData make_boundary_data(const BoundaryPreset& p, const DiscreteDomain& d) {
    BoundaryData out;
    const Vec2 c = d.descriptor().center;
    switch (p.kind) {
    case BoundaryPreset::Kind::constant:
        for (Index b : d.boundary_ids()) out[b] = p.value;
        return out;
    case BoundaryPreset::Kind::cos_k_theta:
        for (Index b : d.boundary_ids()) {
            const Vec2 v = sub(d.coords(b), c);
            out[b] = std::cos(p.k * std::atan2(v[1], v[0]));
        }
        return out;
    case BoundaryPreset::Kind::coordinate_x:
    case BoundaryPreset::Kind::coordinate_y: {
        const int axis = p.kind == BoundaryPreset::Kind::coordinate_x ? 0 : 1;
        for (Index b : d.boundary_ids()) out[b] = d.coords(b)[axis];
        return out;
    }
    case BoundaryPreset::Kind::indicator: {
        const Index target = p.id ? *p.id : d.boundary_ids().front();
        d.check_id(target);
        if (!d.is_boundary(target))
            throw input_error("indicator preset: point " + std::to_string(target) + " is not a boundary point");
        for (Index b : d.boundary_ids()) out[b] = b == target ? 1.0 : 0.0;
        return out;
    }
    case BoundaryPreset::Kind::from_file: {
        std::ifstream in(p.file);
        if (!in) throw input_error("cannot open boundary data file " + p.file.string());
        nlohmann::json j;
        try {
            in >> j;
            for (const auto& e : j.at("values")) {
                if (!e.is_array() || e.size() < 2 || e.size() > 3)
                    throw input_error("boundary data entries must be [id, re] or [id, re, im]");
                const auto id = e.at(0).get<long long>();
                if (id < 0) throw input_error("boundary data id must be non-negative");
                const double im = e.size() == 3 ? e.at(2).get<double>() : 0.0;
                if (!out.emplace(Index(id), Complex(e.at(1).get<double>(), im)).second)
                    throw input_error("boundary data id " + std::to_string(id) + " listed twice");
            }
        } catch (const nlohmann::json::exception& e) {
            throw input_error("boundary data file " + p.file.string() + ": " + e.what());
        }
        for (const auto& [id, v] : out)
            if (id >= d.size() || !d.is_boundary(id))
                throw input_error("boundary data file has a value for non-boundary id " + std::to_string(id));
        for (Index b : d.boundary_ids())
            if (!out.count(b)) throw input_error("boundary data file is missing boundary id " + std::to_string(b));
        return out;
    }
    }
    throw input_error("unsupported boundary preset");
}

struct CheckSettings {
    std::size_t anchors = 8;
    std::size_t trials = 16;
    std::string barrier = "auto"; // auto, supporting-hyperplane, wedge-power
};

struct StudySettings {
    std::vector<int> resolutions; // empty: {n, 2n}
    std::size_t anchors = 4;
    std::size_t max_n = 200;
};

struct AlgebraSettings {
    std::size_t pairs = 100;
    std::vector<BoundaryPreset> generators{BoundaryPreset::coordinate(0), BoundaryPreset::coordinate(1)};
};

struct RunConfig {
    DomainSpec domain;
    KernelSpec kernel;
    BoundaryPreset boundary_data;
    ExtensionMode extension = ExtensionMode::zero_fill();
    double tolerance = kDefaultTol;
    std::size_t max_iters = 0;
    std::uint64_t rng_seed = 0;
    bool force = false;
    std::filesystem::path output_dir = "out"; // relative to the working directory
    std::size_t heatmap_pixels = 0;
    std::size_t max_interior = 5000;
    CheckSettings check;
    StudySettings study;
    AlgebraSettings algebra;
    nlohmann::json overrides = nlohmann::json::object();
    nlohmann::json source = nlohmann::json::object(); // config as read
};

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<double> tol;
    std::optional<std::size_t> max_iters;
    std::optional<std::uint64_t> seed;
    bool force = false;
    std::optional<std::filesystem::path> out;
};

namespace detail {

inline void allow_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw input_error(where + " must be a JSON object");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw input_error("unknown key '" + it.key() + "' in " + where);
}

inline std::size_t get_count(const nlohmann::json& j, const char* key, std::size_t fallback, std::size_t minimum,
                             const std::string& where) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum))
        throw input_error(where + "." + key + " must be an integer >= " + std::to_string(minimum));
    return std::size_t(v.get<long long>());
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

inline BoundaryPreset parse_preset(const nlohmann::json& j, const std::filesystem::path& base, const std::string& where) {
    if (j.is_string()) return parse_preset(nlohmann::json{{"preset", j}}, base, where);
    allow_keys(j, where, {"preset", "value", "k", "id", "file"});
    if (!j.contains("preset")) throw input_error(where + " needs a 'preset'");
    const std::string name = j.at("preset").get<std::string>();
    BoundaryPreset p;
    std::smatch m;
    if (name == "constant") {
        p.kind = BoundaryPreset::Kind::constant;
        const auto& v = j.value("value", nlohmann::json(1.0));
        if (v.is_number())
            p.value = v.get<double>();
        else if (v.is_array() && v.size() == 2)
            p.value = Complex(v.at(0).get<double>(), v.at(1).get<double>());
        else
            throw input_error(where + ".value must be a number or [re, im]");
    } else if (name == "cos-k-theta" || std::regex_match(name, m, std::regex("cos-([0-9]+)-theta"))) {
        p.kind = BoundaryPreset::Kind::cos_k_theta;
        p.k = m.empty() ? j.value("k", 1) : std::stoi(m[1].str());
        if (p.k < 0) throw input_error(where + ".k must be non-negative");
    } else if (name == "coordinate-x") {
        p.kind = BoundaryPreset::Kind::coordinate_x;
    } else if (name == "coordinate-y") {
        p.kind = BoundaryPreset::Kind::coordinate_y;
    } else if (name == "indicator") {
        p.kind = BoundaryPreset::Kind::indicator;
        if (j.contains("id")) {
            const auto id = j.at("id").get<long long>();
            if (id < 0) throw input_error(where + ".id must be non-negative");
            p.id = Index(id);
        }
    } else if (name == "from-file") {
        p.kind = BoundaryPreset::Kind::from_file;
        if (!j.contains("file")) throw input_error(where + " from-file preset needs 'file'");
        p.file = resolve(base, j.at("file").get<std::string>());
    } else {
        throw input_error("unknown boundary preset '" + name + "' in " + where);
    }
    return p;
}

} // namespace detail

/// Parses a config document. Relative file paths are resolved against base.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base) {
    using detail::allow_keys;
    RunConfig c;
    c.source = j;
    try {
        allow_keys(j, "config", {"domain", "kernel", "boundary_data", "extension", "tolerance", "max_iters", "rng_seed",
                                 "force", "output_dir", "heatmap", "max_interior", "check", "study", "algebra"});
        if (!j.contains("domain")) throw input_error("config needs a 'domain' section");
        const auto& dj = j.at("domain");
        allow_keys(dj, "domain", {"shape", "n", "file"});
        c.domain.shape = parse_shape(dj.value("shape", std::string("disk")));
        c.domain.n = int(detail::get_count(dj, "n", 17, 3, "domain"));
        if (dj.contains("file")) c.domain.file = detail::resolve(base, dj.at("file").get<std::string>());
        if (c.domain.shape == Shape::custom && c.domain.file.empty()) throw input_error("custom domain needs 'file'");

        if (j.contains("kernel")) {
            const auto& kj = j.at("kernel");
            allow_keys(kj, "kernel", {"type", "lazy", "lambda", "file"});
            c.kernel.type = parse_kernel_type(kj.value("type", std::string("grid-walk")));
            c.kernel.lazy = kj.value("lazy", 0.0);
            c.kernel.lambda = kj.value("lambda", 0.5);
            if (kj.contains("file")) c.kernel.file = detail::resolve(base, kj.at("file").get<std::string>());
            if (c.kernel.type == KernelType::custom && c.kernel.file.empty()) throw input_error("custom kernel needs 'file'");
        }
        if (j.contains("boundary_data")) c.boundary_data = detail::parse_preset(j.at("boundary_data"), base, "boundary_data");
        if (j.contains("extension")) {
            const auto& ej = j.at("extension");
            const std::string mode = ej.is_string() ? ej.get<std::string>() : ej.at("mode").get<std::string>();
            if (mode == "zero-fill")
                c.extension = ExtensionMode::zero_fill();
            else if (mode == "nearest-boundary")
                c.extension = ExtensionMode::nearest_boundary();
            else if (mode == "constant")
                c.extension = ExtensionMode::constant(ej.is_object() ? ej.value("value", 0.0) : 0.0);
            else
                throw input_error("unknown extension mode '" + mode + "'");
        }
        c.tolerance = j.value("tolerance", kDefaultTol);
        if (!(c.tolerance > 0.0)) throw input_error("tolerance must be positive");
        c.max_iters = detail::get_count(j, "max_iters", 0, 1, "config");
        if (j.contains("rng_seed")) {
            if (!j.at("rng_seed").is_number_integer()) throw input_error("rng_seed must be an integer");
            c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        }
        c.force = j.value("force", false);
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("heatmap")) {
            const auto& hj = j.at("heatmap");
            allow_keys(hj, "heatmap", {"pixels"});
            c.heatmap_pixels = detail::get_count(hj, "pixels", 128, 2, "heatmap");
        }
        c.max_interior = detail::get_count(j, "max_interior", 5000, 1, "config");
        if (j.contains("check")) {
            const auto& cj = j.at("check");
            allow_keys(cj, "check", {"anchors", "trials", "barrier"});
            c.check.anchors = detail::get_count(cj, "anchors", 8, 1, "check");
            c.check.trials = detail::get_count(cj, "trials", 16, 1, "check");
            c.check.barrier = cj.value("barrier", std::string("auto"));
            if (c.check.barrier != "auto") parse_barrier_tag(c.check.barrier);
        }
        if (j.contains("study")) {
            const auto& sj = j.at("study");
            allow_keys(sj, "study", {"resolutions", "anchors", "max_n"});
            if (sj.contains("resolutions"))
                for (const auto& r : sj.at("resolutions")) {
                    if (!r.is_number_integer() || r.get<int>() < 3) throw input_error("study.resolutions must be integers >= 3");
                    c.study.resolutions.push_back(r.get<int>());
                }
            c.study.anchors = detail::get_count(sj, "anchors", 4, 1, "study");
            c.study.max_n = detail::get_count(sj, "max_n", 200, 1, "study");
        }
        if (j.contains("algebra")) {
            const auto& aj = j.at("algebra");
            allow_keys(aj, "algebra", {"pairs", "generators"});
            c.algebra.pairs = detail::get_count(aj, "pairs", 100, 1, "algebra");
            if (aj.contains("generators")) {
                c.algebra.generators.clear();
                for (const auto& g : aj.at("generators"))
                    c.algebra.generators.push_back(detail::parse_preset(g, base, "algebra.generators"));
                if (c.algebra.generators.empty()) throw input_error("algebra.generators must not be empty");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("config: ") + e.what());
    }
    return c;
}

inline void apply_overrides(RunConfig& c, const Overrides& o) {
    if (o.tol) {
        if (!(*o.tol > 0.0)) throw input_error("--tol must be positive");
        c.tolerance = *o.tol;
        c.overrides["tolerance"] = *o.tol;
    }
    if (o.max_iters) {
        if (*o.max_iters < 1) throw input_error("--max-iters must be >= 1");
        c.max_iters = *o.max_iters;
        c.overrides["max_iters"] = *o.max_iters;
    }
    if (o.seed) {
        c.rng_seed = *o.seed;
        c.overrides["rng_seed"] = *o.seed;
    }
    if (o.force) {
        c.force = true;
        c.overrides["force"] = true;
    }
    if (o.out) {
        c.output_dir = *o.out;
        c.overrides["output_dir"] = o.out->string();
    }
}

/// Reads a config file; JSON syntax errors carry their line and column.
inline RunConfig load_run_config(const std::filesystem::path& path, const Overrides& o = {}) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw input_error("config " + path.string() + ": " + e.what());
    }
    auto c = parse_run_config(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
    apply_overrides(c, o);
    return c;
}

} // namespace mdir
