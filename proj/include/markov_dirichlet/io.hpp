#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "field.hpp"

namespace mdir {

/// 17 significant digits: doubles round-trip exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void dump_json(std::ostream& os, const nlohmann::json& j, int indent, int depth) {
    const std::string pad(std::size_t(indent * (depth + 1)), ' '), close(std::size_t(indent * depth), ' ');
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad << nlohmann::json(it.key()).dump() << ": ";
            dump_json(os, it.value(), indent, depth + 1);
        }
        os << "\n" << close << "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        const bool flat = std::all_of(j.begin(), j.end(), [](const nlohmann::json& e) { return e.is_primitive(); });
        if (flat) {
            os << "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ", ";
                dump_json(os, j[i], indent, depth + 1);
            }
            os << "]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) os << ",\n";
            os << pad;
            dump_json(os, j[i], indent, depth + 1);
        }
        os << "\n" << close << "]";
        return;
    }
    case nlohmann::json::value_t::number_float: {
        const double v = j.get<double>();
        os << (std::isfinite(v) ? fmt17(v) : "null");
        return;
    }
    default: os << j.dump();
    }
}

} // namespace detail

/// JSON text with every float printed by fmt17 and keys in sorted order.
inline std::string to_json_text(const nlohmann::json& j, int indent = 2) {
    std::ostringstream os;
    detail::dump_json(os, j, indent, 0);
    os << "\n";
    return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path.string());
    out << text;
    if (!out) throw input_error("failed writing " + path.string());
}

/// Header id,x,y,is_boundary,re,im; one row per point, ids ascending.
inline std::string field_csv(const ScalarField& f) {
    const auto& d = f.domain();
    std::string s = "id,x,y,is_boundary,re,im\n";
    for (Index i = 0; i < f.size(); ++i) {
        s += std::to_string(i) + "," + fmt17(d.coords(i)[0]) + "," + fmt17(d.coords(i)[1]) + "," +
             (d.is_boundary(i) ? "1" : "0") + "," + fmt17(f[i].real()) + "," + fmt17(f[i].imag()) + "\n";
    }
    return s;
}

/// Two-column table n,residual with n starting at 1.
inline std::string residuals_csv(const std::vector<double>& res) {
    std::string s = "n,residual\n";
    for (std::size_t i = 0; i < res.size(); ++i) s += std::to_string(i + 1) + "," + fmt17(res[i]) + "\n";
    return s;
}

/// Plain CSV table writer; numbers go through fmt17.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : cols_(header.size()) { add_line(header); }

    CsvTable& row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_) throw invariant_error("csv row has the wrong number of columns");
        add_line(cells);
        return *this;
    }
    const std::string& text() const { return text_; }

private:
    void add_line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
        text_ += "\n";
    }
    std::size_t cols_;
    std::string text_;
};

struct HeatmapInfo {
    std::size_t width = 0, height = 0;
    double value_min = 0.0, value_max = 0.0;
    double x_min = 0.0, y_min = 0.0, pixel = 0.0;
};

inline nlohmann::json to_json(const HeatmapInfo& h) {
    return {{"format", "PGM P2"}, {"width", h.width}, {"height", h.height},
            {"gray", "round(255 * (re - value_min) / (value_max - value_min)), 0 when value_max == value_min"},
            {"value_min", h.value_min}, {"value_max", h.value_max}, {"x_min", h.x_min}, {"y_min", h.y_min},
            {"pixel_size", h.pixel}, {"row_order", "top row is the largest y"},
            {"background", "pixels without a point are 0"}};
}

/// Grayscale ASCII PGM of the real part. Points are splatted onto a grid of
/// `pixels` columns covering their bounding box; the last point written to
/// a pixel wins (ids ascending).
inline std::string heatmap_pgm(const ScalarField& f, std::size_t pixels, HeatmapInfo& info) {
    if (pixels < 2) throw input_error("heatmap needs at least 2 pixels per side");
    const auto& d = f.domain();
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY, lo = INFINITY, hi = -INFINITY;
    for (Index i = 0; i < f.size(); ++i) {
        x0 = std::min(x0, d.coords(i)[0]);
        x1 = std::max(x1, d.coords(i)[0]);
        y0 = std::min(y0, d.coords(i)[1]);
        y1 = std::max(y1, d.coords(i)[1]);
        lo = std::min(lo, f[i].real());
        hi = std::max(hi, f[i].real());
    }
    const double span = std::max(x1 - x0, y1 - y0);
    const double px = span > 0.0 ? span / double(pixels - 1) : 1.0;
    info = {pixels, std::size_t(std::floor((y1 - y0) / px + 0.5)) + 1, lo, hi, x0, y0, px};
    info.width = std::size_t(std::floor((x1 - x0) / px + 0.5)) + 1;
    std::vector<int> img(info.width * info.height, 0);
    for (Index i = 0; i < f.size(); ++i) {
        const auto cx = std::size_t(std::floor((d.coords(i)[0] - x0) / px + 0.5));
        const auto cy = std::size_t(std::floor((d.coords(i)[1] - y0) / px + 0.5));
        const int gray = hi > lo ? int(std::lround(255.0 * (f[i].real() - lo) / (hi - lo))) : 0;
        img[(info.height - 1 - std::min(cy, info.height - 1)) * info.width + std::min(cx, info.width - 1)] = gray;
    }
    std::string s = "P2\n" + std::to_string(info.width) + " " + std::to_string(info.height) + "\n255\n";
    for (std::size_t r = 0; r < info.height; ++r) {
        for (std::size_t c = 0; c < info.width; ++c) s += (c ? " " : "") + std::to_string(img[r * info.width + c]);
        s += "\n";
    }
    return s;
}

} // namespace mdir
