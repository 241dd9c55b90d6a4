#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace mdir {

enum class Shape { disk, square, annulus, lshape, custom };

inline std::string_view to_string(Shape s) {
    switch (s) {
    case Shape::disk: return "disk";
    case Shape::square: return "square";
    case Shape::annulus: return "annulus";
    case Shape::lshape: return "lshape";
    case Shape::custom: return "custom";
    }
    return "custom";
}

inline Shape parse_shape(std::string_view name) {
    if (name == "disk") return Shape::disk;
    if (name == "square") return Shape::square;
    if (name == "annulus") return Shape::annulus;
    if (name == "lshape" || name == "l-shape") return Shape::lshape;
    if (name == "custom") return Shape::custom;
    throw input_error("unknown domain shape '" + std::string(name) + "'");
}

/// What to build: a structured shape at resolution n, or a custom file.
///
/// Resolution conventions (lattice step s):
///   disk     unit disk, s = 2/n, lattice through the origin
///   annulus  radii 0.5 and 1, s = 2/n
///   square   [0,1]^2, n lattice points per side, s = 1/(n-1)
///   lshape   [0,1]^2 minus the upper-right quadrant past the mid lattice line
struct DomainSpec {
    Shape shape = Shape::disk;
    int n = 17;
    std::filesystem::path file;
};

/// Provenance of a built domain.
struct DomainDescriptor {
    Shape shape = Shape::custom;
    int n = 0;
    double step = 0.0;    // 0 for custom domains
    Vec2 center{0.0, 0.0}; // angular origin for angle-based boundary data
    double notch = 0.0;   // L-shape re-entrant corner coordinate
    std::string source;   // custom: file name

    std::string tag() const {
        std::string t(to_string(shape));
        if (shape == Shape::custom) return source.empty() ? t : t + ":" + source;
        return t + ":n=" + std::to_string(n);
    }
};

/// Finite model of a compact metric space K with a dense open part U
/// (interior points) and its boundary. Immutable once constructed; the
/// constructor validates every structural invariant and throws
/// input_error naming the one that fails.
class DiscreteDomain {
public:
    DiscreteDomain(std::vector<Vec2> coords, std::vector<char> is_boundary,
                   std::vector<std::vector<Index>> adjacency, DomainDescriptor descriptor,
                   std::vector<double> metric_matrix = {})
        : coords_(std::move(coords)), is_boundary_(std::move(is_boundary)),
          adjacency_(std::move(adjacency)), descriptor_(std::move(descriptor)),
          metric_(std::move(metric_matrix)) {
        const std::size_t n = coords_.size();
        if (is_boundary_.size() != n || adjacency_.size() != n)
            throw input_error("domain arrays must have one entry per point");
        if (!metric_.empty() && metric_.size() != n * n)
            throw input_error("custom metric must be an N x N matrix");
        for (Index i = 0; i < n; ++i) (is_boundary_[i] ? boundary_ : interior_).push_back(i);
        for (auto& nb : adjacency_) {
            std::sort(nb.begin(), nb.end());
            nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        }
        validate();
        compute_boundary_distances();
    }

    std::size_t size() const { return coords_.size(); }
    std::size_t interior_count() const { return interior_.size(); }
    std::size_t boundary_count() const { return boundary_.size(); }

    const Vec2& coords(Index i) const { return coords_[i]; }
    bool is_boundary(Index i) const { return is_boundary_[i] != 0; }
    std::span<const Index> neighbors(Index i) const { return adjacency_[i]; }
    std::span<const Index> interior_ids() const { return interior_; }
    std::span<const Index> boundary_ids() const { return boundary_; }
    const DomainDescriptor& descriptor() const { return descriptor_; }
    bool has_custom_metric() const { return !metric_.empty(); }

    double metric(Index i, Index j) const {
        if (!metric_.empty()) return metric_[std::size_t(i) * size() + j];
        return norm(sub(coords_[i], coords_[j]));
    }

    /// Distance to the nearest boundary point; 0 exactly on the boundary.
    double boundary_distance(Index p) const {
        check_id(p);
        return boundary_dist_[p];
    }

    /// Nearest boundary point (lowest id among ties).
    Index nearest_boundary(Index p) const {
        check_id(p);
        return nearest_boundary_[p];
    }

    void check_id(Index p) const {
        if (p >= size()) throw input_error("invalid point id " + std::to_string(p));
    }

private:
    void validate() const {
        const std::size_t n = size();
        if (boundary_.size() < 2) throw input_error("boundary must contain at least two points");
        if (interior_.empty()) throw input_error("domain must contain at least one interior point");

        if (metric_.empty()) {
            for (const auto& c : coords_)
                if (!std::isfinite(c[0]) || !std::isfinite(c[1]))
                    throw input_error("point coordinates must be finite");
            std::vector<Index> order(n);
            for (Index i = 0; i < n; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](Index a, Index b) { return coords_[a] < coords_[b]; });
            for (std::size_t k = 1; k < n; ++k)
                if (coords_[order[k]] == coords_[order[k - 1]])
                    throw input_error("metric must be positive between distinct points (points " +
                                      std::to_string(order[k - 1]) + " and " + std::to_string(order[k]) +
                                      " coincide)");
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                if (metric_[i * n + i] != 0.0) throw input_error("metric must vanish on the diagonal");
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double a = metric_[i * n + j];
                    if (!std::isfinite(a) || a != metric_[j * n + i])
                        throw input_error("metric must be symmetric (points " + std::to_string(i) + ", " +
                                          std::to_string(j) + ")");
                    if (!(a > 0.0))
                        throw input_error("metric must be positive between distinct points (points " +
                                          std::to_string(i) + " and " + std::to_string(j) + ")");
                }
            }
        }

        for (Index i = 0; i < n; ++i) {
            for (Index j : adjacency_[i]) {
                if (j >= n) throw input_error("adjacency references unknown point id " + std::to_string(j));
                if (j == i) throw input_error("adjacency must not contain self loops (point " + std::to_string(i) + ")");
                if (!std::binary_search(adjacency_[j].begin(), adjacency_[j].end(), i))
                    throw input_error("adjacency must be symmetric (" + std::to_string(i) + " -> " +
                                      std::to_string(j) + ")");
            }
        }

        for (Index b : boundary_) {
            bool touches = std::any_of(adjacency_[b].begin(), adjacency_[b].end(),
                                       [&](Index j) { return !is_boundary_[j]; });
            if (!touches)
                throw input_error("every boundary point must be adjacent to an interior point (boundary point " +
                                  std::to_string(b) + ")");
        }

        // Interior points must reach a boundary-adjacent interior point
        // through interior edges.
        std::vector<char> seen(n, 0);
        std::queue<Index> queue;
        for (Index i : interior_) {
            for (Index j : adjacency_[i]) {
                if (is_boundary_[j]) {
                    seen[i] = 1;
                    queue.push(i);
                    break;
                }
            }
        }
        while (!queue.empty()) {
            Index i = queue.front();
            queue.pop();
            for (Index j : adjacency_[i]) {
                if (!is_boundary_[j] && !seen[j]) {
                    seen[j] = 1;
                    queue.push(j);
                }
            }
        }
        for (Index i : interior_)
            if (!seen[i])
                throw input_error("every interior point must connect to the boundary through interior adjacency "
                                  "(interior point " + std::to_string(i) + ")");
    }

    void compute_boundary_distances() {
        const std::size_t n = size();
        boundary_dist_.assign(n, 0.0);
        nearest_boundary_.assign(n, 0);
        for (Index p = 0; p < n; ++p) {
            if (is_boundary_[p]) {
                nearest_boundary_[p] = p;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            Index arg = boundary_.front();
            for (Index b : boundary_) {
                const double d = metric(p, b);
                if (d < best) {
                    best = d;
                    arg = b;
                }
            }
            boundary_dist_[p] = best;
            nearest_boundary_[p] = arg;
        }
    }

    std::vector<Vec2> coords_;
    std::vector<char> is_boundary_;
    std::vector<std::vector<Index>> adjacency_;
    DomainDescriptor descriptor_;
    std::vector<double> metric_;
    std::vector<Index> interior_;
    std::vector<Index> boundary_;
    std::vector<double> boundary_dist_;
    std::vector<Index> nearest_boundary_;
};

using DomainPtr = std::shared_ptr<const DiscreteDomain>;

inline double boundary_distance(const DiscreteDomain& d, Index p) { return d.boundary_distance(p); }

namespace detail {

/// Structured lattice builder. Interior cells satisfy `inside`; boundary
/// nodes are the non-interior 4-neighbours of interior cells, placed at
/// `project(i, j)`. Ids follow row-major lattice order.
template <typename Inside, typename Coord, typename Project>
DomainPtr build_lattice(int lo, int hi, Inside inside, Coord coord, Project project, DomainDescriptor desc) {
    const int w = hi - lo + 1;
    auto cell = [&](int i, int j) { return std::size_t(j - lo) * w + std::size_t(i - lo); };
    std::vector<char> interior(std::size_t(w) * w, 0), node(std::size_t(w) * w, 0);
    constexpr int di[4] = {1, -1, 0, 0};
    constexpr int dj[4] = {0, 0, 1, -1};
    std::size_t interior_count = 0;
    for (int j = lo; j <= hi; ++j)
        for (int i = lo; i <= hi; ++i)
            if (inside(i, j)) {
                interior[cell(i, j)] = 1;
                node[cell(i, j)] = 1;
                ++interior_count;
            }
    if (interior_count == 0) throw input_error("resolution too small: no interior points for " + desc.tag());
    for (int j = lo; j <= hi; ++j)
        for (int i = lo; i <= hi; ++i) {
            if (!interior[cell(i, j)]) continue;
            for (int k = 0; k < 4; ++k) {
                const int a = i + di[k], b = j + dj[k];
                if (a < lo || a > hi || b < lo || b > hi)
                    throw invariant_error("lattice window too small for " + desc.tag());
                node[cell(a, b)] = 1;
            }
        }

    std::vector<Index> id(std::size_t(w) * w, 0);
    std::vector<Vec2> coords;
    std::vector<char> is_boundary;
    for (int j = lo; j <= hi; ++j)
        for (int i = lo; i <= hi; ++i) {
            if (!node[cell(i, j)]) continue;
            id[cell(i, j)] = Index(coords.size());
            const bool inner = interior[cell(i, j)] != 0;
            coords.push_back(inner ? coord(i, j) : project(i, j));
            is_boundary.push_back(inner ? 0 : 1);
        }

    std::vector<std::vector<Index>> adjacency(coords.size());
    for (int j = lo; j <= hi; ++j)
        for (int i = lo; i <= hi; ++i) {
            if (!interior[cell(i, j)]) continue;
            const Index p = id[cell(i, j)];
            for (int k = 0; k < 4; ++k) {
                const Index q = id[cell(i + di[k], j + dj[k])];
                adjacency[p].push_back(q);
                if (is_boundary[q]) adjacency[q].push_back(p);
            }
        }
    return std::make_shared<const DiscreteDomain>(std::move(coords), std::move(is_boundary), std::move(adjacency),
                                                  std::move(desc));
}

inline Vec2 radial(double radius, int i, int j) {
    const double r = std::hypot(double(i), double(j));
    return {radius * i / r, radius * j / r};
}

} // namespace detail

/// Custom domain from its JSON form:
/// {"points": [[id, x, y], ...], "boundary": [ids], "edges": [[id, id], ...],
///  "metric": optional N x N matrix}. Ids must be dense 0..N-1.
inline DomainPtr parse_domain_json(const nlohmann::json& j, std::string source = {}) {
    try {
        const auto& pts = j.at("points");
        const std::size_t n = pts.size();
        std::vector<Vec2> coords(n);
        std::vector<char> seen(n, 0), is_boundary(n, 0);
        for (const auto& p : pts) {
            if (!p.is_array() || p.size() != 3) throw input_error("each point must be [id, x, y]");
            const auto id = p.at(0).get<long long>();
            if (id < 0 || std::size_t(id) >= n || seen[id]) throw input_error("point ids must be dense 0..N-1");
            seen[id] = 1;
            coords[id] = {p.at(1).get<double>(), p.at(2).get<double>()};
        }
        for (const auto& b : j.at("boundary")) {
            const auto id = b.get<long long>();
            if (id < 0 || std::size_t(id) >= n) throw input_error("boundary id " + std::to_string(id) + " out of range");
            is_boundary[id] = 1;
        }
        std::vector<std::vector<Index>> adjacency(n);
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw input_error("each edge must be [id, id]");
            const auto a = e.at(0).get<long long>(), b = e.at(1).get<long long>();
            if (a < 0 || b < 0 || std::size_t(a) >= n || std::size_t(b) >= n)
                throw input_error("edge references unknown point id");
            adjacency[a].push_back(Index(b));
            adjacency[b].push_back(Index(a));
        }
        std::vector<double> metric;
        if (j.contains("metric")) {
            const auto& m = j.at("metric");
            if (m.size() != n) throw input_error("custom metric must be an N x N matrix");
            metric.reserve(n * n);
            for (const auto& row : m) {
                if (row.size() != n) throw input_error("custom metric must be an N x N matrix");
                for (const auto& v : row) metric.push_back(v.get<double>());
            }
        }
        DomainDescriptor desc;
        desc.shape = Shape::custom;
        desc.source = std::move(source);
        // Angular origin: centroid of the boundary points.
        std::size_t nb = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (is_boundary[i]) {
                desc.center[0] += coords[i][0];
                desc.center[1] += coords[i][1];
                ++nb;
            }
        if (nb > 0) {
            desc.center[0] /= double(nb);
            desc.center[1] /= double(nb);
        }
        return std::make_shared<const DiscreteDomain>(std::move(coords), std::move(is_boundary), std::move(adjacency),
                                                      std::move(desc), std::move(metric));
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed domain file: ") + e.what());
    }
}

inline DomainPtr load_domain_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open domain file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw input_error("domain file " + path.string() + ": " + e.what());
    }
    return parse_domain_json(j, path.filename().string());
}

inline DomainPtr build_domain(const DomainSpec& spec) {
    if (spec.shape == Shape::custom) return load_domain_file(spec.file);
    const int n = spec.n;
    if (n < 3) throw input_error("resolution n must be at least 3");
    DomainDescriptor desc;
    desc.shape = spec.shape;
    desc.n = n;
    switch (spec.shape) {
    case Shape::disk: {
        desc.step = 2.0 / n;
        const long long lim = (long long)(n - 1) * (n - 1);
        return detail::build_lattice(
            -n, n, [&](int i, int j) { return 4LL * (i * i + j * j) < lim; },
            [&](int i, int j) { return Vec2{2.0 * i / n, 2.0 * j / n}; },
            [&](int i, int j) { return detail::radial(1.0, i, j); }, desc);
    }
    case Shape::annulus: {
        desc.step = 2.0 / n;
        const long long outer = (long long)(n - 1) * (n - 1), inner = (long long)(n + 2) * (n + 2);
        return detail::build_lattice(
            -n, n,
            [&](int i, int j) {
                const long long r2 = (long long)i * i + (long long)j * j;
                return 4 * r2 < outer && 16 * r2 > inner;
            },
            [&](int i, int j) { return Vec2{2.0 * i / n, 2.0 * j / n}; },
            [&](int i, int j) {
                // Project onto whichever circle is nearer.
                const double r = 2.0 * std::hypot(double(i), double(j)) / n;
                return detail::radial(r > 0.75 ? 1.0 : 0.5, i, j);
            },
            desc);
    }
    case Shape::square: {
        const int m = n - 1;
        desc.step = 1.0 / m;
        desc.center = {0.5, 0.5};
        auto at = [m](int i, int j) { return Vec2{double(i) / m, double(j) / m}; };
        return detail::build_lattice(
            0, m, [m](int i, int j) { return i > 0 && i < m && j > 0 && j < m; }, at, at, desc);
    }
    case Shape::lshape: {
        const int m = n - 1;
        const int c = m / 2;
        desc.step = 1.0 / m;
        desc.notch = double(c) / m;
        desc.center = {0.5, 0.5};
        auto at = [m](int i, int j) { return Vec2{double(i) / m, double(j) / m}; };
        return detail::build_lattice(
            0, m, [m, c](int i, int j) { return i > 0 && i < m && j > 0 && j < m && !(i >= c && j >= c); }, at,
            at, desc);
    }
    case Shape::custom: break;
    }
    throw input_error("unsupported shape");
}

/// Inward unit normal at a boundary point, from the generator's geometry
/// (custom domains: mean direction towards the adjacent interior points).
inline Vec2 inward_normal(const DiscreteDomain& d, Index anchor) {
    d.check_id(anchor);
    if (!d.is_boundary(anchor)) throw input_error("point " + std::to_string(anchor) + " is not a boundary point");
    const Vec2 a = d.coords(anchor);
    const auto& desc = d.descriptor();
    constexpr double eps = 1e-12;
    switch (desc.shape) {
    case Shape::disk: {
        const double r = norm(a);
        return {-a[0] / r, -a[1] / r};
    }
    case Shape::annulus: {
        const double r = norm(a);
        const double s = r > 0.75 ? -1.0 : 1.0;
        return {s * a[0] / r, s * a[1] / r};
    }
    case Shape::lshape: {
        const double c = desc.notch;
        if (std::abs(a[0] - c) < eps && std::abs(a[1] - c) < eps) return {-1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2};
        if (std::abs(a[0] - c) < eps && a[1] > c) return {-1.0, 0.0};
        if (std::abs(a[1] - c) < eps && a[0] > c) return {0.0, -1.0};
        [[fallthrough]];
    }
    case Shape::square: {
        if (std::abs(a[0]) < eps) return {1.0, 0.0};
        if (std::abs(a[0] - 1.0) < eps) return {-1.0, 0.0};
        if (std::abs(a[1]) < eps) return {0.0, 1.0};
        if (std::abs(a[1] - 1.0) < eps) return {0.0, -1.0};
        break;
    }
    case Shape::custom: break;
    }
    Vec2 sum{0.0, 0.0};
    for (Index j : d.neighbors(anchor)) {
        if (d.is_boundary(j)) continue;
        const Vec2 v = sub(d.coords(j), a);
        sum[0] += v[0];
        sum[1] += v[1];
    }
    const double len = norm(sum);
    if (!(len > 0.0)) throw input_error("cannot determine an inward direction at point " + std::to_string(anchor));
    return {sum[0] / len, sum[1] / len};
}

} // namespace mdir
