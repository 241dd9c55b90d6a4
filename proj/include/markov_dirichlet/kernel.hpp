#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "parallel.hpp"

namespace mdir {

struct KernelEntry {
    Index target;
    double weight;
};

enum class KernelType { grid_walk, ball_average, custom };

inline std::string_view to_string(KernelType t) {
    switch (t) {
    case KernelType::grid_walk: return "grid-walk";
    case KernelType::ball_average: return "ball-average";
    case KernelType::custom: return "custom";
    }
    return "custom";
}

inline KernelType parse_kernel_type(std::string_view name) {
    if (name == "grid-walk") return KernelType::grid_walk;
    if (name == "ball-average") return KernelType::ball_average;
    if (name == "custom") return KernelType::custom;
    throw input_error("unknown kernel type '" + std::string(name) + "'");
}

struct KernelSpec {
    KernelType type = KernelType::grid_walk;
    double lazy = 0.0;   // grid-walk holding probability, in [0, 1)
    double lambda = 0.5; // ball-average radius fraction, in (0, 1]
    std::filesystem::path file;
};

/// Row-stochastic transition operator on all of K: absorbing on the
/// boundary, a probability measure p_x on every interior row. Rows are
/// stored in CSR form with targets in ascending id order.
class MarkovKernel {
public:
    /// Validates and packs rows. Duplicate targets are merged; zero weights
    /// are dropped.
    static MarkovKernel from_rows(DomainPtr domain, std::vector<std::vector<KernelEntry>> rows, std::string tag) {
        const auto& d = *domain;
        if (rows.size() != d.size()) throw input_error("kernel needs one row per domain point");
        MarkovKernel k;
        k.domain_ = std::move(domain);
        k.tag_ = std::move(tag);
        k.row_ptr_.reserve(rows.size() + 1);
        k.row_ptr_.push_back(0);
        for (Index r = 0; r < rows.size(); ++r) {
            auto& row = rows[r];
            std::sort(row.begin(), row.end(), [](const KernelEntry& a, const KernelEntry& b) { return a.target < b.target; });
            double sum = 0.0;
            std::size_t start = k.targets_.size();
            for (const auto& e : row) {
                if (e.target >= d.size())
                    throw input_error("row " + std::to_string(r) + " targets unknown point id " + std::to_string(e.target));
                if (!std::isfinite(e.weight) || e.weight < 0.0)
                    throw input_error("row " + std::to_string(r) + " has an invalid weight");
                if (e.weight == 0.0) continue;
                if (k.targets_.size() > start && k.targets_.back() == e.target) {
                    k.weights_.back() += e.weight;
                } else {
                    k.targets_.push_back(e.target);
                    k.weights_.push_back(e.weight);
                }
                sum += e.weight;
            }
            if (d.is_boundary(r)) {
                if (k.targets_.size() - start != 1 || k.targets_.back() != r || k.weights_.back() != 1.0)
                    throw input_error("boundary row " + std::to_string(r) + " is not absorbing (must be exactly {(" +
                                      std::to_string(r) + ", 1)})");
            } else if (k.targets_.size() == start || std::abs(sum - 1.0) > 1e-12) {
                throw input_error("row " + std::to_string(r) + " is not stochastic (sum = " + std::to_string(sum) + ")");
            }
            k.row_ptr_.push_back(k.targets_.size());
        }
        return k;
    }

    std::size_t size() const { return row_ptr_.size() - 1; }
    const DiscreteDomain& domain() const { return *domain_; }
    const DomainPtr& domain_ptr() const { return domain_; }
    const std::string& builder_tag() const { return tag_; }

    std::span<const Index> targets(Index row) const {
        return {targets_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
    }
    std::span<const double> weights(Index row) const {
        return {weights_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
    }

    /// p_row(target), 0 when the target is outside the row's support.
    double weight(Index row, Index target) const {
        auto t = targets(row);
        auto it = std::lower_bound(t.begin(), t.end(), target);
        if (it == t.end() || *it != target) return 0.0;
        return weights(row)[std::size_t(it - t.begin())];
    }

private:
    MarkovKernel() = default;

    DomainPtr domain_;
    std::string tag_;
    std::vector<std::size_t> row_ptr_;
    std::vector<Index> targets_;
    std::vector<double> weights_;
};

namespace detail {

/// Nearest-neighbour row at x: the weights closest to uniform (least
/// squares) whose mean displacement vanishes, so affine functions are
/// reproduced exactly. Symmetric stars get exact uniform weights; if the
/// constrained weights are not all positive the row stays uniform.
inline std::vector<KernelEntry> nearest_neighbour_row(const DiscreteDomain& d, Index x) {
    const auto nb = d.neighbors(x);
    const std::size_t m = nb.size();
    if (m == 0) throw input_error("interior point " + std::to_string(x) + " has no neighbours");
    const double u = 1.0 / double(m);
    std::vector<KernelEntry> row(m);
    for (std::size_t k = 0; k < m; ++k) row[k] = {nb[k], u};

    std::vector<Vec2> disp(m);
    Vec2 mean{0.0, 0.0};
    double scale = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        disp[k] = sub(d.coords(nb[k]), d.coords(x));
        mean[0] += disp[k][0] * u;
        mean[1] += disp[k][1] * u;
        scale += norm(disp[k]) * u;
    }
    if (norm(mean) <= 1e-12 * scale) return row;

    // Minimise |w - u|^2 subject to A w = (0, 0, 1), A = [dx; dy; 1].
    double g[3][3] = {};
    for (std::size_t k = 0; k < m; ++k) {
        const double a[3] = {disp[k][0], disp[k][1], 1.0};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) g[r][c] += a[r] * a[c];
    }
    const double rhs[3] = {-mean[0], -mean[1], 0.0};
    const double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                       g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                       g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    if (!(std::abs(det) > 1e-14 * std::pow(scale, 4))) return row;
    double z[3];
    for (int c = 0; c < 3; ++c) {
        double h[3][3];
        for (int r = 0; r < 3; ++r)
            for (int cc = 0; cc < 3; ++cc) h[r][cc] = (cc == c) ? rhs[r] : g[r][cc];
        z[c] = (h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
                h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])) /
               det;
    }
    std::vector<KernelEntry> adjusted(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double w = u + z[0] * disp[k][0] + z[1] * disp[k][1] + z[2];
        if (!(w > 0.0)) return row;
        adjusted[k] = {nb[k], w};
    }
    return adjusted;
}

} // namespace detail

inline MarkovKernel parse_kernel_json(const DomainPtr& domain, const nlohmann::json& j, std::string tag = "custom") {
    const auto& d = *domain;
    std::vector<std::vector<KernelEntry>> rows(d.size());
    std::vector<char> given(d.size(), 0);
    try {
        for (const auto& r : j.at("rows")) {
            if (!r.is_array() || r.size() != 2) throw input_error("each kernel row must be [row_id, [[target, weight], ...]]");
            const auto id = r.at(0).get<long long>();
            if (id < 0 || std::size_t(id) >= d.size()) throw input_error("kernel row id " + std::to_string(id) + " out of range");
            if (given[id]) throw input_error("kernel row " + std::to_string(id) + " listed twice");
            given[id] = 1;
            for (const auto& e : r.at(1)) {
                if (!e.is_array() || e.size() != 2) throw input_error("each kernel entry must be [target, weight]");
                const auto t = e.at(0).get<long long>();
                if (t < 0) throw input_error("row " + std::to_string(id) + " targets a negative id");
                rows[id].push_back({Index(t), e.at(1).get<double>()});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed kernel file: ") + e.what());
    }
    for (Index i = 0; i < d.size(); ++i) {
        if (given[i]) continue;
        if (!d.is_boundary(i)) throw input_error("kernel file has no row for interior point " + std::to_string(i));
        rows[i] = {{i, 1.0}};
    }
    return MarkovKernel::from_rows(domain, std::move(rows), std::move(tag));
}

inline MarkovKernel load_kernel_file(const DomainPtr& domain, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open kernel file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw input_error("kernel file " + path.string() + ": " + e.what());
    }
    return parse_kernel_json(domain, j, "custom:" + path.filename().string());
}

inline MarkovKernel build_kernel(const DomainPtr& domain, const KernelSpec& spec) {
    const auto& d = *domain;
    std::vector<std::vector<KernelEntry>> rows(d.size());
    for (Index b : d.boundary_ids()) rows[b] = {{b, 1.0}};
    switch (spec.type) {
    case KernelType::grid_walk: {
        if (!(spec.lazy >= 0.0 && spec.lazy < 1.0)) throw input_error("grid-walk lazy parameter must be in [0, 1)");
        for (Index x : d.interior_ids()) {
            auto row = detail::nearest_neighbour_row(d, x);
            if (spec.lazy > 0.0) {
                for (auto& e : row) e.weight *= (1.0 - spec.lazy);
                row.push_back({x, spec.lazy});
            }
            rows[x] = std::move(row);
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "grid-walk(lazy=%.17g)", spec.lazy);
        return MarkovKernel::from_rows(domain, std::move(rows), buf);
    }
    case KernelType::ball_average: {
        if (!(spec.lambda > 0.0 && spec.lambda <= 1.0)) throw input_error("ball-average lambda must be in (0, 1]");
        for (Index x : d.interior_ids()) {
            const double radius = spec.lambda * d.boundary_distance(x);
            std::vector<Index> ball;
            for (Index y = 0; y < d.size(); ++y)
                if (d.metric(x, y) <= radius) ball.push_back(y);
            if (ball.size() <= 1) {
                rows[x] = detail::nearest_neighbour_row(d, x);
                continue;
            }
            const double w = 1.0 / double(ball.size());
            for (Index y : ball) rows[x].push_back({y, w});
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "ball-average(lambda=%.17g)", spec.lambda);
        return MarkovKernel::from_rows(domain, std::move(rows), buf);
    }
    case KernelType::custom: return load_kernel_file(domain, spec.file);
    }
    throw input_error("unsupported kernel type");
}

/// out = Psi(in). Rows are independent and each sums its targets in
/// ascending id order, so the result is bit-identical for any thread count.
inline void apply_into(const MarkovKernel& k, std::span<const Complex> in, std::span<Complex> out) {
    const auto& d = k.domain();
    parallel_for(k.size(), [&](std::size_t r) {
        const Index row = Index(r);
        if (d.is_boundary(row)) {
            out[r] = in[r];
            return;
        }
        const auto t = k.targets(row);
        const auto w = k.weights(row);
        Complex acc{};
        for (std::size_t e = 0; e < t.size(); ++e) acc += w[e] * in[t[e]];
        out[r] = acc;
    });
}

inline ScalarField apply(const MarkovKernel& k, const ScalarField& f) {
    if (f.domain_ptr() != k.domain_ptr()) throw input_error("field and kernel live on different domains");
    ScalarField out(f.domain_ptr());
    apply_into(k, f.values(), out.values());
    return out;
}

/// Power-iteration estimate of the spectral radius of the interior block.
/// Uses the geometric mean of the last two growth factors so that
/// bipartite chains (eigenvalues +rho and -rho) are handled.
inline double interior_spectral_bound(const MarkovKernel& k, std::size_t iters) {
    if (iters < 10) throw input_error("interior_spectral_bound needs at least 10 iterations");
    const auto& d = k.domain();
    const auto interior = d.interior_ids();
    std::vector<std::size_t> local(d.size(), SIZE_MAX);
    for (std::size_t i = 0; i < interior.size(); ++i) local[interior[i]] = i;

    std::vector<double> x(interior.size(), 1.0 / std::sqrt(double(interior.size()))), y(interior.size());
    double prev = 0.0, last = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < interior.size(); ++i) {
            const auto t = k.targets(interior[i]);
            const auto w = k.weights(interior[i]);
            double acc = 0.0;
            for (std::size_t e = 0; e < t.size(); ++e)
                if (local[t[e]] != SIZE_MAX) acc += w[e] * x[local[t[e]]];
            y[i] = acc;
            nrm += acc * acc;
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] / nrm;
        prev = last;
        last = nrm;
    }
    return std::clamp(std::sqrt(prev * last), 0.0, 1.0);
}

} // namespace mdir
