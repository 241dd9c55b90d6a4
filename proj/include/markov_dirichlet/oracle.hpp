#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "field.hpp"
#include "kernel.hpp"

namespace mdir {

/// Dense LU factorization (partial pivoting) of I - P_II, reusable across boundary data.
/// Independent of the power iteration: interior values solve
/// u_I = P_II u_I + P_IB f exactly (up to rounding).
class DirectSolver {
public:
    explicit DirectSolver(const MarkovKernel& k, std::size_t max_interior = 5000) : kernel_(&k) {
        const auto& d = k.domain();
        const auto interior = d.interior_ids();
        const auto boundary = d.boundary_ids();
        if (interior.size() > max_interior)
            throw input_error("direct solve limited to " + std::to_string(max_interior) + " interior points (domain has " +
                              std::to_string(interior.size()) + ")");
        local_.assign(d.size(), -1);
        for (std::size_t i = 0; i < interior.size(); ++i) local_[interior[i]] = long(i);
        for (std::size_t b = 0; b < boundary.size(); ++b) local_[boundary[b]] = long(b);

        const long ni = long(interior.size()), nb = long(boundary.size());
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(ni, ni);
        pib_ = Eigen::MatrixXd::Zero(ni, nb);
        for (long i = 0; i < ni; ++i) {
            const auto t = k.targets(interior[i]);
            const auto w = k.weights(interior[i]);
            for (std::size_t e = 0; e < t.size(); ++e) {
                if (d.is_boundary(t[e]))
                    pib_(i, local_[t[e]]) += w[e];
                else
                    a(i, local_[t[e]]) -= w[e];
            }
        }
        lu_.compute(a);
        if (!(lu_.rcond() > 1e-13)) {
            const Eigen::FullPivLU<Eigen::MatrixXd> full(a);
            throw precondition_error("interior system is singular (rank deficiency " + std::to_string(ni - full.rank()) +
                                     "); the kernel has interior states that never reach the boundary");
        }
    }

    /// Exact fixed point with the given boundary values.
    ScalarField solve(const BoundaryData& data) const {
        const auto& d = kernel_->domain();
        const auto boundary = d.boundary_ids();
        const auto interior = d.interior_ids();
        Eigen::MatrixXd f(long(boundary.size()), 2);
        std::vector<Complex> out(d.size());
        for (std::size_t b = 0; b < boundary.size(); ++b) {
            auto it = data.find(boundary[b]);
            if (it == data.end()) throw input_error("boundary data is missing boundary id " + std::to_string(boundary[b]));
            f(long(b), 0) = it->second.real();
            f(long(b), 1) = it->second.imag();
            out[boundary[b]] = it->second;
        }
        for (const auto& [id, v] : data)
            if (id >= d.size() || !d.is_boundary(id))
                throw input_error("boundary data has a value for non-boundary id " + std::to_string(id));
        const Eigen::MatrixXd u = lu_.solve(pib_ * f);
        for (std::size_t i = 0; i < interior.size(); ++i) out[interior[i]] = Complex(u(long(i), 0), u(long(i), 1));
        return ScalarField(kernel_->domain_ptr(), std::move(out));
    }

    /// Row i: hitting probabilities from the i-th interior point onto the
    /// boundary points, columns in boundary_ids() order.
    Eigen::MatrixXd hitting_matrix() const { return lu_.solve(pib_); }

    long local_index(Index p) const { return local_[p]; }

private:
    const MarkovKernel* kernel_;
    std::vector<long> local_;
    Eigen::MatrixXd pib_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

inline ScalarField direct_solve(const MarkovKernel& k, const BoundaryData& data, std::size_t max_interior = 5000) {
    return DirectSolver(k, max_interior).solve(data);
}

/// Boundary id -> probability that the chain started at `interior` is
/// absorbed there. Every boundary id is present (zeros included).
using HittingRow = std::map<Index, double>;

inline HittingRow hitting_distribution(const MarkovKernel& k, Index interior, std::size_t max_interior = 5000) {
    const auto& d = k.domain();
    d.check_id(interior);
    if (d.is_boundary(interior)) throw input_error("point " + std::to_string(interior) + " is not interior");
    const DirectSolver s(k, max_interior);
    const Eigen::MatrixXd h = s.hitting_matrix();
    const auto boundary = d.boundary_ids();
    HittingRow row;
    const long i = s.local_index(interior);
    for (std::size_t b = 0; b < boundary.size(); ++b) row.emplace_hint(row.end(), boundary[b], h(i, long(b)));
    return row;
}

/// All rows at once, keyed by interior id.
inline std::map<Index, HittingRow> hitting_distributions(const MarkovKernel& k, std::size_t max_interior = 5000) {
    const auto& d = k.domain();
    const DirectSolver s(k, max_interior);
    const Eigen::MatrixXd h = s.hitting_matrix();
    const auto boundary = d.boundary_ids();
    std::map<Index, HittingRow> out;
    for (Index x : d.interior_ids()) {
        HittingRow row;
        for (std::size_t b = 0; b < boundary.size(); ++b)
            row.emplace_hint(row.end(), boundary[b], h(s.local_index(x), long(b)));
        out.emplace_hint(out.end(), x, std::move(row));
    }
    return out;
}

/// Largest |eigenvalue| of the interior block, by a dense eigensolver.
inline double dense_spectral_radius(const MarkovKernel& k, std::size_t max_interior = 5000) {
    const auto& d = k.domain();
    const auto interior = d.interior_ids();
    if (interior.size() > max_interior) throw input_error("dense eigenvalue oracle: too many interior points");
    std::vector<long> local(d.size(), -1);
    for (std::size_t i = 0; i < interior.size(); ++i) local[interior[i]] = long(i);
    const long n = long(interior.size());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (long i = 0; i < n; ++i) {
        const auto t = k.targets(interior[i]);
        const auto w = k.weights(interior[i]);
        for (std::size_t e = 0; e < t.size(); ++e)
            if (!d.is_boundary(t[e])) p(i, local[t[e]]) += w[e];
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> es(p, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Boundary samples as (angle, value) pairs, in any order.
using AngularSamples = std::vector<std::pair<double, Complex>>;

/// Poisson integral of the unit disk at polar point (r, theta).
///
/// The samples define a periodic piecewise-linear function of angle (the
/// trapezoid model of the data). Each panel between consecutive nodes is
/// integrated against the Poisson kernel with 8-point Gauss-Legendre, and the
/// result is divided by the same rule applied to f = 1, so constants are
/// reproduced exactly even when the kernel is narrower than a panel.
inline Complex poisson_disk(const AngularSamples& samples, double r, double theta) {
    if (!(r >= 0.0 && r < 1.0)) throw input_error("poisson_disk needs 0 <= r < 1");
    if (samples.empty()) throw input_error("poisson_disk needs boundary samples");
    static constexpr double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                     -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                     0.7966664774136267,  0.9602898564975363};
    static constexpr double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
    AngularSamples s = samples;
    for (auto& [t, v] : s) t = std::remainder(t, 2 * std::numbers::pi);
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    Complex num{};
    double den = 0.0;
    const double r2 = r * r;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& [a, fa] = s[i];
        const auto& [b0, fb] = s[(i + 1) % s.size()];
        const double b = i + 1 < s.size() ? b0 : b0 + 2 * std::numbers::pi;
        const double half = 0.5 * (b - a);
        if (!(half > 0.0)) continue;
        for (int q = 0; q < 8; ++q) {
            const double t = a + half * (1.0 + gx[q]);
            const double w = gw[q] * half;
            const double p = (1.0 - r2) / (1.0 - 2.0 * r * std::cos(theta - t) + r2);
            const double lam = (t - a) / (b - a);
            num += w * p * ((1.0 - lam) * fa + lam * fb);
            den += w * p;
        }
    }
    return num / den;
}

/// Samples of boundary data at boundary-node angles about the domain center.
inline AngularSamples angular_samples(const DiscreteDomain& d, const BoundaryData& data) {
    const Vec2 c = d.descriptor().center;
    AngularSamples s;
    for (Index b : d.boundary_ids()) {
        auto it = data.find(b);
        if (it == data.end()) throw input_error("boundary data is missing boundary id " + std::to_string(b));
        const Vec2 v = sub(d.coords(b), c);
        s.emplace_back(std::atan2(v[1], v[0]), it->second);
    }
    return s;
}

/// Poisson-integral values at every point (boundary points keep their data).
/// Coordinates are taken relative to the domain center.
inline ScalarField poisson_disk_field(const DomainPtr& domain, const BoundaryData& data) {
    const auto& d = *domain;
    const auto s = angular_samples(d, data);
    const Vec2 c = d.descriptor().center;
    std::vector<Complex> out(d.size());
    for (Index b : d.boundary_ids()) out[b] = data.at(b);
    for (Index x : d.interior_ids()) {
        const Vec2 v = sub(d.coords(x), c);
        out[x] = poisson_disk(s, norm(v), std::atan2(v[1], v[0]));
    }
    return ScalarField(domain, std::move(out));
}

} // namespace mdir
