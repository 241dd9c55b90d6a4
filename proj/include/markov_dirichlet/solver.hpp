#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "conditions.hpp"
#include "field.hpp"
#include "kernel.hpp"

namespace mdir {

struct SolveOptions {
    double tol = kDefaultTol;
    std::size_t max_iters = 0; // 0: 100 * interior count, capped at 1e6
    bool force = false;        // iterate kernels failing condition B
};

struct SolveReport {
    ScalarField fixed_point;
    std::size_t iterations = 0;
    std::vector<double> residuals; // sup |Psi^{n+1} F - Psi^n F|
    double contraction_estimate = 0.0;
    bool converged = false;
    bool monotone = true;          // every real-part increment >= -1e-12
    double min_increment = 0.0;    // smallest real-part increment seen
    std::string check_status;      // "passed" or "forced"
    double tol = kDefaultTol;

    /// residual / (1 - rho), the a-posteriori error surrogate (not enforced).
    double error_bound() const {
        if (residuals.empty()) return 0.0;
        if (!(contraction_estimate < 1.0)) return std::numeric_limits<double>::infinity();
        return residuals.back() / (1.0 - contraction_estimate);
    }
};

inline std::size_t default_max_iters(const DiscreteDomain& d) {
    return std::min<std::size_t>(std::max<std::size_t>(100 * d.interior_count(), 1), 1000000);
}

/// Median of successive residual ratios over the last 10 steps.
inline double contraction_from_residuals(const std::vector<double>& res) {
    std::vector<double> ratios;
    const std::size_t first = res.size() > 11 ? res.size() - 11 : 0;
    for (std::size_t i = first + 1; i < res.size(); ++i)
        if (res[i - 1] > 0.0) ratios.push_back(res[i] / res[i - 1]);
    if (ratios.empty()) return 0.0;
    std::sort(ratios.begin(), ratios.end());
    const std::size_t m = ratios.size() / 2;
    return ratios.size() % 2 ? ratios[m] : 0.5 * (ratios[m - 1] + ratios[m]);
}

namespace detail {

inline std::string require_condition_B(const MarkovKernel& k, bool force) {
    const auto b = verify_condition_B(k);
    if (b.passed) return "passed";
    if (force) return "forced";
    throw precondition_error("kernel fails condition B (witness point " + std::to_string(*b.witness) +
                             "): " + b.details + "; rerun with --force to iterate anyway");
}

inline SolveReport run(const MarkovKernel& k, const ScalarField& F, const SolveOptions& opt, bool enforce_monotone) {
    if (F.domain_ptr() != k.domain_ptr()) throw input_error("field and kernel live on different domains");
    if (!(opt.tol > 0.0)) throw input_error("tolerance must be positive");
    const std::size_t cap = opt.max_iters ? opt.max_iters : default_max_iters(k.domain());

    SolveReport rep{F, 0, {}, 0.0, false, true, 0.0, require_condition_B(k, opt.force), opt.tol};
    std::vector<Complex> cur(F.values().begin(), F.values().end()), next(cur.size());
    for (std::size_t n = 1; n <= cap; ++n) {
        apply_into(k, cur, next);
        double r = 0.0, inc = std::numeric_limits<double>::infinity();
        Index worst = 0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            r = std::max(r, std::abs(next[i] - cur[i]));
            const double d = next[i].real() - cur[i].real();
            if (d < inc) {
                inc = d;
                worst = Index(i);
            }
        }
        rep.min_increment = n == 1 ? inc : std::min(rep.min_increment, inc);
        if (inc < -1e-12) {
            rep.monotone = false;
            if (enforce_monotone)
                throw precondition_error("monotonicity violated at step " + std::to_string(n) + ", point " +
                                         std::to_string(worst) + " (increment " + std::to_string(inc) +
                                         "); the starting field is not subinvariant");
        }
        rep.residuals.push_back(r);
        cur.swap(next);
        if (r <= opt.tol) {
            rep.converged = true;
            break;
        }
    }
    rep.iterations = rep.residuals.size();
    rep.contraction_estimate = contraction_from_residuals(rep.residuals);
    rep.fixed_point = ScalarField(F.domain_ptr(), std::move(cur));
    return rep;
}

} // namespace detail

/// Iterates F, Psi F, Psi^2 F, ... until the sup-norm step is <= tol or the
/// iteration cap is hit. Non-convergence is reported, not thrown.
/// Throws precondition_error when the kernel fails condition B and force is off.
inline SolveReport iterate(const MarkovKernel& k, const ScalarField& F, const SolveOptions& opt = {}) {
    return detail::run(k, F, opt, false);
}

/// Fixed point with the given boundary values, iterated from the zero-fill
/// extension. Throws convergence_error if the cap is hit.
inline SolveReport theta_solve(const MarkovKernel& k, const BoundaryData& data, const SolveOptions& opt = {}) {
    auto rep = iterate(k, extend_boundary(data, k.domain_ptr(), ExtensionMode::zero_fill()), opt);
    if (!rep.converged)
        throw convergence_error("theta projection did not converge in " + std::to_string(rep.iterations) + " steps");
    return rep;
}

inline ScalarField theta_projection(const MarkovKernel& k, const BoundaryData& data, const SolveOptions& opt = {}) {
    return std::move(theta_solve(k, data, opt).fixed_point);
}

struct UniquenessResult {
    std::vector<std::string> modes;
    std::vector<SolveReport> runs;
    double max_distance = 0.0;
    std::vector<std::pair<std::string, double>> pairwise; // "a|b" -> sup distance
};

/// Limits from the zero-fill, nearest-boundary and constant max|data|
/// extensions, with their pairwise sup distances.
inline UniquenessResult uniqueness_runs(const MarkovKernel& k, const BoundaryData& data, const SolveOptions& opt = {}) {
    double top = 0.0;
    for (const auto& [id, v] : data) top = std::max(top, std::abs(v));
    const ExtensionMode modes[] = {ExtensionMode::zero_fill(), ExtensionMode::nearest_boundary(),
                                   ExtensionMode::constant(top)};
    UniquenessResult out;
    for (const auto& m : modes) {
        auto rep = iterate(k, extend_boundary(data, k.domain_ptr(), m), opt);
        if (!rep.converged)
            throw convergence_error(m.name() + " extension did not converge in " + std::to_string(rep.iterations) +
                                    " steps");
        out.modes.push_back(m.name());
        out.runs.push_back(std::move(rep));
    }
    for (std::size_t a = 0; a < out.runs.size(); ++a)
        for (std::size_t b = a + 1; b < out.runs.size(); ++b) {
            const double d = sup_distance(out.runs[a].fixed_point, out.runs[b].fixed_point);
            out.pairwise.emplace_back(out.modes[a] + "|" + out.modes[b], d);
            out.max_distance = std::max(out.max_distance, d);
        }
    return out;
}

inline double uniqueness_test(const MarkovKernel& k, const BoundaryData& data, const SolveOptions& opt = {}) {
    return uniqueness_runs(k, data, opt).max_distance;
}

/// Iterates a real subinvariant field. Checks Psi f >= f - 1e-12 up front
/// and at every step; a violation throws precondition_error naming the
/// step and point.
inline SolveReport monotone_run(const MarkovKernel& k, const ScalarField& f, const SolveOptions& opt = {}) {
    if (!f.is_real()) throw input_error("monotone_run is defined for real fields only");
    if (f.domain_ptr() != k.domain_ptr()) throw input_error("field and kernel live on different domains");
    const ScalarField pf = apply(k, f);
    for (Index i = 0; i < f.size(); ++i)
        if (pf[i].real() < f[i].real() - 1e-12)
            throw precondition_error("starting field is not subinvariant at point " + std::to_string(i) +
                                     " (Psi f - f = " + std::to_string(pf[i].real() - f[i].real()) + ")");
    return detail::run(k, f, opt, true);
}

struct ProfilePoint {
    Index id;
    double distance;
    double deviation;
};

/// For every interior y: sup over 1 <= n <= max_n of |Psi^n F(y) - F(anchor)|,
/// paired with d(y, anchor) and sorted by distance (then id).
inline std::vector<ProfilePoint> boundary_equicontinuity_profile(const MarkovKernel& k, const ScalarField& F,
                                                                 Index anchor, std::size_t max_n) {
    const auto& d = k.domain();
    if (F.domain_ptr() != k.domain_ptr()) throw input_error("field and kernel live on different domains");
    d.check_id(anchor);
    if (!d.is_boundary(anchor)) throw input_error("anchor " + std::to_string(anchor) + " is not a boundary point");
    const Complex target = F[anchor];
    std::vector<Complex> cur(F.values().begin(), F.values().end()), next(cur.size());
    std::vector<double> dev(cur.size(), 0.0);
    for (std::size_t n = 1; n <= max_n; ++n) {
        apply_into(k, cur, next);
        cur.swap(next);
        for (Index y : d.interior_ids()) dev[y] = std::max(dev[y], std::abs(cur[y] - target));
    }
    std::vector<ProfilePoint> out;
    for (Index y : d.interior_ids()) out.push_back({y, d.metric(y, anchor), dev[y]});
    std::stable_sort(out.begin(), out.end(), [](const ProfilePoint& a, const ProfilePoint& b) {
        return a.distance < b.distance;
    });
    return out;
}

} // namespace mdir
