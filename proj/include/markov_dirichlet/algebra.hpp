#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "common.hpp"
#include "field.hpp"
#include "kernel.hpp"
#include "solver.hpp"

namespace mdir {

/// g = theta(|h|^2) - |h|^2 for a fixed point h. Real, >= 0, zero on the
/// boundary, and superinvariant (Psi g <= g).
struct VarianceField {
    ScalarField g;
    std::string source;
    double solve_error = 0.0; // a-posteriori bound of the theta(|h|^2) solve
};

namespace detail {

inline void require_invariant(const MarkovKernel& k, const ScalarField& h, double tol, const char* name) {
    const double res = sup_distance(apply(k, h), h);
    if (res > 10.0 * tol)
        throw precondition_error(std::string(name) + " is not invariant: sup |Psi h - h| = " + std::to_string(res) +
                                 " exceeds 10 * tol = " + std::to_string(10.0 * tol));
}

} // namespace detail

/// Throws precondition_error if h is not invariant within 10 * tol and
/// invariant_error if the result breaks g >= -1e-10, g|boundary = 0 or
/// Psi g <= g + 1e-10.
inline VarianceField variance_function(const MarkovKernel& k, const ScalarField& h, const SolveOptions& opt = {},
                                       std::string source = "h") {
    if (h.domain_ptr() != k.domain_ptr()) throw input_error("field and kernel live on different domains");
    detail::require_invariant(k, h, opt.tol, "h");
    const ScalarField sq = squared_modulus(h);
    const SolveReport theta = theta_solve(k, restrict_boundary(sq), opt);
    ScalarField g = theta.fixed_point - sq;
    const auto& d = k.domain();
    for (Index i = 0; i < g.size(); ++i) {
        if (d.is_boundary(i) && g[i] != Complex(0.0))
            throw invariant_error("variance field is not zero at boundary point " + std::to_string(i));
        if (g[i].real() < -1e-10)
            throw invariant_error("variance field is negative at point " + std::to_string(i) + " (" +
                                  std::to_string(g[i].real()) + ")");
    }
    const ScalarField pg = apply(k, g);
    for (Index i = 0; i < g.size(); ++i)
        if (pg[i].real() > g[i].real() + 1e-10)
            throw invariant_error("variance field is not superinvariant at point " + std::to_string(i));
    return {std::move(g), std::move(source), std::max(opt.tol, theta.error_bound())};
}

/// sup | h1 h2 - (1/4) sum_m i^m |h1 + i^m conj(h2)|^2 |, rounding-level.
inline double polarization_check(const ScalarField& h1, const ScalarField& h2) {
    h1.require_same(h2);
    static const Complex unit[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    double worst = 0.0;
    for (std::size_t p = 0; p < h1.size(); ++p) {
        Complex sum{};
        for (const Complex& im : unit) sum += im * std::norm(h1[p] + im * std::conj(h2[p]));
        worst = std::max(worst, std::abs(h1[p] * h2[p] - 0.25 * sum));
    }
    return worst;
}

/// theta(h1 h2 restricted to the boundary) - h1 h2; zero on the boundary.
inline ScalarField product_projection_field(const MarkovKernel& k, const ScalarField& h1, const ScalarField& h2,
                                            const SolveOptions& opt = {}) {
    h1.require_same(h2);
    if (h1.domain_ptr() != k.domain_ptr()) throw input_error("field and kernel live on different domains");
    detail::require_invariant(k, h1, opt.tol, "h1");
    detail::require_invariant(k, h2, opt.tol, "h2");
    const ScalarField p = product(h1, h2);
    return theta_projection(k, restrict_boundary(p), opt) - p;
}

inline double product_projection_test(const MarkovKernel& k, const ScalarField& h1, const ScalarField& h2,
                                      const SolveOptions& opt = {}) {
    return sup_norm(product_projection_field(k, h1, h2, opt));
}

struct VanishingIdealReport {
    std::vector<Index> zero_set;       // points where every variance field is <= zero_tol
    bool equals_boundary = false;
    std::vector<Index> interior_zeros; // interior witnesses
    std::vector<Index> boundary_missed;
    double min_interior_variance = 0.0; // min over interior of max over generators
    double zero_tol = 0.0;
    double solve_error = 0.0;           // largest error estimate of a variance field
    std::vector<VarianceField> fields;
};

/// Common zero set of the variance fields of theta(generator). Constant
/// generators are rejected with input_error.
///
/// zero_tol <= 0 selects 10 times the estimated error of a variance field,
/// never less than 10 * tol. The estimate combines the a-posteriori bounds
/// residual / (1 - rho) of the two solves behind g = theta(|h|^2) - |h|^2:
/// e_g + 2 |h|_sup e_h. With a difference-based stopping rule the true error
/// is about tol / (1 - rho), which a fixed 10 * tol misses on slowly mixing
/// chains.
inline VanishingIdealReport vanishing_ideal_check(const MarkovKernel& k, const std::vector<BoundaryData>& generators,
                                                  const SolveOptions& opt = {}, double zero_tol = 0.0) {
    if (generators.empty()) throw input_error("vanishing_ideal_check needs at least one generator");
    for (std::size_t i = 0; i < generators.size(); ++i)
        if (is_constant(generators[i]))
            throw input_error("generator " + std::to_string(i) + " is constant; its variance field carries no information");
    VanishingIdealReport rep;
    const auto& d = k.domain();
    std::vector<double> top(d.size(), -std::numeric_limits<double>::infinity());
    rep.solve_error = opt.tol;
    for (std::size_t i = 0; i < generators.size(); ++i) {
        const SolveReport h = theta_solve(k, generators[i], opt);
        rep.fields.push_back(variance_function(k, h.fixed_point, opt, "generator " + std::to_string(i)));
        const auto& g = rep.fields.back().g;
        const double e_h = std::max(opt.tol, h.error_bound());
        rep.solve_error = std::max(rep.solve_error, rep.fields.back().solve_error + 2.0 * sup_norm(h.fixed_point) * e_h);
        for (Index p = 0; p < d.size(); ++p) top[p] = std::max(top[p], g[p].real());
    }
    rep.zero_tol = zero_tol > 0.0 ? zero_tol : 10.0 * rep.solve_error;
    rep.min_interior_variance = std::numeric_limits<double>::infinity();
    for (Index p = 0; p < d.size(); ++p) {
        const bool zero = top[p] <= rep.zero_tol;
        if (zero) rep.zero_set.push_back(p);
        if (d.is_boundary(p) && !zero) rep.boundary_missed.push_back(p);
        if (!d.is_boundary(p)) {
            if (zero) rep.interior_zeros.push_back(p);
            rep.min_interior_variance = std::min(rep.min_interior_variance, top[p]);
        }
    }
    rep.equals_boundary = rep.interior_zeros.empty() && rep.boundary_missed.empty();
    return rep;
}

struct ResidualToZeroReport {
    SolveReport run;          // residuals are successive differences
    std::vector<double> norms; // sup |Psi^n g|, n >= 1
    double initial_norm = 0.0;
    double final_norm = 0.0;
};

/// g = f - theta(f restricted to the boundary) vanishes on the boundary, so
/// Psi^n g -> 0. The limit is known, so the run stops once both sup |Psi^n g|
/// and the last step are <= tol; converged reports exactly that.
inline ResidualToZeroReport residual_to_zero_test(const MarkovKernel& k, const ScalarField& f,
                                                  const SolveOptions& opt = {}) {
    if (f.domain_ptr() != k.domain_ptr()) throw input_error("field and kernel live on different domains");
    const ScalarField g = f - theta_projection(k, restrict_boundary(f), opt);
    const std::size_t cap = opt.max_iters ? opt.max_iters : default_max_iters(k.domain());

    ResidualToZeroReport rep{SolveReport{g, 0, {}, 0.0, false, true, 0.0, detail::require_condition_B(k, opt.force), opt.tol},
                             {}, sup_norm(g), sup_norm(g)};
    std::vector<Complex> cur(g.values().begin(), g.values().end()), next(cur.size());
    auto& run = rep.run;
    if (rep.initial_norm <= opt.tol) {
        run.residuals.push_back(sup_distance(apply(k, g), g));
        rep.norms.push_back(rep.initial_norm);
        run.converged = run.residuals.back() <= opt.tol;
    }
    for (std::size_t n = 1; !run.converged && n <= cap; ++n) {
        apply_into(k, cur, next);
        double r = 0.0, nrm = 0.0, inc = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cur.size(); ++i) {
            r = std::max(r, std::abs(next[i] - cur[i]));
            nrm = std::max(nrm, std::abs(next[i]));
            inc = std::min(inc, next[i].real() - cur[i].real());
        }
        run.min_increment = n == 1 ? inc : std::min(run.min_increment, inc);
        if (inc < -1e-12) run.monotone = false;
        run.residuals.push_back(r);
        rep.norms.push_back(nrm);
        cur.swap(next);
        run.converged = nrm <= opt.tol && r <= opt.tol;
    }
    run.iterations = run.residuals.size();
    run.contraction_estimate = contraction_from_residuals(run.residuals);
    rep.final_norm = rep.norms.empty() ? rep.initial_norm : rep.norms.back();
    run.fixed_point = ScalarField(f.domain_ptr(), std::move(cur));
    return rep;
}

} // namespace mdir
