#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "kernel.hpp"

namespace mdir {

/// Outcome of a hypothesis check. passed <=> worst_violation >= -tolerance.
struct ConditionReport {
    std::string condition;
    bool passed = false;
    double worst_violation = 0.0;
    std::optional<Index> witness;
    std::string details;
    nlohmann::json parameters = nlohmann::json::object();
};

inline nlohmann::json to_json(const ConditionReport& r) {
    nlohmann::json j;
    j["condition"] = r.condition;
    j["passed"] = r.passed;
    j["worst_violation"] = r.worst_violation;
    j["witness_id"] = r.witness ? nlohmann::json(*r.witness) : nlohmann::json(nullptr);
    j["details"] = r.details;
    j["parameters"] = r.parameters;
    return j;
}

enum class BarrierTag { supporting_hyperplane, wedge_power, custom };

inline std::string_view to_string(BarrierTag t) {
    switch (t) {
    case BarrierTag::supporting_hyperplane: return "supporting-hyperplane";
    case BarrierTag::wedge_power: return "wedge-power";
    case BarrierTag::custom: return "custom";
    }
    return "custom";
}

inline BarrierTag parse_barrier_tag(std::string_view s) {
    if (s == "supporting-hyperplane") return BarrierTag::supporting_hyperplane;
    if (s == "wedge-power") return BarrierTag::wedge_power;
    if (s == "custom") return BarrierTag::custom;
    throw input_error("unknown barrier tag '" + std::string(s) + "'");
}

/// Candidate witness for the barrier condition at one boundary point:
/// zero at the anchor, strictly negative everywhere else.
struct Barrier {
    ScalarField field;
    Index anchor = 0;
    BarrierTag tag = BarrierTag::custom;
    double beta = 0.0;    // wedge exponent
    double delta = 0.0;   // wedge tilt
    double epsilon = 0.0; // hyperplane perturbation
    std::string details;
};

/// First point breaking the barrier invariants, with its value.
inline std::optional<std::pair<Index, double>> barrier_invariant_violation(const Barrier& b) {
    const auto& f = b.field;
    if (f[b.anchor] != Complex(0.0)) return std::pair{b.anchor, std::abs(f[b.anchor])};
    for (Index i = 0; i < f.size(); ++i) {
        if (f[i].imag() != 0.0) return std::pair{i, std::abs(f[i])};
        if (i != b.anchor && !(f[i].real() < 0.0)) return std::pair{i, f[i].real()};
    }
    return std::nullopt;
}

/// Checks Psi(h) >= h on the interior for a barrier h. Barrier invariant
/// failures are reported first, with worst_violation below -1.
inline ConditionReport verify_condition_A(const MarkovKernel& k, const Barrier& b, double tol = kDefaultTol) {
    if (b.field.domain_ptr() != k.domain_ptr()) throw input_error("barrier and kernel live on different domains");
    if (!(tol > 0.0)) throw input_error("tolerance must be positive");
    ConditionReport r;
    r.condition = "A";
    r.parameters = {{"anchor", b.anchor}, {"barrier", std::string(to_string(b.tag))}, {"beta", b.beta},
                    {"delta", b.delta}, {"epsilon", b.epsilon}, {"tol", tol}, {"kernel", k.builder_tag()}};
    if (auto bad = barrier_invariant_violation(b)) {
        r.passed = false;
        r.worst_violation = -1.0 - std::max(0.0, bad->second);
        r.witness = bad->first;
        r.details = "barrier invariant violated at point " + std::to_string(bad->first) +
                    " (needs h(anchor) = 0 and h < 0 elsewhere)";
        return r;
    }
    const ScalarField ph = apply(k, b.field);
    double worst = std::numeric_limits<double>::infinity();
    Index arg = 0;
    for (Index x : k.domain().interior_ids()) {
        const double gap = ph[x].real() - b.field[x].real();
        if (gap < worst) {
            worst = gap;
            arg = x;
        }
    }
    r.worst_violation = worst;
    r.passed = worst >= -tol;
    if (!r.passed) r.witness = arg;
    r.details = r.passed ? "min over interior of Psi(h) - h is within tolerance"
                         : "Psi(h) < h at interior point " + std::to_string(arg);
    return r;
}

struct BarrierOptions {
    bool perturb = true;                  // hyperplane: allow the -eps d^2 term
    double beta = 0.0;                    // wedge exponent; 0 picks the catalog value
    bool tilt = true;                     // wedge: delta = cos(b t_max) / 2, else 0
    const MarkovKernel* kernel = nullptr; // enables the (A)-aware epsilon search
    double tol = kDefaultTol;
};

/// Catalog barrier at a boundary anchor.
///
/// supporting-hyperplane: h(y) = <n, y - a> - eps * d(y, a)^2 with n the
///   outward normal. eps = 0 when the line touches the domain only at a;
///   otherwise the largest power of ten (from 1 down) that keeps h < 0 off
///   the anchor and, if a kernel is given, still passes condition A.
/// wedge-power: h(y) = -r^b (cos(b t) - delta) in local polar coordinates
///   at a, t = 0 along the inward normal, delta = cos(b t_max) / 2. The
///   tilt makes h strictly subharmonic; without it h is harmonic and the
///   lattice truncation error can push Psi(h) below h. b = 1/2 when the domain lies in the
///   half plane |t| <= pi/2, b = 1/3 when it fits in |t| <= 3pi/4.
///
/// Throws precondition_error when no catalog entry covers the anchor.
inline Barrier make_barrier(const DomainPtr& domain, Index anchor, BarrierTag tag, const BarrierOptions& opt = {}) {
    const auto& d = *domain;
    d.check_id(anchor);
    if (!d.is_boundary(anchor)) throw input_error("barrier anchor " + std::to_string(anchor) + " is not a boundary point");
    const Vec2 a = d.coords(anchor);
    const Vec2 nu = inward_normal(d, anchor);
    const std::string at = " at anchor " + std::to_string(anchor);

    Barrier b{ScalarField(domain), anchor, tag, 0.0, 0.0, 0.0, {}};

    if (tag == BarrierTag::supporting_hyperplane) {
        std::vector<double> plain(d.size());
        std::optional<Index> touching;
        for (Index y = 0; y < d.size(); ++y) {
            plain[y] = -dot(nu, sub(d.coords(y), a));
            if (y == anchor) plain[y] = 0.0;
            if (plain[y] > 1e-12)
                throw precondition_error("domain is not on one side of the supporting line" + at + " (point " +
                                         std::to_string(y) + ")");
            if (y != anchor && !(plain[y] < 0.0) && !touching) touching = y;
        }
        auto fill = [&](double eps) {
            for (Index y = 0; y < d.size(); ++y) {
                const double r = d.metric(y, anchor);
                b.field[y] = y == anchor ? 0.0 : std::min(plain[y], 0.0) - eps * r * r;
            }
            b.epsilon = eps;
        };
        if (!touching) {
            fill(0.0);
            b.details = "strictly supporting line, no perturbation";
            return b;
        }
        if (!opt.perturb)
            throw precondition_error("supporting line vanishes at point " + std::to_string(*touching) + at +
                                     " and perturbation is disabled");
        for (int e = 0; e <= 20; ++e) {
            fill(std::pow(10.0, -e));
            if (barrier_invariant_violation(b)) continue;
            if (opt.kernel && !verify_condition_A(*opt.kernel, b, opt.tol).passed) continue;
            char buf[96];
            std::snprintf(buf, sizeof buf, "perturbed supporting line, epsilon = %.17g", b.epsilon);
            b.details = buf;
            return b;
        }
        throw precondition_error("no perturbation epsilon in [1e-20, 1] gives a valid barrier" + at);
    }

    if (tag == BarrierTag::wedge_power) {
        double tmax = 0.0;
        std::vector<double> radius(d.size()), angle(d.size());
        for (Index y = 0; y < d.size(); ++y) {
            if (y == anchor) continue;
            const Vec2 v = sub(d.coords(y), a);
            radius[y] = norm(v);
            angle[y] = std::atan2(nu[0] * v[1] - nu[1] * v[0], dot(nu, v));
            tmax = std::max(tmax, std::abs(angle[y]));
        }
        double beta = opt.beta;
        if (beta <= 0.0) {
            if (tmax <= std::numbers::pi / 2 + 1e-12)
                beta = 0.5;
            else if (tmax <= 3 * std::numbers::pi / 4 + 1e-12)
                beta = 1.0 / 3.0;
            else
                throw precondition_error("no wedge in the catalog covers the domain" + at);
        }
        if (!(beta * tmax < std::numbers::pi / 2))
            throw precondition_error("wedge exponent too large for the local opening" + at);
        const double delta = opt.tilt ? 0.5 * std::cos(beta * tmax) : 0.0;
        for (Index y = 0; y < d.size(); ++y)
            b.field[y] = y == anchor ? 0.0 : -std::pow(radius[y], beta) * (std::cos(beta * angle[y]) - delta);
        b.beta = beta;
        b.delta = delta;
        char buf[128];
        std::snprintf(buf, sizeof buf, "wedge power beta = %.17g, tilt delta = %.17g, theta = 0 along inward normal",
                      beta, delta);
        b.details = buf;
        return b;
    }
    throw input_error("custom barriers are supplied as fields, not built from the catalog");
}

/// Sufficient graph condition for the maximum principle:
///  (i)   the interior support graph is strongly connected,
///  (ii)  every interior point reaches the boundary through positive weights,
///  (iii) every boundary point receives weight from some interior point.
/// Under these, a real g with Psi(g) >= g and an interior maximum
/// propagates that maximum to every point, so g is constant.
inline ConditionReport verify_condition_B(const MarkovKernel& k) {
    const auto& d = k.domain();
    const auto interior = d.interior_ids();
    const std::size_t n = d.size();
    ConditionReport r;
    r.condition = "B";
    r.parameters = {{"kernel", k.builder_tag()}, {"domain", d.descriptor().tag()}};

    std::vector<std::vector<Index>> reverse(n);
    for (Index x : interior)
        for (Index y : k.targets(x))
            if (y != x) reverse[y].push_back(x);

    auto search = [&](Index start, bool forward) {
        std::vector<char> seen(n, 0);
        std::queue<Index> q;
        seen[start] = 1;
        q.push(start);
        while (!q.empty()) {
            Index x = q.front();
            q.pop();
            auto step = [&](Index y) {
                if (!d.is_boundary(y) && !seen[y]) {
                    seen[y] = 1;
                    q.push(y);
                }
            };
            if (forward)
                for (Index y : k.targets(x)) step(y);
            else
                for (Index y : reverse[x]) step(y);
        }
        return seen;
    };

    std::size_t bad_connect = 0, bad_reach = 0, bad_receive = 0;
    std::optional<Index> w_connect, w_reach, w_receive;

    const auto fwd = search(interior.front(), true);
    const auto bwd = search(interior.front(), false);
    for (Index x : interior)
        if (!fwd[x] || !bwd[x]) {
            ++bad_connect;
            if (!w_connect) w_connect = x;
        }

    std::vector<char> reaches(n, 0);
    std::queue<Index> q;
    for (Index b : d.boundary_ids()) {
        reaches[b] = 1;
        q.push(b);
    }
    while (!q.empty()) {
        Index y = q.front();
        q.pop();
        for (Index x : reverse[y])
            if (!reaches[x]) {
                reaches[x] = 1;
                q.push(x);
            }
    }
    for (Index x : interior)
        if (!reaches[x]) {
            ++bad_reach;
            if (!w_reach) w_reach = x;
        }

    for (Index b : d.boundary_ids())
        if (reverse[b].empty()) {
            ++bad_receive;
            if (!w_receive) w_receive = b;
        }

    const std::size_t total = bad_connect + bad_reach + bad_receive;
    r.passed = total == 0;
    r.worst_violation = -double(total);
    r.witness = w_connect ? w_connect : (w_reach ? w_reach : w_receive);
    r.parameters["interior_strongly_connected"] = bad_connect == 0;
    r.parameters["boundary_reachable"] = bad_reach == 0;
    r.parameters["boundary_charged"] = bad_receive == 0;
    std::string msg;
    if (bad_connect) msg += "interior support graph not strongly connected (" + std::to_string(bad_connect) + " points); ";
    if (bad_reach) msg += "boundary unreachable from " + std::to_string(bad_reach) + " interior points; ";
    if (bad_receive) msg += std::to_string(bad_receive) + " boundary points receive no interior weight; ";
    msg += "an interior maximum of a subinvariant field propagates along positive weights, so these three "
           "conditions force it to be constant";
    r.details = msg;
    return r;
}

/// If the real part of g attains its global maximum at an interior point
/// (within tol) and g is not constant within tol, returns the interior
/// argmax and the spread max - min.
inline std::optional<std::pair<Index, double>> max_principle_violation(const ScalarField& g, double tol = 1e-9) {
    const auto& d = g.domain();
    double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    double imax = -std::numeric_limits<double>::infinity();
    Index arg = 0;
    for (Index i = 0; i < g.size(); ++i) {
        const double v = g[i].real();
        mx = std::max(mx, v);
        mn = std::min(mn, v);
        if (!d.is_boundary(i) && v > imax) {
            imax = v;
            arg = i;
        }
    }
    if (imax >= mx - tol && mx - mn > tol) return std::pair{arg, mx - mn};
    return std::nullopt;
}

/// Samples real subinvariant fields and checks the literal maximum
/// principle on each. Trial t draws uniform values in [-1, 1] on every
/// point (sub-seed rng_seed + t), lifts boundary point t mod |boundary| to
/// 1.5 so every boundary point eventually carries the maximum, and iterates
/// Psi until successive differences fall below 1e-13 (the limit is
/// Psi-invariant, hence subinvariant).
inline ConditionReport empirical_max_principle(const MarkovKernel& k, std::size_t trials, std::uint64_t rng_seed) {
    if (trials < 1) throw input_error("empirical_max_principle needs at least one trial");
    const auto& d = k.domain();
    const auto boundary = d.boundary_ids();
    const std::size_t cap = std::min<std::size_t>(std::max<std::size_t>(1000, 200 * d.interior_count()), 1000000);

    ConditionReport r;
    r.condition = "B-empirical";
    r.worst_violation = 0.0;
    std::size_t triggered = 0, violations = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(rng_seed + t);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<Complex> cur(d.size()), next(d.size());
        for (auto& v : cur) v = dist(rng);
        cur[boundary[t % boundary.size()]] = 1.5;
        for (std::size_t it = 0; it < cap; ++it) {
            apply_into(k, cur, next);
            double diff = 0.0;
            for (std::size_t i = 0; i < cur.size(); ++i) diff = std::max(diff, std::abs(next[i] - cur[i]));
            cur.swap(next);
            if (diff <= 1e-13) break;
        }
        ScalarField g(k.domain_ptr(), cur);
        double imax = -std::numeric_limits<double>::infinity(), mx = imax;
        for (Index i = 0; i < g.size(); ++i) {
            mx = std::max(mx, g[i].real());
            if (!d.is_boundary(i)) imax = std::max(imax, g[i].real());
        }
        if (imax >= mx - 1e-9) ++triggered;
        if (auto v = max_principle_violation(g)) {
            ++violations;
            if (-v->second < r.worst_violation) {
                r.worst_violation = -v->second;
                r.witness = v->first;
            }
        }
    }
    r.passed = violations == 0;
    r.parameters = {{"trials", trials}, {"rng_seed", rng_seed}, {"interior_max_trials", triggered},
                    {"violations", violations}, {"kernel", k.builder_tag()}};
    r.details = r.passed ? "no sampled subinvariant field has a non-constant interior maximum"
                         : "non-constant subinvariant field with an interior maximum at point " +
                               std::to_string(*r.witness);
    return r;
}

} // namespace mdir
