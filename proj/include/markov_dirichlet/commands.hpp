#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "algebra.hpp"
#include "common.hpp"
#include "conditions.hpp"
#include "config.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "oracle.hpp"
#include "solver.hpp"

namespace mdir {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2 };

inline constexpr const char* kAngleConvention = "wedge-power angle theta = 0 along the inward normal at the anchor";

namespace detail {

struct Setup {
    DomainPtr domain;
    MarkovKernel kernel;
};

inline Setup build(const RunConfig& c, int n = 0) {
    DomainSpec spec = c.domain;
    if (n) spec.n = n;
    auto d = build_domain(spec);
    auto k = build_kernel(d, c.kernel);
    return {d, std::move(k)};
}

inline SolveOptions solve_options(const RunConfig& c) { return {c.tolerance, c.max_iters, c.force}; }

inline nlohmann::json header(const RunConfig& c, const std::string& command, const Setup& s) {
    return {{"command", command},
            {"config", c.source},
            {"overrides", c.overrides},
            {"domain", s.domain->descriptor().tag()},
            {"points", s.domain->size()},
            {"interior_points", s.domain->interior_count()},
            {"boundary_points", s.domain->boundary_count()},
            {"kernel", s.kernel.builder_tag()},
            {"tolerance", c.tolerance},
            {"rng_seed", c.rng_seed},
            {"angle_convention", kAngleConvention}};
}

inline nlohmann::json to_json(const SolveReport& r, bool with_residuals = true) {
    nlohmann::json j{{"iterations", r.iterations},
                     {"converged", r.converged},
                     {"monotone", r.monotone},
                     {"min_increment", r.min_increment},
                     {"contraction_estimate", r.contraction_estimate},
                     {"error_bound", r.error_bound()},
                     {"final_residual", r.residuals.empty() ? 0.0 : r.residuals.back()},
                     {"check_status", r.check_status},
                     {"tol", r.tol}};
    if (with_residuals) j["residuals"] = r.residuals;
    return j;
}

/// count ids spread evenly through the boundary list.
inline std::vector<Index> sample_anchors(const DiscreteDomain& d, std::size_t count) {
    const auto b = d.boundary_ids();
    count = std::min(count, b.size());
    std::vector<Index> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(b[i * b.size() / count]);
    return out;
}

/// Catalog barrier for the anchor; "auto" tries the hyperplane first.
inline std::optional<Barrier> pick_barrier(const Setup& s, Index anchor, const std::string& choice, double tol,
                                           std::string& why) {
    BarrierOptions opt;
    opt.kernel = &s.kernel;
    opt.tol = tol;
    std::vector<BarrierTag> order;
    if (choice == "auto")
        order = {BarrierTag::supporting_hyperplane, BarrierTag::wedge_power};
    else
        order = {parse_barrier_tag(choice)};
    for (BarrierTag t : order) {
        try {
            return make_barrier(s.domain, anchor, t, opt);
        } catch (const precondition_error& e) {
            why += std::string(to_string(t)) + ": " + e.what() + "; ";
        }
    }
    return std::nullopt;
}

inline void log_line(std::ostream& log, const std::string& s) { log << s << "\n"; }

} // namespace detail

/// Condition B (graph), the sampled maximum principle and condition A at
/// evenly spaced anchors. Anchors with no catalog barrier are reported as
/// "no barrier found" and do not fail the run.
inline int cmd_check(const RunConfig& c, std::ostream& log) {
    const auto s = detail::build(c);
    auto report = detail::header(c, "check", s);
    const auto b = verify_condition_B(s.kernel);
    const auto emp = empirical_max_principle(s.kernel, c.check.trials, c.rng_seed);
    report["condition_B"] = to_json(b);
    report["empirical_max_principle"] = to_json(emp);

    bool ok = b.passed && emp.passed;
    std::size_t verified = 0, missing = 0;
    nlohmann::json anchors = nlohmann::json::array();
    for (Index a : detail::sample_anchors(*s.domain, c.check.anchors)) {
        std::string why;
        auto barrier = detail::pick_barrier(s, a, c.check.barrier, c.tolerance, why);
        nlohmann::json entry{{"anchor", a}, {"x", s.domain->coords(a)[0]}, {"y", s.domain->coords(a)[1]}};
        if (!barrier) {
            ++missing;
            entry["status"] = "no barrier found";
            entry["details"] = why;
        } else {
            const auto r = verify_condition_A(s.kernel, *barrier, c.tolerance);
            entry["status"] = r.passed ? "verified" : "failed";
            entry["barrier_details"] = barrier->details;
            entry["report"] = to_json(r);
            if (r.passed) ++verified;
            ok = ok && r.passed;
        }
        anchors.push_back(entry);
    }
    report["condition_A"] = anchors;
    report["passed"] = ok;
    write_text(c.output_dir / "check_report.json", to_json_text(report));

    detail::log_line(log, std::string("condition B: ") + (b.passed ? "pass" : "FAIL") +
                              (b.witness ? " (witness " + std::to_string(*b.witness) + ")" : ""));
    detail::log_line(log, std::string("empirical maximum principle: ") + (emp.passed ? "pass" : "FAIL"));
    detail::log_line(log, "condition A: " + std::to_string(verified) + " anchors verified, " + std::to_string(missing) +
                              " without a catalog barrier");
    return ok ? exit_ok : exit_failure;
}

/// Iterates the configured extension to its fixed point and writes the
/// field, report, residuals and optional heatmap.
inline int cmd_solve(const RunConfig& c, std::ostream& log) {
    const auto s = detail::build(c);
    const auto data = make_boundary_data(c.boundary_data, *s.domain);
    const auto F = extend_boundary(data, s.domain, c.extension);
    const auto rep = iterate(s.kernel, F, detail::solve_options(c));

    auto report = detail::header(c, "solve", s);
    report["boundary_data"] = c.boundary_data.name();
    report["extension"] = c.extension.name();
    report["max_iters"] = c.max_iters ? c.max_iters : default_max_iters(*s.domain);
    report["solve"] = detail::to_json(rep);
    report["files"] = {{"field", "fixed_point.csv"}, {"residuals", "residuals.csv"}};
    if (c.heatmap_pixels) {
        HeatmapInfo info;
        write_text(c.output_dir / "heatmap.pgm", heatmap_pgm(rep.fixed_point, c.heatmap_pixels, info));
        report["heatmap"] = to_json(info);
        report["files"]["heatmap"] = "heatmap.pgm";
    }
    write_text(c.output_dir / "fixed_point.csv", field_csv(rep.fixed_point));
    write_text(c.output_dir / "residuals.csv", residuals_csv(rep.residuals));
    write_text(c.output_dir / "solve_report.json", to_json_text(report));

    char buf[160];
    std::snprintf(buf, sizeof buf, "%s after %zu iterations, final residual %.3e, check %s",
                  rep.converged ? "converged" : "NOT converged", rep.iterations,
                  rep.residuals.empty() ? 0.0 : rep.residuals.back(), rep.check_status.c_str());
    detail::log_line(log, buf);
    return rep.converged ? exit_ok : exit_failure;
}

/// Uniqueness, boundary equicontinuity, residual decay and refinement tables.
inline int cmd_study(const RunConfig& c, std::ostream& log) {
    const auto s = detail::build(c);
    const auto opt = detail::solve_options(c);
    const auto data = make_boundary_data(c.boundary_data, *s.domain);
    auto report = detail::header(c, "study", s);
    report["boundary_data"] = c.boundary_data.name();

    // (a) uniqueness across extension modes
    const auto u = uniqueness_runs(s.kernel, data, opt);
    CsvTable uniq({"extension_mode", "iterations", "final_residual", "sup_distance_to_zero_fill"});
    for (std::size_t i = 0; i < u.runs.size(); ++i)
        uniq.row({u.modes[i], std::to_string(u.runs[i].iterations), fmt17(u.runs[i].residuals.back()),
                  fmt17(sup_distance(u.runs[i].fixed_point, u.runs[0].fixed_point))});
    nlohmann::json pairs = nlohmann::json::object();
    for (const auto& [name, dist] : u.pairwise) pairs[name] = dist;
    report["uniqueness"] = {{"max_pairwise_distance", u.max_distance}, {"pairwise", pairs}};

    // (b) equicontinuity profile at sampled anchors
    const auto F = extend_boundary(data, s.domain, c.extension);
    CsvTable equi({"anchor", "id", "distance", "deviation"});
    nlohmann::json nearest = nlohmann::json::array();
    for (Index a : detail::sample_anchors(*s.domain, c.study.anchors)) {
        const auto prof = boundary_equicontinuity_profile(s.kernel, F, a, c.study.max_n);
        for (const auto& p : prof)
            equi.row({std::to_string(a), std::to_string(p.id), fmt17(p.distance), fmt17(p.deviation)});
        nearest.push_back({{"anchor", a}, {"nearest_distance", prof.front().distance},
                           {"nearest_deviation", prof.front().deviation}});
    }
    report["equicontinuity"] = {{"max_n", c.study.max_n}, {"nearest", nearest}};

    // (c) residual decay of the zero-fill run
    const auto& run = u.runs[0];
    CsvTable decay({"n", "residual", "ratio"});
    for (std::size_t i = 0; i < run.residuals.size(); ++i)
        decay.row({std::to_string(i + 1), fmt17(run.residuals[i]),
                   i && run.residuals[i - 1] > 0.0 ? fmt17(run.residuals[i] / run.residuals[i - 1]) : ""});
    const double rho = interior_spectral_bound(s.kernel, 5000);
    report["residual_decay"] = {{"contraction_estimate", run.contraction_estimate}, {"interior_spectral_bound", rho},
                                {"difference", std::abs(run.contraction_estimate - rho)}};

    // (d) refinement against each resolution's own oracle
    std::vector<int> ns = c.study.resolutions;
    if (ns.empty()) ns = {c.domain.n, 2 * c.domain.n};
    CsvTable refine({"n", "interior_points", "solver_vs_direct", "direct_vs_poisson"});
    nlohmann::json rows = nlohmann::json::array();
    for (int n : ns) {
        const auto sn = c.domain.shape == Shape::custom ? detail::build(c) : detail::build(c, n);
        const auto dn = make_boundary_data(c.boundary_data, *sn.domain);
        const auto it = iterate(sn.kernel, extend_boundary(dn, sn.domain, ExtensionMode::zero_fill()), opt);
        if (!it.converged) throw convergence_error("refinement run at n = " + std::to_string(n) + " did not converge");
        const auto exact = direct_solve(sn.kernel, dn, c.max_interior);
        const double e1 = sup_distance(it.fixed_point, exact);
        std::string e2;
        nlohmann::json row{{"n", n}, {"interior_points", sn.domain->interior_count()}, {"solver_vs_direct", e1}};
        if (c.domain.shape == Shape::disk) {
            const auto p = poisson_disk_field(sn.domain, dn);
            double e = 0.0;
            for (Index x : sn.domain->interior_ids()) e = std::max(e, std::abs(exact[x] - p[x]));
            e2 = fmt17(e);
            row["direct_vs_poisson"] = e;
        }
        refine.row({std::to_string(n), std::to_string(sn.domain->interior_count()), fmt17(e1), e2});
        rows.push_back(row);
    }
    report["refinement"] = rows;
    report["files"] = {{"uniqueness", "uniqueness.csv"}, {"equicontinuity", "equicontinuity.csv"},
                       {"residual_decay", "residual_decay.csv"}, {"refinement", "refinement.csv"}};

    write_text(c.output_dir / "uniqueness.csv", uniq.text());
    write_text(c.output_dir / "equicontinuity.csv", equi.text());
    write_text(c.output_dir / "residual_decay.csv", decay.text());
    write_text(c.output_dir / "refinement.csv", refine.text());
    write_text(c.output_dir / "study_report.json", to_json_text(report));

    char buf[200];
    std::snprintf(buf, sizeof buf, "uniqueness distance %.3e; contraction %.6f vs spectral bound %.6f", u.max_distance,
                  run.contraction_estimate, rho);
    detail::log_line(log, buf);
    return exit_ok;
}

/// Polarization, variance fields, vanishing ideal and the convergence-to-zero
/// form. Exit 0 iff every property holds at its stated tolerance.
inline int cmd_algebra(const RunConfig& c, std::ostream& log) {
    const auto s = detail::build(c);
    const auto opt = detail::solve_options(c);
    std::vector<BoundaryData> gens;
    for (const auto& g : c.algebra.generators) {
        gens.push_back(make_boundary_data(g, *s.domain));
        if (is_constant(gens.back()))
            throw input_error("generator '" + g.name() + "' is constant; its variance field carries no information");
    }
    auto report = detail::header(c, "algebra", s);
    bool ok = true;

    // polarization on fixed and random pairs
    std::mt19937_64 rng(c.rng_seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto random_field = [&] {
        std::vector<Complex> v(s.domain->size());
        for (auto& z : v) {
            const double re = dist(rng);
            z = Complex(re, dist(rng));
        }
        return ScalarField(s.domain, std::move(v));
    };
    double pol = std::max(polarization_check(ScalarField::constant(s.domain, 1.0), ScalarField::constant(s.domain, 1.0)),
                          polarization_check(ScalarField::constant(s.domain, Complex(0, 1)),
                                             ScalarField::constant(s.domain, 1.0)));
    for (std::size_t i = 0; i < c.algebra.pairs; ++i) {
        const auto a = random_field();
        const auto b = random_field();
        pol = std::max(pol, polarization_check(a, b));
    }
    const bool pol_ok = pol <= 1e-12;
    ok = ok && pol_ok;
    report["polarization"] = {{"pairs", c.algebra.pairs + 2}, {"max_residual", pol}, {"bound", 1e-12}, {"passed", pol_ok}};

    // variance fields, product projection and the vanishing ideal
    nlohmann::json variance = nlohmann::json::array();
    std::optional<VanishingIdealReport> vi;
    try {
        vi = vanishing_ideal_check(s.kernel, gens, opt);
    } catch (const invariant_error& e) {
        ok = false;
        report["variance_error"] = e.what();
    }
    if (vi) {
        for (std::size_t i = 0; i < vi->fields.size(); ++i) {
            const auto& g = vi->fields[i].g;
            const ScalarField h = theta_projection(s.kernel, gens[i], opt);
            const double pp = product_projection_test(s.kernel, h, h, opt);
            const double sup_g = sup_norm(g);
            const bool pp_ok = std::abs(pp - sup_g) <= 1e-8;
            ok = ok && pp_ok;
            double gmin = INFINITY;
            for (Index x : s.domain->interior_ids()) gmin = std::min(gmin, g[x].real());
            const std::string file = "variance_" + std::to_string(i) + ".csv";
            write_text(c.output_dir / file, field_csv(g));
            variance.push_back({{"generator", c.algebra.generators[i].name()}, {"min_interior", gmin}, {"sup", sup_g},
                                {"product_projection", pp}, {"product_matches_variance", pp_ok}, {"file", file}});
        }
        const bool vi_ok = vi->equals_boundary;
        ok = ok && vi_ok;
        report["vanishing_ideal"] = {{"equals_boundary", vi->equals_boundary},
                                     {"zero_set_size", vi->zero_set.size()},
                                     {"interior_zeros", vi->interior_zeros},
                                     {"boundary_missed", vi->boundary_missed},
                                     {"min_interior_variance", vi->min_interior_variance},
                                     {"zero_tol", vi->zero_tol},
                                     {"variance_error_estimate", vi->solve_error}};
    }
    report["variance_fields"] = variance;

    // convergence to zero of f - theta(f) for the configured data
    const auto data = make_boundary_data(c.boundary_data, *s.domain);
    const auto rz = residual_to_zero_test(s.kernel, extend_boundary(data, s.domain, ExtensionMode::zero_fill()), opt);
    const bool rz_ok = rz.run.converged && rz.final_norm <= c.tolerance;
    ok = ok && rz_ok;
    report["residual_to_zero"] = {{"boundary_data", c.boundary_data.name()},
                                  {"initial_norm", rz.initial_norm},
                                  {"final_norm", rz.final_norm},
                                  {"iterations", rz.run.iterations},
                                  {"contraction_estimate", rz.run.contraction_estimate},
                                  {"passed", rz_ok}};
    report["passed"] = ok;
    write_text(c.output_dir / "algebra_report.json", to_json_text(report));

    char buf[200];
    std::snprintf(buf, sizeof buf, "polarization %.3e; zero set %s; residual-to-zero final %.3e", pol,
                  vi ? (vi->equals_boundary ? "equals the boundary" : "DIFFERS from the boundary") : "not computed",
                  rz.final_norm);
    detail::log_line(log, buf);
    if (vi && !vi->interior_zeros.empty())
        detail::log_line(log, "interior zero-set witness: point " + std::to_string(vi->interior_zeros.front()));
    return ok ? exit_ok : exit_failure;
}

/// Dispatches a command; maps errors to exit codes 1 (property or
/// convergence failure) and 2 (usage or config error).
inline int run_command(const std::string& name, const std::filesystem::path& config, const Overrides& o,
                       std::ostream& log, std::ostream& err) {
    RunConfig c;
    try {
        c = load_run_config(config, o);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
    try {
        if (name == "check") return cmd_check(c, log);
        if (name == "solve") return cmd_solve(c, log);
        if (name == "study") return cmd_study(c, log);
        if (name == "algebra") return cmd_algebra(c, log);
        err << "error: unknown command '" << name << "'\n";
        return exit_usage;
    } catch (const input_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return exit_failure;
    }
}

} // namespace mdir
