// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "markov_dirichlet/markov_dirichlet.hpp"

using namespace mdir;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& what) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << n << ": " << what << std::endl;
    if (!pass) ++failures;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const std::filesystem::path kConfigs = std::filesystem::path(MD_SOURCE_DIR) / "configs";

DomainPtr disk(int n) { return build_domain({Shape::disk, n, {}}); }

MarkovKernel kernel_of(const DomainPtr& d, KernelType t) {
    KernelSpec s;
    s.type = t;
    return build_kernel(d, s);
}

const std::vector<BoundaryPreset> kPresets{BoundaryPreset::constant(1.0), BoundaryPreset::cos_theta(1),
                                           BoundaryPreset::cos_theta(2), BoundaryPreset::coordinate(0),
                                           BoundaryPreset::coordinate(1), BoundaryPreset::indicator()};

std::vector<Index> anchors(const DiscreteDomain& d, std::size_t count) {
    const auto b = d.boundary_ids();
    std::vector<Index> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(b[i * b.size() / count]);
    return out;
}

void criterion1() {
    double err[2] = {0, 0}, seconds = 0.0;
    bool converged = true;
    int i = 0;
    for (int n : {33, 66}) {
        const auto d = disk(n);
        const auto t0 = std::chrono::steady_clock::now();
        const auto k = kernel_of(d, KernelType::grid_walk);
        const auto data = make_boundary_data(BoundaryPreset::cos_theta(1), *d);
        const auto rep = iterate(k, extend_boundary(data, d, ExtensionMode::zero_fill()));
        if (n == 33) seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        converged = converged && rep.converged;
        err[i++] = sup_distance(rep.fixed_point, poisson_disk_field(d, data));
    }
    const double ratio = err[0] / err[1];
    report(1, converged && err[0] <= 0.05 && ratio >= 1.5 && seconds < 10.0,
           "disk cos error " + num(err[0]) + " (<= 0.05) at n=33, " + num(err[1]) + " at n=66, ratio " + num(ratio) +
               " (>= 1.5), n=33 time " + num(seconds) + " s (< 10)");
}

void criterion2() {
    double worst = 0.0;
    std::string where;
    const SolveOptions opt{1e-12};
    for (Shape s : {Shape::disk, Shape::square}) {
        const auto d = build_domain({s, 17, {}});
        const auto k = kernel_of(d, KernelType::grid_walk);
        for (const auto& p : {BoundaryPreset::cos_theta(1), BoundaryPreset::coordinate(0), BoundaryPreset::coordinate(1)}) {
            const double dist = uniqueness_test(k, make_boundary_data(p, *d), opt);
            if (dist > worst) {
                worst = dist;
                // the difference-based stopping rule leaves about tol * rho / (1 - rho) per run
                const double rho = dense_spectral_radius(k);
                where = std::string(to_string(s)) + " " + p.name() + ", tol*rho/(1-rho) = " + num(1e-12 * rho / (1 - rho));
            }
        }
    }
    report(2, worst <= 1e-10, "max uniqueness distance " + num(worst) + " (<= 1e-10) at n=17, worst " + where);
}

void criterion3() {
    double worst = 0.0;
    std::size_t cases = 0;
    std::string where;
    for (const auto& e : std::filesystem::directory_iterator(kConfigs)) {
        const auto c = load_run_config(e.path());
        const auto d = build_domain(c.domain);
        if (d->interior_count() > 2000) continue;
        const auto k = build_kernel(d, c.kernel);
        SolveOptions opt{1e-12};
        opt.force = true;
        const DirectSolver direct(k);
        std::vector<BoundaryPreset> presets = kPresets;
        presets.push_back(c.boundary_data);
        for (const auto& p : presets) {
            const auto data = make_boundary_data(p, *d);
            const auto rep = iterate(k, extend_boundary(data, d, c.extension), opt);
            const double dist = rep.converged ? sup_distance(rep.fixed_point, direct.solve(data)) : INFINITY;
            if (dist > worst || !(dist == dist)) {
                worst = dist;
                where = e.path().filename().string() + " " + p.name();
            }
            ++cases;
        }
    }
    report(3, cases > 0 && worst <= 1e-8,
           std::to_string(cases) + " config/preset cases, max |iterate - direct| " + num(worst) + " (<= 1e-8) at " + where);
}

struct Verified {
    DomainPtr domain;
    std::shared_ptr<MarkovKernel> kernel;
    Barrier barrier;
};

std::vector<Verified> criterion4() {
    std::vector<Verified> ok;
    double worst = INFINITY;
    std::size_t total = 0, passed = 0;
    std::string msg;
    for (KernelType t : {KernelType::grid_walk, KernelType::ball_average}) {
        for (Shape s : {Shape::disk, Shape::square}) {
            const auto d = build_domain({s, 33, {}});
            auto k = std::make_shared<MarkovKernel>(kernel_of(d, t));
            for (Index a : anchors(*d, 8)) {
                ++total;
                try {
                    const BarrierTag tag = s == Shape::disk ? BarrierTag::supporting_hyperplane : BarrierTag::wedge_power;
                    BarrierOptions bo;
                    bo.beta = 0.5;
                    const auto b = make_barrier(d, a, tag, bo);
                    const auto r = verify_condition_A(*k, b, 1e-10);
                    worst = std::min(worst, r.worst_violation);
                    if (r.passed) {
                        ++passed;
                        ok.push_back({d, k, b});
                    } else {
                        msg += " " + std::string(to_string(s)) + "/" + k->builder_tag() + " anchor " + std::to_string(a);
                    }
                } catch (const std::exception& e) {
                    msg += std::string(" ") + e.what();
                }
            }
        }
    }
    report(4, passed == total && worst >= -1e-10,
           std::to_string(passed) + "/" + std::to_string(total) +
               " anchors pass (disk hyperplane, square wedge beta=1/2, both kernels), min Psi h - h " + num(worst) + msg);
    return ok;
}

void criterion5() {
    std::size_t total = 0, passed = 0;
    std::optional<Index> witness;
    bool counter_fails = false;
    for (const auto& e : std::filesystem::directory_iterator(kConfigs)) {
        const auto c = load_run_config(e.path());
        const auto d = build_domain(c.domain);
        const auto r = verify_condition_B(build_kernel(d, c.kernel));
        if (c.kernel.type == KernelType::custom) {
            counter_fails = !r.passed && r.witness.has_value();
            witness = r.witness;
        } else {
            ++total;
            passed += r.passed;
        }
    }
    report(5, total > 0 && passed == total && counter_fails,
           std::to_string(passed) + "/" + std::to_string(total) + " shipped kernels pass; counterexample " +
               (counter_fails ? "fails with witness " + std::to_string(*witness) : std::string("does not fail")));
}

void criterion6(const std::vector<Verified>& barriers) {
    std::size_t good = 0;
    double min_inc = INFINITY;
    for (const auto& v : barriers) {
        try {
            const auto r = monotone_run(*v.kernel, v.barrier.field, {1e-12});
            min_inc = std::min(min_inc, r.min_increment);
            good += r.monotone && r.converged && r.min_increment >= -1e-12;
        } catch (const std::exception&) {
        }
    }
    report(6, !barriers.empty() && good == barriers.size(),
           std::to_string(good) + "/" + std::to_string(barriers.size()) +
               " verified barriers give monotone runs, smallest increment " + num(min_inc) + " (>= -1e-12)");
}

void criterion7() {
    const auto d = disk(33);
    const auto k = kernel_of(d, KernelType::grid_walk);
    const SolveOptions opt{1e-12};
    const auto h = theta_projection(k, make_boundary_data(BoundaryPreset::coordinate(0), *d), opt);
    const auto v = variance_function(k, h, opt);
    double gmin = INFINITY, ratio = INFINITY, oracle_min = INFINITY, least = INFINITY;
    bool boundary_zero = true;
    for (Index b : d->boundary_ids()) boundary_zero = boundary_zero && v.g[b] == Complex(0.0);
    for (Index p = 0; p < d->size(); ++p) least = std::min(least, v.g[p].real());
    const auto rows = hitting_distributions(k);
    for (Index x : d->interior_ids()) {
        double m1 = 0.0, m2 = 0.0;
        for (const auto& [b, p] : rows.at(x)) {
            m1 += p * d->coords(b)[0];
            m2 += p * d->coords(b)[0] * d->coords(b)[0];
        }
        const double oracle = m2 - m1 * m1;
        gmin = std::min(gmin, v.g[x].real());
        oracle_min = std::min(oracle_min, oracle);
        ratio = std::min(ratio, v.g[x].real() / oracle);
    }
    const std::vector<BoundaryData> gens{make_boundary_data(BoundaryPreset::coordinate(0), *d),
                                         make_boundary_data(BoundaryPreset::coordinate(1), *d)};
    const auto vi = vanishing_ideal_check(k, gens, opt);
    report(7, least >= -1e-10 && boundary_zero && gmin >= 0.9 * oracle_min && ratio >= 0.9 && vi.equals_boundary,
           "min g " + num(least) + ", boundary exactly zero " + (boundary_zero ? "yes" : "no") + ", interior min " +
               num(gmin) + " vs oracle " + num(oracle_min) + ", worst pointwise ratio " + num(ratio) +
               ", zero set equals boundary " + (vi.equals_boundary ? "yes" : "no"));
}

void criterion8() {
    const auto d = disk(33);
    std::mt19937_64 rng(20240101);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        std::vector<Complex> a(d->size()), b(d->size());
        for (auto& z : a) z = {u(rng), u(rng)};
        for (auto& z : b) z = {u(rng), u(rng)};
        worst = std::max(worst, polarization_check(ScalarField(d, a), ScalarField(d, b)));
    }
    report(8, worst <= 1e-12, "100 random pairs, max polarization defect " + num(worst) + " (<= 1e-12)");
}

void criterion9() {
    const auto d = disk(17);
    const auto k = kernel_of(d, KernelType::grid_walk);
    const double rho = interior_spectral_bound(k, 5000), dense = dense_spectral_radius(k);
    double worst_norm = 0.0, worst_gap = 0.0;
    std::size_t rated = 0;
    std::string msg;
    // each preset kind at its default parameters
    const std::vector<BoundaryPreset> kinds{BoundaryPreset::constant(1.0), BoundaryPreset::cos_theta(1),
                                            BoundaryPreset::coordinate(0), BoundaryPreset::coordinate(1),
                                            BoundaryPreset::indicator()};
    for (const auto& p : kinds) {
        const auto f = extend_boundary(make_boundary_data(p, *d), d, ExtensionMode::zero_fill());
        const auto r = residual_to_zero_test(k, f, {1e-10});
        worst_norm = std::max(worst_norm, r.final_norm);
        std::size_t nonzero = 0;
        for (double x : r.run.residuals) nonzero += x > 0.0;
        if (nonzero >= 10) {
            ++rated;
            worst_gap = std::max(worst_gap, std::abs(r.run.contraction_estimate - rho));
            msg += " " + p.name() + ":" + num(r.run.contraction_estimate);
        }
    }
    report(9, worst_norm <= 1e-9 && rated > 0 && worst_gap <= 0.05 && std::abs(rho - dense) <= 1e-3,
           "max final norm " + num(worst_norm) + " (<= 1e-9), rho " + num(rho) + " vs dense " + num(dense) +
               ", ratios" + msg + ", max gap " + num(worst_gap) + " (<= 0.05)");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion10() {
    const auto dir = std::filesystem::temp_directory_path() / "md_acceptance_determinism";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream cfg(dir / "config.json");
        cfg << R"({"domain": {"shape": "disk", "n": 66}, "kernel": {"type": "grid-walk"},
                   "boundary_data": "cos-1-theta", "heatmap": {"pixels": 64}, "output_dir": "out"})";
    }
    std::map<std::string, std::string> first;
    bool same = true, ran = true;
    std::size_t files = 0;
    for (const char* threads : {"1", "8"}) {
        const std::string cmd = "cd " + dir.string() + " && MD_THREADS=" + threads + " " + MD_CLI_PATH +
                                " solve --config config.json > /dev/null 2>&1";
        const int st = std::system(cmd.c_str());
        ran = ran && WIFEXITED(st) && WEXITSTATUS(st) == 0;
        std::map<std::string, std::string> now;
        for (const auto& e : std::filesystem::directory_iterator(dir / "out")) now[e.path().filename()] = slurp(e.path());
        if (first.empty()) {
            first = now;
            files = now.size();
            std::filesystem::remove_all(dir / "out");
        } else {
            same = now == first;
        }
    }
    report(10, ran && same && files >= 3,
           "solve on disk n=66 with MD_THREADS=1 and 8: " + std::to_string(files) + " files, " +
               (same ? "byte-identical" : "differ"));
}

} // namespace

int main() {
    const std::pair<int, void (*)()> plain[] = {{1, criterion1}, {2, criterion2}, {3, criterion3}};
    for (const auto& [n, fn] : plain) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(n, false, std::string("exception: ") + e.what());
        }
    }
    std::vector<Verified> barriers;
    try {
        barriers = criterion4();
    } catch (const std::exception& e) {
        report(4, false, std::string("exception: ") + e.what());
    }
    try {
        criterion5();
    } catch (const std::exception& e) {
        report(5, false, std::string("exception: ") + e.what());
    }
    try {
        criterion6(barriers);
    } catch (const std::exception& e) {
        report(6, false, std::string("exception: ") + e.what());
    }
    const std::pair<int, void (*)()> rest[] = {{7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
    for (const auto& [n, fn] : rest) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(n, false, std::string("exception: ") + e.what());
        }
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
