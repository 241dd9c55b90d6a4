#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "markov_dirichlet/markov_dirichlet.hpp"

namespace testutil {

using namespace mdir;

inline DomainPtr domain(Shape s, int n) { return build_domain({s, n, {}}); }

inline MarkovKernel walk(const DomainPtr& d, double lazy = 0.0) {
    KernelSpec k;
    k.lazy = lazy;
    return build_kernel(d, k);
}

inline MarkovKernel ball(const DomainPtr& d, double lambda = 0.5) {
    KernelSpec k;
    k.type = KernelType::ball_average;
    k.lambda = lambda;
    return build_kernel(d, k);
}

inline std::filesystem::path source_dir() { return MD_SOURCE_DIR; }
inline std::filesystem::path data_file(const std::string& name) { return source_dir() / "data" / name; }
inline std::filesystem::path config_file(const std::string& name) { return source_dir() / "configs" / name; }

inline DomainPtr two_squares() { return load_domain_file(data_file("two_squares_domain.json")); }
inline MarkovKernel two_squares_kernel(const DomainPtr& d) {
    return load_kernel_file(d, data_file("two_squares_kernel.json"));
}

/// Boundary data from a function of the boundary coordinates.
template <typename Fn>
BoundaryData data_from(const DiscreteDomain& d, Fn fn) {
    BoundaryData out;
    for (Index b : d.boundary_ids()) out[b] = Complex(fn(d.coords(b)));
    return out;
}

inline BoundaryData cos_theta(const DiscreteDomain& d, int k = 1) {
    const Vec2 c = d.descriptor().center;
    return data_from(d, [&](const Vec2& p) { return std::cos(k * std::atan2(p[1] - c[1], p[0] - c[0])); });
}

inline ScalarField random_complex(const DomainPtr& d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Complex> v(d->size());
    for (auto& z : v) {
        const double re = u(rng);
        z = Complex(re, u(rng));
    }
    return ScalarField(d, std::move(v));
}

inline Index find_point(const DiscreteDomain& d, double x, double y) {
    for (Index i = 0; i < d.size(); ++i)
        if (std::abs(d.coords(i)[0] - x) < 1e-12 && std::abs(d.coords(i)[1] - y) < 1e-12) return i;
    throw std::runtime_error("no point at the requested coordinates");
}

inline std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("md_tests_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testutil
