#include <functional>

#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace testutil;

TEST(Direct, ConstantDataGivesConstant) {
    const auto d = domain(Shape::annulus, 17);
    BoundaryData c;
    for (Index b : d->boundary_ids()) c[b] = Complex(2, 1);
    const auto u = direct_solve(walk(d), c);
    for (Index x = 0; x < d->size(); ++x) EXPECT_LT(std::abs(u[x] - Complex(2, 1)), 1e-12);
}

TEST(Direct, SingleInteriorPoint) {
    const auto d = domain(Shape::square, 3);
    const auto k = walk(d);
    BoundaryData e;
    for (Index b : d->boundary_ids()) e[b] = 0.0;
    e[d->boundary_ids()[2]] = 1.0;
    EXPECT_DOUBLE_EQ(direct_solve(k, e)[d->interior_ids()[0]].real(), 0.25);
    const auto row = hitting_distribution(k, d->interior_ids()[0]);
    for (const auto& [b, p] : row) EXPECT_DOUBLE_EQ(p, 0.25);
    EXPECT_THROW(hitting_distribution(k, d->boundary_ids()[0]), input_error);
}

TEST(Direct, HittingRowsAreProbabilities) {
    const auto d = domain(Shape::disk, 17);
    const auto rows = hitting_distributions(walk(d));
    EXPECT_EQ(rows.size(), d->interior_count());
    for (const auto& [x, row] : rows) {
        double s = 0.0;
        for (const auto& [b, p] : row) {
            EXPECT_GE(p, -1e-15);
            s += p;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    // from the center the exit law is close to uniform arc length
    const auto& center = rows.at(find_point(*d, 0.0, 0.0));
    double mx = 0.0, mn = 1.0;
    for (const auto& [b, p] : center) {
        mx = std::max(mx, p);
        mn = std::min(mn, p);
    }
    EXPECT_GT(mn, 0.0);
    EXPECT_LE(mx / mn, 3.0);
}

TEST(Direct, SingularSystemReported) {
    const auto d = domain(Shape::square, 5);
    std::vector<std::vector<KernelEntry>> rows(d->size());
    for (Index b : d->boundary_ids()) rows[b] = {{b, 1.0}};
    // interior points only talk to each other: no exit
    const auto in = d->interior_ids();
    for (std::size_t i = 0; i < in.size(); ++i) rows[in[i]] = {{in[(i + 1) % in.size()], 1.0}};
    const auto k = MarkovKernel::from_rows(d, std::move(rows), "closed");
    try {
        DirectSolver s(k);
        ADD_FAILURE();
    } catch (const precondition_error& e) {
        EXPECT_NE(std::string(e.what()).find("rank deficiency 1"), std::string::npos) << e.what();
    }
    EXPECT_THROW(DirectSolver(walk(d), 2), input_error);
}

TEST(Spectral, PowerIterationMatchesDenseEigenvalues) {
    const auto d = domain(Shape::disk, 17);
    const auto k = walk(d);
    const double dense = dense_spectral_radius(k);
    EXPECT_NEAR(interior_spectral_bound(k, 4000), dense, 1e-3);
    EXPECT_LT(dense, 1.0);
    EXPECT_EQ(dense_spectral_radius(walk(domain(Shape::square, 3))), 0.0);
}

namespace {

AngularSamples uniform_samples(std::size_t m, const std::function<Complex(double)>& f) {
    AngularSamples s;
    for (std::size_t i = 0; i < m; ++i) {
        const double t = 2 * std::numbers::pi * double(i) / double(m) - std::numbers::pi;
        s.emplace_back(t, f(t));
    }
    return s;
}

} // namespace

TEST(Poisson, ReproducesHarmonicPolynomials) {
    const auto c = uniform_samples(64, [](double) { return Complex(3.0, -1.0); });
    EXPECT_LT(std::abs(poisson_disk(c, 0.9, 1.0) - Complex(3.0, -1.0)), 1e-14);
    const auto s1 = uniform_samples(4096, [](double t) { return Complex(std::cos(t)); });
    EXPECT_NEAR(poisson_disk(s1, 0.5, 0.0).real(), 0.5, 1e-6);
    const auto s2 = uniform_samples(4096, [](double t) { return Complex(std::cos(2 * t)); });
    EXPECT_NEAR(poisson_disk(s2, 0.5, 0.0).real(), 0.25, 1e-6);
    EXPECT_NEAR(poisson_disk(s2, 0.5, std::numbers::pi / 2).real(), -0.25, 1e-6);
    EXPECT_NEAR(poisson_disk(s2, 0.0, 0.3).real(), 0.0, 1e-6);
    EXPECT_THROW(poisson_disk(s1, 1.0, 0.0), input_error);
    EXPECT_THROW(poisson_disk({}, 0.5, 0.0), input_error);
}

TEST(Poisson, DiscreteSolutionApproachesTheIntegral) {
    const auto d = domain(Shape::disk, 33);
    const auto k = walk(d);
    const auto data = cos_theta(*d, 2);
    const double err = sup_distance(direct_solve(k, data), poisson_disk_field(d, data));
    EXPECT_LT(err, 0.02);
    EXPECT_GT(err, 0.0);
}
