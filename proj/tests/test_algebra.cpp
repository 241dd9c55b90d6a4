#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace testutil;

TEST(Variance, ConstantHasNoVariance) {
    const auto d = domain(Shape::disk, 17);
    const auto v = variance_function(walk(d), ScalarField::constant(d, Complex(1, 2)), {1e-12});
    EXPECT_LT(sup_norm(v.g), 1e-9);
}

TEST(Variance, SingleInteriorPointByHand) {
    const auto d = domain(Shape::square, 3);
    BoundaryData data;
    for (Index b : d->boundary_ids()) data[b] = 0.0;
    data[d->boundary_ids()[0]] = 1.0;
    const auto k = walk(d);
    const auto v = variance_function(k, theta_projection(k, data), {1e-12});
    // E|f|^2 - |E f|^2 = 1/4 - 1/16
    EXPECT_DOUBLE_EQ(v.g[d->interior_ids()[0]].real(), 3.0 / 16.0);
    for (Index b : d->boundary_ids()) EXPECT_EQ(v.g[b], Complex(0.0));
}

TEST(Variance, MatchesHittingDistributionVariance) {
    const auto d = domain(Shape::disk, 17);
    const auto k = walk(d);
    BoundaryData data;
    for (const auto& [id, c] : cos_theta(*d)) data[id] = Complex(c.real(), 0.5 * std::sin(2 * std::acos(c.real())));
    const SolveOptions opt{1e-13};
    const auto h = theta_projection(k, data, opt);
    const auto v = variance_function(k, h, opt);
    const auto rows = hitting_distributions(k);
    double worst = 0.0;
    for (Index x : d->interior_ids()) {
        Complex mean{};
        double second = 0.0;
        for (const auto& [b, p] : rows.at(x)) {
            mean += p * data.at(b);
            second += p * std::norm(data.at(b));
        }
        const double expected = second - std::norm(mean);
        EXPECT_GT(v.g[x].real(), 0.0);
        worst = std::max(worst, std::abs(v.g[x].real() - expected));
    }
    EXPECT_LT(worst, 1e-9);
    EXPECT_GT(v.solve_error, 0.0);
}

TEST(Variance, RejectsNonInvariantInput) {
    const auto d = domain(Shape::disk, 17);
    std::mt19937_64 rng(2);
    EXPECT_THROW(variance_function(walk(d), random_complex(d, rng)), precondition_error);
}

TEST(Polarization, IdentityHoldsPointwise) {
    const auto d = domain(Shape::disk, 17);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_complex(d, rng), b = random_complex(d, rng);
        EXPECT_LT(polarization_check(a, b), 1e-14);
    }
}

TEST(ProductProjection, ConjugatePairGivesTheVarianceField) {
    const auto d = domain(Shape::disk, 17);
    const auto k = walk(d);
    const SolveOptions opt{1e-12};
    const auto h = theta_projection(k, cos_theta(*d), opt);
    const auto p = product_projection_field(k, h, conj(h), opt);
    const auto v = variance_function(k, h, opt);
    EXPECT_LT(sup_distance(p, v.g), 1e-8);
    for (Index b : d->boundary_ids()) EXPECT_EQ(p[b], Complex(0.0));
    EXPECT_GT(product_projection_test(k, h, conj(h), opt), 1e-3);
    // products of a constant with an invariant field stay invariant
    EXPECT_LT(product_projection_test(k, h, ScalarField::constant(d, 2.0), opt), 1e-8);
}

TEST(VanishingIdeal, CoordinatesSeparateTheDisk) {
    const auto d = domain(Shape::disk, 17);
    const std::vector<BoundaryData> gens{data_from(*d, [](const Vec2& p) { return p[0]; }),
                                         data_from(*d, [](const Vec2& p) { return p[1]; })};
    const auto rep = vanishing_ideal_check(walk(d), gens, {1e-12}, 1e-9);
    EXPECT_TRUE(rep.equals_boundary);
    EXPECT_EQ(rep.zero_set.size(), d->boundary_count());
    EXPECT_TRUE(rep.interior_zeros.empty());
    EXPECT_GT(rep.min_interior_variance, 1e-3);
    EXPECT_EQ(rep.fields.size(), 2u);

    const auto auto_tol = vanishing_ideal_check(walk(d), gens, {1e-12});
    EXPECT_TRUE(auto_tol.equals_boundary);
    EXPECT_GE(auto_tol.zero_tol, 1e-11);
}

TEST(VanishingIdeal, DisconnectedKernelHasInteriorZeros) {
    const auto d = two_squares();
    const auto k = two_squares_kernel(d);
    const std::vector<BoundaryData> gens{data_from(*d, [](const Vec2& p) { return p[0]; }),
                                         data_from(*d, [](const Vec2& p) { return p[1]; })};
    EXPECT_THROW(vanishing_ideal_check(k, gens), precondition_error);
    SolveOptions opt;
    opt.force = true;
    const auto rep = vanishing_ideal_check(k, gens, opt);
    EXPECT_FALSE(rep.equals_boundary);
    ASSERT_FALSE(rep.interior_zeros.empty());
    for (Index x : rep.interior_zeros) EXPECT_GT(d->coords(x)[0], 2.0);
}

TEST(VanishingIdeal, ConstantGeneratorRejected) {
    const auto d = domain(Shape::disk, 17);
    BoundaryData c;
    for (Index b : d->boundary_ids()) c[b] = 2.0;
    EXPECT_THROW(vanishing_ideal_check(walk(d), {c}), input_error);
    EXPECT_THROW(vanishing_ideal_check(walk(d), {}), input_error);
}

TEST(ResidualToZero, InvariantFieldIsAlreadyZero) {
    const auto d = domain(Shape::disk, 17);
    const auto k = walk(d);
    const SolveOptions opt{1e-12};
    const auto rep = residual_to_zero_test(k, theta_projection(k, cos_theta(*d), opt), opt);
    EXPECT_TRUE(rep.run.converged);
    EXPECT_LE(rep.initial_norm, 1e-12);
    EXPECT_EQ(rep.run.iterations, 1u);
}

TEST(ResidualToZero, RandomFieldsDecay) {
    const auto d = domain(Shape::disk, 17);
    const auto k = walk(d);
    std::mt19937_64 rng(8);
    const auto rep = residual_to_zero_test(k, random_complex(d, rng), {1e-10});
    EXPECT_TRUE(rep.run.converged);
    EXPECT_GT(rep.initial_norm, 0.1);
    EXPECT_LE(rep.final_norm, 1e-10);
    EXPECT_EQ(rep.norms.size(), rep.run.iterations);
    for (Index b : d->boundary_ids()) EXPECT_EQ(rep.run.fixed_point[b], Complex(0.0));
}
