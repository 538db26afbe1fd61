#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lagdist/metrics.hpp"
#include "test_support.hpp"

using namespace lagdist;
using lagdist::testing::kSuiteSeed;
using lagdist::testing::max_abs_diff;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected lagdist::Error");
    return ErrorCode::InvalidArgument;
}

// Riemann-sum oracle for I_j = (1/ell) int_{j ell}^{(j+1) ell} F.
std::vector<double> midpoint_integrals(const TrueDistribution& dist, const Binning& binning, int points) {
    std::vector<double> out(binning.lag_count(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) {
        for (int i = 0; i < points; ++i)
            out[j] += dist.cdf(binning.ell() * (static_cast<double>(j) + (i + 0.5) / points));
        out[j] /= points;
    }
    return out;
}

}  // namespace

TEST_CASE("true_interval_integrals examples") {
    const auto uniform = TrueDistribution::uniform(0, 60);
    // F = tau/60 averaged over [0,30] and [30,60]
    CHECK(max_abs_diff(true_interval_integrals(uniform, Binning(30, 2)), std::vector{0.25, 0.75, 1.0}) < 1e-15);
    CHECK(max_abs_diff(true_interval_integrals(TrueDistribution::point_mass(0), Binning(10, 1)),
                       std::vector{1.0, 1.0}) == 0.0);
    CHECK(max_abs_diff(true_interval_integrals(uniform, Binning(60, 1)), std::vector{0.5, 1.0}) < 1e-15);
    CHECK(code_of([&] { true_interval_integrals(uniform, Binning(20, 2)); }) == ErrorCode::SupportExceedsLags);
}

TEST_CASE("true_probabilities examples") {
    const auto uniform = TrueDistribution::uniform(0, 60);
    CHECK(max_abs_diff(true_probabilities(uniform, Binning(30, 2)).p_true, std::vector{0.25, 0.5, 0.25}) < 1e-15);
    CHECK(max_abs_diff(true_probabilities(TrueDistribution::point_mass(0), Binning(10, 1)).p_true,
                       std::vector{1.0, 0.0}) == 0.0);
    const std::vector<double> sixths{1.0 / 12, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 12};
    CHECK(max_abs_diff(true_probabilities(uniform, Binning(10, 6)).p_true, sixths) < 1e-14);
}

TEST_CASE("property: closed-form integrals match a Riemann oracle, probabilities are a simplex") {
    std::mt19937_64 rng(kSuiteSeed + 30);
    std::uniform_int_distribution<int> lags(1, 12);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = lags(rng);
        const Binning binning(60.0 / m, m);
        const auto dist = lagdist::testing::random_distribution(60.0, rng);
        const auto truth = true_probabilities(dist, binning);
        CHECK(max_abs_diff(truth.i_true, midpoint_integrals(dist, binning, 20000)) < 1e-4);
        CHECK(std::abs(truth.i_true.back() - 1.0) <= 1e-12);
        CHECK(std::ranges::all_of(truth.p_true, [](double v) { return v >= 0.0; }));
        CHECK(std::abs(std::accumulate(truth.p_true.begin(), truth.p_true.end(), 0.0) - 1.0) <= 1e-9);
        CHECK(std::ranges::is_sorted(truth.i_true));
    }
}

TEST_CASE("general_g_integrals examples") {
    const auto uniform = TrueDistribution::uniform(0, 60);
    const Binning binning(30, 2);
    // F((j + 1 - 0.5) * 30) = F(15), F(45), F(75)
    CHECK(max_abs_diff(general_g_integrals(uniform, {{0.5, 1.0}}, binning), std::vector{0.25, 0.75, 1.0}) <
          1e-15);
    // F((j + 1 - 0.9) * 30) = F(3), F(33), F(63)
    CHECK(max_abs_diff(general_g_integrals(uniform, {{0.9, 1.0}}, binning), std::vector{0.05, 0.55, 1.0}) <
          1e-15);
    CHECK(max_abs_diff(general_g_integrals(uniform, uniform_grid_atoms(10000), binning),
                       std::vector{0.25, 0.75, 1.0}) < 1e-3);
    // (j + 1 - xi) * ell >= 60 for every j when m * ell is far beyond the support
    CHECK(max_abs_diff(general_g_integrals(TrueDistribution::uniform(0, 5), {{0.01, 1.0}}, Binning(10, 1)),
                       std::vector{1.0, 1.0}) == 0.0);

    CHECK(code_of([&] { general_g_integrals(uniform, {{0.0, 1.0}}, binning); }) == ErrorCode::InvalidAtoms);
    CHECK(code_of([&] { general_g_integrals(uniform, {{0.5, 0.7}}, binning); }) == ErrorCode::InvalidAtoms);
    CHECK(code_of([&] { general_g_integrals(uniform, {}, binning); }) == ErrorCode::InvalidAtoms);
}

TEST_CASE("general_g_integrals converge at first order") {
    const auto uniform = TrueDistribution::uniform(0, 60);
    const Binning binning(30, 2);
    const auto exact = true_interval_integrals(uniform, binning);
    // shifted cells make the grid one-sided; a midpoint grid would be exact here
    double prev = 0.0;
    for (int count : {100, 200, 400, 800, 1600}) {
        const double err =
            max_abs_diff(general_g_integrals(uniform, uniform_grid_atoms(count, 0.25), binning), exact);
        if (prev > 0.0)
            CHECK(prev / err == doctest::Approx(2.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("l2_distance examples") {
    const auto uniform = TrueDistribution::uniform(0, 60);
    const auto own = build_step_cdf(std::vector{0.25, 0.5, 0.25}, Binning(30, 2));
    // per bin int (tau/60 - mean)^2 = ell^3 / (12 * 3600); two bins of 30 give 5/4
    CHECK(l2_distance(uniform, own) == doctest::Approx(std::sqrt(5.0) / 2).epsilon(1e-13));
    CHECK(l2_distance(uniform, build_step_cdf(std::vector{0.5, 0.5}, Binning(60, 1))) ==
          doctest::Approx(std::sqrt(5.0)).epsilon(1e-13));

    const auto mix = TrueDistribution::mixture(
        {{0.3, TrueDistribution::point_mass(0)}, {0.7, TrueDistribution::point_mass(20)}});
    CHECK(l2_distance(mix, build_step_cdf(std::vector{0.3, 0.7, 0.0}, Binning(20, 2))) < 1e-15);

    CHECK(code_of([&] { l2_distance(TrueDistribution::uniform(0, 120), own); }) ==
          ErrorCode::SupportExceedsLags);
}

TEST_CASE("min_l2_distance examples") {
    const auto uniform = TrueDistribution::uniform(0, 60);
    CHECK(min_l2_distance(uniform, Binning(30, 2)) == doctest::Approx(std::sqrt(5.0) / 2).epsilon(1e-13));
    CHECK(min_l2_distance(TrueDistribution::point_mass(0), Binning(10, 4)) == 0.0);
    CHECK(min_l2_distance(uniform, Binning(10, 6)) == doctest::Approx(std::sqrt(5.0) / 6).epsilon(1e-13));
}

TEST_CASE("property: projection bound, refinement, quadrature agreement") {
    std::mt19937_64 rng(kSuiteSeed + 31);
    const int divisors[] = {1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30};
    std::uniform_int_distribution<int> pick(0, 10);
    for (int trial = 0; trial < 250; ++trial) {
        const int m = divisors[pick(rng)];
        const Binning binning(60.0 / m, m);
        const auto dist = lagdist::testing::random_distribution(60.0, rng);
        const double floor = min_l2_distance(dist, binning);

        const auto other = build_step_cdf(lagdist::testing::random_simplex(binning.lag_count(), rng), binning);
        CHECK(l2_distance(dist, other) >= floor - 1e-10);

        const auto perturbed = true_probabilities(dist, binning);
        auto p = perturbed.p_true;
        p.front() += 0.01;
        for (double& v : p)
            v /= 1.01;
        CHECK(l2_distance(dist, build_step_cdf(p, binning)) >= floor - 1e-10);

        CHECK(min_l2_distance(dist, Binning(30.0 / m, 2 * m)) <= floor + 1e-12);

        const double exact = l2_distance(dist, other);
        CHECK(std::abs(std::sqrt(lagdist::testing::trapezoid_squared_l2(dist, other, 100000)) - exact) <= 1e-6);
    }
}
