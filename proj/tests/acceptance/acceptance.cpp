// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "lagdist/experiment.hpp"
#include "lagdist/io.hpp"
#include "lagdist/metrics.hpp"
#include "lagdist/regress.hpp"
#include "lagdist/simulate.hpp"
#include "../test_support.hpp"

using namespace lagdist;
using lagdist::testing::kSuiteSeed;
using lagdist::testing::max_abs_diff;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// AC1: noise-free targets, OLS + clip-and-normalize recovers p.
Verdict exact_recovery() {
    const auto start = Clock::now();
    std::mt19937_64 rng(kSuiteSeed);
    std::uniform_int_distribution<int> lags(0, 10);
    std::uniform_int_distribution<std::int64_t> count(1, 200);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = lags(rng);
        const int t_len = 10 * (m + 2);
        const double q = trial % 2 == 0 ? 0.01 : 0.1;
        const auto p = lagdist::testing::random_simplex(static_cast<std::size_t>(m + 1), rng);
        std::vector<std::int64_t> n(static_cast<std::size_t>(t_len));
        for (auto& v : n)
            v = count(rng);
        const Binning binning(60.0 / std::max(m, 1), m);
        LagDesign design = build_design(CountSeries(n, std::vector<std::int64_t>(n.size(), 0)), binning);
        for (Eigen::Index r = 0; r < design.x.rows(); ++r) {
            std::vector<double> window(static_cast<std::size_t>(m + 1));
            for (int j = 0; j <= m; ++j)
                window[static_cast<std::size_t>(j)] = design.x(r, j);
            design.y(r) = conditional_expectation(window, q, p);
        }
        worst = std::max(worst, max_abs_diff(normalize_probabilities(ols_fit(design)), p));
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-6 && elapsed < 5.0,
            fmt::format("max |p_hat - p| = {:.3e} (limit 1e-6), {:.2f} s (limit 5 s)", worst, elapsed)};
}

// AC2: fixed n, 1e5 re-draws of conversions; mean k_t vs E[k_t | n].
Verdict conditional_expectation_oracle() {
    const auto start = Clock::now();
    const Binning binning(30, 2);
    const auto dist = TrueDistribution::uniform(0, 60);
    const double q = 0.1;
    Rng rng = make_rng(kSuiteSeed + 2);
    std::vector<std::int64_t> n(50);
    std::poisson_distribution<std::int64_t> arrivals(100.0 * 30.0);
    for (auto& v : n)
        v = arrivals(rng);
    const auto truth = true_probabilities(dist, binning);

    const int reps = 100000;
    std::vector<double> sum(n.size(), 0.0);
    std::vector<double> sum_sq(n.size(), 0.0);
    for (int r = 0; r < reps; ++r) {
        const auto k = draw_displaced_counts(n, q, dist, binning, rng);
        for (std::size_t t = 0; t < k.size(); ++t) {
            const auto v = static_cast<double>(k[t]);
            sum[t] += v;
            sum_sq[t] += v * v;
        }
    }
    int violations = 0;
    double worst_z = 0.0;
    for (std::size_t t = 2; t < n.size(); ++t) {
        const std::vector<double> window{static_cast<double>(n[t]), static_cast<double>(n[t - 1]),
                                         static_cast<double>(n[t - 2])};
        const double expected = conditional_expectation(window, q, truth.p_true);
        const double mean = sum[t] / reps;
        const double var = (sum_sq[t] - reps * mean * mean) / (reps - 1);
        const double z = std::abs(mean - expected) / std::sqrt(var / reps);
        worst_z = std::max(worst_z, z);
        violations += z > 3.0 ? 1 : 0;
    }
    const double elapsed = seconds_since(start);
    return {violations == 0 && elapsed < 60.0,
            fmt::format("{} of 48 interior intervals beyond 3 SE (max z = {:.2f}), {:.1f} s (limit 60 s)",
                        violations, worst_z, elapsed)};
}

// AC3: minimum attainable distance for Uniform(0, 60) is sqrt(5)/m.
Verdict analytic_min_line() {
    double worst = 0.0;
    for (int m : {1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60}) {
        const double got = min_l2_distance(TrueDistribution::uniform(0, 60), Binning(60.0 / m, m));
        worst = std::max(worst, std::abs(got - std::sqrt(5.0) / m));
    }
    return {worst <= 1e-10, fmt::format("max |min_l2 - sqrt(5)/m| = {:.3e} (limit 1e-10)", worst)};
}

struct PairedTest {
    double t_stat;
    double critical;
    std::size_t pairs;
    bool significant() const { return pairs > 1 && t_stat > critical; }
};

// One-sided paired t-test of H1: mean(worse - better) > 0 at 95%.
PairedTest paired_greater(const std::vector<double>& worse, const std::vector<double>& better) {
    std::vector<double> diff;
    for (std::size_t i = 0; i < worse.size() && i < better.size(); ++i)
        if (std::isfinite(worse[i]) && std::isfinite(better[i]))
            diff.push_back(worse[i] - better[i]);
    PairedTest out{0.0, 0.0, diff.size()};
    if (diff.size() < 2)
        return out;
    const double n = static_cast<double>(diff.size());
    const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : diff)
        ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / (n - 1));
    out.t_stat = sd > 0.0 ? mean / (sd / std::sqrt(n)) : (mean > 0.0 ? INFINITY : 0.0);
    out.critical = boost::math::quantile(boost::math::students_t(n - 1), 0.95);
    return out;
}

const GridRow& find_row(const GridResult& result, int m, int days, double q) {
    for (const auto& r : result.rows)
        if (r.m == m && r.days == days && r.q == q)
            return r;
    throw std::runtime_error("missing grid cell");
}

GridSpec desk_spec(Method method) {
    GridSpec spec;
    spec.m_values = {1, 2, 3, 6, 12};
    spec.n_days_values = {5, 60};
    spec.q_values = {0.01, 0.1};
    spec.replications = 100;
    spec.dist = TrueDistribution::uniform(0, 60);
    spec.profile = IntensityProfile::paper();
    spec.base_seed = kSuiteSeed;
    spec.method = method;
    return spec;
}

// AC4: accuracy improves with more days and a higher conversion rate.
Verdict figure_trends(const GridResult& result, double elapsed) {
    std::ostringstream detail;
    bool pass = elapsed < 600.0;
    for (const auto& row : result.rows) {
        if (!(row.mean_l2 >= row.min_l2 - 1e-10)) {
            pass = false;
            detail << fmt::format(" [m={} N={} q={}: mean {} < min {}]", row.m, row.days, row.q, row.mean_l2,
                                  row.min_l2);
        }
    }
    int comparisons = 0;
    double weakest = INFINITY;
    for (int m : {1, 2, 3, 6, 12}) {
        for (double q : {0.01, 0.1}) {
            const auto t = paired_greater(find_row(result, m, 5, q).distances, find_row(result, m, 60, q).distances);
            ++comparisons;
            weakest = std::min(weakest, t.t_stat - t.critical);
            if (!t.significant()) {
                pass = false;
                detail << fmt::format(" [N trend m={} q={}: t={:.2f} <= {:.2f}]", m, q, t.t_stat, t.critical);
            }
        }
        for (int days : {5, 60}) {
            const auto t =
                paired_greater(find_row(result, m, days, 0.01).distances, find_row(result, m, days, 0.1).distances);
            ++comparisons;
            weakest = std::min(weakest, t.t_stat - t.critical);
            if (!t.significant()) {
                pass = false;
                detail << fmt::format(" [q trend m={} N={}: t={:.2f} <= {:.2f}]", m, days, t.t_stat, t.critical);
            }
        }
    }
    return {pass, fmt::format("{} cells, mean_l2 >= min_l2 everywhere; {} paired one-sided tests at 95%, "
                              "smallest margin t - t_crit = {:.2f}; {:.1f} s (limit 600 s){}",
                              result.rows.size(), comparisons, weakest, elapsed, detail.str())};
}

// AC5: both estimators complete, constrained solutions are feasible and stationary.
Verdict constrained_sanity(const GridResult& ols, const GridResult& constrained) {
    bool pass = true;
    std::ostringstream detail;
    double worst_kkt = 0.0;
    double worst_sum = 0.0;
    double worst_neg = 0.0;
    int min_completed = 100;
    for (int m : {1, 2, 3, 6, 12}) {
        const auto& o = find_row(ols, m, 60, 0.1);
        const auto& c = find_row(constrained, m, 60, 0.1);
        min_completed = std::min({min_completed, o.replications_completed, c.replications_completed});
        if (o.replications_completed < 95 || c.replications_completed < 95) {
            pass = false;
            detail << fmt::format(" [m={}: completed ols {} constrained {}]", m, o.replications_completed,
                                  c.replications_completed);
        }
        if (c.constrained.size() != static_cast<std::size_t>(c.replications_completed))
            pass = false;
        for (const auto& d : c.constrained) {
            worst_kkt = std::max(worst_kkt, d.kkt_residual);
            worst_sum = std::max(worst_sum, std::abs(d.sum_b - d.q_hat));
            worst_neg = std::min(worst_neg, d.min_b);
        }
    }
    pass = pass && worst_neg >= -1e-12 && worst_sum <= 1e-10 && worst_kkt <= 1e-8;
    return {pass, fmt::format("min completed {}/100; min b = {:.3e}, max |sum b - q_hat| = {:.3e}, "
                              "max KKT residual = {:.3e}{}",
                              min_completed, worst_neg, worst_sum, worst_kkt, detail.str())};
}

// AC6: randomized property suites, 250 cases each.
Verdict property_suites() {
    constexpr int kCases = 250;
    std::mt19937_64 rng(kSuiteSeed + 6);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int divisors[] = {1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60};
    std::uniform_int_distribution<int> pick(0, 11);
    int failures[6] = {0, 0, 0, 0, 0, 0};

    for (int i = 0; i < kCases; ++i) {
        std::vector<double> beta(1 + static_cast<std::size_t>(unit(rng) * 30));
        for (double& b : beta)
            b = z(rng);
        beta[0] = std::abs(beta[0]) + 1e-3;
        const double c = std::exp(10.0 * z(rng));
        auto scaled = beta;
        for (double& b : scaled)
            b *= c;
        if (max_abs_diff(normalize_probabilities(beta), normalize_probabilities(scaled)) > 1e-12)
            ++failures[0];
    }
    for (int i = 0; i < kCases; ++i) {
        const int m = divisors[pick(rng)];
        const Binning binning(60.0 / m, m);
        const auto cdf = build_step_cdf(lagdist::testing::random_simplex(binning.lag_count(), rng), binning);
        double prev = 0.0;
        bool ok = true;
        for (int s = -100; s <= 1400; ++s) {
            const double tau = 0.05 * s;
            const double v = cdf(tau);
            ok = ok && v >= prev && (tau >= 0.0 || v == 0.0) && (tau < 60.0 || v == 1.0);
            prev = v;
        }
        failures[1] += ok ? 0 : 1;
    }
    for (int i = 0; i < kCases; ++i) {
        const int m = divisors[pick(rng)];
        const Binning binning(60.0 / m, m);
        const auto dist = lagdist::testing::random_distribution(60.0, rng);
        const auto other = build_step_cdf(lagdist::testing::random_simplex(binning.lag_count(), rng), binning);
        if (l2_distance(dist, other) < min_l2_distance(dist, binning) - 1e-10)
            ++failures[2];
        if (std::abs(std::sqrt(lagdist::testing::trapezoid_squared_l2(dist, other, 100000)) -
                     l2_distance(dist, other)) > 1e-6)
            ++failures[3];
    }
    for (int i = 0; i < kCases; ++i) {
        const int m = divisors[pick(rng)];
        SimConfig cfg{IntensityProfile::constant(0.2 + unit(rng)), lagdist::testing::random_distribution(60.0, rng),
                      0.01 + 0.99 * unit(rng), 1, Binning(60.0 / m, m), rng()};
        if (!(simulate(cfg).counts == simulate(cfg).counts))
            ++failures[4];
    }
    for (int i = 0; i < kCases; ++i) {
        std::vector<std::int64_t> n(1 + static_cast<std::size_t>(unit(rng) * 500));
        std::vector<std::int64_t> k(n.size());
        for (std::size_t t = 0; t < n.size(); ++t) {
            n[t] = static_cast<std::int64_t>(unit(rng) * 1e6);
            k[t] = static_cast<std::int64_t>(unit(rng) * static_cast<double>(n[t]));
        }
        const CountSeries original(n, k);
        std::stringstream buf;
        write_counts_csv(buf, original);
        if (!(read_counts_csv(buf) == original))
            ++failures[5];
    }
    const int total = std::accumulate(std::begin(failures), std::end(failures), 0);
    return {total == 0,
            fmt::format("{} cases each; failures: scale-invariance {}, cdf-monotone {}, projection-bound {}, "
                        "quadrature {}, determinism {}, csv-round-trip {}",
                        kCases, failures[0], failures[1], failures[2], failures[3], failures[4], failures[5])};
}

// AC7: general-G integrals with a uniform 1e4-atom grid.
Verdict general_g_formula() {
    const auto dist = TrueDistribution::uniform(0, 60);
    const Binning binning(30, 2);
    const double err = max_abs_diff(general_g_integrals(dist, uniform_grid_atoms(10000), binning),
                                    true_interval_integrals(dist, binning));
    return {err <= 1e-3, fmt::format("max |I_G - I| = {:.3e} (limit 1e-3)", err)};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](const char* id, const char* title, const Verdict& v) {
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << ' ' << title << ": " << v.detail << std::endl;
        failed += v.pass ? 0 : 1;
    };

    report("AC1", "exact recovery", exact_recovery());
    report("AC2", "conditional expectation oracle", conditional_expectation_oracle());
    report("AC3", "analytic min-L2 line", analytic_min_line());

    const auto start = Clock::now();
    const GridResult ols = run_grid(desk_spec(Method::OlsNormalized));
    const double ols_elapsed = seconds_since(start);
    report("AC4", "accuracy trends in N and q (desk grid)", figure_trends(ols, ols_elapsed));

    GridSpec constrained_spec = desk_spec(Method::Constrained);
    constrained_spec.n_days_values = {60};
    constrained_spec.q_values = {0.1};
    const GridResult constrained = run_grid(constrained_spec);
    report("AC5", "constrained vs OLS sanity", constrained_sanity(ols, constrained));

    report("AC6", "property suites", property_suites());
    report("AC7", "general within-interval law formula", general_g_formula());

    std::cout << (failed == 0 ? "all acceptance criteria passed" : fmt::format("{} criteria failed", failed))
              << std::endl;
    return failed == 0 ? 0 : 1;
}
