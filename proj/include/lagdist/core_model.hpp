#pragma once

// Domain types shared by every module: the binning of the time line, the
// paired count series, probability estimates, the step CDF built from them,
// and the analytic displacement distributions used as ground truth.

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "lagdist/error.hpp"

namespace lagdist {

// Interval length in minutes and number of lags; displacements are assumed
// to lie in [0, m * ell].
class Binning {
public:
    Binning(double ell, int m);

    double ell() const noexcept { return ell_; }
    int m() const noexcept { return m_; }
    std::size_t lag_count() const noexcept { return static_cast<std::size_t>(m_) + 1; }
    double support_end() const noexcept { return ell_ * m_; }

    friend bool operator==(const Binning&, const Binning&) = default;

private:
    double ell_;
    int m_;
};

// Source-event counts n_t and displaced-event counts k_t over t = 1..T.
// Stored zero-based: n()[0] is n_1.
class CountSeries {
public:
    CountSeries(std::vector<std::int64_t> n, std::vector<std::int64_t> k);

    std::span<const std::int64_t> n() const noexcept { return n_; }
    std::span<const std::int64_t> k() const noexcept { return k_; }
    std::size_t size() const noexcept { return n_.size(); }

    friend bool operator==(const CountSeries&, const CountSeries&) = default;

private:
    std::vector<std::int64_t> n_;
    std::vector<std::int64_t> k_;
};

struct ProbabilityEstimate {
    std::vector<double> beta;   // raw fitted coefficients
    double q_hat = 0.0;         // ratio estimate sum(k) / sum(n)
    std::vector<double> p;      // normalized probabilities
    bool q_hat_exceeds_one = false;
};

// Piecewise-constant CDF: value i_hat[j] on [j*ell, (j+1)*ell) for j < m,
// 0 below zero and 1 from m*ell on.
class StepCdf {
public:
    const Binning& binning() const noexcept { return binning_; }
    std::span<const double> partial_sums() const noexcept { return i_hat_; }

    double operator()(double tau) const noexcept;

    // Validates monotonicity and range; used when the partial sums come from
    // outside (for example a CSV written by an earlier run).
    static StepCdf from_partial_sums(std::vector<double> i_hat, const Binning& binning);

private:
    friend StepCdf build_step_cdf(std::span<const double> p, const Binning& binning);
    StepCdf(Binning binning, std::vector<double> i_hat)
        : binning_(binning), i_hat_(std::move(i_hat)) {}

    Binning binning_;
    std::vector<double> i_hat_;
};

// Analytic displacement distribution: a point mass, a uniform law, or a finite
// mixture of those.
class TrueDistribution {
public:
    struct PointMass {
        double at;
    };
    struct Uniform {
        double lo;
        double hi;
    };
    struct Component;
    using Mixture = std::vector<Component>;

    static TrueDistribution point_mass(double at);
    static TrueDistribution uniform(double lo, double hi);
    static TrueDistribution mixture(Mixture components);

    const std::variant<PointMass, Uniform, Mixture>& alternatives() const noexcept { return v_; }

    double cdf(double tau) const noexcept;
    double support_min() const noexcept;
    double support_max() const noexcept;

    // Points where F is not affine (atoms, uniform endpoints), sorted and unique.
    std::vector<double> breakpoints() const;

private:
    explicit TrueDistribution(std::variant<PointMass, Uniform, Mixture> v) : v_(std::move(v)) {}

    std::variant<PointMass, Uniform, Mixture> v_;
};

struct TrueDistribution::Component {
    double weight;
    TrueDistribution dist;
};

inline constexpr double kStepCdfNormTolerance = 1e-9;

std::vector<double> normalize_probabilities(std::span<const double> beta);

StepCdf build_step_cdf(std::span<const double> p, const Binning& binning);

inline double cdf_eval(const StepCdf& cdf, double tau) noexcept { return cdf(tau); }

// sum(k) / sum(n). Values above one are returned as computed; callers check
// conversion_rate_exceeds_one() to flag a misspecified model.
double conversion_rate(const CountSeries& counts);

inline bool conversion_rate_exceeds_one(double q_hat) noexcept { return q_hat > 1.0; }

inline double true_cdf_eval(const TrueDistribution& dist, double tau) noexcept {
    return dist.cdf(tau);
}

}  // namespace lagdist
