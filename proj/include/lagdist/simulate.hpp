#pragma once

// Synthetic event streams: inhomogeneous Poisson arrivals with an hourly
// piecewise-constant intensity, Bernoulli(q) thinning, and displacement of
// each retained event by an independent draw from F.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lagdist/core_model.hpp"

namespace lagdist {

// Events per minute for each hour of the day.
class IntensityProfile {
public:
    explicit IntensityProfile(std::array<double, 24> hourly);

    // Reference day shape: 50/min at midnight rising to 150/min at noon,
    // symmetric about noon. Exposed on the command line as `paper`.
    static IntensityProfile paper();
    static IntensityProfile constant(double rate);

    const std::array<double, 24>& hourly() const noexcept { return hourly_; }
    double at_minute(double tau) const noexcept;

private:
    std::array<double, 24> hourly_;
};

struct SimConfig {
    IntensityProfile profile;
    TrueDistribution dist;
    double q;
    int days;
    Binning binning;
    std::uint64_t seed;
};

struct SimOutput {
    CountSeries counts;
    std::int64_t total_events;
    std::int64_t total_conversions;  // retained events landing inside the horizon
};

// Generator used throughout: Mersenne Twister 19937 (64-bit), seeded from a
// SplitMix64-scrambled 64-bit seed so nearby seeds yield unrelated streams.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;
Rng make_rng(std::uint64_t seed);

// Throws EllDoesNotDivideHour / SupportExceedsLags / InvalidArgument.
void validate(const SimConfig& config);

SimOutput simulate(const SimConfig& config);

// Draws displaced counts k for fixed source counts n. Each of the n_t events
// converts with probability q, sits at a uniform offset inside its interval
// and is displaced by an F draw; landings past the last interval are lost.
// A landing exactly on an interval boundary counts toward the earlier one.
std::vector<std::int64_t> draw_displaced_counts(std::span<const std::int64_t> n, double q,
                                                const TrueDistribution& dist,
                                                const Binning& binning, Rng& rng);

double sample_displacement(const TrueDistribution& dist, Rng& rng);

// E[k_t | n_t, ..., n_{t-m}] = sum_j q p_j n_{t-j}; n_window[j] is n_{t-j}.
double conditional_expectation(std::span<const double> n_window, double q,
                               std::span<const double> p);

}  // namespace lagdist
