#include "lagdist/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lagdist {

namespace {

constexpr double kMinutesPerHour = 60.0;

// Number of intervals per hour, or 0 when ell does not tile the hour.
std::int64_t intervals_per_hour(double ell) {
    const double ratio = kMinutesPerHour / ell;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
        return 0;
    return static_cast<std::int64_t>(rounded);
}

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};

// Uniform on the open interval (0, 1): the 53 high bits of one draw, centred
// in their cell so neither endpoint can occur.
inline double unit_open(Rng& rng) noexcept {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

IntensityProfile::IntensityProfile(std::array<double, 24> hourly) : hourly_(hourly) {
    bool any_positive = false;
    for (double v : hourly_) {
        if (!std::isfinite(v) || v < 0.0)
            throw Error(ErrorCode::InvalidArgument, "intensities must be nonnegative and finite");
        any_positive = any_positive || v > 0.0;
    }
    if (!any_positive)
        throw Error(ErrorCode::InvalidArgument, "at least one hourly intensity must be positive");
}

IntensityProfile IntensityProfile::paper() {
    return IntensityProfile({50, 63, 75, 88, 100, 110, 120, 129, 136, 142, 146, 149,
                             150, 149, 146, 142, 136, 129, 120, 110, 100, 88, 75, 63});
}

IntensityProfile IntensityProfile::constant(double rate) {
    std::array<double, 24> hourly;
    hourly.fill(rate);
    return IntensityProfile(hourly);
}

double IntensityProfile::at_minute(double tau) const noexcept {
    const auto hour = static_cast<std::int64_t>(std::floor(tau / kMinutesPerHour));
    return hourly_[static_cast<std::size_t>(((hour % 24) + 24) % 24)];
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng make_rng(std::uint64_t seed) {
    const std::uint64_t mixed = splitmix64(seed);
    std::seed_seq seq{static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32)};
    return Rng(seq);
}

void validate(const SimConfig& config) {
    if (!(config.q > 0.0 && config.q <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "conversion probability must lie in (0, 1]");
    if (config.days < 1)
        throw Error(ErrorCode::InvalidArgument, "days must be at least 1");
    if (intervals_per_hour(config.binning.ell()) == 0)
        throw Error(ErrorCode::EllDoesNotDivideHour,
                    "interval length " + std::to_string(config.binning.ell()) +
                        " does not divide 60 minutes");
    const double end = config.binning.support_end();
    if (config.dist.support_max() > end * (1.0 + 1e-12) + 1e-12)
        throw Error(ErrorCode::SupportExceedsLags,
                    "displacement support reaches " + std::to_string(config.dist.support_max()) +
                        " beyond m*ell = " + std::to_string(end));
}

double sample_displacement(const TrueDistribution& dist, Rng& rng) {
    return std::visit(
        Overloaded{
            [](const TrueDistribution::PointMass& d) { return d.at; },
            [&](const TrueDistribution::Uniform& d) { return d.lo + (d.hi - d.lo) * unit_open(rng); },
            [&](const TrueDistribution::Mixture& mix) {
                double u = unit_open(rng);
                for (const auto& c : mix) {
                    if (u < c.weight)
                        return sample_displacement(c.dist, rng);
                    u -= c.weight;
                }
                return sample_displacement(mix.back().dist, rng);
            },
        },
        dist.alternatives());
}

std::vector<std::int64_t> draw_displaced_counts(std::span<const std::int64_t> n, double q,
                                                const TrueDistribution& dist,
                                                const Binning& binning, Rng& rng) {
    const auto horizon = static_cast<std::int64_t>(n.size());
    std::vector<std::int64_t> k(n.size(), 0);
    for (std::int64_t t = 0; t < horizon; ++t) {
        if (n[t] == 0)
            continue;
        const std::int64_t converted =
            q >= 1.0 ? n[t] : std::binomial_distribution<std::int64_t>(n[t], q)(rng);
        for (std::int64_t i = 0; i < converted; ++i) {
            const double xi = unit_open(rng);
            const double d = sample_displacement(dist, rng);
            // landing (t + xi) * ell + d falls in zero-based bin ceil(.) - 1,
            // so a landing exactly on a boundary goes to the earlier bin
            const double offset = xi + d / binning.ell();
            const auto s = t + static_cast<std::int64_t>(std::ceil(offset)) - 1;
            if (s < horizon)
                ++k[s];
        }
    }
    return k;
}

SimOutput simulate(const SimConfig& config) {
    validate(config);
    const std::int64_t per_hour = intervals_per_hour(config.binning.ell());
    const std::int64_t horizon = static_cast<std::int64_t>(config.days) * 24 * per_hour;
    const double ell = config.binning.ell();

    Rng rng = make_rng(config.seed);
    std::vector<std::int64_t> n(static_cast<std::size_t>(horizon));
    for (std::int64_t t = 0; t < horizon; ++t) {
        const double rate = config.profile.hourly()[static_cast<std::size_t>((t / per_hour) % 24)];
        const double mean = rate * ell;
        n[t] = mean > 0.0 ? std::poisson_distribution<std::int64_t>(mean)(rng) : 0;
    }
    auto k = draw_displaced_counts(n, config.q, config.dist, config.binning, rng);

    const auto total_events = std::accumulate(n.begin(), n.end(), std::int64_t{0});
    const auto total_conversions = std::accumulate(k.begin(), k.end(), std::int64_t{0});
    return {CountSeries(std::move(n), std::move(k)), total_events, total_conversions};
}

double conditional_expectation(std::span<const double> n_window, double q,
                               std::span<const double> p) {
    if (n_window.size() != p.size())
        throw Error(ErrorCode::LengthMismatch, "window and probability vector differ in length");
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        acc += q * p[j] * n_window[j];
    return acc;
}

}  // namespace lagdist
