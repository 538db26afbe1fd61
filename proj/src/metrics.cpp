#include "lagdist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lagdist {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};

}  // namespace

void check_support(const TrueDistribution& dist, const Binning& binning) {
    const double end = binning.support_end();
    if (dist.support_min() < 0.0 || dist.support_max() > end * (1.0 + 1e-12) + 1e-12)
        throw Error(ErrorCode::SupportExceedsLags,
                    "distribution support [" + std::to_string(dist.support_min()) + ", " +
                        std::to_string(dist.support_max()) + "] exceeds [0, " +
                        std::to_string(end) + "]");
}

double integrated_cdf(const TrueDistribution& dist, double x) {
    return std::visit(
        Overloaded{
            [&](const TrueDistribution::PointMass& d) { return std::max(0.0, x - d.at); },
            [&](const TrueDistribution::Uniform& d) {
                const double width = d.hi - d.lo;
                if (x <= d.lo)
                    return 0.0;
                if (x < d.hi)
                    return (x - d.lo) * (x - d.lo) / (2.0 * width);
                return 0.5 * width + (x - d.hi);
            },
            [&](const TrueDistribution::Mixture& mix) {
                double acc = 0.0;
                for (const auto& c : mix)
                    acc += c.weight * integrated_cdf(c.dist, x);
                return acc;
            },
        },
        dist.alternatives());
}

std::vector<double> true_interval_integrals(const TrueDistribution& dist, const Binning& binning) {
    check_support(dist, binning);
    const double ell = binning.ell();
    std::vector<double> out(binning.lag_count());
    double floor = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double lo = ell * static_cast<double>(j);
        const double hi = ell * static_cast<double>(j + 1);
        // the running max absorbs rounding wobble once F has saturated
        floor = std::max(floor, (integrated_cdf(dist, hi) - integrated_cdf(dist, lo)) / ell);
        out[j] = std::min(floor, 1.0);
    }
    return out;
}

TrueProbabilities true_probabilities(const TrueDistribution& dist, const Binning& binning) {
    TrueProbabilities out{true_interval_integrals(dist, binning), {}};
    out.p_true.resize(out.i_true.size());
    out.p_true[0] = out.i_true[0];
    for (std::size_t j = 1; j < out.i_true.size(); ++j)
        out.p_true[j] = std::max(0.0, out.i_true[j] - out.i_true[j - 1]);
    return out;
}

std::vector<double> general_g_integrals(const TrueDistribution& dist,
                                        const std::vector<GAtom>& g_atoms,
                                        const Binning& binning) {
    if (g_atoms.empty())
        throw Error(ErrorCode::InvalidAtoms, "no atoms given");
    double total = 0.0;
    for (const auto& a : g_atoms) {
        if (!(a.xi > 0.0 && a.xi < 1.0))
            throw Error(ErrorCode::InvalidAtoms, "atom positions must lie in (0, 1)");
        if (!(a.weight > 0.0))
            throw Error(ErrorCode::InvalidAtoms, "atom weights must be positive");
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidAtoms, "atom weights must sum to 1");

    std::vector<double> out(binning.lag_count(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j)
        for (const auto& a : g_atoms)
            out[j] += a.weight * dist.cdf((static_cast<double>(j) + 1.0 - a.xi) * binning.ell());
    return out;
}

std::vector<GAtom> uniform_grid_atoms(int count, double shift) {
    if (count < 1 || !(shift > 0.0 && shift < 1.0))
        throw Error(ErrorCode::InvalidAtoms, "need a positive atom count and a shift in (0, 1)");
    std::vector<GAtom> atoms(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        atoms[static_cast<std::size_t>(i)] = {(i + shift) / count, 1.0 / count};
    return atoms;
}

double squared_l2_distance(const TrueDistribution& dist, const StepCdf& cdf) {
    const Binning& binning = cdf.binning();
    check_support(dist, binning);
    const double end = binning.support_end();

    // Split [0, m ell] at bin edges and at the kinks/jumps of F; on each piece
    // F - F_hat is affine, so the integral of its square is exact.
    std::vector<double> cuts;
    cuts.reserve(binning.lag_count() + 8);
    for (int j = 0; j <= binning.m(); ++j)
        cuts.push_back(binning.ell() * j);
    for (double b : dist.breakpoints())
        if (b > 0.0 && b < end)
            cuts.push_back(b);
    std::ranges::sort(cuts);
    auto tail = std::ranges::unique(cuts);
    cuts.erase(tail.begin(), tail.end());

    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double u = cuts[i];
        const double v = cuts[i + 1];
        if (!(v > u))
            continue;
        const double mid = 0.5 * (u + v);
        // right limit at u is F(u); the left limit at v follows from linearity
        const double g0 = dist.cdf(u) - cdf(mid);
        const double gm = dist.cdf(mid) - cdf(mid);
        const double g1 = 2.0 * gm - g0;
        acc += (v - u) * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0;
    }
    return acc;
}

double l2_distance(const TrueDistribution& dist, const StepCdf& cdf) {
    return std::sqrt(squared_l2_distance(dist, cdf));
}

double min_l2_distance(const TrueDistribution& dist, const Binning& binning) {
    const auto truth = true_probabilities(dist, binning);
    return l2_distance(dist, build_step_cdf(truth.p_true, binning));
}

}  // namespace lagdist
