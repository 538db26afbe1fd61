#include "lagdist/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lagdist {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AllNonpositive: return "AllNonpositive";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ZeroSourceEvents: return "ZeroSourceEvents";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InfeasibleInput: return "InfeasibleInput";
    case ErrorCode::EllDoesNotDivideHour: return "EllDoesNotDivideHour";
    case ErrorCode::SupportExceedsLags: return "SupportExceedsLags";
    case ErrorCode::InvalidAtoms: return "InvalidAtoms";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Binning::Binning(double ell, int m) : ell_(ell), m_(m) {
    if (!(ell > 0.0) || !std::isfinite(ell))
        throw Error(ErrorCode::InvalidArgument, "interval length must be positive and finite");
    if (m < 0)
        throw Error(ErrorCode::InvalidArgument, "lag count must be nonnegative");
}

CountSeries::CountSeries(std::vector<std::int64_t> n, std::vector<std::int64_t> k)
    : n_(std::move(n)), k_(std::move(k)) {
    if (n_.size() != k_.size())
        throw Error(ErrorCode::LengthMismatch, "n and k must have equal length");
    if (n_.empty())
        throw Error(ErrorCode::InvalidArgument, "count series must hold at least one interval");
    auto negative = [](std::int64_t v) { return v < 0; };
    if (std::ranges::any_of(n_, negative) || std::ranges::any_of(k_, negative))
        throw Error(ErrorCode::InvalidArgument, "counts must be nonnegative");
}

double StepCdf::operator()(double tau) const noexcept {
    if (tau < 0.0)
        return 0.0;
    if (tau >= binning_.support_end())
        return 1.0;
    auto j = static_cast<std::size_t>(std::floor(tau / binning_.ell()));
    // tau / ell can round up to m just below the support end
    j = std::min(j, static_cast<std::size_t>(binning_.m() - 1));
    return i_hat_[j];
}

StepCdf StepCdf::from_partial_sums(std::vector<double> i_hat, const Binning& binning) {
    if (i_hat.size() != binning.lag_count())
        throw Error(ErrorCode::LengthMismatch, "expected m+1 partial sums");
    double prev = 0.0;
    for (double v : i_hat) {
        if (!std::isfinite(v) || v < prev || v > 1.0 + kStepCdfNormTolerance)
            throw Error(ErrorCode::InvalidArgument, "partial sums must be nondecreasing within [0, 1]");
        prev = v;
    }
    if (std::abs(i_hat.back() - 1.0) > kStepCdfNormTolerance)
        throw Error(ErrorCode::NotNormalized, "last partial sum must equal 1");
    return StepCdf(binning, std::move(i_hat));
}

TrueDistribution TrueDistribution::point_mass(double at) {
    if (!std::isfinite(at) || at < 0.0)
        throw Error(ErrorCode::InvalidArgument, "point mass must sit at a nonnegative finite time");
    return TrueDistribution(PointMass{at});
}

TrueDistribution TrueDistribution::uniform(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || !(lo < hi))
        throw Error(ErrorCode::InvalidArgument, "uniform requires 0 <= a < b");
    return TrueDistribution(Uniform{lo, hi});
}

TrueDistribution TrueDistribution::mixture(Mixture components) {
    if (components.empty())
        throw Error(ErrorCode::InvalidArgument, "mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0) || !std::isfinite(c.weight))
            throw Error(ErrorCode::InvalidArgument, "mixture weights must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidArgument, "mixture weights must sum to 1");
    return TrueDistribution(std::move(components));
}

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};

}  // namespace

double TrueDistribution::cdf(double tau) const noexcept {
    return std::visit(
        Overloaded{
            [&](const PointMass& d) { return tau < d.at ? 0.0 : 1.0; },
            [&](const Uniform& d) { return std::clamp((tau - d.lo) / (d.hi - d.lo), 0.0, 1.0); },
            [&](const Mixture& mix) {
                double acc = 0.0;
                for (const auto& c : mix)
                    acc += c.weight * c.dist.cdf(tau);
                return std::min(acc, 1.0);
            },
        },
        v_);
}

double TrueDistribution::support_min() const noexcept {
    return std::visit(
        Overloaded{
            [](const PointMass& d) { return d.at; },
            [](const Uniform& d) { return d.lo; },
            [](const Mixture& mix) {
                double lo = mix.front().dist.support_min();
                for (const auto& c : mix)
                    lo = std::min(lo, c.dist.support_min());
                return lo;
            },
        },
        v_);
}

double TrueDistribution::support_max() const noexcept {
    return std::visit(
        Overloaded{
            [](const PointMass& d) { return d.at; },
            [](const Uniform& d) { return d.hi; },
            [](const Mixture& mix) {
                double hi = 0.0;
                for (const auto& c : mix)
                    hi = std::max(hi, c.dist.support_max());
                return hi;
            },
        },
        v_);
}

std::vector<double> TrueDistribution::breakpoints() const {
    std::vector<double> out;
    std::visit(Overloaded{
                   [&](const PointMass& d) { out.push_back(d.at); },
                   [&](const Uniform& d) {
                       out.push_back(d.lo);
                       out.push_back(d.hi);
                   },
                   [&](const Mixture& mix) {
                       for (const auto& c : mix) {
                           auto sub = c.dist.breakpoints();
                           out.insert(out.end(), sub.begin(), sub.end());
                       }
                   },
               },
               v_);
    std::ranges::sort(out);
    auto tail = std::ranges::unique(out);
    out.erase(tail.begin(), tail.end());
    return out;
}

std::vector<double> normalize_probabilities(std::span<const double> beta) {
    if (beta.empty())
        throw Error(ErrorCode::LengthMismatch, "coefficient vector is empty");
    std::vector<double> p(beta.size());
    std::ranges::transform(beta, p.begin(), [](double b) { return std::max(b, 0.0); });
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(total > 0.0))
        throw Error(ErrorCode::AllNonpositive, "no positive coefficient to normalize by");
    for (double& v : p)
        v /= total;
    return p;
}

StepCdf build_step_cdf(std::span<const double> p, const Binning& binning) {
    if (p.size() != binning.lag_count())
        throw Error(ErrorCode::LengthMismatch,
                    "expected " + std::to_string(binning.lag_count()) + " probabilities, got " +
                        std::to_string(p.size()));
    if (std::ranges::any_of(p, [](double v) { return !(v >= 0.0); }))
        throw Error(ErrorCode::InvalidArgument, "probabilities must be nonnegative");
    std::vector<double> i_hat(p.size());
    std::partial_sum(p.begin(), p.end(), i_hat.begin());
    if (std::abs(i_hat.back() - 1.0) > kStepCdfNormTolerance)
        throw Error(ErrorCode::NotNormalized, "probabilities do not sum to 1");
    // monotone by construction; pin the last sum so F-hat reaches exactly 1
    i_hat.back() = 1.0;
    return StepCdf(binning, std::move(i_hat));
}

double conversion_rate(const CountSeries& counts) {
    const auto n = counts.n();
    const auto k = counts.k();
    const auto total_n = std::accumulate(n.begin(), n.end(), std::int64_t{0});
    if (total_n == 0)
        throw Error(ErrorCode::ZeroSourceEvents, "no source events observed");
    const auto total_k = std::accumulate(k.begin(), k.end(), std::int64_t{0});
    return static_cast<double>(total_k) / static_cast<double>(total_n);
}

}  // namespace lagdist
