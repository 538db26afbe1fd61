#include "lagdist/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "lagdist/metrics.hpp"
#include "lagdist/regress.hpp"

namespace lagdist {

std::string_view to_string(Method method) noexcept {
    return method == Method::OlsNormalized ? "ols" : "constrained";
}

Method parse_method(std::string_view text) {
    if (text == "ols")
        return Method::OlsNormalized;
    if (text == "constrained")
        return Method::Constrained;
    throw Error(ErrorCode::ParseError, "unknown method '" + std::string(text) + "' (ols|constrained)");
}

ProbabilityEstimate estimate_probabilities(const CountSeries& counts, const Binning& binning,
                                           Method method, ConstrainedDiagnostics* diagnostics) {
    const LagDesign design = build_design(counts, binning);
    ProbabilityEstimate est;
    est.q_hat = conversion_rate(counts);
    est.q_hat_exceeds_one = conversion_rate_exceeds_one(est.q_hat);
    if (method == Method::OlsNormalized) {
        est.beta = ols_fit(design);
        est.p = normalize_probabilities(est.beta);
    } else {
        const ConstrainedSolution sol = constrained_fit(design, est.q_hat);
        est.beta = sol.b;
        est.p = constrained_probabilities(sol, est.q_hat);
        if (diagnostics != nullptr) {
            double sum = 0.0;
            for (double b : sol.b)
                sum += b;
            *diagnostics = {est.q_hat, sum, *std::ranges::min_element(sol.b), sol.kkt_residual};
        }
    }
    return est;
}

ReplicationOutcome run_replication(const SimConfig& config, Method method) {
    const SimOutput sim = simulate(config);
    ReplicationOutcome out;
    ConstrainedDiagnostics diag{};
    try {
        const ProbabilityEstimate est =
            estimate_probabilities(sim.counts, config.binning, method, &diag);
        const StepCdf cdf = build_step_cdf(est.p, config.binning);
        out.l2 = l2_distance(config.dist, cdf);
        if (method == Method::Constrained)
            out.constrained = diag;
    } catch (const Error& e) {
        switch (e.code()) {
        case ErrorCode::AllNonpositive:
        case ErrorCode::RankDeficient:
        case ErrorCode::NonConvergence:
        case ErrorCode::InfeasibleInput:
        case ErrorCode::ZeroSourceEvents:
        case ErrorCode::TooShort:
        case ErrorCode::NotNormalized:
            out.failure = e.code();
            break;
        default:
            throw;
        }
    }
    return out;
}

void validate(const GridSpec& spec) {
    if (spec.m_values.empty() || spec.n_days_values.empty() || spec.q_values.empty())
        throw Error(ErrorCode::EmptyGrid, "grid needs at least one value of m, days and q");
    if (spec.replications < 1)
        throw Error(ErrorCode::InvalidArgument, "replications must be at least 1");
    for (int m : spec.m_values)
        if (m < 1 || 60 % m != 0)
            throw Error(ErrorCode::EllDoesNotDivideHour,
                        "m = " + std::to_string(m) + " does not divide 60, so ell = 60/m cannot tile hours");
    for (int d : spec.n_days_values)
        if (d < 1)
            throw Error(ErrorCode::InvalidArgument, "days must be at least 1");
    for (double q : spec.q_values)
        if (!(q > 0.0 && q <= 1.0))
            throw Error(ErrorCode::InvalidArgument, "q must lie in (0, 1]");
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t cell,
                               std::uint64_t replication) noexcept {
    return splitmix64(base_seed ^ splitmix64((cell << 32) ^ replication));
}

double pairwise_sum(const double* data, std::size_t count) noexcept {
    if (count <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < count; ++i)
            acc += data[i];
        return acc;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

namespace {

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        if (!failed.exchange(true))
                            first_error = std::current_exception();
                    }
                }
            });
        }
    }
    if (first_error)
        std::rethrow_exception(first_error);
}

}  // namespace

GridResult run_grid(const GridSpec& spec) {
    validate(spec);
    GridResult result;
    std::uint64_t cell = 0;
    for (int m : spec.m_values) {
        const Binning binning(60.0 / m, m);
        const double min_l2 = min_l2_distance(spec.dist, binning);
        for (int days : spec.n_days_values) {
            for (double q : spec.q_values) {
                SimConfig base{spec.profile, spec.dist, q, days, binning, 0};
                validate(base);

                const auto reps = static_cast<std::size_t>(spec.replications);
                std::vector<ReplicationOutcome> outcomes(reps);
                parallel_for(reps, spec.threads, [&](std::size_t r) {
                    SimConfig cfg = base;
                    cfg.seed = replication_seed(spec.base_seed, cell, r);
                    outcomes[r] = run_replication(cfg, spec.method);
                });

                GridRow row{m, binning.ell(), days, q, spec.method, 0.0, 0.0, min_l2, 0.0, 0, 0, {}, {}};
                std::vector<double> done;
                std::vector<double> done_sq;
                row.distances.reserve(reps);
                for (const auto& o : outcomes) {
                    if (o.l2) {
                        done.push_back(*o.l2);
                        done_sq.push_back(*o.l2 * *o.l2);
                        row.distances.push_back(*o.l2);
                        if (o.constrained)
                            row.constrained.push_back(*o.constrained);
                    } else {
                        ++row.failures;
                        row.distances.push_back(std::numeric_limits<double>::quiet_NaN());
                    }
                }
                row.replications_completed = static_cast<int>(done.size());
                if (done.empty()) {
                    row.mean_l2 = row.std_l2 = row.mean_sq_l2 = std::numeric_limits<double>::quiet_NaN();
                } else {
                    const double count = static_cast<double>(done.size());
                    row.mean_l2 = pairwise_sum(done.data(), done.size()) / count;
                    row.mean_sq_l2 = pairwise_sum(done_sq.data(), done_sq.size()) / count;
                    if (done.size() > 1) {
                        std::vector<double> dev(done.size());
                        std::ranges::transform(done, dev.begin(), [&](double v) {
                            return (v - row.mean_l2) * (v - row.mean_l2);
                        });
                        row.std_l2 = std::sqrt(pairwise_sum(dev.data(), dev.size()) / (count - 1.0));
                    }
                }
                result.rows.push_back(std::move(row));
                ++cell;
            }
        }
    }
    return result;
}

}  // namespace lagdist
