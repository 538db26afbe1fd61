#pragma once

// Monte Carlo harness: simulate -> estimate -> L2 distance, repeated over a
// grid of (m, days, q) cells and aggregated against the projection bound.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lagdist/core_model.hpp"
#include "lagdist/simulate.hpp"

namespace lagdist {

enum class Method { OlsNormalized, Constrained };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view text);

struct ConstrainedDiagnostics {
    double q_hat;
    double sum_b;
    double min_b;
    double kkt_residual;
};

struct ReplicationOutcome {
    std::optional<double> l2;            // empty when the replication failed
    std::optional<ErrorCode> failure;
    std::optional<ConstrainedDiagnostics> constrained;
};

// Fits p from counts with the chosen method; the shared estimation path of the
// harness and the estimate subcommand.
ProbabilityEstimate estimate_probabilities(const CountSeries& counts, const Binning& binning,
                                           Method method,
                                           ConstrainedDiagnostics* diagnostics = nullptr);

// Degenerate fits (AllNonpositive, RankDeficient, NonConvergence, ...) come
// back as a recorded failure. Configuration errors still throw.
ReplicationOutcome run_replication(const SimConfig& config, Method method);

struct GridSpec {
    std::vector<int> m_values;
    std::vector<int> n_days_values;
    std::vector<double> q_values;
    int replications = 1;
    TrueDistribution dist = TrueDistribution::uniform(0.0, 60.0);
    IntensityProfile profile = IntensityProfile::paper();
    std::uint64_t base_seed = 0;
    Method method = Method::OlsNormalized;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct GridRow {
    int m;
    double ell;
    int days;
    double q;
    Method method;
    double mean_l2;
    double std_l2;
    double min_l2;
    double mean_sq_l2;  // average of squared distances
    int failures;
    int replications_completed;
    std::vector<double> distances;  // per replication index, NaN where failed
    std::vector<ConstrainedDiagnostics> constrained;  // completed constrained replications
};

struct GridResult {
    std::vector<GridRow> rows;
};

// Throws EmptyGrid / InvalidArgument on a malformed spec.
void validate(const GridSpec& spec);

std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t replication) noexcept;

// Cells are ordered m-major, then days, then q. Replications may run on
// several threads; reductions are in replication order, so the result does
// not depend on scheduling.
GridResult run_grid(const GridSpec& spec);

// Summation by recursive halving over an index-ordered buffer.
double pairwise_sum(const double* data, std::size_t count) noexcept;

}  // namespace lagdist
