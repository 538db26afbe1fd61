#include "lagdist/cli.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lagdist/experiment.hpp"
#include "lagdist/io.hpp"
#include "lagdist/metrics.hpp"
#include "lagdist/regress.hpp"
#include "lagdist/simulate.hpp"

namespace lagdist::cli {

namespace {

constexpr std::string_view kDistHelp =
    "displacement law: uniform:a,b | point:d | mix:w1*point:d+w2*uniform:a,b";

// Flag problems detected after CLI11 has parsed the line.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Binning binning_from_flags(int m, std::optional<double> ell) {
    if (m < 0)
        throw UsageError("--m must be nonnegative");
    if (ell) {
        if (!(*ell > 0.0) || !std::isfinite(*ell))
            throw UsageError("--ell must be a positive number of minutes");
        return Binning(*ell, m);
    }
    if (m == 0 || 60 % m != 0)
        throw UsageError(fmt::format("--ell defaults to 60/m, but 60 mod m != 0 for m = {}; pass --ell", m));
    return Binning(60.0 / m, m);
}

TrueDistribution dist_from_flag(const std::string& text) {
    try {
        return parse_distribution(text);
    } catch (const Error& e) {
        throw UsageError(fmt::format("--dist: {}", e.what()));
    }
}

struct SimulateFlags {
    int days = 0;
    double q = 0.0;
    int m = 0;
    std::optional<double> ell;
    std::string dist;
    std::string profile = "paper";
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
    const Binning binning = binning_from_flags(f.m, f.ell);
    const TrueDistribution dist = dist_from_flag(f.dist);
    if (!(f.q > 0.0 && f.q <= 1.0))
        throw UsageError("--q must lie in (0, 1]");
    if (f.days < 1)
        throw UsageError("--days must be at least 1");
    SimConfig cfg{load_profile(f.profile), dist, f.q, f.days, binning, f.seed};
    const SimOutput sim = simulate(cfg);
    std::ostringstream csv;
    write_counts_csv(csv, sim.counts);
    write_file(f.out, csv.str());
    fmt::print(out, "intervals = {}\ntotal_events = {}\ntotal_conversions = {}\n", sim.counts.size(),
               sim.total_events, sim.total_conversions);
    return kExitOk;
}

struct EstimateFlags {
    std::string in;
    int m = 0;
    std::optional<double> ell;
    std::string method = "ols";
    std::string out;
};

int cmd_estimate(const EstimateFlags& f, std::ostream& out, std::ostream& err) {
    const Binning binning = binning_from_flags(f.m, f.ell);
    std::istringstream in(read_file(f.in));
    const CountSeries counts = read_counts_csv(in);
    const ProbabilityEstimate est = estimate_probabilities(counts, binning, parse_method(f.method));
    const StepCdf cdf = build_step_cdf(est.p, binning);
    std::ostringstream csv;
    write_estimate_csv(csv, est.p, cdf);
    write_file(f.out, csv.str());

    double sum = 0.0;
    for (double v : est.p)
        sum += v;
    fmt::print(out, "q_hat = {:.12g}\n", est.q_hat);
    fmt::print(out, "sum_p_hat = {:.12g} ({})\n", sum,
               std::abs(sum - 1.0) <= kStepCdfNormTolerance ? "ok" : "NOT NORMALIZED");
    for (std::size_t j = 0; j < est.p.size(); ++j)
        fmt::print(out, "p_hat[{}] = {:.12g}\n", j, est.p[j]);
    if (est.q_hat_exceeds_one)
        fmt::print(err, "warning: q_hat = {} exceeds 1; the lag model looks misspecified\n", est.q_hat);
    return kExitOk;
}

struct EvaluateFlags {
    std::string cdf;
    std::string dist;
    std::optional<int> m;
    std::optional<double> ell;
};

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
    const TrueDistribution dist = dist_from_flag(f.dist);
    std::istringstream in(read_file(f.cdf));
    const StepCdf cdf = read_estimate_csv(in);
    const Binning& binning = cdf.binning();
    if (f.m && *f.m != binning.m())
        throw UsageError(fmt::format("--m {} disagrees with the {} lags in {}", *f.m, binning.m(), f.cdf));
    if (f.ell && std::abs(*f.ell - binning.ell()) > 1e-9 * binning.ell())
        throw UsageError(fmt::format("--ell {} disagrees with interval width {} in {}", *f.ell,
                                     binning.ell(), f.cdf));
    const double sq = squared_l2_distance(dist, cdf);
    fmt::print(out, "l2 = {:.12g}\nl2_squared = {:.12g}\nmin_l2 = {:.12g}\n", std::sqrt(sq), sq,
               min_l2_distance(dist, binning));
    return kExitOk;
}

struct ExperimentFlags {
    std::string grid;
    std::string out_csv;
    std::string out_svg;
    std::optional<unsigned> threads;
};

int cmd_experiment(const ExperimentFlags& f, std::ostream& out) {
    std::istringstream in(read_file(f.grid));
    GridConfig cfg = read_grid_config(in);
    if (f.threads)
        cfg.spec.threads = *f.threads;
    GridResult all;
    for (Method method : cfg.methods) {
        GridSpec spec = cfg.spec;
        spec.method = method;
        GridResult part = run_grid(spec);
        for (auto& row : part.rows)
            all.rows.push_back(std::move(row));
    }
    std::ostringstream csv;
    write_results_csv(csv, all);
    write_file(f.out_csv, csv.str());
    if (!f.out_svg.empty()) {
        std::ostringstream svg;
        write_figure_svg(svg, all);
        write_file(f.out_svg, svg.str());
    }
    int failures = 0;
    for (const auto& r : all.rows)
        failures += r.failures;
    fmt::print(out, "cells = {}\nfailed_replications = {}\n", all.rows.size(), failures);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Estimate displacement distributions from per-interval event counts"};
    app.name(args.empty() ? "lagdist" : args.front());
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "generate synthetic counts (t,n,k CSV)");
    simulate_cmd->add_option("--days", sim.days, "number of simulated days")->required();
    simulate_cmd->add_option("--q", sim.q, "conversion probability in (0, 1]")->required();
    simulate_cmd->add_option("--m", sim.m, "number of lags")->required();
    simulate_cmd->add_option("--ell", sim.ell, "interval length in minutes (default 60/m)");
    simulate_cmd->add_option("--dist", sim.dist, std::string(kDistHelp))->required();
    simulate_cmd->add_option("--profile", sim.profile, "'paper' or a CSV of 24 hourly intensities per minute");
    simulate_cmd->add_option("--seed", sim.seed, "64-bit RNG seed");
    simulate_cmd->add_option("--out", sim.out, "output counts CSV")->required();

    EstimateFlags est;
    auto* estimate_cmd = app.add_subcommand("estimate", "estimate displacement probabilities from counts");
    estimate_cmd->add_option("--in", est.in, "input counts CSV (t,n,k)")->required();
    estimate_cmd->add_option("--m", est.m, "number of lags")->required();
    estimate_cmd->add_option("--ell", est.ell, "interval length in minutes (default 60/m)");
    estimate_cmd->add_option("--method", est.method, "ols | constrained")
        ->check(CLI::IsMember({"ols", "constrained"}));
    estimate_cmd->add_option("--out", est.out, "output CSV (j,p_hat,i_hat,tau_lo,tau_hi)")->required();

    EvaluateFlags eval;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "L2 distance of an estimated CDF from a known law");
    evaluate_cmd->add_option("--cdf", eval.cdf, "estimate CSV written by 'estimate'")->required();
    evaluate_cmd->add_option("--dist", eval.dist, std::string(kDistHelp))->required();
    evaluate_cmd->add_option("--m", eval.m, "expected number of lags (checked against the CSV)");
    evaluate_cmd->add_option("--ell", eval.ell, "expected interval length (checked against the CSV)");

    ExperimentFlags exp;
    auto* experiment_cmd = app.add_subcommand("experiment", "run a Monte Carlo grid and write results");
    experiment_cmd->add_option("--grid", exp.grid, "grid config file (key=value lines)")->required();
    experiment_cmd->add_option("--out-csv", exp.out_csv, "results CSV")->required();
    experiment_cmd->add_option("--out-svg", exp.out_svg, "optional SVG figure");
    experiment_cmd->add_option("--threads", exp.threads, "worker threads (0: all cores)");

    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            err << sub->help();
        return kExitUsage;
    }

    try {
        if (simulate_cmd->parsed())
            return cmd_simulate(sim, out);
        if (estimate_cmd->parsed())
            return cmd_estimate(est, out, err);
        if (evaluate_cmd->parsed())
            return cmd_evaluate(eval, out);
        return cmd_experiment(exp, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace lagdist::cli
