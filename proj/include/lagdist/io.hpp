#pragma once

// Text formats: counts CSV (t,n,k), estimate CSV (j,p_hat,i_hat,tau_lo,tau_hi),
// results CSV, the grid config file, intensity profiles, the distribution
// mini-language and the SVG figure.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lagdist/core_model.hpp"
#include "lagdist/experiment.hpp"
#include "lagdist/simulate.hpp"

namespace lagdist {

void write_counts_csv(std::ostream& out, const CountSeries& counts);
CountSeries read_counts_csv(std::istream& in);

void write_estimate_csv(std::ostream& out, std::span<const double> p, const StepCdf& cdf);
// Rebuilds the step CDF from the i_hat column; ell and m come from the tau
// columns and the row count.
StepCdf read_estimate_csv(std::istream& in);

inline constexpr std::string_view kResultsHeader =
    "m,ell,days,q,method,mean_l2,std_l2,min_l2,failures,reps";
void write_results_csv(std::ostream& out, const GridResult& result);

// Grammar:
//   dist      := "uniform:" a "," b | "point:" d | "mix:" component ("+" component)*
//   component := weight "*" ("uniform:" a "," b | "point:" d)
TrueDistribution parse_distribution(std::string_view text);
std::string format_distribution(const TrueDistribution& dist);

// 24 nonnegative values separated by commas and/or newlines.
IntensityProfile read_profile_csv(std::istream& in);
// "paper" or a path to a profile CSV.
IntensityProfile load_profile(std::string_view spec);

struct GridConfig {
    GridSpec spec;
    std::vector<Method> methods;
};

// key=value lines; '#' starts a comment. Keys: m, days, q (comma lists), reps,
// seed, method (ols, constrained or a list of both), dist, profile, threads.
GridConfig read_grid_config(std::istream& in);

// One panel per (days, q, method) with mean_l2 and min_l2 plotted against m.
void write_figure_svg(std::ostream& out, const GridResult& result);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace lagdist
