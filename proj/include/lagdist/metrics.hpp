#pragma once

#include <vector>

#include "lagdist/core_model.hpp"

namespace lagdist {

struct TrueProbabilities {
    std::vector<double> i_true;  // bin means of F
    std::vector<double> p_true;  // first differences of i_true
};

struct GAtom {
    double xi;      // position inside the interval, in (0, 1)
    double weight;
};

// Throws SupportExceedsLags unless the support of F lies in [0, m * ell].
void check_support(const TrueDistribution& dist, const Binning& binning);

// \int_0^x F(tau) dtau in closed form.
double integrated_cdf(const TrueDistribution& dist, double x);

// I_j = (1/ell) \int_{j ell}^{(j+1) ell} F, j = 0..m.
std::vector<double> true_interval_integrals(const TrueDistribution& dist, const Binning& binning);

TrueProbabilities true_probabilities(const TrueDistribution& dist, const Binning& binning);

// I_j = sum_atoms w F((j + 1 - xi) ell) for a discrete within-interval law G.
std::vector<double> general_g_integrals(const TrueDistribution& dist,
                                        const std::vector<GAtom>& g_atoms,
                                        const Binning& binning);

// count equal-weight atoms at (i + shift) / count, i = 0..count-1; shift in (0, 1).
std::vector<GAtom> uniform_grid_atoms(int count, double shift = 0.5);

// sqrt(\int_0^{m ell} (F - F_hat)^2), exact for piecewise-linear F.
double l2_distance(const TrueDistribution& dist, const StepCdf& cdf);
double squared_l2_distance(const TrueDistribution& dist, const StepCdf& cdf);

// Distance from F to its bin-mean projection; the best any bin-constant
// approximation can do.
double min_l2_distance(const TrueDistribution& dist, const Binning& binning);

}  // namespace lagdist
