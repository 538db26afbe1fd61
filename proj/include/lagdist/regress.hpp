#pragma once

// Distributed-lag least squares: design construction, the unconstrained fit,
// and the fit restricted to the scaled simplex {b >= 0, sum(b) = q_hat}.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "lagdist/core_model.hpp"

namespace lagdist {

// Row r corresponds to t = m+1+r (one-based); column j holds n_{t-j}.
struct LagDesign {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

struct ConstrainedSolution {
    std::vector<double> b;
    double objective = 0.0;      // residual sum of squares at b
    double kkt_residual = 0.0;   // scaled max-norm KKT violation, see constrained_fit
    int iterations = 0;
    bool unique = true;          // false when the restricted Hessian is singular
};

inline constexpr double kRankRatioThreshold = 1e-10;
inline constexpr double kKktTolerance = 1e-8;

LagDesign build_design(const CountSeries& counts, const Binning& binning);

// Least squares without intercept via column-pivoted Householder QR.
// Throws RankDeficient when sigma_min / sigma_max <= 1e-10.
std::vector<double> ols_fit(const LagDesign& design);

double residual_sum_of_squares(const LagDesign& design, const std::vector<double>& coef);

// Active-set solve of min ||y - Xb||^2 s.t. b >= 0, sum(b) = q_hat.
//
// The problem is solved in the variables x = b / q_hat on the unit simplex
// with the Gram matrix divided by its largest diagonal entry, so the reported
// kkt_residual is dimensionless: it is the max over stationarity, sign,
// complementarity and feasibility violations of that scaled problem.
// The working set starts empty from the barycentre; each iteration either
// steps to the equality-constrained minimiser on the free set, stopping at
// the first blocking bound, or releases the bound with the most negative
// multiplier. The iteration cap is 100 * (m + 1).
ConstrainedSolution constrained_fit(const LagDesign& design, double q_hat);

std::vector<double> constrained_probabilities(const ConstrainedSolution& solution, double q_hat);

}  // namespace lagdist
