#include "lagdist/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lagdist {

LagDesign build_design(const CountSeries& counts, const Binning& binning) {
    const std::size_t t_len = counts.size();
    const std::size_t lags = binning.lag_count();
    if (t_len < lags)
        throw Error(ErrorCode::TooShort, "series of length " + std::to_string(t_len) +
                                             " has no complete row for m = " +
                                             std::to_string(binning.m()));
    const auto n = counts.n();
    const auto k = counts.k();
    const std::size_t rows = t_len - lags + 1;

    LagDesign design{Eigen::MatrixXd(rows, lags), Eigen::VectorXd(rows)};
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + lags - 1;  // zero-based index of t = m+1+r
        for (std::size_t j = 0; j < lags; ++j)
            design.x(r, j) = static_cast<double>(n[t - j]);
        design.y(r) = static_cast<double>(k[t]);
    }
    return design;
}

std::vector<double> ols_fit(const LagDesign& design) {
    const auto rows = design.x.rows();
    const auto cols = design.x.cols();
    if (cols == 0 || rows < cols)
        throw Error(ErrorCode::RankDeficient,
                    "design has fewer rows than coefficients (" + std::to_string(rows) + " < " +
                        std::to_string(cols) + ")");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
    // X and R share singular values, so the conditioning check only needs the
    // small triangular factor.
    const Eigen::MatrixXd r =
        qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
    const double largest = sv(0);
    const double smallest = sv(cols - 1);
    if (!(largest > 0.0) || smallest / largest <= kRankRatioThreshold)
        throw Error(ErrorCode::RankDeficient,
                    "lagged columns are collinear (singular value ratio " +
                        std::to_string(largest > 0.0 ? smallest / largest : 0.0) + ")");

    const Eigen::VectorXd beta = qr.solve(design.y);
    return {beta.data(), beta.data() + beta.size()};
}

double residual_sum_of_squares(const LagDesign& design, const std::vector<double>& coef) {
    const Eigen::Map<const Eigen::VectorXd> c(coef.data(), static_cast<Eigen::Index>(coef.size()));
    return (design.y - design.x * c).squaredNorm();
}

namespace {

struct EqualityStep {
    Eigen::VectorXd x_free;
    bool full_rank;
};

// Minimises 0.5 x'Hx - g'x over the free coordinates subject to sum(x) = 1.
EqualityStep solve_on_free_set(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                               const std::vector<Eigen::Index>& free) {
    const auto f = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(f + 1, f + 1);
    Eigen::VectorXd rhs(f + 1);
    for (Eigen::Index a = 0; a < f; ++a) {
        for (Eigen::Index b = 0; b < f; ++b)
            kkt(a, b) = h(free[a], free[b]);
        kkt(a, f) = 1.0;
        kkt(f, a) = 1.0;
        rhs(a) = g(free[a]);
    }
    rhs(f) = 1.0;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
    cod.setThreshold(1e-13);
    const Eigen::VectorXd sol = cod.solve(rhs);
    return {sol.head(f), cod.rank() == f + 1};
}

struct KktReport {
    double residual;
    Eigen::Index most_negative = -1;  // active index with the most negative multiplier
    double most_negative_value = 0.0;
};

KktReport kkt_report(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, const Eigen::VectorXd& x,
                     const std::vector<bool>& is_free) {
    const Eigen::VectorXd grad = h * x - g;
    double nu = 0.0;
    int free_count = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (is_free[i]) {
            nu += grad(i);
            ++free_count;
        }
    }
    nu /= std::max(free_count, 1);

    KktReport rep{0.0};
    double residual = std::abs(x.sum() - 1.0);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        residual = std::max(residual, std::max(0.0, -x(i)));
        const double lambda = grad(i) - nu;
        if (is_free[i]) {
            residual = std::max(residual, std::abs(lambda));
        } else {
            residual = std::max(residual, std::max(0.0, -lambda));
            residual = std::max(residual, std::abs(lambda * x(i)));
            if (lambda < rep.most_negative_value) {
                rep.most_negative_value = lambda;
                rep.most_negative = i;
            }
        }
    }
    rep.residual = residual;
    return rep;
}

// Pushes the rounding error of sum(x) onto the largest free coordinate.
void renormalize(Eigen::VectorXd& x, const std::vector<bool>& is_free) {
    Eigen::Index largest = -1;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!is_free[i])
            x(i) = 0.0;
        else if (largest < 0 || x(i) > x(largest))
            largest = i;
    }
    if (largest >= 0)
        x(largest) += 1.0 - x.sum();
}

}  // namespace

ConstrainedSolution constrained_fit(const LagDesign& design, double q_hat) {
    if (!(q_hat > 0.0) || !std::isfinite(q_hat))
        throw Error(ErrorCode::InfeasibleInput, "conversion rate must be positive");
    if (design.x.rows() < 1)
        throw Error(ErrorCode::TooShort, "design has no rows");

    const Eigen::Index p = design.x.cols();
    const Eigen::MatrixXd gram = design.x.transpose() * design.x;
    const Eigen::VectorXd cross = design.x.transpose() * design.y;
    const double scale = gram.diagonal().maxCoeff();

    ConstrainedSolution out;
    Eigen::VectorXd x = Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
    std::vector<bool> is_free(static_cast<std::size_t>(p), true);

    if (!(scale > 0.0)) {
        // X = 0: every feasible point has the same objective.
        out.unique = p == 1;
    } else {
        const Eigen::MatrixXd h = gram / scale;
        const Eigen::VectorXd g = cross / (scale * q_hat);
        const int cap = 100 * static_cast<int>(p);
        // releasing a bound needs a multiplier clearly below zero, otherwise
        // rounding noise can bounce a coordinate in and out of the active set
        const double release_tol = 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff());

        bool converged = false;
        for (int iter = 0; iter < cap; ++iter) {
            out.iterations = iter + 1;
            std::vector<Eigen::Index> free;
            for (Eigen::Index i = 0; i < p; ++i)
                if (is_free[i])
                    free.push_back(i);

            const EqualityStep step = solve_on_free_set(h, g, free);
            out.unique = step.full_rank;

            double alpha = 1.0;
            Eigen::Index blocking = -1;
            for (std::size_t a = 0; a < free.size(); ++a) {
                const double cur = x(free[a]);
                const double target = step.x_free(static_cast<Eigen::Index>(a));
                if (target < 0.0) {
                    const double ratio = cur / (cur - target);
                    if (ratio < alpha) {
                        alpha = ratio;
                        blocking = free[a];
                    }
                }
            }
            for (std::size_t a = 0; a < free.size(); ++a) {
                const Eigen::Index i = free[a];
                x(i) += alpha * (step.x_free(static_cast<Eigen::Index>(a)) - x(i));
            }
            if (blocking >= 0) {
                is_free[blocking] = false;
                for (Eigen::Index i = 0; i < p; ++i)
                    if (is_free[i] && x(i) <= 0.0)
                        is_free[i] = false;
                renormalize(x, is_free);
                continue;
            }
            renormalize(x, is_free);

            const KktReport rep = kkt_report(h, g, x, is_free);
            if (rep.most_negative < 0 || rep.most_negative_value >= -release_tol) {
                converged = true;
                break;
            }
            is_free[rep.most_negative] = true;
        }
        if (!converged)
            throw Error(ErrorCode::NonConvergence,
                        "active-set iteration exceeded " + std::to_string(cap) + " steps");
        out.kkt_residual = kkt_report(h, g, x, is_free).residual;
    }

    out.b.resize(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i)
        out.b[i] = q_hat * x(i);
    out.objective = residual_sum_of_squares(design, out.b);
    return out;
}

std::vector<double> constrained_probabilities(const ConstrainedSolution& solution, double q_hat) {
    if (!(q_hat > 0.0))
        throw Error(ErrorCode::InfeasibleInput, "conversion rate must be positive");
    std::vector<double> p(solution.b.size());
    std::ranges::transform(solution.b, p.begin(), [&](double b) { return std::max(b, 0.0) / q_hat; });
    return p;
}

}  // namespace lagdist
