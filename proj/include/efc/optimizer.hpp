#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

namespace efc {

struct PortfolioWeights {
    Eigen::VectorXd weights;  // sums to 1

    double gross_exposure() const { return weights.cwiseAbs().sum(); }
};

struct OptimizationProblem {
    Eigen::VectorXd mean_returns;
    Eigen::MatrixXd covariance;  // SPD
    double risk_free = 0.0;
    std::optional<double> target_return;
    std::optional<double> gross_cap;  // >= 1 when present
};

/// Raised when the iterative tangency solver exhausts its budget; carries the
/// best point found and its constraint residuals.
struct SolveFailure : std::runtime_error {
    SolveFailure(const std::string& what, Eigen::VectorXd best_weights, double budget_residual,
                 double cap_residual)
        : std::runtime_error(what),
          best(std::move(best_weights)),
          budget_residual(budget_residual),
          cap_residual(cap_residual) {}

    Eigen::VectorXd best;
    double budget_residual = 0.0;  // |sum w - 1|
    double cap_residual = 0.0;     // max(0, sum|w| - cap)
};

/// Minimizes w'Vw subject to w'r = target and sum(w) = 1 (shorting allowed).
/// Closed form via the frontier coefficients; degenerate when r is
/// proportional to ones and the target is away from the MVP return.
PortfolioWeights min_variance(const OptimizationProblem& problem);

/// Unconstrained maximum-Sharpe portfolio: w proportional to V^-1 (r - r_f e),
/// normalized to sum 1. Errors when the normalizer vanishes (tangency
/// undefined at r_f = r_mvp).
PortfolioWeights tangency_closed_form(const OptimizationProblem& problem);

/// Maximum-Sharpe portfolio under sum(w) = 1 and sum|w| <= cap. Solved by
/// sequential quadratic ascent steps with the absolute-value constraint split
/// into positive/negative weight parts, from two starts (equal weights and
/// the clipped closed form); the best converged start wins. Without a cap it
/// defers to the closed form.
PortfolioWeights tangency(const OptimizationProblem& problem);

double sharpe_ratio(const Eigen::VectorXd& weights, const OptimizationProblem& problem);

}  // namespace efc
