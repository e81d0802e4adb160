#include "efc/optimizer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <vector>

#include "efc/errors.hpp"
#include "efc/frontier.hpp"

namespace efc {

namespace {

void validate_problem(const OptimizationProblem& problem) {
    const auto n = problem.mean_returns.size();
    if (n < 2 || problem.covariance.rows() != n || problem.covariance.cols() != n) {
        throw DataError("optimization problem: covariance must match the return vector");
    }
    if (problem.gross_cap && *problem.gross_cap < 1.0) {
        throw DataError("gross exposure cap must be >= 1");
    }
}

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& V) {
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("covariance is not positive definite (Cholesky failed)");
    }
    return llt;
}

// ---------------------------------------------------------------------------
// Dense convex QP, primal active-set method.
//
//   minimize 1/2 x'Gx + c'x   s.t.  Ae x = be,  Ai x >= bi
//
// G must be positive definite and x0 feasible. Inequality rows enter the
// working set only when they block a step, so the KKT systems stay
// nonsingular for the constraint geometry used here (bounds plus one cap
// row plus one equality).
// ---------------------------------------------------------------------------

struct QpProblem {
    Eigen::MatrixXd G;
    Eigen::VectorXd c;
    Eigen::MatrixXd Ae;
    Eigen::VectorXd be;
    Eigen::MatrixXd Ai;
    Eigen::VectorXd bi;
};

Eigen::VectorXd solve_qp(const QpProblem& qp, Eigen::VectorXd x, int max_iter = 400) {
    const int n = static_cast<int>(x.size());
    const int me = static_cast<int>(qp.Ae.rows());
    const int mi = static_cast<int>(qp.Ai.rows());

    std::vector<int> working;  // active inequality rows

    for (int iter = 0; iter < max_iter; ++iter) {
        const int mw = static_cast<int>(working.size());
        const int dim = n + me + mw;
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd rhs(dim);
        kkt.topLeftCorner(n, n) = qp.G;
        rhs.head(n) = -qp.c;
        if (me > 0) {
            kkt.block(n, 0, me, n) = qp.Ae;
            kkt.block(0, n, n, me) = qp.Ae.transpose();
            rhs.segment(n, me) = qp.be;
        }
        for (int k = 0; k < mw; ++k) {
            kkt.block(n + me + k, 0, 1, n) = qp.Ai.row(working[k]);
            kkt.block(0, n + me + k, n, 1) = qp.Ai.row(working[k]).transpose();
            rhs(n + me + k) = qp.bi(working[k]);
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) {
            // Degenerate working set; drop the most recent row and retry.
            if (working.empty()) {
                throw NumericalError("QP subproblem is singular");
            }
            working.pop_back();
            continue;
        }
        const Eigen::VectorXd sol = lu.solve(rhs);
        const Eigen::VectorXd x_hat = sol.head(n);
        const Eigen::VectorXd p = x_hat - x;

        if (p.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
            // Stationary on the working set: check inequality multipliers.
            int drop = -1;
            double most_negative = -1e-10;
            for (int k = 0; k < mw; ++k) {
                const double lambda = sol(n + me + k);
                if (lambda < most_negative) {
                    most_negative = lambda;
                    drop = k;
                }
            }
            if (drop < 0) return x;
            working.erase(working.begin() + drop);
            continue;
        }

        // Longest feasible step along p.
        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < mi; ++i) {
            if (std::find(working.begin(), working.end(), i) != working.end()) continue;
            const double slope = qp.Ai.row(i).dot(p);
            if (slope >= -1e-14) continue;
            const double slack = qp.Ai.row(i).dot(x) - qp.bi(i);
            const double step = std::max(0.0, slack) / (-slope);
            if (step < alpha) {
                alpha = step;
                blocking = i;
            }
        }
        x += alpha * p;
        if (blocking >= 0) working.push_back(blocking);
    }
    return x;  // best effort; outer loop judges the point by its objective
}

// ---------------------------------------------------------------------------
// Sharpe ratio and derivatives.
// ---------------------------------------------------------------------------

struct SharpeEval {
    double value = 0.0;
    Eigen::VectorXd gradient;  // in w-space
    Eigen::MatrixXd hessian;   // in w-space
};

double sharpe_value(const Eigen::VectorXd& w, const Eigen::VectorXd& r, const Eigen::MatrixXd& V,
                    double rf) {
    const double excess = w.dot(r) - rf;
    const double sigma = std::sqrt(w.dot(V * w));
    return excess / sigma;
}

SharpeEval sharpe_eval(const Eigen::VectorXd& w, const Eigen::VectorXd& r,
                       const Eigen::MatrixXd& V, double rf) {
    SharpeEval out;
    const Eigen::VectorXd v = V * w;
    const double var = w.dot(v);
    const double sigma = std::sqrt(var);
    const double excess = w.dot(r) - rf;
    out.value = excess / sigma;
    const double s3 = sigma * var;
    out.gradient = r / sigma - (excess / s3) * v;
    out.hessian = -(r * v.transpose() + v * r.transpose()) / s3 - (excess / s3) * V +
                  (3.0 * excess / (s3 * var)) * (v * v.transpose());
    return out;
}

// Positive-definite curvature model for the ascent direction: flip the
// concave spectrum of -H and floor small eigenvalues.
Eigen::MatrixXd curvature_model(const Eigen::MatrixXd& neg_hessian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(neg_hessian);
    Eigen::VectorXd values = eig.eigenvalues().cwiseAbs();
    const double floor = std::max(1e-8 * values.maxCoeff(), 1e-12);
    values = values.cwiseMax(floor);
    return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

struct AscentResult {
    Eigen::VectorXd w;
    double sharpe = 0.0;
    bool converged = false;
};

// One SQP ascent run in the split space z = (pos, neg), w = pos - neg.
AscentResult ascend_from(const Eigen::VectorXd& w0, const Eigen::VectorXd& r,
                         const Eigen::MatrixXd& V, double rf, double cap, int budget) {
    const int n = static_cast<int>(w0.size());
    Eigen::VectorXd z(2 * n);
    z.head(n) = w0.cwiseMax(0.0);
    z.tail(n) = (-w0).cwiseMax(0.0);

    // Constraints in d-space at the current z:
    //   equality:    sum(pos + d_pos) - sum(neg + d_neg) = 1   (holds at z)
    //   cap:         sum(z + d) <= cap
    //   bounds:      z + d >= 0
    QpProblem qp;
    qp.Ae = Eigen::MatrixXd::Zero(1, 2 * n);
    qp.Ae.block(0, 0, 1, n).setOnes();
    qp.Ae.block(0, n, 1, n).setConstant(-1.0);
    qp.be = Eigen::VectorXd::Zero(1);
    qp.Ai = Eigen::MatrixXd::Zero(2 * n + 1, 2 * n);
    qp.bi = Eigen::VectorXd::Zero(2 * n + 1);
    qp.Ai.topLeftCorner(2 * n, 2 * n).setIdentity();
    qp.Ai.row(2 * n).setConstant(-1.0);

    AscentResult result;
    result.w = w0;
    result.sharpe = sharpe_value(w0, r, V, rf);

    for (int iter = 0; iter < budget; ++iter) {
        const Eigen::VectorXd w = z.head(n) - z.tail(n);
        const SharpeEval eval = sharpe_eval(w, r, V, rf);

        Eigen::VectorXd grad_z(2 * n);
        grad_z.head(n) = eval.gradient;
        grad_z.tail(n) = -eval.gradient;

        const Eigen::MatrixXd Bw = curvature_model(-eval.hessian);
        Eigen::MatrixXd Bz(2 * n, 2 * n);
        Bz.topLeftCorner(n, n) = Bw;
        Bz.topRightCorner(n, n) = -Bw;
        Bz.bottomLeftCorner(n, n) = -Bw;
        Bz.bottomRightCorner(n, n) = Bw;
        // The split direction (t, t) is curvature-free; a small ridge keeps
        // the subproblem strictly convex.
        Bz.diagonal().array() += 1e-9 * std::max(1.0, Bw.diagonal().maxCoeff());

        qp.G = Bz;
        qp.c = -grad_z;
        for (int i = 0; i < 2 * n; ++i) qp.bi(i) = -z(i);
        qp.bi(2 * n) = z.sum() - cap;

        const Eigen::VectorXd d = solve_qp(qp, Eigen::VectorXd::Zero(2 * n));
        const double step_norm = d.lpNorm<Eigen::Infinity>();
        const double directional = grad_z.dot(d);

        if (step_norm <= 1e-13 || directional <= 1e-15) {
            result.converged = true;
            break;
        }

        // Backtracking line search on the Sharpe ratio; constraints are
        // linear so every alpha in [0, 1] stays feasible.
        double alpha = 1.0;
        double new_sharpe = result.sharpe;
        Eigen::VectorXd z_new = z;
        while (alpha > 1e-14) {
            z_new = z + alpha * d;
            const Eigen::VectorXd w_new = z_new.head(n) - z_new.tail(n);
            new_sharpe = sharpe_value(w_new, r, V, rf);
            if (new_sharpe >= result.sharpe + 1e-4 * alpha * directional) break;
            alpha *= 0.5;
        }
        if (alpha <= 1e-14) {
            result.converged = true;
            break;
        }

        z = z_new;
        const double improvement = new_sharpe - result.sharpe;
        result.w = z.head(n) - z.tail(n);
        result.sharpe = new_sharpe;
        if (improvement < 1e-10) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace

double sharpe_ratio(const Eigen::VectorXd& weights, const OptimizationProblem& problem) {
    return sharpe_value(weights, problem.mean_returns, problem.covariance, problem.risk_free);
}

PortfolioWeights min_variance(const OptimizationProblem& problem) {
    validate_problem(problem);
    if (!problem.target_return) throw DataError("min_variance requires a target return");
    const auto llt = factorize(problem.covariance);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(problem.mean_returns.size());
    const Eigen::VectorXd vinv_e = llt.solve(ones);
    const Eigen::VectorXd vinv_r = llt.solve(problem.mean_returns);
    const double a = ones.dot(vinv_e);
    const double b = problem.mean_returns.dot(vinv_e);
    const double c = problem.mean_returns.dot(vinv_r);
    const double disc = a * c - b * b;
    const double target = *problem.target_return;

    if (disc <= 1e-12 * std::max(1.0, a * c)) {
        // Mean returns proportional to ones: only the MVP return is feasible.
        const double r_mvp = b / a;
        if (std::abs(target - r_mvp) > 1e-9 * std::max(1.0, std::abs(r_mvp))) {
            throw NumericalError(
                "mean returns are proportional to ones: only the MVP return is attainable");
        }
        return PortfolioWeights{vinv_e / a};
    }

    const double lambda = (a * target - b) / disc;
    const double gamma = (c - b * target) / disc;
    return PortfolioWeights{lambda * vinv_r + gamma * vinv_e};
}

PortfolioWeights tangency_closed_form(const OptimizationProblem& problem) {
    validate_problem(problem);
    const auto llt = factorize(problem.covariance);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(problem.mean_returns.size());
    const Eigen::VectorXd excess = problem.mean_returns - problem.risk_free * ones;
    const Eigen::VectorXd direction = llt.solve(excess);
    const double normalizer = direction.sum();
    if (std::abs(normalizer) < 1e-12 * std::max(1.0, direction.cwiseAbs().sum())) {
        throw NumericalError(
            "tangency portfolio undefined: risk-free rate equals the MVP return");
    }
    return PortfolioWeights{direction / normalizer};
}

PortfolioWeights tangency(const OptimizationProblem& problem) {
    validate_problem(problem);
    if (!problem.gross_cap) return tangency_closed_form(problem);
    const double cap = *problem.gross_cap;
    factorize(problem.covariance);  // SPD check up front

    const int n = static_cast<int>(problem.mean_returns.size());
    const Eigen::VectorXd equal = Eigen::VectorXd::Constant(n, 1.0 / n);

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(equal);
    try {
        const Eigen::VectorXd closed = tangency_closed_form(problem).weights;
        if (closed.cwiseAbs().sum() <= cap) {
            starts.push_back(closed);
        } else {
            // Clip toward equal weights until the blend reaches the cap. The
            // blend keeps sum(w) = 1 and gross exposure is convex along it.
            double lo = 0.0;
            double hi = 1.0;
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                const Eigen::VectorXd blend = equal + mid * (closed - equal);
                (blend.cwiseAbs().sum() <= cap ? lo : hi) = mid;
            }
            starts.push_back(equal + lo * (closed - equal));
        }
    } catch (const NumericalError&) {
        // Closed form undefined; the equal-weight start still covers the run.
    }

    constexpr int kBudget = 500;
    bool any_converged = false;
    AscentResult best;
    best.sharpe = -std::numeric_limits<double>::infinity();
    for (const Eigen::VectorXd& start : starts) {
        const AscentResult run =
            ascend_from(start, problem.mean_returns, problem.covariance, problem.risk_free, cap,
                        kBudget);
        any_converged = any_converged || run.converged;
        if (run.sharpe > best.sharpe) best = run;
    }

    const double budget_residual = std::abs(best.w.sum() - 1.0);
    const double cap_residual = std::max(0.0, best.w.cwiseAbs().sum() - cap);
    if (!any_converged || budget_residual > 1e-8 || cap_residual > 1e-8) {
        throw SolveFailure("capped tangency solve did not converge", best.w, budget_residual,
                           cap_residual);
    }
    return PortfolioWeights{best.w};
}

}  // namespace efc
