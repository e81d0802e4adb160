#pragma once

#include <Eigen/Dense>

namespace efc {

/// Inputs to the frontier coefficient computations: per-asset mean returns r
/// and an SPD covariance V. The ones direction e is implicit.
struct FrontierInputs {
    Eigen::VectorXd mean_returns;
    Eigen::MatrixXd covariance;
};

/// Quadratic-form coefficients of the closed-form frontier:
///   a = e'V^-1 e,  b = r'V^-1 e,  c = r'V^-1 r.
struct FrontierCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// The same frontier described by its vertex and curvature rate:
///   r_mvp = b/a,  sigma_mvp = 1/sqrt(a),  u = sqrt((a c - b^2)/a).
/// u is zero exactly when mean returns are proportional to ones.
struct InterpretableCoefficients {
    double r_mvp = 0.0;
    double sigma_mvp = 0.0;
    double u = 0.0;
};

/// Factorization of u into a Mahalanobis distance of r from zero and a
/// cosine-similarity spread between r and the ones vector, both taken in the
/// V^-1 inner-product space. The product equals u.
struct UDecomposition {
    double mahalanobis = 0.0;
    double cosine_spread = 0.0;  // in [0, 1)
};

/// Computes (a, b, c) with one symmetric factorization of V reused for all
/// three quadratic forms. Throws NumericalError if V is not SPD.
FrontierCoefficients compute_abc(const FrontierInputs& inputs);

InterpretableCoefficients interpretable_coefficients(const FrontierCoefficients& coefs);

/// Frontier volatility at expected return r:
///   sigma(r) = sqrt((a r^2 - 2 b r + c) / (a c - b^2)).
double frontier_sigma(const FrontierCoefficients& coefs, double r);

UDecomposition u_decomposition(const FrontierInputs& inputs);

}  // namespace efc
