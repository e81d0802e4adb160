#include "efc/frontier.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "efc/errors.hpp"

namespace efc {

namespace {

constexpr double kDegenerateDiscriminant = 1e-12;

void validate_inputs(const FrontierInputs& inputs) {
    const auto& V = inputs.covariance;
    const auto n = inputs.mean_returns.size();
    if (n < 1 || V.rows() != n || V.cols() != n) {
        throw DataError("frontier inputs: covariance must be square and match the return vector");
    }
    const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());
    if ((V - V.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw NumericalError("covariance is not symmetric to 1e-12");
    }
}

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& V) {
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("covariance is not positive definite (Cholesky failed)");
    }
    return llt;
}

FrontierCoefficients abc_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt,
                                  const Eigen::VectorXd& r) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(r.size());
    const Eigen::VectorXd vinv_e = llt.solve(ones);
    const Eigen::VectorXd vinv_r = llt.solve(r);
    FrontierCoefficients coefs;
    coefs.a = ones.dot(vinv_e);
    coefs.b = r.dot(vinv_e);
    coefs.c = r.dot(vinv_r);
    return coefs;
}

}  // namespace

FrontierCoefficients compute_abc(const FrontierInputs& inputs) {
    validate_inputs(inputs);
    const auto llt = factorize(inputs.covariance);
    return abc_from_llt(llt, inputs.mean_returns);
}

InterpretableCoefficients interpretable_coefficients(const FrontierCoefficients& coefs) {
    if (coefs.a <= 0.0) throw NumericalError("frontier coefficient a must be positive");
    double disc = coefs.a * coefs.c - coefs.b * coefs.b;
    if (disc < -kDegenerateDiscriminant) {
        throw NumericalError("a*c - b^2 is negative beyond tolerance: degenerate inputs");
    }
    // r proportional to ones lands exactly on the boundary; tiny negative
    // values are rounding and clamp to the u = 0 limit.
    disc = std::max(disc, 0.0);
    InterpretableCoefficients out;
    out.r_mvp = coefs.b / coefs.a;
    out.sigma_mvp = 1.0 / std::sqrt(coefs.a);
    out.u = std::sqrt(disc / coefs.a);
    return out;
}

double frontier_sigma(const FrontierCoefficients& coefs, double r) {
    const double disc = coefs.a * coefs.c - coefs.b * coefs.b;
    if (disc <= kDegenerateDiscriminant * std::max(1.0, coefs.a * coefs.c)) {
        throw NumericalError("frontier denominator a*c - b^2 is degenerate");
    }
    const double num = coefs.a * r * r - 2.0 * coefs.b * r + coefs.c;
    return std::sqrt(num / disc);
}

UDecomposition u_decomposition(const FrontierInputs& inputs) {
    validate_inputs(inputs);
    const auto llt = factorize(inputs.covariance);
    const FrontierCoefficients coefs = abc_from_llt(llt, inputs.mean_returns);

    UDecomposition out;
    out.mahalanobis = std::sqrt(std::max(coefs.c, 0.0));
    if (coefs.a * coefs.c <= 0.0) {
        // r = 0: the distance term is zero and the spread is immaterial.
        out.cosine_spread = 0.0;
        return out;
    }
    const double cos_sq =
        std::min(1.0, (coefs.b * coefs.b) / (coefs.a * coefs.c));
    out.cosine_spread = std::sqrt(1.0 - cos_sq);
    return out;
}

}  // namespace efc
