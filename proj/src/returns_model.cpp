#include "efc/returns_model.hpp"

#include <cmath>

#include "efc/errors.hpp"

namespace efc {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kInvSqrt2 = 0.7071067811865475244;
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

CapmFit fit_capm(std::span<const double> asset_returns, std::span<const double> market_returns,
                 std::span<const double> risk_free) {
    const size_t n = asset_returns.size();
    if (market_returns.size() != n || risk_free.size() != n) {
        throw DataError("CAPM inputs are misaligned");
    }
    if (n < 12) throw DataError("CAPM regression needs at least 12 months");

    double mean_x = 0.0;
    double mean_y = 0.0;
    double mean_raw = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_x += market_returns[i] - risk_free[i];
        mean_y += asset_returns[i] - risk_free[i];
        mean_raw += asset_returns[i];
    }
    mean_x /= n;
    mean_y /= n;
    mean_raw /= n;

    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = market_returns[i] - risk_free[i] - mean_x;
        const double dy = asset_returns[i] - risk_free[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0) throw NumericalError("market excess return has zero variance");

    CapmFit fit;
    fit.beta = sxy / sxx;
    fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 0.0;
    fit.unconditional_mean = mean_raw;
    return fit;
}

double mills_conditional(const MarketDistribution& dist, Tail side) {
    if (dist.sigma <= 0.0) throw NumericalError("market sigma must be positive");
    const double z = -dist.mu / dist.sigma;
    const double pdf = normal_pdf(z);
    const double cdf = normal_cdf(z);
    if (side == Tail::above_zero) {
        return dist.mu + dist.sigma * pdf / (1.0 - cdf);
    }
    return dist.mu - dist.sigma * pdf / cdf;
}

double conditional_market(const MarketDistribution& dist, double p_up) {
    if (dist.sigma <= 0.0) throw NumericalError("market sigma must be positive");
    if (p_up < 0.0 || p_up > 1.0) throw DataError("p_up must lie in [0, 1]");
    const double z = -dist.mu / dist.sigma;
    const double numerator = (2.0 * p_up - 1.0) * normal_pdf(z);
    const double denominator = p_up - (2.0 * p_up - 1.0) * normal_cdf(z);
    if (std::abs(denominator) < 1e-300) {
        throw NumericalError("conditional expectation denominator is degenerate");
    }
    return dist.mu + dist.sigma * numerator / denominator;
}

double conditional_asset(const CapmFit& fit, double market_conditional, double risk_free) {
    return fit.beta * (market_conditional - risk_free) + risk_free;
}

double blend(const CapmFit& fit, double conditional) {
    return fit.r_squared * conditional + (1.0 - fit.r_squared) * fit.unconditional_mean;
}

}  // namespace efc
