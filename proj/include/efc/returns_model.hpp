#pragma once

#include <Eigen/Dense>
#include <span>

#include "efc/cart.hpp"

namespace efc {

/// Single-factor regression of an asset's excess return on the market's.
struct CapmFit {
    double beta = 0.0;
    double r_squared = 0.0;        // in [0, 1]
    double unconditional_mean = 0.0;  // sample mean of the raw asset return
};

/// Normal model of the monthly market log return.
struct MarketDistribution {
    double mu = 0.0;
    double sigma = 0.0;  // > 0
};

enum class Tail { above_zero, below_zero };

/// Per-asset blended expected-return vector for one rebalance month.
struct ConditionalReturnEstimate {
    Eigen::VectorXd blended;
    Forecast forecast;
    MonthKey month = 0;
};

/// OLS of (r_a - r_f) on (r_m - r_f) with intercept over aligned monthly
/// series. Requires >= 12 months; zero market variance is an error. When the
/// asset's excess return has no variance, r_squared is 0.
CapmFit fit_capm(std::span<const double> asset_returns, std::span<const double> market_returns,
                 std::span<const double> risk_free);

/// Mean of the normal truncated to one side of zero (inverse Mills ratio):
///   above: mu + sigma * phi(-mu/sigma) / (1 - Phi(-mu/sigma))
///   below: mu - sigma * phi(-mu/sigma) / Phi(-mu/sigma)
double mills_conditional(const MarketDistribution& dist, Tail side);

/// Expected market return given an up-probability forecast p:
///   mu + sigma * (2p-1) phi(-mu/sigma) / (p - (2p-1) Phi(-mu/sigma)).
/// Degenerates to the truncated means at p = 0 and p = 1, and to mu at 0.5.
double conditional_market(const MarketDistribution& dist, double p_up);

/// Translates a market conditional to one asset: beta * (m - r_f) + r_f.
double conditional_asset(const CapmFit& fit, double market_conditional, double risk_free);

/// R^2-weighted blend of the conditional expectation with the asset's
/// unconditional mean.
double blend(const CapmFit& fit, double conditional);

double normal_pdf(double x);
double normal_cdf(double x);

}  // namespace efc
