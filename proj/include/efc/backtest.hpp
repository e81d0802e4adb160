#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "efc/cart.hpp"
#include "efc/features.hpp"
#include "efc/market_data.hpp"

namespace efc {

enum class FeatureSet { ef_coefs, technical, fama_french };

FeatureSet parse_feature_set(const std::string& name);
std::string feature_set_name(FeatureSet set);

struct BacktestConfig {
    MonthKey in_sample_end = 0;  // last month used only for training
    std::optional<MonthKey> start;  // clip the evaluated horizon
    std::optional<MonthKey> end;
    double fee_rate = 0.01;
    std::optional<double> gross_cap = 1.5;
    bool cap_benchmarks = true;
    FeatureSet feature_set = FeatureSet::ef_coefs;
    int cov_window_months = 12;  // trailing daily-return window, scaled x21
    bool use_sample_weights = true;
    int cv_folds = 5;
    bool discretize_forecast = true;
    std::optional<double> force_p_up;  // study knob: bypass the tree forecast
};

struct StrategyMonth {
    MonthKey month = 0;
    Forecast forecast;
    int selected_depth = 0;
    Eigen::VectorXd weights;
    Eigen::VectorXd blended_returns;  // expected-return vector fed to the solver
    double gross_exposure = 0.0;
    double fee = 0.0;
    double gross_log_return = 0.0;
    double net_log_return = 0.0;
    bool optimizer_failed = false;
};

struct PortfolioTrack {
    std::string name;
    std::vector<double> net_log_returns;
    std::vector<double> equity;  // starts at 1.0, net of fees
    std::vector<Eigen::VectorXd> weights;
    std::vector<double> fees;
};

struct PortfolioMetrics {
    std::optional<double> sharpe;  // undefined when excess volatility is zero
    double annual_return = 0.0;
    double max_drawdown = 0.0;  // most negative peak-to-trough fraction
};

struct ClassificationReport {
    int tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> npv;
};

struct AlphaRegression {
    double alpha_annual = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
};

struct BacktestResult {
    std::vector<MonthKey> months;  // evaluated horizon
    std::vector<std::string> assets;
    std::vector<StrategyMonth> strategy;
    PortfolioTrack strategy_track;
    PortfolioTrack tangency_benchmark;
    PortfolioTrack equal_weight;
    PortfolioTrack index;
    std::vector<TreeModel> models;  // model that produced each month's forecast
    ClassificationReport classification;
    PortfolioMetrics strategy_metrics;
    PortfolioMetrics tangency_metrics;
    PortfolioMetrics equal_weight_metrics;
    PortfolioMetrics index_metrics;
    AlphaRegression alpha_vs_tangency;
    AlphaRegression alpha_vs_equal_weight;
    AlphaRegression alpha_vs_index;
    std::vector<std::string> warnings;
};

/// Everything the walk-forward needs: the aligned panel plus the raw inputs
/// required by the alternative feature sets.
struct WalkForwardData {
    ReturnPanel panel;
    PriceSeries market_prices;
    FactorData factors;
};

/// Turnover fee as a fraction of equity: fee_rate * sum|new - prev|.
double apply_fees(const Eigen::VectorXd& prev_weights, const Eigen::VectorXd& new_weights,
                  double fee_rate);

/// Annualized Sharpe (sqrt(12) scaling), annualized return from the mean
/// monthly log return, and max drawdown of the implied equity curve.
PortfolioMetrics portfolio_metrics(std::span<const double> monthly_log_returns,
                                   std::span<const double> risk_free);

/// Up is the positive class. Empty denominators yield nullopt, not zero.
ClassificationReport classification_report(std::span<const int> predicted,
                                           std::span<const int> actual);

/// OLS of strategy excess on benchmark excess with intercept; the annualized
/// intercept and its two-sided p-value.
AlphaRegression alpha_regression(std::span<const double> strategy_returns,
                                 std::span<const double> benchmark_returns,
                                 std::span<const double> risk_free);

/// Monthly walk-forward: forecast, build the conditional return vector, solve
/// the capped tangency, charge fees, realize returns; the three benchmarks
/// run in the same loop.
BacktestResult run_walkforward(const WalkForwardData& data, const BacktestConfig& config);

/// Two-sided p-value of a t-statistic with the given degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace efc
