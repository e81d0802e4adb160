#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>
#include <vector>

#include "efc/frontier.hpp"
#include "efc/market_data.hpp"

namespace efc {

/// Month-indexed predictor matrix. Row t may only contain information from
/// months <= t (every builder below lags by one month).
struct FeatureMatrix {
    std::vector<MonthKey> months;
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // months x names

    int row_count() const { return static_cast<int>(months.size()); }
};

/// Direction labels and sample weights per month: up = 1 when the monthly
/// market log return is positive, and the weight is its absolute value.
/// A return of exactly zero is labeled down with weight zero.
struct LabelSeries {
    std::vector<MonthKey> months;
    std::vector<int> direction;     // 1 = up, 0 = down
    std::vector<double> magnitude;  // |monthly market log return|
};

struct FeatureBundle {
    FeatureMatrix features;
    LabelSeries labels;  // aligned one-to-one with feature rows
    std::vector<std::string> warnings;
};

/// Mean vector and sample covariance of the daily log returns inside one
/// panel month: the estimation window for that month's frontier coefficients.
FrontierInputs monthly_frontier_inputs(const ReturnPanel& panel, int month_index);

/// Direction/magnitude labels for every panel month.
LabelSeries build_labels(const ReturnPanel& panel);

/// One-month-lagged frontier coefficients (r_mvp, sigma_mvp, u): the row for
/// month t is computed from month t-1 daily returns. Months with fewer than
/// 5 trading days are excluded with a warning.
FeatureBundle build_ef_features(const ReturnPanel& panel);

/// Monthly technical indicators on index bars built from daily closes
/// (high/low/close of the month), lagged one month:
/// %K(14), momentum(10), RSI(14), A/D oscillator, CCI(20).
FeatureMatrix build_technical_features(const ReturnPanel& panel,
                                       const PriceSeries& market_prices);

/// One-month-lagged monthly factor triple (Mkt-RF, SMB, HML). A gap in the
/// factor months is an error.
FeatureMatrix build_ff_features(const FactorData& factors);

/// CSV export with a header row: month, then one column per feature.
void write_feature_csv(const FeatureMatrix& features, std::ostream& out);

}  // namespace efc
