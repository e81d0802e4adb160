#include "efc/features.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>

#include "efc/errors.hpp"

namespace efc {

namespace {

constexpr int kMinTradingDays = 5;

struct MonthlyBar {
    MonthKey month = 0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
};

// Index bars from daily closes restricted to the panel calendar. Only
// adjusted closes are ingested, so the bar high/low are the month's extreme
// closes.
std::vector<MonthlyBar> monthly_bars(const ReturnPanel& panel, const PriceSeries& market_prices) {
    std::map<Date, double> closes;
    for (const PriceObservation& obs : market_prices.observations) {
        closes.emplace(obs.date, obs.adj_close);
    }
    std::vector<MonthlyBar> bars;
    for (const Date& date : panel.dates) {
        const auto it = closes.find(date);
        if (it == closes.end()) {
            throw DataError("market price series missing panel date " + to_string(date));
        }
        const MonthKey m = month_key(date);
        if (bars.empty() || bars.back().month != m) {
            bars.push_back(MonthlyBar{m, it->second, it->second, it->second});
        } else {
            bars.back().high = std::max(bars.back().high, it->second);
            bars.back().low = std::min(bars.back().low, it->second);
            bars.back().close = it->second;
        }
    }
    return bars;
}

double stochastic_k(const std::vector<MonthlyBar>& bars, int t, int period) {
    double hh = bars[t].high;
    double ll = bars[t].low;
    for (int i = t - period + 1; i <= t; ++i) {
        hh = std::max(hh, bars[i].high);
        ll = std::min(ll, bars[i].low);
    }
    if (hh == ll) return 50.0;
    return 100.0 * (bars[t].close - ll) / (hh - ll);
}

double momentum(const std::vector<MonthlyBar>& bars, int t, int period) {
    return bars[t].close - bars[t - period].close;
}

double rsi(const std::vector<MonthlyBar>& bars, int t, int period) {
    double gain = 0.0;
    double loss = 0.0;
    for (int i = t - period + 1; i <= t; ++i) {
        const double change = bars[i].close - bars[i - 1].close;
        if (change > 0.0) gain += change;
        else loss -= change;
    }
    if (loss == 0.0 && gain == 0.0) return 50.0;
    if (loss == 0.0) return 100.0;
    const double rs = gain / loss;
    return 100.0 - 100.0 / (1.0 + rs);
}

double ad_oscillator(const std::vector<MonthlyBar>& bars, int t) {
    const double range = bars[t].high - bars[t].low;
    if (range == 0.0) return 0.5;
    return (bars[t].high - bars[t - 1].close) / range;
}

double cci(const std::vector<MonthlyBar>& bars, int t, int period) {
    auto typical = [&](int i) { return (bars[i].high + bars[i].low + bars[i].close) / 3.0; };
    double sma = 0.0;
    for (int i = t - period + 1; i <= t; ++i) sma += typical(i);
    sma /= period;
    double mean_dev = 0.0;
    for (int i = t - period + 1; i <= t; ++i) mean_dev += std::abs(typical(i) - sma);
    mean_dev /= period;
    if (mean_dev == 0.0) return 0.0;
    return (typical(t) - sma) / (0.015 * mean_dev);
}

}  // namespace

FrontierInputs monthly_frontier_inputs(const ReturnPanel& panel, int month_index) {
    if (month_index < 0 || month_index >= panel.month_count()) {
        throw DataError("month index out of range");
    }
    const auto [begin, end] = panel.month_rows[month_index];
    const int n = end - begin;
    if (n < 2) {
        throw DataError("month " + month_to_string(panel.months[month_index]) +
                        " has too few daily returns for a covariance estimate");
    }
    const auto block = panel.daily_log_returns.middleRows(begin, n);
    FrontierInputs inputs;
    inputs.mean_returns = block.colwise().mean();
    const Eigen::MatrixXd centered = block.rowwise() - inputs.mean_returns.transpose();
    inputs.covariance = centered.transpose() * centered / static_cast<double>(n - 1);
    return inputs;
}

LabelSeries build_labels(const ReturnPanel& panel) {
    LabelSeries labels;
    labels.months = panel.months;
    labels.direction.resize(panel.month_count());
    labels.magnitude.resize(panel.month_count());
    for (int m = 0; m < panel.month_count(); ++m) {
        const double r = panel.monthly_market_log_returns(m);
        labels.direction[m] = r > 0.0 ? 1 : 0;
        labels.magnitude[m] = std::abs(r);
    }
    return labels;
}

FeatureBundle build_ef_features(const ReturnPanel& panel) {
    if (panel.month_count() < 2) throw DataError("need at least 2 months of data");

    FeatureBundle bundle;
    bundle.features.names = {"r_mvp", "sigma_mvp", "u"};

    std::vector<Eigen::Vector3d> rows;
    for (int m = 1; m < panel.month_count(); ++m) {
        const bool short_feature_month = panel.trading_days[m - 1] < kMinTradingDays;
        const bool short_label_month = panel.trading_days[m] < kMinTradingDays;
        if (short_feature_month || short_label_month) {
            const int bad = short_feature_month ? m - 1 : m;
            bundle.warnings.push_back("excluding month " + month_to_string(panel.months[m]) +
                                      ": month " + month_to_string(panel.months[bad]) +
                                      " has fewer than 5 trading days");
            continue;
        }
        const FrontierInputs inputs = monthly_frontier_inputs(panel, m - 1);
        const InterpretableCoefficients coefs = interpretable_coefficients(compute_abc(inputs));
        rows.emplace_back(coefs.r_mvp, coefs.sigma_mvp, coefs.u);
        bundle.features.months.push_back(panel.months[m]);

        const double r = panel.monthly_market_log_returns(m);
        bundle.labels.months.push_back(panel.months[m]);
        bundle.labels.direction.push_back(r > 0.0 ? 1 : 0);
        bundle.labels.magnitude.push_back(std::abs(r));
    }

    bundle.features.values.resize(static_cast<int>(rows.size()), 3);
    for (size_t i = 0; i < rows.size(); ++i) {
        bundle.features.values.row(static_cast<int>(i)) = rows[i].transpose();
    }
    return bundle;
}

FeatureMatrix build_technical_features(const ReturnPanel& panel,
                                       const PriceSeries& market_prices) {
    if (panel.month_count() < 15) {
        throw DataError("need at least 15 months of index history for technical indicators");
    }
    const std::vector<MonthlyBar> bars = monthly_bars(panel, market_prices);

    // Longest warmup: CCI(20) needs 20 bars; RSI(14) needs 14 prior changes.
    constexpr int kStochPeriod = 14;
    constexpr int kMomentumPeriod = 10;
    constexpr int kRsiPeriod = 14;
    constexpr int kCciPeriod = 20;
    const int first_valid = std::max({kStochPeriod - 1, kMomentumPeriod, kRsiPeriod, kCciPeriod - 1});

    FeatureMatrix features;
    features.names = {"stoch_k", "momentum", "rsi", "ad_osc", "cci"};

    std::vector<Eigen::Matrix<double, 5, 1>> rows;
    const int n_bars = static_cast<int>(bars.size());
    for (int t = first_valid; t + 1 < n_bars; ++t) {
        Eigen::Matrix<double, 5, 1> row;
        row << stochastic_k(bars, t, kStochPeriod), momentum(bars, t, kMomentumPeriod),
            rsi(bars, t, kRsiPeriod), ad_oscillator(bars, t), cci(bars, t, kCciPeriod);
        rows.push_back(row);
        features.months.push_back(bars[t + 1].month);  // lagged one month
    }
    if (rows.empty()) {
        throw DataError("insufficient lookback: no technical feature rows remain");
    }
    features.values.resize(static_cast<int>(rows.size()), 5);
    for (size_t i = 0; i < rows.size(); ++i) {
        features.values.row(static_cast<int>(i)) = rows[i].transpose();
    }
    return features;
}

FeatureMatrix build_ff_features(const FactorData& factors) {
    if (factors.rows.size() < 2) throw DataError("need at least 2 factor months");
    for (size_t i = 1; i < factors.rows.size(); ++i) {
        if (factors.rows[i].month != factors.rows[i - 1].month + 1) {
            throw DataError("gap in factor months before " +
                            month_to_string(factors.rows[i].month));
        }
    }
    FeatureMatrix features;
    features.names = {"mkt_rf", "smb", "hml"};
    const int n = static_cast<int>(factors.rows.size()) - 1;
    features.values.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        const FactorRow& lagged = factors.rows[i];
        features.months.push_back(factors.rows[i + 1].month);
        features.values(i, 0) = lagged.mkt_minus_rf;
        features.values(i, 1) = lagged.smb;
        features.values(i, 2) = lagged.hml;
    }
    return features;
}

void write_feature_csv(const FeatureMatrix& features, std::ostream& out) {
    out << "month";
    for (const std::string& name : features.names) out << ',' << name;
    out << '\n';
    out << std::setprecision(17);
    for (int i = 0; i < features.row_count(); ++i) {
        out << month_to_string(features.months[i]);
        for (int j = 0; j < features.values.cols(); ++j) out << ',' << features.values(i, j);
        out << '\n';
    }
}

}  // namespace efc
