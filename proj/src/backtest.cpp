#include "efc/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "efc/errors.hpp"
#include "efc/optimizer.hpp"
#include "efc/returns_model.hpp"

namespace efc {

FeatureSet parse_feature_set(const std::string& name) {
    if (name == "ef_coefs") return FeatureSet::ef_coefs;
    if (name == "technical") return FeatureSet::technical;
    if (name == "fama_french") return FeatureSet::fama_french;
    throw ConfigError("unknown feature set '" + name +
                      "' (expected ef_coefs | technical | fama_french)");
}

std::string feature_set_name(FeatureSet set) {
    switch (set) {
        case FeatureSet::ef_coefs: return "ef_coefs";
        case FeatureSet::technical: return "technical";
        case FeatureSet::fama_french: return "fama_french";
    }
    return "?";
}

double apply_fees(const Eigen::VectorXd& prev_weights, const Eigen::VectorXd& new_weights,
                  double fee_rate) {
    if (prev_weights.size() != new_weights.size()) {
        throw DataError("weight vectors differ in length");
    }
    return fee_rate * (new_weights - prev_weights).cwiseAbs().sum();
}

PortfolioMetrics portfolio_metrics(std::span<const double> monthly_log_returns,
                                   std::span<const double> risk_free) {
    const size_t n = monthly_log_returns.size();
    if (risk_free.size() != n) throw DataError("returns and risk-free series are misaligned");
    if (n < 12) throw DataError("portfolio metrics need at least 12 months");

    double mean_log = 0.0;
    double mean_excess = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_log += monthly_log_returns[i];
        mean_excess += monthly_log_returns[i] - risk_free[i];
    }
    mean_log /= n;
    mean_excess /= n;

    double var_excess = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = monthly_log_returns[i] - risk_free[i] - mean_excess;
        var_excess += d * d;
    }
    var_excess /= (n - 1);

    PortfolioMetrics metrics;
    // Zero excess volatility leaves the Sharpe ratio undefined; the other
    // two metrics still exist (a constant return has an annual return and a
    // flat drawdown).
    if (var_excess > 0.0) {
        metrics.sharpe = mean_excess / std::sqrt(var_excess) * std::sqrt(12.0);
    }
    metrics.annual_return = std::exp(12.0 * mean_log) - 1.0;

    double equity = 1.0;
    double peak = 1.0;
    double worst = 0.0;
    for (size_t i = 0; i < n; ++i) {
        equity *= std::exp(monthly_log_returns[i]);
        peak = std::max(peak, equity);
        worst = std::min(worst, (equity - peak) / peak);
    }
    metrics.max_drawdown = worst;
    return metrics;
}

ClassificationReport classification_report(std::span<const int> predicted,
                                           std::span<const int> actual) {
    if (predicted.size() != actual.size() || predicted.empty()) {
        throw DataError("classification report needs aligned nonempty series");
    }
    ClassificationReport report;
    for (size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == 1 && actual[i] == 1) ++report.tp;
        else if (predicted[i] == 1 && actual[i] == 0) ++report.fp;
        else if (predicted[i] == 0 && actual[i] == 1) ++report.fn;
        else ++report.tn;
    }
    const int total = report.tp + report.fp + report.tn + report.fn;
    report.accuracy = static_cast<double>(report.tp + report.tn) / total;
    if (report.tp + report.fp > 0) {
        report.precision = static_cast<double>(report.tp) / (report.tp + report.fp);
    }
    if (report.tp + report.fn > 0) {
        report.recall = static_cast<double>(report.tp) / (report.tp + report.fn);
    }
    if (report.precision && report.recall && *report.precision + *report.recall > 0.0) {
        report.f1 = 2.0 * *report.precision * *report.recall /
                    (*report.precision + *report.recall);
    }
    if (report.tn + report.fn > 0) {
        report.npv = static_cast<double>(report.tn) / (report.tn + report.fn);
    }
    return report;
}

namespace {

// Regularized incomplete beta via the continued fraction (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-30;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_two_sided_p(double t, double dof) {
    const double x = dof / (dof + t * t);
    return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

AlphaRegression alpha_regression(std::span<const double> strategy_returns,
                                 std::span<const double> benchmark_returns,
                                 std::span<const double> risk_free) {
    const size_t n = strategy_returns.size();
    if (benchmark_returns.size() != n || risk_free.size() != n) {
        throw DataError("alpha regression inputs are misaligned");
    }
    if (n < 24) throw DataError("alpha regression needs at least 24 months");

    double mean_x = 0.0;
    double mean_y = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_x += benchmark_returns[i] - risk_free[i];
        mean_y += strategy_returns[i] - risk_free[i];
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = benchmark_returns[i] - risk_free[i] - mean_x;
        const double dy = strategy_returns[i] - risk_free[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (sxx <= 0.0) throw NumericalError("benchmark excess return has zero variance");

    const double slope = sxy / sxx;
    const double alpha = mean_y - slope * mean_x;

    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double x = benchmark_returns[i] - risk_free[i];
        const double y = strategy_returns[i] - risk_free[i];
        const double resid = y - alpha - slope * x;
        sse += resid * resid;
    }

    AlphaRegression out;
    out.alpha_annual = 12.0 * alpha;
    const double dof = static_cast<double>(n) - 2.0;
    const double s2 = sse / dof;
    const double se_alpha = std::sqrt(s2 * (1.0 / n + mean_x * mean_x / sxx));
    if (se_alpha < 1e-15) {
        // Residual variance is numerically zero: either an exact fit
        // (no evidence of alpha) or an exact constant offset.
        out.t_stat = 0.0;
        out.p_value = std::abs(alpha) < 1e-14 ? 1.0 : 0.0;
        return out;
    }
    out.t_stat = alpha / se_alpha;
    out.p_value = student_t_two_sided_p(out.t_stat, dof);
    return out;
}

namespace {

struct AlignedRows {
    FeatureMatrix features;
    LabelSeries labels;
};

AlignedRows align_by_month(const FeatureMatrix& features, const LabelSeries& labels) {
    std::map<MonthKey, int> label_index;
    for (size_t i = 0; i < labels.months.size(); ++i) {
        label_index.emplace(labels.months[i], static_cast<int>(i));
    }
    AlignedRows out;
    out.features.names = features.names;
    std::vector<int> rows;
    for (int i = 0; i < features.row_count(); ++i) {
        const auto it = label_index.find(features.months[i]);
        if (it == label_index.end()) continue;
        rows.push_back(i);
        out.features.months.push_back(features.months[i]);
        out.labels.months.push_back(features.months[i]);
        out.labels.direction.push_back(labels.direction[it->second]);
        out.labels.magnitude.push_back(labels.magnitude[it->second]);
    }
    out.features.values.resize(static_cast<int>(rows.size()), features.values.cols());
    for (size_t k = 0; k < rows.size(); ++k) {
        out.features.values.row(static_cast<int>(k)) = features.values.row(rows[k]);
    }
    return out;
}

Eigen::MatrixXd trailing_covariance(const ReturnPanel& panel, int month_index, int window) {
    const int first_month = month_index - window;
    const int begin = panel.month_rows[first_month].first;
    const int end = panel.month_rows[month_index - 1].second;
    const int n = end - begin;
    const auto block = panel.daily_log_returns.middleRows(begin, n);
    const Eigen::RowVectorXd mean = block.colwise().mean();
    const Eigen::MatrixXd centered = block.rowwise() - mean;
    // Daily covariance scaled to the monthly horizon.
    return centered.transpose() * centered / static_cast<double>(n - 1) * 21.0;
}

struct TrackState {
    PortfolioTrack track;
    Eigen::VectorXd prev_weights;
    double equity = 1.0;
};

void realize_month(TrackState& state, const Eigen::VectorXd& weights, double fee,
                   const Eigen::VectorXd& asset_simple_returns, MonthKey month) {
    const double gross_simple = weights.dot(asset_simple_returns);
    const double net_growth = (1.0 + gross_simple) * (1.0 - fee);
    if (net_growth <= 0.0) {
        throw NumericalError("equity wiped out in month " + month_to_string(month));
    }
    state.equity *= net_growth;
    state.track.net_log_returns.push_back(std::log(net_growth));
    state.track.equity.push_back(state.equity);
    state.track.weights.push_back(weights);
    state.track.fees.push_back(fee);
    state.prev_weights = weights;
}

}  // namespace

BacktestResult run_walkforward(const WalkForwardData& data, const BacktestConfig& config) {
    const ReturnPanel& panel = data.panel;
    const int n_assets = panel.asset_count();
    const int n_months = panel.month_count();
    if (config.cov_window_months < 2) throw ConfigError("covariance window must be >= 2 months");
    if (config.fee_rate < 0.0) throw ConfigError("fee rate must be >= 0");

    // Out-of-sample horizon.
    int first_oos = -1;
    for (int m = 0; m < n_months; ++m) {
        if (panel.months[m] > config.in_sample_end &&
            (!config.start || panel.months[m] >= *config.start)) {
            first_oos = m;
            break;
        }
    }
    if (first_oos < 0) throw DataError("no out-of-sample months after the in-sample end");
    int last_oos = n_months - 1;
    if (config.end) {
        while (last_oos >= first_oos && panel.months[last_oos] > *config.end) --last_oos;
    }
    if (last_oos < first_oos) throw DataError("empty out-of-sample horizon");
    if (first_oos < 24) {
        throw DataError("need at least 24 in-sample months, have " + std::to_string(first_oos));
    }
    if (first_oos < config.cov_window_months) {
        throw DataError("in-sample period shorter than the covariance window");
    }

    BacktestResult result;
    result.assets = panel.assets;
    result.warnings = panel.warnings;

    // Feature rows for the chosen set, aligned with direction labels.
    const LabelSeries labels = build_labels(panel);
    AlignedRows rows;
    switch (config.feature_set) {
        case FeatureSet::ef_coefs: {
            FeatureBundle bundle = build_ef_features(panel);
            rows.features = std::move(bundle.features);
            rows.labels = std::move(bundle.labels);
            for (auto& w : bundle.warnings) result.warnings.push_back(std::move(w));
            break;
        }
        case FeatureSet::technical:
            rows = align_by_month(build_technical_features(panel, data.market_prices), labels);
            break;
        case FeatureSet::fama_french:
            rows = align_by_month(build_ff_features(data.factors), labels);
            break;
    }

    std::map<MonthKey, int> row_of_month;
    for (size_t i = 0; i < rows.features.months.size(); ++i) {
        row_of_month.emplace(rows.features.months[i], static_cast<int>(i));
    }
    const auto first_row_it = row_of_month.find(panel.months[first_oos]);
    if (first_row_it == row_of_month.end()) {
        throw DataError("no feature row for the first out-of-sample month " +
                        month_to_string(panel.months[first_oos]));
    }

    TreeHyperparams base;
    base.use_sample_weights = config.use_sample_weights;
    base.cv_folds = config.cv_folds;
    OnlineCart online(rows.features, rows.labels, base, first_row_it->second);

    TrackState strategy{PortfolioTrack{"strategy", {}, {}, {}, {}},
                        Eigen::VectorXd::Zero(n_assets), 1.0};
    TrackState tangency_bench{PortfolioTrack{"tangency", {}, {}, {}, {}},
                              Eigen::VectorXd::Zero(n_assets), 1.0};
    TrackState equal_weight{PortfolioTrack{"equal_weight", {}, {}, {}, {}},
                            Eigen::VectorXd::Zero(n_assets), 1.0};
    TrackState index{PortfolioTrack{"index", {}, {}, {}, {}}, Eigen::VectorXd::Zero(0), 1.0};

    std::vector<int> predicted;
    std::vector<int> actual;

    for (int mt = first_oos; mt <= last_oos; ++mt) {
        const MonthKey month = panel.months[mt];
        const auto row_it = row_of_month.find(month);
        if (row_it == row_of_month.end()) {
            throw DataError("no feature row for out-of-sample month " + month_to_string(month));
        }
        if (online.cursor() != row_it->second || online.done()) {
            throw DataError("feature rows skip out-of-sample month " + month_to_string(month));
        }

        StrategyMonth record;
        record.month = month;
        record.forecast = online.step();
        record.selected_depth = online.selected_depth();
        result.models.push_back(online.model());

        const double p_used = config.force_p_up
                                  ? *config.force_p_up
                                  : (config.discretize_forecast
                                         ? (record.forecast.direction == 1 ? 1.0 : 0.0)
                                         : record.forecast.p_up);

        // Expanding-window market distribution and CAPM fits through mt-1.
        const auto market_head = panel.monthly_market_log_returns.head(mt);
        MarketDistribution dist;
        dist.mu = market_head.mean();
        dist.sigma = std::sqrt((market_head.array() - dist.mu).square().sum() / (mt - 1));
        const double rf_known = panel.monthly_risk_free(mt - 1);

        const std::span<const double> market_span(market_head.data(), static_cast<size_t>(mt));
        const std::span<const double> rf_span(panel.monthly_risk_free.data(),
                                              static_cast<size_t>(mt));
        const double market_conditional = conditional_market(dist, p_used);

        record.blended_returns.resize(n_assets);
        for (int a = 0; a < n_assets; ++a) {
            const Eigen::VectorXd asset_col = panel.monthly_asset_log_returns.col(a).head(mt);
            const CapmFit fit = fit_capm(
                std::span<const double>(asset_col.data(), static_cast<size_t>(mt)), market_span,
                rf_span);
            const double conditional = conditional_asset(fit, market_conditional, rf_known);
            record.blended_returns(a) = blend(fit, conditional);
        }

        const Eigen::MatrixXd V = trailing_covariance(panel, mt, config.cov_window_months);

        OptimizationProblem problem;
        problem.covariance = V;
        problem.risk_free = rf_known;
        problem.gross_cap = config.gross_cap;
        problem.mean_returns = record.blended_returns;
        try {
            record.weights = tangency(problem).weights;
        } catch (const std::runtime_error& err) {
            record.optimizer_failed = true;
            record.weights = strategy.prev_weights;
            result.warnings.push_back("optimizer failed for " + month_to_string(month) + ": " +
                                      err.what());
        }
        record.gross_exposure = record.weights.cwiseAbs().sum();
        record.fee = apply_fees(strategy.prev_weights, record.weights, config.fee_rate);

        const Eigen::VectorXd asset_simple =
            panel.monthly_asset_log_returns.row(mt).array().exp() - 1.0;
        realize_month(strategy, record.weights, record.fee, asset_simple, month);
        record.net_log_return = strategy.track.net_log_returns.back();
        record.gross_log_return = std::log1p(record.weights.dot(asset_simple));

        // Benchmark 1: tangency on trailing historical means, same cap/fees.
        OptimizationProblem bench_problem;
        bench_problem.covariance = V;
        bench_problem.risk_free = rf_known;
        if (config.cap_benchmarks) bench_problem.gross_cap = config.gross_cap;
        bench_problem.mean_returns =
            panel.monthly_asset_log_returns.middleRows(mt - config.cov_window_months,
                                                       config.cov_window_months)
                .colwise()
                .mean();
        Eigen::VectorXd bench_weights;
        try {
            bench_weights = tangency(bench_problem).weights;
        } catch (const std::runtime_error& err) {
            bench_weights = tangency_bench.prev_weights;
            result.warnings.push_back("benchmark optimizer failed for " + month_to_string(month) +
                                      ": " + err.what());
        }
        const double bench_fee =
            apply_fees(tangency_bench.prev_weights, bench_weights, config.fee_rate);
        realize_month(tangency_bench, bench_weights, bench_fee, asset_simple, month);

        // Benchmark 2: equal weights held at 1/N.
        const Eigen::VectorXd ew = Eigen::VectorXd::Constant(n_assets, 1.0 / n_assets);
        const double ew_fee = apply_fees(equal_weight.prev_weights, ew, config.fee_rate);
        realize_month(equal_weight, ew, ew_fee, asset_simple, month);

        // Benchmark 3: frictionless buy-and-hold index.
        const double index_log = panel.monthly_market_log_returns(mt);
        index.equity *= std::exp(index_log);
        index.track.net_log_returns.push_back(index_log);
        index.track.equity.push_back(index.equity);
        index.track.fees.push_back(0.0);

        result.months.push_back(month);
        predicted.push_back(record.forecast.direction);
        actual.push_back(panel.monthly_market_log_returns(mt) > 0.0 ? 1 : 0);
        result.strategy.push_back(std::move(record));
    }

    result.strategy_track = std::move(strategy.track);
    result.tangency_benchmark = std::move(tangency_bench.track);
    result.equal_weight = std::move(equal_weight.track);
    result.index = std::move(index.track);

    result.classification = classification_report(predicted, actual);

    std::vector<double> rf_oos;
    for (int mt = first_oos; mt <= last_oos; ++mt) rf_oos.push_back(panel.monthly_risk_free(mt));

    result.strategy_metrics = portfolio_metrics(result.strategy_track.net_log_returns, rf_oos);
    result.tangency_metrics = portfolio_metrics(result.tangency_benchmark.net_log_returns, rf_oos);
    result.equal_weight_metrics = portfolio_metrics(result.equal_weight.net_log_returns, rf_oos);
    result.index_metrics = portfolio_metrics(result.index.net_log_returns, rf_oos);

    result.alpha_vs_tangency = alpha_regression(result.strategy_track.net_log_returns,
                                                result.tangency_benchmark.net_log_returns, rf_oos);
    result.alpha_vs_equal_weight = alpha_regression(result.strategy_track.net_log_returns,
                                                    result.equal_weight.net_log_returns, rf_oos);
    result.alpha_vs_index = alpha_regression(result.strategy_track.net_log_returns,
                                             result.index.net_log_returns, rf_oos);
    return result;
}

}  // namespace efc
