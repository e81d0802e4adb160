#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "efc/backtest.hpp"
#include "efc/errors.hpp"
#include "efc/optimizer.hpp"
#include "efc/returns_model.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/random_gen.hpp"

using namespace efc;

TEST_CASE("apply_fees: definition, identity, and full flip") {
    Eigen::VectorXd a(2), b(2);
    a << 0.5, 0.5;
    b << 0.6, 0.4;
    CHECK(apply_fees(a, b, 0.01) == doctest::Approx(0.002).epsilon(1e-15));
    CHECK(apply_fees(a, a, 0.01) == 0.0);
    Eigen::VectorXd c(2), d(2);
    c << 1.0, 0.0;
    d << 0.0, 1.0;
    CHECK(apply_fees(c, d, 0.01) == doctest::Approx(0.02).epsilon(1e-15));
}

TEST_CASE("portfolio_metrics: drawdown and constant-return closed forms") {
    // Equity path 100, 120, 90, 110 (log returns between the marks).
    std::vector<double> returns = {std::log(1.2), std::log(90.0 / 120.0), std::log(110.0 / 90.0)};
    // Pad to the 12-month minimum with flat months that do not change the
    // drawdown.
    while (returns.size() < 12) returns.push_back(0.0);
    std::vector<double> rf(returns.size(), 0.0);
    const PortfolioMetrics m = portfolio_metrics(returns, rf);
    CHECK(m.max_drawdown == doctest::Approx(-0.25).epsilon(1e-12));

    // Constant return: annual return and drawdown exist, the Sharpe ratio is
    // undefined (zero excess volatility).
    std::vector<double> constant(24, 0.01);
    std::vector<double> rf2(24, 0.0);
    const PortfolioMetrics c = portfolio_metrics(constant, rf2);
    CHECK(c.annual_return == doctest::Approx(std::exp(0.12) - 1.0).epsilon(1e-12));
    CHECK(c.max_drawdown == 0.0);
    CHECK_FALSE(c.sharpe.has_value());
}

TEST_CASE("portfolio_metrics matches the definitional oracle on random series") {
    testgen::Rng rng(41);
    std::vector<double> returns;
    std::vector<double> rf;
    for (int i = 0; i < 120; ++i) {
        returns.push_back(rng.normal(0.006, 0.04));
        rf.push_back(rng.uniform(0.0, 0.004));
    }
    const PortfolioMetrics m = portfolio_metrics(returns, rf);
    const oracle::Metrics expected = oracle::metrics_by_definition(returns, rf);
    CHECK(*m.sharpe == doctest::Approx(expected.sharpe).epsilon(1e-12));
    CHECK(m.annual_return == doctest::Approx(expected.annual_return).epsilon(1e-12));
    CHECK(m.max_drawdown == doctest::Approx(expected.max_drawdown).epsilon(1e-12));
}

TEST_CASE("classification_report: definitional arithmetic") {
    // TP=9, FP=4, FN=1, TN=6.
    std::vector<int> predicted;
    std::vector<int> actual;
    for (int i = 0; i < 9; ++i) { predicted.push_back(1); actual.push_back(1); }
    for (int i = 0; i < 4; ++i) { predicted.push_back(1); actual.push_back(0); }
    for (int i = 0; i < 1; ++i) { predicted.push_back(0); actual.push_back(1); }
    for (int i = 0; i < 6; ++i) { predicted.push_back(0); actual.push_back(0); }
    const ClassificationReport r = classification_report(predicted, actual);
    CHECK(*r.accuracy == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(*r.precision == doctest::Approx(9.0 / 13.0).epsilon(1e-15));
    CHECK(*r.recall == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(*r.npv == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
    const double f1 = 2.0 * (9.0 / 13.0) * 0.9 / (9.0 / 13.0 + 0.9);
    CHECK(*r.f1 == doctest::Approx(f1).epsilon(1e-15));
}

TEST_CASE("classification_report: all correct, and undefined NPV") {
    std::vector<int> ones(10, 1);
    const ClassificationReport perfect = classification_report(ones, ones);
    CHECK(*perfect.accuracy == 1.0);
    CHECK(*perfect.precision == 1.0);
    CHECK(*perfect.recall == 1.0);
    CHECK(*perfect.f1 == 1.0);
    CHECK_FALSE(perfect.npv.has_value());  // no negative predictions
}

TEST_CASE("alpha_regression: exact offset, identical series, and recovery") {
    testgen::Rng rng(42);
    std::vector<double> bench;
    std::vector<double> rf;
    for (int i = 0; i < 180; ++i) {
        bench.push_back(rng.normal(0.005, 0.04));
        rf.push_back(0.001);
    }

    std::vector<double> offset = bench;
    for (double& r : offset) r += 0.01;
    const AlphaRegression exact = alpha_regression(offset, bench, rf);
    CHECK(exact.alpha_annual == doctest::Approx(0.12).epsilon(1e-9));
    CHECK(exact.p_value < 1e-10);

    const AlphaRegression none = alpha_regression(bench, bench, rf);
    CHECK(none.alpha_annual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(none.p_value == 1.0);

    // Known alpha of 0.005/month plus noise: recovered within 2 SE.
    std::vector<double> noisy;
    for (int i = 0; i < 180; ++i) noisy.push_back(bench[i] + 0.005 + rng.normal(0.0, 0.01));
    const AlphaRegression rec = alpha_regression(noisy, bench, rf);
    const double se_monthly = (rec.t_stat != 0.0) ? (rec.alpha_annual / 12.0) / rec.t_stat
                                                  : 0.01 / std::sqrt(180.0);
    CHECK(std::abs(rec.alpha_annual / 12.0 - 0.005) < 2.0 * se_monthly);
}

TEST_CASE("student_t_two_sided_p: sanity against known quantiles") {
    // t = 1.96 with large dof approaches the normal two-sided 5%.
    CHECK(student_t_two_sided_p(1.96, 1000.0) == doctest::Approx(0.0502).epsilon(0.01));
    CHECK(student_t_two_sided_p(0.0, 30.0) == doctest::Approx(1.0).epsilon(1e-12));
    // t_{0.975, 10} = 2.228.
    CHECK(student_t_two_sided_p(2.228, 10.0) == doctest::Approx(0.05).epsilon(0.01));
}

namespace {

BacktestConfig small_config(MonthKey in_sample_end) {
    BacktestConfig config;
    config.in_sample_end = in_sample_end;
    config.fee_rate = 0.01;
    config.gross_cap = 1.5;
    config.cov_window_months = 12;
    return config;
}

}  // namespace

TEST_CASE("run_walkforward: feasibility, equity reconstruction, fee accounting") {
    const auto data = fixtures::make_market_data(51, 2000, 1, 2006, 12, 5);
    const BacktestConfig config = small_config(month_key(2002, 12));
    const BacktestResult result = run_walkforward(data, config);

    REQUIRE(result.months.size() == 48);
    REQUIRE(result.strategy.size() == result.months.size());

    double equity = 1.0;
    for (size_t i = 0; i < result.strategy.size(); ++i) {
        const StrategyMonth& r = result.strategy[i];
        CHECK(r.gross_exposure <= 1.5 + 1e-6);
        CHECK(std::abs(r.weights.sum() - 1.0) <= 1e-7);
        equity *= 1.0 + (std::exp(r.net_log_return) - 1.0);
        CHECK(result.strategy_track.equity[i] == doctest::Approx(equity).epsilon(1e-10));
    }

    // Fee accounting: every fee equals rate * turnover, first month includes
    // the initial acquisition.
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(5);
    for (size_t i = 0; i < result.strategy.size(); ++i) {
        const StrategyMonth& r = result.strategy[i];
        CHECK(r.fee ==
              doctest::Approx(0.01 * (r.weights - prev).cwiseAbs().sum()).epsilon(1e-12));
        prev = r.weights;
    }

    // Equal-weight benchmark pays the acquisition fee once.
    CHECK(result.equal_weight.fees[0] == doctest::Approx(0.01).epsilon(1e-12));
    for (size_t i = 1; i < result.equal_weight.fees.size(); ++i) {
        CHECK(result.equal_weight.fees[i] == 0.0);
    }

    // Index benchmark compounds the market log returns exactly.
    double index_equity = 1.0;
    for (size_t i = 0; i < result.months.size(); ++i) {
        const int m = data.panel.month_index(result.months[i]);
        index_equity *= std::exp(data.panel.monthly_market_log_returns(m));
        CHECK(result.index.equity[i] == doctest::Approx(index_equity).epsilon(1e-12));
    }
}

TEST_CASE("run_walkforward: anti-leakage under future mutation") {
    const auto base = fixtures::make_market_data(52, 2000, 1, 2004, 12, 4);
    const BacktestConfig config = small_config(month_key(2001, 12));
    const BacktestResult full = run_walkforward(base, config);

    // Mutate prices strictly after an anchor month and rerun.
    const MonthKey anchor = month_key(2003, 6);
    auto mutated = base;
    auto mutate_series = [&](PriceSeries& series) {
        int k = 0;
        for (PriceObservation& obs : series.observations) {
            if (month_key(obs.date) > anchor) {
                obs.adj_close *= 1.05 + 0.01 * std::sin(static_cast<double>(++k));
            }
        }
    };
    {
        efc::SyntheticSpec spec;
        spec.seed = 52;
        spec.first_month = month_key(2000, 1);
        spec.last_month = month_key(2004, 12);
        spec.n_assets = 4;
        efc::SyntheticMarket market = efc::generate_synthetic_market(spec);
        for (PriceSeries& s : market.assets) mutate_series(s);
        mutate_series(market.market);
        mutated.market_prices = market.market;
        mutated.factors = market.factors;
        mutated.panel = to_monthly_panel(market.assets, market.market, market.factors);
    }
    const BacktestResult shifted = run_walkforward(mutated, config);

    for (size_t i = 0; i < full.months.size(); ++i) {
        if (full.months[i] > anchor) break;
        CHECK(full.strategy[i].forecast.p_up == shifted.strategy[i].forecast.p_up);
        CHECK(full.strategy[i].forecast.direction == shifted.strategy[i].forecast.direction);
        CHECK(full.strategy[i].selected_depth == shifted.strategy[i].selected_depth);
        CHECK(full.strategy[i].fee == shifted.strategy[i].fee);
        for (int a = 0; a < 4; ++a) {
            CHECK(full.strategy[i].weights(a) == shifted.strategy[i].weights(a));
        }
    }
}

TEST_CASE("run_walkforward: always-rising market converges to up forecasts and hand-composed weights") {
    // Strong drift, tiny volatility: every monthly market return is positive.
    efc::SyntheticSpec spec;
    spec.seed = 53;
    spec.first_month = month_key(2000, 1);
    spec.last_month = month_key(2004, 12);
    spec.n_assets = 4;
    spec.market_mu_monthly = 0.04;
    spec.market_sigma_monthly = 0.008;
    const efc::SyntheticMarket market = efc::generate_synthetic_market(spec);
    efc::WalkForwardData data;
    data.market_prices = market.market;
    data.factors = market.factors;
    data.panel = to_monthly_panel(market.assets, market.market, market.factors);
    REQUIRE(data.panel.monthly_market_log_returns.minCoeff() > 0.0);

    const BacktestConfig config = small_config(month_key(2001, 12));
    const BacktestResult result = run_walkforward(data, config);

    for (const StrategyMonth& r : result.strategy) {
        CHECK(r.forecast.direction == 1);  // single-class training data
        CHECK(r.forecast.p_up == 1.0);
    }

    // Hand-compose a few months from the modules and compare weights.
    for (const size_t i : {size_t{0}, result.strategy.size() / 2, result.strategy.size() - 1}) {
        const StrategyMonth& r = result.strategy[i];
        const int mt = data.panel.month_index(r.month);
        const auto market_head = data.panel.monthly_market_log_returns.head(mt);
        MarketDistribution dist;
        dist.mu = market_head.mean();
        dist.sigma = std::sqrt((market_head.array() - dist.mu).square().sum() / (mt - 1));
        const double rf = data.panel.monthly_risk_free(mt - 1);
        const double cm = conditional_market(dist, 1.0);

        Eigen::VectorXd blended(4);
        for (int a = 0; a < 4; ++a) {
            const Eigen::VectorXd asset_col =
                data.panel.monthly_asset_log_returns.col(a).head(mt);
            const CapmFit fit =
                fit_capm(std::span<const double>(asset_col.data(), static_cast<size_t>(mt)),
                         std::span<const double>(market_head.data(), static_cast<size_t>(mt)),
                         std::span<const double>(data.panel.monthly_risk_free.data(),
                                                 static_cast<size_t>(mt)));
            blended(a) = blend(fit, conditional_asset(fit, cm, rf));
        }
        for (int a = 0; a < 4; ++a) {
            CHECK(r.blended_returns(a) == doctest::Approx(blended(a)).epsilon(1e-14));
        }

        const int begin = data.panel.month_rows[mt - 12].first;
        const int end = data.panel.month_rows[mt - 1].second;
        const auto block = data.panel.daily_log_returns.middleRows(begin, end - begin);
        const Eigen::RowVectorXd mean = block.colwise().mean();
        const Eigen::MatrixXd centered = block.rowwise() - mean;
        const Eigen::MatrixXd V =
            centered.transpose() * centered / static_cast<double>(end - begin - 1) * 21.0;

        OptimizationProblem problem;
        problem.mean_returns = blended;
        problem.covariance = V;
        problem.risk_free = rf;
        problem.gross_cap = 1.5;
        const PortfolioWeights expected = tangency(problem);
        for (int a = 0; a < 4; ++a) {
            CHECK(r.weights(a) == doctest::Approx(expected.weights(a)).epsilon(1e-10));
        }
    }
}

TEST_CASE("run_walkforward: forced p = 0.5 collapses the conditional leg to mu") {
    const auto data = fixtures::make_market_data(54, 2000, 1, 2004, 12, 4);
    BacktestConfig config = small_config(month_key(2001, 12));
    config.force_p_up = 0.5;
    const BacktestResult result = run_walkforward(data, config);

    for (const size_t i : {size_t{0}, result.strategy.size() - 1}) {
        const StrategyMonth& r = result.strategy[i];
        const int mt = data.panel.month_index(r.month);
        const auto market_head = data.panel.monthly_market_log_returns.head(mt);
        const double mu = market_head.mean();
        const double rf = data.panel.monthly_risk_free(mt - 1);
        for (int a = 0; a < 4; ++a) {
            const Eigen::VectorXd asset_col =
                data.panel.monthly_asset_log_returns.col(a).head(mt);
            const CapmFit fit =
                fit_capm(std::span<const double>(asset_col.data(), static_cast<size_t>(mt)),
                         std::span<const double>(market_head.data(), static_cast<size_t>(mt)),
                         std::span<const double>(data.panel.monthly_risk_free.data(),
                                                 static_cast<size_t>(mt)));
            // With p = 0.5 the market conditional is exactly mu, so the
            // blended value is the plain CAPM blend at mu.
            const double expected = blend(fit, conditional_asset(fit, mu, rf));
            CHECK(r.blended_returns(a) == doctest::Approx(expected).epsilon(1e-14));
        }
    }
}

TEST_CASE("run_walkforward: zero fees and no cap reproduce closed-form benchmark tangency") {
    const auto data = fixtures::make_market_data(55, 2000, 1, 2004, 12, 4);
    BacktestConfig config = small_config(month_key(2001, 12));
    config.fee_rate = 0.0;
    config.gross_cap.reset();
    config.cap_benchmarks = true;  // benchmark inherits the absent cap
    const BacktestResult result = run_walkforward(data, config);

    for (size_t i = 0; i < result.months.size(); ++i) {
        const int mt = data.panel.month_index(result.months[i]);
        OptimizationProblem problem;
        problem.covariance = [&] {
            const int begin = data.panel.month_rows[mt - 12].first;
            const int end = data.panel.month_rows[mt - 1].second;
            const auto block = data.panel.daily_log_returns.middleRows(begin, end - begin);
            const Eigen::RowVectorXd mean = block.colwise().mean();
            const Eigen::MatrixXd centered = block.rowwise() - mean;
            return Eigen::MatrixXd(centered.transpose() * centered /
                                   static_cast<double>(end - begin - 1) * 21.0);
        }();
        problem.mean_returns =
            data.panel.monthly_asset_log_returns.middleRows(mt - 12, 12).colwise().mean();
        problem.risk_free = data.panel.monthly_risk_free(mt - 1);
        const PortfolioWeights expected = tangency_closed_form(problem);
        CHECK(result.tangency_benchmark.fees[i] == 0.0);
        for (int a = 0; a < 4; ++a) {
            CHECK(result.tangency_benchmark.weights[i](a) ==
                  doctest::Approx(expected.weights(a)).epsilon(1e-10));
        }
    }
}

TEST_CASE("run_walkforward: optimizer failure falls back to prior weights") {
    // More assets than daily observations in a 1-month window makes the
    // sample covariance singular, so every tangency solve fails. Factor
    // features keep the rest of the pipeline away from that covariance.
    const auto data = fixtures::make_market_data(56, 2000, 1, 2004, 12, 26);
    BacktestConfig config = small_config(month_key(2001, 12));
    config.cov_window_months = 1;
    config.feature_set = FeatureSet::fama_french;
    const BacktestResult result = run_walkforward(data, config);

    CHECK_FALSE(result.warnings.empty());
    for (const StrategyMonth& r : result.strategy) {
        CHECK(r.optimizer_failed);
        CHECK(r.weights.cwiseAbs().sum() == 0.0);  // never left the zero book
        CHECK(r.fee == 0.0);
    }
}

TEST_CASE("run_walkforward validates its preconditions") {
    const auto data = fixtures::make_market_data(57, 2000, 1, 2004, 12, 3);
    BacktestConfig config = small_config(month_key(2000, 12));  // only 12 in-sample months
    CHECK_THROWS_WITH_AS(run_walkforward(data, config), doctest::Contains("24 in-sample"),
                         DataError);

    BacktestConfig late = small_config(month_key(2010, 12));
    CHECK_THROWS_AS(run_walkforward(data, late), DataError);
}
