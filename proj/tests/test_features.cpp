#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "efc/errors.hpp"
#include "efc/features.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace efc;

TEST_CASE("build_ef_features: 24-month panel yields 23 rows, lag consumes the first") {
    const auto data = fixtures::make_market_data(21, 2000, 1, 2001, 12, 3);
    REQUIRE(data.panel.month_count() == 24);
    const FeatureBundle bundle = build_ef_features(data.panel);
    CHECK(bundle.features.row_count() == 23);
    CHECK(bundle.features.months.front() == month_key(2000, 2));
    CHECK(bundle.features.names == std::vector<std::string>{"r_mvp", "sigma_mvp", "u"});
    CHECK(bundle.labels.months == bundle.features.months);
}

TEST_CASE("build_ef_features: feature row equals coefficients recomputed from raw returns") {
    const auto data = fixtures::make_market_data(22, 2000, 1, 2002, 12, 4);
    const FeatureBundle bundle = build_ef_features(data.panel);

    // Recompute month index 4's inputs (feature row for month 5) by hand.
    const int target_row = 4;  // month index 5
    const auto [begin, end] = data.panel.month_rows[target_row];
    const int n = end - begin;
    const int n_assets = data.panel.asset_count();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_assets);
    for (int i = begin; i < end; ++i) mean += data.panel.daily_log_returns.row(i).transpose();
    mean /= n;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n_assets, n_assets);
    for (int i = begin; i < end; ++i) {
        const Eigen::VectorXd d = data.panel.daily_log_returns.row(i).transpose() - mean;
        cov += d * d.transpose();
    }
    cov /= (n - 1);

    const FrontierCoefficients abc = compute_abc(FrontierInputs{mean, cov});
    const InterpretableCoefficients expected = interpretable_coefficients(abc);

    REQUIRE(bundle.features.months[target_row] == data.panel.months[target_row + 1]);
    CHECK(bundle.features.values(target_row, 0) == doctest::Approx(expected.r_mvp).epsilon(1e-12));
    CHECK(bundle.features.values(target_row, 1) ==
          doctest::Approx(expected.sigma_mvp).epsilon(1e-12));
    CHECK(bundle.features.values(target_row, 2) == doctest::Approx(expected.u).epsilon(1e-12));
}

TEST_CASE("build_ef_features: labels follow the sign convention, zero is down") {
    const auto data = fixtures::make_market_data(23, 2000, 1, 2002, 12, 3);
    const FeatureBundle bundle = build_ef_features(data.panel);
    for (size_t i = 0; i < bundle.labels.months.size(); ++i) {
        const int m = data.panel.month_index(bundle.labels.months[i]);
        const double r = data.panel.monthly_market_log_returns(m);
        CHECK(bundle.labels.direction[i] == (r > 0.0 ? 1 : 0));
        CHECK(bundle.labels.magnitude[i] == std::abs(r));
    }
}

TEST_CASE("build_ef_features: anti-leakage under truncation") {
    const auto full = fixtures::make_market_data(24, 2000, 1, 2004, 12, 3);
    const auto truncated = fixtures::make_market_data(24, 2000, 1, 2003, 6, 3);
    const FeatureBundle full_bundle = build_ef_features(full.panel);
    const FeatureBundle cut_bundle = build_ef_features(truncated.panel);

    // Every row present in both must be identical: truncating the future
    // cannot change the past.
    std::map<MonthKey, int> full_row;
    for (int i = 0; i < full_bundle.features.row_count(); ++i) {
        full_row.emplace(full_bundle.features.months[i], i);
    }
    REQUIRE(cut_bundle.features.row_count() > 12);
    for (int i = 0; i < cut_bundle.features.row_count(); ++i) {
        const auto it = full_row.find(cut_bundle.features.months[i]);
        REQUIRE(it != full_row.end());
        for (int j = 0; j < 3; ++j) {
            CHECK(cut_bundle.features.values(i, j) == full_bundle.features.values(it->second, j));
        }
    }
}

namespace {

// Bars equivalent to the library's monthly aggregation, for the oracle.
std::vector<oracle::Bar> oracle_bars(const ReturnPanel& panel, const PriceSeries& market) {
    std::map<Date, double> closes;
    for (const auto& obs : market.observations) closes.emplace(obs.date, obs.adj_close);
    std::vector<oracle::Bar> bars;
    MonthKey current = -1;
    for (const Date& d : panel.dates) {
        const double price = closes.at(d);
        if (month_key(d) != current) {
            current = month_key(d);
            bars.push_back(oracle::Bar{price, price, price});
        } else {
            bars.back().high = std::max(bars.back().high, price);
            bars.back().low = std::min(bars.back().low, price);
            bars.back().close = price;
        }
    }
    return bars;
}

}  // namespace

TEST_CASE("build_technical_features matches the definitional oracle with a one-month lag") {
    const auto data = fixtures::make_market_data(31, 2000, 1, 2004, 12, 3);
    const FeatureMatrix features = build_technical_features(data.panel, data.market_prices);
    const std::vector<oracle::Bar> bars = oracle_bars(data.panel, data.market_prices);

    REQUIRE(features.row_count() > 12);
    for (int i = 0; i < features.row_count(); ++i) {
        // Feature month m holds the indicator of the previous panel month.
        const int m = data.panel.month_index(features.months[i]);
        REQUIRE(m >= 1);
        const int t = m - 1;
        CHECK(features.values(i, 0) ==
              doctest::Approx(*oracle::stoch_k_def(bars, t, 14)).epsilon(1e-12));
        CHECK(features.values(i, 1) ==
              doctest::Approx(*oracle::momentum_def(bars, t, 10)).epsilon(1e-12));
        CHECK(features.values(i, 2) == doctest::Approx(*oracle::rsi_def(bars, t, 14)).epsilon(1e-9));
        CHECK(features.values(i, 3) == doctest::Approx(*oracle::ad_osc_def(bars, t)).epsilon(1e-12));
        CHECK(features.values(i, 4) == doctest::Approx(*oracle::cci_def(bars, t, 20)).epsilon(1e-9));
    }
}

TEST_CASE("technical indicators: boundary values on strictly rising prices") {
    // Strictly rising closes: RSI = 100 and the close sits at the lookback
    // high, so %K = 100.
    std::vector<oracle::Bar> bars;
    PriceSeries market;
    market.ticker = "M";
    std::vector<PriceSeries> assets(2);
    assets[0].ticker = "A";
    assets[1].ticker = "B";
    double price = 100.0;
    for (int m = 0; m < 30; ++m) {
        for (int day = 1; day <= 15; ++day) {
            price *= 1.002;
            const Date date{2000 + m / 12, m % 12 + 1, day};
            market.observations.push_back(PriceObservation{date, price});
            assets[0].observations.push_back(PriceObservation{date, 50.0 + 0.01 * m * day});
            assets[1].observations.push_back(PriceObservation{date, 60.0 - 0.01 * (m % 7)});
        }
    }
    FactorData factors;
    for (int m = 0; m < 30; ++m) {
        factors.rows.push_back(FactorRow{month_key(2000 + m / 12, m % 12 + 1), 0, 0, 0, 0.001});
    }
    const ReturnPanel panel = to_monthly_panel(assets, market, factors);
    const FeatureMatrix features = build_technical_features(panel, market);
    REQUIRE(features.row_count() >= 1);
    for (int i = 0; i < features.row_count(); ++i) {
        CHECK(features.values(i, 0) == doctest::Approx(100.0).epsilon(1e-12));  // %K
        CHECK(features.values(i, 2) == doctest::Approx(100.0).epsilon(1e-12));  // RSI
    }
}

TEST_CASE("build_ff_features: lag mapping, fixed columns, and gap detection") {
    FactorData factors;
    factors.rows.push_back(FactorRow{month_key(2008, 1), -0.061, -0.0089, 0.0385, 0.0021});
    factors.rows.push_back(FactorRow{month_key(2008, 2), 0.02, 0.001, -0.002, 0.002});
    factors.rows.push_back(FactorRow{month_key(2008, 3), 0.01, 0.002, 0.003, 0.002});

    const FeatureMatrix features = build_ff_features(factors);
    CHECK(features.names == std::vector<std::string>{"mkt_rf", "smb", "hml"});
    REQUIRE(features.row_count() == 2);
    CHECK(features.months[0] == month_key(2008, 2));
    CHECK(features.values(0, 0) == doctest::Approx(-0.061));  // January's factors
    CHECK(features.values(1, 1) == doctest::Approx(0.001));

    FactorData gappy = factors;
    gappy.rows[2].month = month_key(2008, 4);
    CHECK_THROWS_WITH_AS(build_ff_features(gappy), doctest::Contains("gap"), DataError);
}

TEST_CASE("build_ef_features: short months are excluded with a warning") {
    // A panel where one month has only 3 trading dates.
    std::vector<PriceSeries> assets(2);
    assets[0].ticker = "A";
    assets[1].ticker = "B";
    PriceSeries market;
    market.ticker = "M";
    double price = 100.0;
    for (int m = 0; m < 26; ++m) {
        const int days = (m == 10) ? 3 : 15;
        for (int day = 1; day <= days; ++day) {
            price *= (day % 2 == 0) ? 1.003 : 0.999;
            const Date date{2000 + m / 12, m % 12 + 1, day};
            market.observations.push_back(PriceObservation{date, price});
            assets[0].observations.push_back(
                PriceObservation{date, 50.0 * (1.0 + 0.001 * ((m * 31 + day) % 17))});
            assets[1].observations.push_back(
                PriceObservation{date, 60.0 * (1.0 + 0.002 * ((m * 7 + day) % 13))});
        }
    }
    FactorData factors;
    for (int m = 0; m < 26; ++m) {
        factors.rows.push_back(FactorRow{month_key(2000 + m / 12, m % 12 + 1), 0, 0, 0, 0.001});
    }
    const ReturnPanel panel = to_monthly_panel(assets, market, factors);
    const FeatureBundle bundle = build_ef_features(panel);

    // Month 10 is too short: it can be neither a feature month nor a label
    // month, so two rows drop out.
    CHECK(bundle.features.row_count() == 23);
    CHECK(bundle.warnings.size() == 2);
    for (const MonthKey m : bundle.features.months) {
        CHECK(m != panel.months[10]);
        CHECK(m != panel.months[11]);  // its features would come from month 10
    }
}
