#include "efc/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "efc/errors.hpp"

namespace efc {

namespace {

// Hand-rolled Box-Muller so generated bytes do not depend on the standard
// library's normal_distribution implementation.
class NormalSampler {
  public:
    explicit NormalSampler(unsigned long seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    double uniform() {
        return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0);
    }

    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

int day_of_week(int y, int m, int d) {
    // Sakamoto's method; 0 = Sunday.
    static constexpr int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
    if (m < 3) y -= 1;
    return (y + y / 4 - y / 100 + y / 400 + t[m - 1] + d) % 7;
}

std::vector<Date> weekday_calendar(MonthKey first, MonthKey last) {
    std::vector<Date> dates;
    for (MonthKey m = first; m <= last; ++m) {
        const int year = year_of(m);
        const int month = month_of(m);
        for (int day = 1; day <= days_in_month(year, month); ++day) {
            const int dow = day_of_week(year, month, day);
            if (dow >= 1 && dow <= 5) dates.push_back(Date{year, month, day});
        }
    }
    return dates;
}

}  // namespace

SyntheticMarket generate_synthetic_market(SyntheticSpec spec) {
    if (spec.first_month == 0) spec.first_month = month_key(1999, 1);
    if (spec.last_month == 0) spec.last_month = month_key(2022, 12);
    if (spec.last_month <= spec.first_month) throw DataError("empty synthetic date range");
    if (spec.n_assets < 2) throw DataError("need at least 2 synthetic assets");

    const std::vector<Date> dates = weekday_calendar(spec.first_month, spec.last_month);
    const int n_days = static_cast<int>(dates.size());
    const int n_assets = spec.n_assets;
    constexpr double kDaysPerMonth = 21.0;

    NormalSampler normal(spec.seed);

    const double mu_d = spec.market_mu_monthly / kDaysPerMonth;
    const double sigma_d = spec.market_sigma_monthly / std::sqrt(kDaysPerMonth);

    std::vector<double> market_returns(n_days, 0.0);
    for (int i = 1; i < n_days; ++i) market_returns[i] = mu_d + sigma_d * normal();

    std::vector<double> betas(n_assets);
    std::vector<double> alphas(n_assets);
    std::vector<double> idio_sigma(n_assets);
    for (int a = 0; a < n_assets; ++a) {
        betas[a] = 0.6 + 0.9 * a / std::max(1, n_assets - 1);
        alphas[a] = (a % 3 - 1) * 0.0006;  // small +/- monthly alpha spread
        idio_sigma[a] = (0.02 + 0.002 * a) / std::sqrt(kDaysPerMonth);
    }

    SyntheticMarket out;
    out.market.ticker = "INDEX";
    out.market.observations.reserve(n_days);
    double market_price = 100.0;
    for (int i = 0; i < n_days; ++i) {
        market_price *= std::exp(market_returns[i]);
        out.market.observations.push_back(PriceObservation{dates[i], market_price});
    }

    char ticker[16];
    for (int a = 0; a < n_assets; ++a) {
        std::snprintf(ticker, sizeof(ticker), "AST%02d", a + 1);
        PriceSeries series;
        series.ticker = ticker;
        series.observations.reserve(n_days);
        double price = 50.0 + 10.0 * a;
        const double drift = alphas[a] / kDaysPerMonth +
                             (1.0 - betas[a]) * spec.risk_free_monthly / kDaysPerMonth;
        for (int i = 0; i < n_days; ++i) {
            if (i > 0) {
                const double r = drift + betas[a] * market_returns[i] + idio_sigma[a] * normal();
                price *= std::exp(r);
            }
            series.observations.push_back(PriceObservation{dates[i], price});
        }
        out.assets.push_back(std::move(series));
    }

    // Monthly factor rows from the generated market path, in decimals.
    for (MonthKey m = spec.first_month; m <= spec.last_month; ++m) {
        double market_month = 0.0;
        for (int i = 1; i < n_days; ++i) {
            if (month_key(dates[i]) == m) market_month += market_returns[i];
        }
        FactorRow row;
        row.month = m;
        row.rf = spec.risk_free_monthly * (1.0 + 0.1 * std::sin(0.05 * m));
        row.mkt_minus_rf = market_month - row.rf;
        row.smb = 0.015 * normal();
        row.hml = 0.015 * normal();
        out.factors.rows.push_back(row);
    }
    return out;
}

void write_synthetic_market(const SyntheticMarket& market, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    auto write_series = [&](const PriceSeries& series) {
        std::ofstream out(dir / (series.ticker + ".csv"));
        if (!out) throw IoError("cannot write " + (dir / (series.ticker + ".csv")).string());
        out << "date,adj_close\n";
        char buf[64];
        for (const PriceObservation& obs : series.observations) {
            std::snprintf(buf, sizeof(buf), "%s,%.8f\n", to_string(obs.date).c_str(),
                          obs.adj_close);
            out << buf;
        }
    };
    for (const PriceSeries& series : market.assets) write_series(series);
    write_series(market.market);

    std::ofstream out(dir / "factors.csv");
    if (!out) throw IoError("cannot write " + (dir / "factors.csv").string());
    out << "date,Mkt-RF,SMB,HML,RF\n";
    char buf[96];
    for (const FactorRow& row : market.factors.rows) {
        std::snprintf(buf, sizeof(buf), "%04d%02d,%.6f,%.6f,%.6f,%.6f\n", year_of(row.month),
                      month_of(row.month), row.mkt_minus_rf * 100.0, row.smb * 100.0,
                      row.hml * 100.0, row.rf * 100.0);
        out << buf;
    }
}

}  // namespace efc
