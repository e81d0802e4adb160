#include "efc/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "efc/csv.hpp"
#include "efc/errors.hpp"

namespace efc {

namespace {

double parse_double(const std::string& text, const std::string& what, int line) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("unparseable " + what + " '" + text + "' at row " + std::to_string(line));
    }
}

std::string canonical_header(std::string name) {
    std::erase_if(name, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return name;
}

}  // namespace

const FactorRow* FactorData::find(MonthKey month) const {
    const auto it = std::lower_bound(rows.begin(), rows.end(), month,
                                     [](const FactorRow& r, MonthKey m) { return r.month < m; });
    if (it == rows.end() || it->month != month) return nullptr;
    return &*it;
}

int ReturnPanel::month_index(MonthKey month) const {
    const auto it = std::lower_bound(months.begin(), months.end(), month);
    if (it == months.end() || *it != month) return -1;
    return static_cast<int>(it - months.begin());
}

PriceSeries load_price_csv(const std::filesystem::path& path, const PriceCsvSchema& schema) {
    if (!std::filesystem::exists(path)) throw IoError("missing file: " + path.string());
    const CsvTable table = read_csv(path);

    const int date_col = column_index(table, schema.date_column);
    const int price_col = column_index(table, schema.price_column);
    if (date_col < 0) {
        throw DataError("missing column '" + schema.date_column + "' in " + path.string());
    }
    if (price_col < 0) {
        throw DataError("missing column '" + schema.price_column + "' in " + path.string());
    }

    PriceSeries series;
    series.ticker = path.stem().string();
    series.observations.reserve(table.rows.size());
    for (const CsvRow& row : table.rows) {
        const int needed = std::max(date_col, price_col);
        if (static_cast<int>(row.fields.size()) <= needed) {
            throw DataError("short row " + std::to_string(row.line) + " in " + path.string());
        }
        const Date date = parse_date(row.fields[date_col]);
        const double price = parse_double(row.fields[price_col], "price", row.line);
        if (price <= 0.0) {
            throw DataError("non-positive price at row " + std::to_string(row.line) + " in " +
                            path.string());
        }
        series.observations.push_back(PriceObservation{date, price});
    }
    if (series.observations.empty()) throw DataError("no price rows in " + path.string());

    std::stable_sort(series.observations.begin(), series.observations.end(),
                     [](const PriceObservation& a, const PriceObservation& b) {
                         return a.date < b.date;
                     });
    for (size_t i = 1; i < series.observations.size(); ++i) {
        if (series.observations[i].date == series.observations[i - 1].date) {
            throw DataError("duplicate date " + to_string(series.observations[i].date) + " in " +
                            path.string());
        }
    }
    return series;
}

FactorData load_factor_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("missing file: " + path.string());
    const CsvTable table = read_csv(path);

    // Published layout: a date column (often unnamed) followed by
    // Mkt-RF, SMB, HML, RF in that order.
    if (table.header.size() < 5 ||
        canonical_header(table.header[1]) != "mkt-rf" ||
        canonical_header(table.header[2]) != "smb" ||
        canonical_header(table.header[3]) != "hml" ||
        canonical_header(table.header[4]) != "rf") {
        throw DataError("unrecognized factor header in " + path.string() +
                        " (expected date, Mkt-RF, SMB, HML, RF)");
    }

    FactorData data;
    for (const CsvRow& row : table.rows) {
        if (row.fields.empty()) continue;
        const std::string& date_field = row.fields[0];
        const bool looks_monthly =
            date_field.size() == 6 &&
            std::all_of(date_field.begin(), date_field.end(),
                        [](unsigned char c) { return std::isdigit(c); });
        if (!looks_monthly) {
            // Annual/summary blocks follow the monthly block in published
            // files; stop once monthly rows have been seen.
            if (data.rows.empty()) {
                throw DataError("malformed factor date '" + date_field + "' at row " +
                                std::to_string(row.line));
            }
            break;
        }
        if (row.fields.size() < 5) {
            throw DataError("short factor row " + std::to_string(row.line));
        }
        FactorRow out;
        out.month = parse_yyyymm(date_field);
        double values[4];
        for (int i = 0; i < 4; ++i) {
            values[i] = parse_double(row.fields[i + 1], "factor value", row.line);
            if (std::abs(values[i]) > 50.0) {
                throw DataError("factor value " + row.fields[i + 1] + " at row " +
                                std::to_string(row.line) +
                                " exceeds 50: percent/decimal units ambiguous");
            }
        }
        out.mkt_minus_rf = values[0] / 100.0;
        out.smb = values[1] / 100.0;
        out.hml = values[2] / 100.0;
        out.rf = values[3] / 100.0;
        if (out.rf < -0.02) {
            throw DataError("risk-free rate " + std::to_string(out.rf) + " at row " +
                            std::to_string(row.line) + " below sanity bound -0.02/month");
        }
        if (!data.rows.empty() && out.month <= data.rows.back().month) {
            throw DataError("factor dates not strictly increasing at row " +
                            std::to_string(row.line));
        }
        data.rows.push_back(out);
    }
    if (data.rows.empty()) throw DataError("no factor rows in " + path.string());
    return data;
}

ReturnPanel to_monthly_panel(const std::vector<PriceSeries>& series, const PriceSeries& market,
                             const FactorData& factors) {
    if (series.size() < 2) throw DataError("need at least 2 asset series");
    for (const PriceSeries* s : [&] {
             std::vector<const PriceSeries*> all;
             for (const auto& a : series) all.push_back(&a);
             all.push_back(&market);
             return all;
         }()) {
        if (s->observations.size() < 2) {
            throw DataError("series " + s->ticker + " has fewer than 2 observations");
        }
    }

    // Common window: [max first date, min last date] across assets + market.
    Date window_begin = market.observations.front().date;
    Date window_end = market.observations.back().date;
    for (const PriceSeries& s : series) {
        window_begin = std::max(window_begin, s.observations.front().date);
        window_end = std::min(window_end, s.observations.back().date);
    }
    if (!(window_begin < window_end)) {
        throw DataError("insufficient overlap between series");
    }

    struct Indexed {
        const PriceSeries* series;
        std::map<Date, double> prices;  // within window
    };
    std::vector<Indexed> indexed;
    auto index_series = [&](const PriceSeries& s) {
        Indexed idx{&s, {}};
        for (const PriceObservation& obs : s.observations) {
            if (obs.date < window_begin || window_end < obs.date) continue;
            idx.prices.emplace(obs.date, obs.adj_close);
        }
        indexed.push_back(std::move(idx));
    };
    for (const PriceSeries& s : series) index_series(s);
    index_series(market);

    // Every series must cover every trading date seen inside the window;
    // a hole means corrupt data rather than a shorter overlap.
    std::set<Date> union_dates;
    for (const Indexed& idx : indexed) {
        for (const auto& [date, _] : idx.prices) union_dates.insert(date);
    }
    for (const Indexed& idx : indexed) {
        for (const Date& date : union_dates) {
            if (!idx.prices.count(date)) {
                throw DataError("series " + idx.series->ticker + " missing date " +
                                to_string(date) + " inside the common window");
            }
        }
    }

    ReturnPanel panel;
    panel.dates.assign(union_dates.begin(), union_dates.end());
    for (const PriceSeries& s : series) panel.assets.push_back(s.ticker);

    const int n_dates = static_cast<int>(panel.dates.size());
    const int n_assets = static_cast<int>(series.size());
    if (n_dates < 2) throw DataError("insufficient overlap between series");

    panel.daily_log_returns.resize(n_dates - 1, n_assets);
    panel.market_daily_log_returns.resize(n_dates - 1);
    for (int i = 1; i < n_dates; ++i) {
        const Date& prev = panel.dates[i - 1];
        const Date& cur = panel.dates[i];
        for (int a = 0; a < n_assets; ++a) {
            panel.daily_log_returns(i - 1, a) =
                std::log(indexed[a].prices.at(cur) / indexed[a].prices.at(prev));
        }
        panel.market_daily_log_returns(i - 1) =
            std::log(indexed[n_assets].prices.at(cur) / indexed[n_assets].prices.at(prev));
    }

    // Month bookkeeping over daily return rows (row i belongs to the month of
    // dates[i+1]).
    std::vector<int> month_of_row(n_dates - 1);
    for (int i = 0; i < n_dates - 1; ++i) month_of_row[i] = month_key(panel.dates[i + 1]);
    for (int i = 0; i < n_dates - 1;) {
        int j = i;
        while (j < n_dates - 1 && month_of_row[j] == month_of_row[i]) ++j;
        panel.months.push_back(month_of_row[i]);
        panel.month_rows.emplace_back(i, j);
        i = j;
    }

    const int n_months = panel.month_count();
    if (n_months < 24) {
        throw DataError("insufficient overlap: " + std::to_string(n_months) +
                        " months of common coverage, need 24");
    }

    panel.trading_days.assign(n_months, 0);
    for (const Date& d : panel.dates) {
        const int idx = panel.month_index(month_key(d));
        if (idx >= 0) ++panel.trading_days[idx];
    }
    for (int m = 0; m < n_months; ++m) {
        if (panel.trading_days[m] < 5) {
            panel.warnings.push_back("month " + month_to_string(panel.months[m]) + " has only " +
                                     std::to_string(panel.trading_days[m]) + " trading days");
        }
    }

    panel.monthly_asset_log_returns = Eigen::MatrixXd::Zero(n_months, n_assets);
    panel.monthly_market_log_returns = Eigen::VectorXd::Zero(n_months);
    for (int m = 0; m < n_months; ++m) {
        const auto [begin, end] = panel.month_rows[m];
        for (int i = begin; i < end; ++i) {
            panel.monthly_asset_log_returns.row(m) += panel.daily_log_returns.row(i);
            panel.monthly_market_log_returns(m) += panel.market_daily_log_returns(i);
        }
    }

    panel.monthly_risk_free.resize(n_months);
    for (int m = 0; m < n_months; ++m) {
        const FactorRow* row = factors.find(panel.months[m]);
        if (!row) {
            throw DataError("no risk-free rate for month " + month_to_string(panel.months[m]));
        }
        panel.monthly_risk_free(m) = row->rf;
    }

    return panel;
}

}  // namespace efc
