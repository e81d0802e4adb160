#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "efc/dates.hpp"

namespace efc {

struct PriceObservation {
    Date date;
    double adj_close = 0.0;
};

/// Daily adjusted-close series for one ticker. Dates strictly increasing,
/// prices strictly positive.
struct PriceSeries {
    std::string ticker;
    std::vector<PriceObservation> observations;
};

/// Column names used to read a price CSV.
struct PriceCsvSchema {
    std::string date_column = "date";
    std::string price_column = "adj_close";
};

/// One monthly factor observation, in decimal units (already divided by 100).
struct FactorRow {
    MonthKey month = 0;
    double mkt_minus_rf = 0.0;
    double smb = 0.0;
    double hml = 0.0;
    double rf = 0.0;
};

struct FactorData {
    std::vector<FactorRow> rows;  // months unique and increasing

    const FactorRow* find(MonthKey month) const;
};

/// Aligned daily/monthly return panel shared by every downstream module.
///
/// Daily log returns live on the common trading calendar: row i corresponds
/// to dates[i+1] and equals ln(p[i+1]/p[i]) of the source series. A month
/// owns the daily rows whose date falls inside it, so monthly returns are
/// exact sums of their member daily returns.
struct ReturnPanel {
    std::vector<Date> dates;                    // common trading dates
    std::vector<std::string> assets;
    Eigen::MatrixXd daily_log_returns;          // (dates.size()-1) x assets
    Eigen::VectorXd market_daily_log_returns;   // dates.size()-1

    std::vector<MonthKey> months;
    std::vector<std::pair<int, int>> month_rows;  // [begin,end) into daily rows
    std::vector<int> trading_days;                // common dates per month
    Eigen::MatrixXd monthly_asset_log_returns;    // months x assets
    Eigen::VectorXd monthly_market_log_returns;
    Eigen::VectorXd monthly_risk_free;

    std::vector<std::string> warnings;  // e.g. months with < 5 trading days

    int month_count() const { return static_cast<int>(months.size()); }
    int asset_count() const { return static_cast<int>(assets.size()); }
    int month_index(MonthKey month) const;  // -1 if absent
};

/// Loads one ticker's daily prices. The series is sorted ascending; rows with
/// unparseable or non-positive prices are reported with their line number
/// rather than skipped.
PriceSeries load_price_csv(const std::filesystem::path& path,
                           const PriceCsvSchema& schema = {});

/// Loads a monthly factor file in the published layout: YYYYMM dates and
/// percent units. Values are converted to decimals; any |value| > 50 is
/// treated as a percent/decimal ambiguity and rejected.
FactorData load_factor_file(const std::filesystem::path& path);

/// Aligns asset and market series on their common trading dates and builds
/// the monthly panel. Requires >= 2 assets and >= 24 overlapping months.
/// A date hole inside the common window is an alignment error, not a
/// silent intersection shrink.
ReturnPanel to_monthly_panel(const std::vector<PriceSeries>& series,
                             const PriceSeries& market,
                             const FactorData& factors);

}  // namespace efc
