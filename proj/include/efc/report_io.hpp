#pragma once

#include <filesystem>

#include "efc/backtest.hpp"

namespace efc {

/// Writes equity.csv, weights.csv, forecasts.csv, and metrics.json into the
/// output directory (created if needed). Output bytes are deterministic for
/// a fixed result.
void write_backtest_outputs(const BacktestResult& result, const std::filesystem::path& out_dir,
                            unsigned long seed);

/// Human-readable metrics table, one line per portfolio plus the
/// classification summary and alpha rows.
std::string format_metrics_table(const BacktestResult& result);

}  // namespace efc
