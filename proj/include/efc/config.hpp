#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "efc/backtest.hpp"

namespace efc {

/// Flat-key run configuration; CLI flags override file keys.
struct RunConfig {
    std::filesystem::path data_dir;
    std::vector<std::string> tickers;
    std::string market;
    std::filesystem::path factor_file;
    std::filesystem::path out_dir = "out";
    unsigned long seed = 42;
    PriceCsvSchema price_schema;
    BacktestConfig backtest;
};

/// Parses `key = value` lines; '#' starts a comment, blank lines are
/// ignored, unknown keys are an error.
RunConfig parse_config(const std::filesystem::path& path);

/// Loads prices and factors named by the config and builds the panel.
WalkForwardData load_data(const RunConfig& config);

}  // namespace efc
