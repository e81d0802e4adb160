#pragma once

// Shared in-memory fixtures for the unit and acceptance suites.

#include <filesystem>
#include <fstream>
#include <string>

#include "efc/backtest.hpp"
#include "efc/market_data.hpp"
#include "efc/synthetic.hpp"

namespace fixtures {

inline efc::WalkForwardData make_market_data(unsigned long seed, int first_year, int first_month,
                                             int last_year, int last_month, int n_assets = 4) {
    efc::SyntheticSpec spec;
    spec.seed = seed;
    spec.first_month = efc::month_key(first_year, first_month);
    spec.last_month = efc::month_key(last_year, last_month);
    spec.n_assets = n_assets;
    const efc::SyntheticMarket market = efc::generate_synthetic_market(spec);
    efc::WalkForwardData data;
    data.market_prices = market.market;
    data.factors = market.factors;
    data.panel = efc::to_monthly_panel(market.assets, market.market, market.factors);
    return data;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                        const std::string& content) {
    const auto path = dir / name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace fixtures
