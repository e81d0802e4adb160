#pragma once

#include <filesystem>
#include <vector>

#include "efc/market_data.hpp"

namespace efc {

/// Parameters for the bundled synthetic market: a normal market factor plus
/// CAPM-structured assets with idiosyncratic noise, on a weekday calendar.
struct SyntheticSpec {
    unsigned long seed = 42;
    MonthKey first_month = 0;  // defaults applied in generate()
    MonthKey last_month = 0;
    int n_assets = 9;
    double market_mu_monthly = 0.005;
    double market_sigma_monthly = 0.045;
    double risk_free_monthly = 0.0017;
};

struct SyntheticMarket {
    std::vector<PriceSeries> assets;
    PriceSeries market;
    FactorData factors;
};

SyntheticMarket generate_synthetic_market(SyntheticSpec spec);

/// Writes one CSV per ticker plus factors.csv into the directory.
void write_synthetic_market(const SyntheticMarket& market, const std::filesystem::path& dir);

}  // namespace efc
