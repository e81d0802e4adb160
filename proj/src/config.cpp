#include "efc/config.hpp"

#include <fstream>

#include "efc/csv.hpp"
#include "efc/errors.hpp"

namespace efc {

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

double parse_num(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> out;
    for (const std::string& item : split_csv_line(value)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());

    RunConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "data_dir") config.data_dir = value;
        else if (key == "tickers") config.tickers = parse_list(value);
        else if (key == "market") config.market = value;
        else if (key == "factor_file") config.factor_file = value;
        else if (key == "out_dir") config.out_dir = value;
        else if (key == "seed") config.seed = static_cast<unsigned long>(parse_num(value, key));
        else if (key == "price_date_column") config.price_schema.date_column = value;
        else if (key == "price_close_column") config.price_schema.price_column = value;
        else if (key == "features") config.backtest.feature_set = parse_feature_set(value);
        else if (key == "in_sample_end") config.backtest.in_sample_end = parse_month(value);
        else if (key == "start") config.backtest.start = parse_month(value);
        else if (key == "end") config.backtest.end = parse_month(value);
        else if (key == "fee_rate") config.backtest.fee_rate = parse_num(value, key);
        else if (key == "gross_cap") {
            const double cap = parse_num(value, key);
            config.backtest.gross_cap = cap > 0 ? std::optional<double>(cap) : std::nullopt;
        } else if (key == "cap_benchmarks") config.backtest.cap_benchmarks = parse_bool(value, key);
        else if (key == "cov_window_months") {
            config.backtest.cov_window_months = static_cast<int>(parse_num(value, key));
        } else if (key == "use_sample_weights") {
            config.backtest.use_sample_weights = parse_bool(value, key);
        } else if (key == "cv_folds") config.backtest.cv_folds = static_cast<int>(parse_num(value, key));
        else if (key == "discretize_forecast") {
            config.backtest.discretize_forecast = parse_bool(value, key);
        } else if (key == "force_p_up") config.backtest.force_p_up = parse_num(value, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }

    if (config.data_dir.empty()) throw ConfigError("config is missing data_dir");
    if (config.tickers.size() < 2) throw ConfigError("config needs at least 2 tickers");
    if (config.market.empty()) throw ConfigError("config is missing market");
    if (config.factor_file.empty()) throw ConfigError("config is missing factor_file");
    if (config.backtest.in_sample_end == 0) throw ConfigError("config is missing in_sample_end");
    return config;
}

WalkForwardData load_data(const RunConfig& config) {
    if (!std::filesystem::exists(config.data_dir)) {
        throw IoError("missing data directory: " + config.data_dir.string());
    }
    WalkForwardData data;
    std::vector<PriceSeries> assets;
    for (const std::string& ticker : config.tickers) {
        assets.push_back(
            load_price_csv(config.data_dir / (ticker + ".csv"), config.price_schema));
    }
    data.market_prices =
        load_price_csv(config.data_dir / (config.market + ".csv"), config.price_schema);
    data.factors = load_factor_file(config.factor_file);
    data.panel = to_monthly_panel(assets, data.market_prices, data.factors);
    return data;
}

}  // namespace efc
