// Command-line front end: configuration, pipeline runs, and report emission.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "efc/backtest.hpp"
#include "efc/config.hpp"
#include "efc/errors.hpp"
#include "efc/frontier.hpp"
#include "efc/report_io.hpp"
#include "efc/synthetic.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string seed;
    std::string out;
    std::string features;
    std::string start;
    std::string end;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool need_config = true) {
    auto* opt = cmd->add_option("--config", flags.config_path, "run configuration file");
    if (need_config) opt->required();
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--out", flags.out, "override the output directory");
    cmd->add_option("--features", flags.features, "ef_coefs | technical | fama_french");
    cmd->add_option("--start", flags.start, "first evaluated month (YYYY-MM)");
    cmd->add_option("--end", flags.end, "last evaluated month (YYYY-MM)");
}

efc::RunConfig load_config(const CommonFlags& flags) {
    efc::RunConfig config = efc::parse_config(flags.config_path);
    if (!flags.seed.empty()) config.seed = std::stoul(flags.seed);
    if (!flags.out.empty()) config.out_dir = flags.out;
    if (!flags.features.empty()) {
        config.backtest.feature_set = efc::parse_feature_set(flags.features);
    }
    if (!flags.start.empty()) config.backtest.start = efc::parse_month(flags.start);
    if (!flags.end.empty()) config.backtest.end = efc::parse_month(flags.end);
    return config;
}

int cmd_backtest(const CommonFlags& flags) {
    const efc::RunConfig config = load_config(flags);
    const efc::WalkForwardData data = efc::load_data(config);
    const efc::BacktestResult result = efc::run_walkforward(data, config.backtest);
    efc::write_backtest_outputs(result, config.out_dir, config.seed);
    std::cout << efc::format_metrics_table(result);
    for (const std::string& warning : result.warnings) {
        std::cerr << "warning: " << warning << '\n';
    }
    return 0;
}

int cmd_frontier(const CommonFlags& flags, const std::string& month_text) {
    const efc::RunConfig config = load_config(flags);
    const efc::WalkForwardData data = efc::load_data(config);
    const efc::MonthKey month = efc::parse_month(month_text);
    const int index = data.panel.month_index(month);
    if (index < 0) {
        throw efc::DataError("month " + month_text + " is outside the data range " +
                             efc::month_to_string(data.panel.months.front()) + ".." +
                             efc::month_to_string(data.panel.months.back()));
    }

    const efc::FrontierInputs inputs = efc::monthly_frontier_inputs(data.panel, index);
    const efc::FrontierCoefficients abc = efc::compute_abc(inputs);
    const efc::InterpretableCoefficients coefs = efc::interpretable_coefficients(abc);
    const efc::UDecomposition decomp = efc::u_decomposition(inputs);

    std::cout << "frontier coefficients for " << month_text << '\n';
    std::cout << "  A         " << abc.a << '\n';
    std::cout << "  B         " << abc.b << '\n';
    std::cout << "  C         " << abc.c << '\n';
    std::cout << "  r_mvp     " << coefs.r_mvp << '\n';
    std::cout << "  sigma_mvp " << coefs.sigma_mvp << '\n';
    std::cout << "  u         " << coefs.u << '\n';
    std::cout << "  u = mahalanobis x cosine_spread = " << decomp.mahalanobis << " x "
              << decomp.cosine_spread << " = " << decomp.mahalanobis * decomp.cosine_spread
              << '\n';

    std::filesystem::create_directories(config.out_dir);
    const auto path = config.out_dir / "frontier.csv";
    std::ofstream out(path);
    if (!out) throw efc::IoError("cannot write file: " + path.string());
    out << std::setprecision(17) << "month,a,b,c,r_mvp,sigma_mvp,u\n";
    for (int m = 0; m < data.panel.month_count(); ++m) {
        const auto month_inputs = efc::monthly_frontier_inputs(data.panel, m);
        const auto month_abc = efc::compute_abc(month_inputs);
        const auto month_coefs = efc::interpretable_coefficients(month_abc);
        out << efc::month_to_string(data.panel.months[m]) << ',' << month_abc.a << ','
            << month_abc.b << ',' << month_abc.c << ',' << month_coefs.r_mvp << ','
            << month_coefs.sigma_mvp << ',' << month_coefs.u << '\n';
    }
    return 0;
}

int cmd_tree(const CommonFlags& flags, const std::string& month_text) {
    const efc::RunConfig config = load_config(flags);
    const efc::WalkForwardData data = efc::load_data(config);
    const efc::MonthKey month = efc::parse_month(month_text);

    efc::BacktestConfig backtest = config.backtest;
    backtest.end = month;  // stop the loop at the requested month
    const efc::BacktestResult result = efc::run_walkforward(data, backtest);
    for (size_t i = 0; i < result.months.size(); ++i) {
        if (result.months[i] == month) {
            std::cout << efc::export_tree_text(result.models[i]);
            return 0;
        }
    }
    throw efc::DataError("no model for month " + month_text +
                         " (outside the out-of-sample horizon)");
}

int cmd_features_export(const CommonFlags& flags) {
    const efc::RunConfig config = load_config(flags);
    const efc::WalkForwardData data = efc::load_data(config);

    efc::FeatureMatrix features;
    switch (config.backtest.feature_set) {
        case efc::FeatureSet::ef_coefs:
            features = efc::build_ef_features(data.panel).features;
            break;
        case efc::FeatureSet::technical:
            features = efc::build_technical_features(data.panel, data.market_prices);
            break;
        case efc::FeatureSet::fama_french:
            features = efc::build_ff_features(data.factors);
            break;
    }
    std::filesystem::create_directories(config.out_dir);
    const auto path = config.out_dir /
                      ("features_" + efc::feature_set_name(config.backtest.feature_set) + ".csv");
    std::ofstream out(path);
    if (!out) throw efc::IoError("cannot write file: " + path.string());
    efc::write_feature_csv(features, out);
    std::cout << "wrote " << path.string() << " (" << features.row_count() << " rows)\n";
    return 0;
}

int cmd_gen_data(const std::string& out_dir, unsigned long seed, const std::string& start,
                 const std::string& end, int assets) {
    efc::SyntheticSpec spec;
    spec.seed = seed;
    spec.n_assets = assets;
    if (!start.empty()) spec.first_month = efc::parse_month(start);
    if (!end.empty()) spec.last_month = efc::parse_month(end);
    const efc::SyntheticMarket market = efc::generate_synthetic_market(spec);
    efc::write_synthetic_market(market, out_dir);
    std::cout << "wrote " << market.assets.size() << " asset series, " << market.market.ticker
              << ".csv and factors.csv to " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"market-direction forecasting and tangency portfolio research"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string month_text;

    CLI::App* backtest = app.add_subcommand("backtest", "run the full walk-forward pipeline");
    add_common(backtest, flags);

    CLI::App* frontier =
        app.add_subcommand("frontier", "print one month's frontier coefficients and export all");
    add_common(frontier, flags);
    frontier->add_option("--month", month_text, "month to inspect (YYYY-MM)")->required();

    CLI::App* tree = app.add_subcommand("tree", "print the tree that forecast a given month");
    add_common(tree, flags);
    tree->add_option("--month", month_text, "forecast month (YYYY-MM)")->required();

    CLI::App* features = app.add_subcommand("features-export", "export the feature matrix as CSV");
    add_common(features, flags);

    std::string gen_out = "data/synthetic";
    std::string gen_start;
    std::string gen_end;
    unsigned long gen_seed = 42;
    int gen_assets = 9;
    CLI::App* gen = app.add_subcommand("gen-data", "write a deterministic synthetic data set");
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--start", gen_start, "first month (YYYY-MM)");
    gen->add_option("--end", gen_end, "last month (YYYY-MM)");
    gen->add_option("--assets", gen_assets, "number of asset series");

    CLI11_PARSE(app, argc, argv);

    try {
        if (backtest->parsed()) return cmd_backtest(flags);
        if (frontier->parsed()) return cmd_frontier(flags, month_text);
        if (tree->parsed()) return cmd_tree(flags, month_text);
        if (features->parsed()) return cmd_features_export(flags);
        if (gen->parsed()) return cmd_gen_data(gen_out, gen_seed, gen_start, gen_end, gen_assets);
    } catch (const efc::IoError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const efc::ConfigError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
