#include "efc/report_io.hpp"

#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "efc/errors.hpp"

namespace efc {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << std::setprecision(17);
    return out;
}

nlohmann::ordered_json metrics_json(const PortfolioMetrics& m) {
    return {{"sharpe", m.sharpe ? nlohmann::ordered_json(*m.sharpe) : nullptr},
            {"annual_return", m.annual_return},
            {"max_drawdown", m.max_drawdown}};
}

nlohmann::ordered_json alpha_json(const AlphaRegression& a) {
    return {{"alpha_annual", a.alpha_annual}, {"t_stat", a.t_stat}, {"p_value", a.p_value}};
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

}  // namespace

void write_backtest_outputs(const BacktestResult& result, const std::filesystem::path& out_dir,
                            unsigned long seed) {
    std::filesystem::create_directories(out_dir);

    {
        auto out = open_out(out_dir / "equity.csv");
        out << "month,strategy,tangency_benchmark,equal_weight,index\n";
        for (size_t i = 0; i < result.months.size(); ++i) {
            out << month_to_string(result.months[i]) << ',' << result.strategy_track.equity[i]
                << ',' << result.tangency_benchmark.equity[i] << ','
                << result.equal_weight.equity[i] << ',' << result.index.equity[i] << '\n';
        }
    }

    {
        auto out = open_out(out_dir / "weights.csv");
        out << "month";
        for (const std::string& asset : result.assets) out << ',' << asset;
        out << ",gross_exposure,fee\n";
        for (const StrategyMonth& record : result.strategy) {
            out << month_to_string(record.month);
            for (int a = 0; a < record.weights.size(); ++a) out << ',' << record.weights(a);
            out << ',' << record.gross_exposure << ',' << record.fee << '\n';
        }
    }

    {
        auto out = open_out(out_dir / "forecasts.csv");
        out << "month,p_up,direction,selected_depth,optimizer_failed\n";
        for (const StrategyMonth& record : result.strategy) {
            out << month_to_string(record.month) << ',' << record.forecast.p_up << ','
                << record.forecast.direction << ',' << record.selected_depth << ','
                << (record.optimizer_failed ? 1 : 0) << '\n';
        }
    }

    {
        nlohmann::ordered_json doc;
        doc["seed"] = seed;
        doc["months"] = {{"first", month_to_string(result.months.front())},
                         {"last", month_to_string(result.months.back())},
                         {"count", result.months.size()}};
        doc["classification"] = {
            {"tp", result.classification.tp},
            {"fp", result.classification.fp},
            {"tn", result.classification.tn},
            {"fn", result.classification.fn},
            {"accuracy", optional_json(result.classification.accuracy)},
            {"precision", optional_json(result.classification.precision)},
            {"recall", optional_json(result.classification.recall)},
            {"f1", optional_json(result.classification.f1)},
            {"npv", optional_json(result.classification.npv)},
        };
        doc["portfolios"] = {
            {"strategy", metrics_json(result.strategy_metrics)},
            {"tangency_benchmark", metrics_json(result.tangency_metrics)},
            {"equal_weight", metrics_json(result.equal_weight_metrics)},
            {"index", metrics_json(result.index_metrics)},
        };
        doc["alpha"] = {
            {"vs_tangency_benchmark", alpha_json(result.alpha_vs_tangency)},
            {"vs_equal_weight", alpha_json(result.alpha_vs_equal_weight)},
            {"vs_index", alpha_json(result.alpha_vs_index)},
        };
        doc["warnings"] = result.warnings;
        auto out = open_out(out_dir / "metrics.json");
        out << doc.dump(2) << '\n';
    }
}

std::string format_metrics_table(const BacktestResult& result) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);

    auto row = [&](const std::string& name, const PortfolioMetrics& m) {
        out << "  " << std::left << std::setw(22) << name << std::right << std::setw(8);
        if (m.sharpe) out << *m.sharpe;
        else out << "n/a";
        out << std::setw(12) << m.annual_return * 100.0 << '%' << std::setw(11)
            << m.max_drawdown * 100.0 << "%\n";
    };
    out << "portfolio metrics (" << result.months.size() << " months "
        << month_to_string(result.months.front()) << ".." << month_to_string(result.months.back())
        << ")\n";
    out << "  " << std::left << std::setw(22) << "portfolio" << std::right << std::setw(8)
        << "sharpe" << std::setw(13) << "annual ret" << std::setw(12) << "max dd" << '\n';
    row("strategy", result.strategy_metrics);
    row("tangency benchmark", result.tangency_metrics);
    row("equal weight", result.equal_weight_metrics);
    row("index", result.index_metrics);

    auto pct = [&](const std::optional<double>& v) {
        std::ostringstream s;
        if (v) s << std::fixed << std::setprecision(1) << *v * 100.0 << '%';
        else s << "undefined";
        return s.str();
    };
    out << "forecast metrics\n";
    out << "  accuracy " << pct(result.classification.accuracy) << ", precision "
        << pct(result.classification.precision) << ", recall " << pct(result.classification.recall)
        << ", f1 " << pct(result.classification.f1) << ", npv " << pct(result.classification.npv)
        << '\n';

    auto alpha_row = [&](const std::string& name, const AlphaRegression& a) {
        out << "  vs " << std::left << std::setw(20) << name << std::right << "alpha "
            << std::setprecision(2) << a.alpha_annual * 100.0 << "%/yr  p=" << std::setprecision(4)
            << a.p_value << '\n';
    };
    out << "alpha regressions\n";
    alpha_row("tangency benchmark", result.alpha_vs_tangency);
    alpha_row("equal weight", result.alpha_vs_equal_weight);
    alpha_row("index", result.alpha_vs_index);
    return out.str();
}

}  // namespace efc
