#include "folio/run_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "folio/errors.hpp"

namespace folio {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_metric(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

nlohmann::json metric_json(const MetricBundle& m) {
    nlohmann::json j;
    j["e_r"] = m.e_r;
    j["std_r"] = m.std_r;
    j["sharpe"] = m.sharpe_defined ? nlohmann::json(m.sharpe) : nlohmann::json();
    j["dd_r"] = m.dd_r;
    j["sortino"] = m.sortino_finite ? nlohmann::json(m.sortino) : nlohmann::json();
    j["mdd"] = m.mdd;
    j["pct_positive"] = m.pct_positive;
    j["avg_p_over_avg_l"] =
        m.avg_ratio_finite ? nlohmann::json(m.avg_p_over_avg_l) : nlohmann::json();
    j["sharpe_defined"] = m.sharpe_defined;
    j["sortino_finite"] = m.sortino_finite;
    j["avg_ratio_finite"] = m.avg_ratio_finite;
    return j;
}

} // namespace

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw_error(ErrorKind::Io, "cannot write " + tmp);
        out << content;
        if (!out) throw_error(ErrorKind::Io, "failed writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw_error(ErrorKind::Io, "cannot rename " + tmp + " -> " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string equity_csv(const EquityCurve& curve) {
    std::ostringstream out;
    out << "date,gross,cost,net,cum_log_equity\n";
    for (std::size_t i = 0; i < curve.days(); ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        out << curve.dates[i].to_string() << "," << fmt(curve.gross(r)) << ","
            << fmt(curve.cost(r)) << "," << fmt(curve.net(r)) << ","
            << fmt(curve.cum_log_equity(r)) << "\n";
    }
    return out.str();
}

namespace {

std::string matrix_csv(const std::vector<Date>& dates, const Eigen::MatrixXd& values,
                       const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "date";
    for (const auto& a : names) out << "," << a;
    out << "\n";
    for (std::size_t i = 0; i < dates.size(); ++i) {
        out << dates[i].to_string();
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            out << "," << fmt(values(static_cast<Eigen::Index>(i), j));
        out << "\n";
    }
    return out.str();
}

} // namespace

std::string weights_csv(const WeightPath& path, const std::vector<std::string>& asset_names) {
    return matrix_csv(path.dates, path.weights, asset_names);
}

std::string positions_csv(const ScaledPositionPath& path,
                          const std::vector<std::string>& asset_names) {
    return matrix_csv(path.dates, path.positions, asset_names);
}

std::string training_log_csv(const std::vector<EpochSummary>& log) {
    std::ostringstream out;
    out << "epoch,train_L,validation_L,gradient_norm,wall_time\n";
    for (const auto& s : log)
        out << s.epoch << "," << fmt(s.train_l) << "," << fmt(s.validation_l) << ","
            << fmt(s.grad_norm) << "," << fmt(s.wall_time_s) << "\n";
    return out.str();
}

std::string sensitivity_csv(const SensitivityMap& map) {
    std::ostringstream out;
    out << "date";
    for (const auto& l : map.labels) out << "," << l;
    out << "\n";
    for (std::size_t i = 0; i < map.dates.size(); ++i) {
        out << map.dates[i].to_string();
        for (Eigen::Index j = 0; j < map.values.cols(); ++j)
            out << "," << fmt(map.values(static_cast<Eigen::Index>(i), j));
        out << "\n";
    }
    return out.str();
}

std::string report_json(const RunResult& result, const std::string& resolved_config_json,
                        std::uint64_t seed) {
    nlohmann::json j;
    j["strategy"] = result.strategy;
    j["seed"] = seed;
    j["metrics"] = metric_json(result.metrics);
    j["test_start"] = result.weights.dates.front().to_string();
    j["test_end"] = result.weights.dates.back().to_string();
    j["n_test_days"] = result.weights.rows();
    j["minvar_fallback_days"] = result.minvar_fallback_days;
    j["conventions"] = {
        {"day_one_cost", "charged on the full initial scaled position"},
        {"split_boundaries", "cost recursion applied once over the concatenated path"},
    };
    j["config"] = nlohmann::json::parse(resolved_config_json);
    return j.dump(2) + "\n";
}

std::string comparison_csv(const std::vector<RunResult>& results) {
    std::ostringstream out;
    out << "strategy,e_r,std_r,sharpe,dd_r,sortino,mdd,pct_positive,avg_p_over_avg_l\n";
    for (const auto& r : results) {
        const MetricBundle& m = r.metrics;
        out << r.strategy << "," << fmt_metric(m.e_r) << "," << fmt_metric(m.std_r) << ","
            << fmt_metric(m.sharpe) << "," << fmt_metric(m.dd_r) << "," << fmt_metric(m.sortino)
            << "," << fmt_metric(m.mdd) << "," << fmt_metric(m.pct_positive) << ","
            << fmt_metric(m.avg_p_over_avg_l) << "\n";
    }
    return out.str();
}

void write_run_dir(const std::string& dir, const RunResult& result,
                   const std::vector<std::string>& asset_names,
                   const std::string& resolved_config_json, std::uint64_t seed) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw_error(ErrorKind::Io, "cannot create " + dir + ": " + ec.message());
    atomic_write_file(dir + "/equity.csv", equity_csv(result.equity));
    atomic_write_file(dir + "/weights.csv", weights_csv(result.weights, asset_names));
    atomic_write_file(dir + "/scaled_positions.csv",
                      positions_csv(result.positions, asset_names));
    atomic_write_file(dir + "/report.json", report_json(result, resolved_config_json, seed));
}

std::string render_report_table(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s %8s %8s %8s %8s %10s\n", "Strategy",
                  "E(R)", "Std(R)", "Sharpe", "DD(R)", "Sortino", "MDD", "%+Ret", "AveP/AveL");
    out << line;
    auto cell = [](double v) {
        char buf[24];
        if (std::isinf(v))
            std::snprintf(buf, sizeof(buf), "%s", v > 0 ? "inf" : "-inf");
        else if (std::isnan(v))
            std::snprintf(buf, sizeof(buf), "n/a");
        else
            std::snprintf(buf, sizeof(buf), "%.3f", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        const MetricBundle& m = r.metrics;
        std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s %8s %8s %8s %8s %10s\n",
                      r.strategy.c_str(), cell(m.e_r).c_str(), cell(m.std_r).c_str(),
                      cell(m.sharpe).c_str(), cell(m.dd_r).c_str(), cell(m.sortino).c_str(),
                      cell(m.mdd).c_str(), cell(m.pct_positive).c_str(),
                      cell(m.avg_p_over_avg_l).c_str());
        out << line;
    }
    return out.str();
}

ReportRow parse_report_json(const std::string& content, const std::string& source_name) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
        throw_error(ErrorKind::Io, "corrupt report file " + source_name + ": " + e.what());
    }
    if (!j.contains("strategy") || !j.contains("metrics"))
        throw_error(ErrorKind::Io, "corrupt report file " + source_name + ": missing fields");

    ReportRow row;
    try {
        row.strategy = j["strategy"].get<std::string>();
        const auto& m = j["metrics"];
        MetricBundle& b = row.metrics;
        b.e_r = m.at("e_r").get<double>();
        b.std_r = m.at("std_r").get<double>();
        b.dd_r = m.at("dd_r").get<double>();
        b.mdd = m.at("mdd").get<double>();
        b.pct_positive = m.at("pct_positive").get<double>();
        b.sharpe_defined = m.at("sharpe_defined").get<bool>();
        b.sortino_finite = m.at("sortino_finite").get<bool>();
        b.avg_ratio_finite = m.at("avg_ratio_finite").get<bool>();
        b.sharpe = b.sharpe_defined ? m.at("sharpe").get<double>()
                                    : std::numeric_limits<double>::quiet_NaN();
        b.sortino = b.sortino_finite ? m.at("sortino").get<double>()
                                     : std::numeric_limits<double>::infinity();
        b.avg_p_over_avg_l = b.avg_ratio_finite ? m.at("avg_p_over_avg_l").get<double>()
                                                : std::numeric_limits<double>::infinity();
    } catch (const nlohmann::json::exception& e) {
        throw_error(ErrorKind::Io, "corrupt report file " + source_name + ": " + e.what());
    }
    return row;
}

} // namespace folio
