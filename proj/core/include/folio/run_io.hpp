#pragma once

#include <string>
#include <vector>

#include "folio/backtest.hpp"
#include "folio/sensitivity.hpp"
#include "folio/training.hpp"

namespace folio {

/// Write-then-rename so partially written files never land under their
/// final name.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

std::string equity_csv(const EquityCurve& curve);
std::string weights_csv(const WeightPath& path, const std::vector<std::string>& asset_names);
std::string positions_csv(const ScaledPositionPath& path,
                          const std::vector<std::string>& asset_names);
std::string training_log_csv(const std::vector<EpochSummary>& log);
std::string sensitivity_csv(const SensitivityMap& map);

/// Metric bundle + config echo + seed, as report.json content.
std::string report_json(const RunResult& result, const std::string& resolved_config_json,
                        std::uint64_t seed);

/// One row per strategy in the standard metric column order.
std::string comparison_csv(const std::vector<RunResult>& results);

/// Writes the per-strategy run directory (equity.csv, weights.csv,
/// scaled_positions.csv, report.json) under dir.
void write_run_dir(const std::string& dir, const RunResult& result,
                   const std::vector<std::string>& asset_names,
                   const std::string& resolved_config_json, std::uint64_t seed);

/// Fixed-width text table over per-strategy metric rows (report command).
struct ReportRow {
    std::string strategy;
    MetricBundle metrics;
};
std::string render_report_table(const std::vector<ReportRow>& rows);

/// Parses a report.json produced by write_run_dir.
ReportRow parse_report_json(const std::string& content, const std::string& source_name);

} // namespace folio
