#include "folio/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "folio/errors.hpp"

namespace folio {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

void write_double(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

} // namespace

PriceTable load_prices(std::istream& in, const std::vector<std::string>& expected_assets) {
    std::string line;
    if (!std::getline(in, line))
        throw_error(ErrorKind::Parse, "empty CSV input");
    auto header = split_csv_line(line);
    if (header.empty() || lower(header[0]) != "date")
        throw_error(ErrorKind::Parse, "CSV header must start with 'date'");
    std::vector<std::string> file_assets(header.begin() + 1, header.end());
    if (file_assets.empty())
        throw_error(ErrorKind::Parse, "CSV header has no asset columns");

    // Map requested assets onto file columns.
    std::vector<std::size_t> cols;
    std::vector<std::string> names;
    if (expected_assets.empty()) {
        names = file_assets;
        for (std::size_t i = 0; i < file_assets.size(); ++i) cols.push_back(i);
    } else {
        for (const auto& want : expected_assets) {
            auto it = std::find(file_assets.begin(), file_assets.end(), want);
            if (it == file_assets.end())
                throw_error(ErrorKind::Data, "asset column '" + want + "' not found in CSV header");
            cols.push_back(static_cast<std::size_t>(it - file_assets.begin()));
            names.push_back(want);
        }
    }

    const std::size_t n = cols.size();
    std::map<Date, std::vector<double>> rows; // sorted, detects duplicates
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw_error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(header.size()) + " fields, got " +
                                              std::to_string(fields.size()));
        Date d;
        try {
            d = Date::parse(fields[0]);
        } catch (const Error& e) {
            throw_error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + e.what());
        }

        std::vector<double> row(n);
        bool complete = true;
        for (std::size_t j = 0; j < n; ++j) {
            const std::string& cell = fields[cols[j] + 1];
            if (cell.empty()) {
                complete = false;
                break;
            }
            auto v = parse_double(cell);
            if (!v)
                throw_error(ErrorKind::Parse, "line " + std::to_string(line_no) +
                                                  ": unparseable price '" + cell + "'");
            if (!std::isfinite(*v) || *v <= 0.0)
                throw_error(ErrorKind::Data, "non-positive or non-finite price " + cell +
                                                 " for " + names[j] + " on " + d.to_string());
            row[j] = *v;
        }
        if (!complete) continue; // inner join: drop incomplete rows
        if (!rows.emplace(d, std::move(row)).second)
            throw_error(ErrorKind::Data, "duplicate date " + d.to_string());
    }

    if (rows.size() < 2)
        throw_error(ErrorKind::InsufficientData,
                    "need at least 2 complete rows, got " + std::to_string(rows.size()));

    PriceTable table;
    table.asset_names = names;
    table.dates.reserve(rows.size());
    table.closes.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    Eigen::Index r = 0;
    for (const auto& [d, row] : rows) {
        table.dates.push_back(d);
        for (std::size_t j = 0; j < n; ++j) table.closes(r, static_cast<Eigen::Index>(j)) = row[j];
        ++r;
    }
    return table;
}

PriceTable load_prices_file(const std::string& path, const std::vector<std::string>& expected_assets) {
    std::ifstream in(path);
    if (!in) throw_error(ErrorKind::Io, "cannot open price file: " + path);
    return load_prices(in, expected_assets);
}

ReturnTable compute_returns(const PriceTable& prices) {
    if (prices.rows() < 2)
        throw_error(ErrorKind::Contract, "compute_returns requires at least 2 price rows");
    const Eigen::Index t = prices.closes.rows();
    const Eigen::Index n = prices.closes.cols();
    ReturnTable out;
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    out.returns.resize(t - 1, n);
    for (Eigen::Index r = 0; r + 1 < t; ++r)
        out.returns.row(r) =
            prices.closes.row(r + 1).cwiseQuotient(prices.closes.row(r)).array() - 1.0;
    return out;
}

VolEstimateTable ewm_volatility(const ReturnTable& returns, int span_days,
                                int annualization_factor) {
    if (span_days < 2)
        throw_error(ErrorKind::Config, "ewm span_days must be >= 2, got " + std::to_string(span_days));
    const double lambda = 1.0 - 2.0 / (span_days + 1.0);
    const double ann = std::sqrt(static_cast<double>(annualization_factor));
    const Eigen::Index t = returns.returns.rows();
    const Eigen::Index n = returns.returns.cols();

    VolEstimateTable out;
    out.dates = returns.dates;
    out.sigma.resize(t, n);
    out.warmup = std::min<std::size_t>(static_cast<std::size_t>(span_days),
                                       static_cast<std::size_t>(t));

    // Normalized EWM: running numerators for r and r^2 plus the weight sum.
    Eigen::VectorXd num1 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd num2 = Eigen::VectorXd::Zero(n);
    double den = 0.0;
    for (Eigen::Index r = 0; r < t; ++r) {
        num1 = lambda * num1 + returns.returns.row(r).transpose();
        num2 = lambda * num2 +
               returns.returns.row(r).transpose().cwiseProduct(returns.returns.row(r).transpose());
        den = lambda * den + 1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double mean = num1(j) / den;
            const double second = num2(j) / den;
            // Cancellation in second - mean^2 leaves noise of order
            // second * eps on constant series; snap it to exactly zero.
            double var = second - mean * mean;
            if (var <= second * 1e-14) var = 0.0;
            out.sigma(r, j) = std::sqrt(var) * ann;
        }
    }

    for (Eigen::Index r = static_cast<Eigen::Index>(out.warmup); r < t; ++r)
        for (Eigen::Index j = 0; j < n; ++j)
            if (out.sigma(r, j) == 0.0) out.degenerate = true;
    return out;
}

std::vector<WalkForwardSplit> walk_forward_splits(const std::vector<Date>& dates,
                                                  Date first_test_start,
                                                  int retrain_every_years,
                                                  double validation_fraction) {
    if (dates.size() < 2)
        throw_error(ErrorKind::InsufficientData, "walk-forward needs at least 2 dates");
    if (retrain_every_years < 1)
        throw_error(ErrorKind::Config, "retrain_every_years must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 0.5))
        throw_error(ErrorKind::Config, "validation_fraction must be in (0, 0.5)");
    if (first_test_start <= dates.front() || first_test_start > dates.back())
        throw_error(ErrorKind::InsufficientData,
                    "first_test_start " + first_test_start.to_string() +
                        " must lie strictly inside the data range " + dates.front().to_string() +
                        " .. " + dates.back().to_string());

    std::vector<WalkForwardSplit> splits;
    int j = 0;
    while (true) {
        const Date lo = first_test_start.add_years(j * retrain_every_years);
        const Date hi = first_test_start.add_years((j + 1) * retrain_every_years);
        const std::size_t begin = lower_bound_index(dates, lo);
        const std::size_t end = lower_bound_index(dates, hi);
        if (begin >= dates.size() || begin == end) break;

        WalkForwardSplit s;
        s.index = j;
        s.test_begin = begin;
        s.test_end = end;
        s.train_begin = 0;
        s.train_end = begin;
        const std::size_t n_train = begin;
        if (n_train == 0)
            throw_error(ErrorKind::InsufficientData, "empty training window for split " +
                                                         std::to_string(j));
        std::size_t n_val = static_cast<std::size_t>(
            std::llround(validation_fraction * static_cast<double>(n_train)));
        n_val = std::max<std::size_t>(1, n_val);
        if (n_val >= n_train)
            throw_error(ErrorKind::InsufficientData,
                        "training window too small for validation split " + std::to_string(j));
        s.val_end = begin;
        s.val_begin = begin - n_val;
        splits.push_back(s);
        ++j;
    }
    if (splits.empty())
        throw_error(ErrorKind::InsufficientData, "no test window after first_test_start");
    return splits;
}

void dump_price_csv(std::ostream& out, const PriceTable& table) {
    out << "date";
    for (const auto& a : table.asset_names) out << "," << a;
    out << "\n";
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out << table.dates[r].to_string();
        for (Eigen::Index j = 0; j < table.closes.cols(); ++j) {
            out << ",";
            write_double(out, table.closes(static_cast<Eigen::Index>(r), j));
        }
        out << "\n";
    }
}

void dump_return_csv(std::ostream& out, const ReturnTable& table,
                     const std::vector<std::string>& asset_names) {
    out << "date";
    for (const auto& a : asset_names) out << "," << a;
    out << "\n";
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out << table.dates[r].to_string();
        for (Eigen::Index j = 0; j < table.returns.cols(); ++j) {
            out << ",";
            write_double(out, table.returns(static_cast<Eigen::Index>(r), j));
        }
        out << "\n";
    }
}

void dump_vol_csv(std::ostream& out, const VolEstimateTable& table,
                  const std::vector<std::string>& asset_names) {
    out << "date";
    for (const auto& a : asset_names) out << "," << a;
    out << "\n";
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out << table.dates[r].to_string();
        for (Eigen::Index j = 0; j < table.sigma.cols(); ++j) {
            out << ",";
            write_double(out, table.sigma(static_cast<Eigen::Index>(r), j));
        }
        out << "\n";
    }
}

} // namespace folio
