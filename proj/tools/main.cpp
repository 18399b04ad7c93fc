#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "folio/backtest.hpp"
#include "folio/errors.hpp"
#include "folio/run_io.hpp"
#include "folio/sensitivity.hpp"
#include "folio/synthetic.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace folio;
using cli::FlagOverrides;
using cli::RunConfig;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string data_path;
    std::string out_path;
    std::string checkpoints_path;
    std::string dump_path;
    FlagOverrides flags;
    std::optional<std::uint64_t> seed_flag;
};

void add_shared_options(CLI::App* cmd, CommonArgs& args, bool needs_data, bool needs_out) {
    cmd->add_option("--config", args.config_path, "JSON run configuration");
    auto* data = cmd->add_option("--data", args.data_path, "price CSV (date,<asset>,... header)");
    auto* out = cmd->add_option("--out", args.out_path, "output directory or file");
    cmd->add_option("--seed", args.seed_flag, "master seed override");
    if (needs_data) data->required();
    if (needs_out) out->required();
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig{} : RunConfig::from_file(args.config_path);
    FlagOverrides flags = args.flags;
    flags.seed = args.seed_flag;
    apply_overrides(cfg, flags);
    return cfg;
}

MarketDataset load_dataset(const RunConfig& cfg, const std::string& data_path) {
    PriceTable prices = load_prices_file(data_path, cfg.assets);
    return MarketDataset::build(std::move(prices), cfg.backtest.vol_span_days,
                                cfg.backtest.annualization_factor);
}

void dump_tables(const std::string& dir, const MarketDataset& data) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw_error(ErrorKind::Io, "cannot create " + dir + ": " + ec.message());
    std::ostringstream p, r, v;
    dump_price_csv(p, data.prices);
    dump_return_csv(r, data.returns, data.prices.asset_names);
    dump_vol_csv(v, data.vols, data.prices.asset_names);
    atomic_write_file(dir + "/prices.csv", p.str());
    atomic_write_file(dir + "/returns.csv", r.str());
    atomic_write_file(dir + "/vols.csv", v.str());
}

std::vector<WalkForwardSplit> resolve_splits(const RunConfig& cfg, const MarketDataset& data) {
    if (!cfg.walkforward.first_test_start)
        throw_error(ErrorKind::Config, "walkforward.first_test_start is required");
    return walk_forward_splits(data.prices.dates, *cfg.walkforward.first_test_start,
                               cfg.walkforward.retrain_every_years,
                               cfg.walkforward.validation_fraction);
}

std::string checkpoint_path(const std::string& dir, int split_index) {
    return dir + "/dls_split" + std::to_string(split_index) + ".ckpt";
}

std::vector<TrainedSplitModel> load_models(const std::string& dir,
                                           const std::vector<WalkForwardSplit>& splits,
                                           const MarketDataset& data) {
    if (dir.empty())
        throw_error(ErrorKind::Config, "--checkpoints is required when running dls");
    std::vector<TrainedSplitModel> models;
    for (const auto& split : splits) {
        const std::string path = checkpoint_path(dir, split.index);
        Checkpoint ck = load_checkpoint(path);
        if (ck.params.n_assets != static_cast<int>(data.prices.assets()))
            throw_error(ErrorKind::Config,
                        "checkpoint " + path + " was trained on " +
                            std::to_string(ck.params.n_assets) + " assets, data has " +
                            std::to_string(data.prices.assets()));
        TrainedSplitModel m;
        m.split = split;
        m.params = std::move(ck.params);
        models.push_back(std::move(m));
    }
    return models;
}

int cmd_synth(const CommonArgs& args) {
    RunConfig cfg = resolve_config(args);
    PriceTable prices = generate(cfg.synth_spec());
    std::ostringstream out;
    dump_price_csv(out, prices);
    atomic_write_file(args.out_path, out.str());
    std::printf("wrote %zu rows x %zu assets to %s\n", prices.rows(), prices.assets(),
                args.out_path.c_str());
    return 0;
}

int cmd_train(const CommonArgs& args) {
    RunConfig cfg = resolve_config(args);
    MarketDataset data = load_dataset(cfg, args.data_path);
    if (!args.dump_path.empty()) dump_tables(args.dump_path, data);
    auto splits = resolve_splits(cfg, data);

    std::error_code ec;
    fs::create_directories(args.out_path, ec);
    if (ec) throw_error(ErrorKind::Io, "cannot create " + args.out_path + ": " + ec.message());

    auto models = train_walk_forward(data, splits, cfg.training);
    for (const auto& m : models) {
        save_checkpoint(checkpoint_path(args.out_path, m.split.index), m.params, &m.adam,
                        cfg.training.seed);
        atomic_write_file(args.out_path + "/train_log_split" + std::to_string(m.split.index) +
                              ".csv",
                          training_log_csv(m.log));
        std::printf("split %d: trained %zu epochs, selected epoch %d\n", m.split.index,
                    m.log.size(), m.best_epoch);
    }
    atomic_write_file(args.out_path + "/config.json", cfg.resolved_json() + "\n");
    return 0;
}

int cmd_backtest(const CommonArgs& args) {
    RunConfig cfg = resolve_config(args);
    if (cfg.strategies.empty())
        throw_error(ErrorKind::Config, "no strategies requested");
    MarketDataset data = load_dataset(cfg, args.data_path);
    if (!args.dump_path.empty()) dump_tables(args.dump_path, data);
    auto splits = resolve_splits(cfg, data);

    std::vector<TrainedSplitModel> models;
    const bool wants_dls =
        std::find(cfg.strategies.begin(), cfg.strategies.end(), "dls") != cfg.strategies.end();
    if (wants_dls) models = load_models(args.checkpoints_path, splits, data);

    std::error_code ec;
    fs::create_directories(args.out_path, ec);
    if (ec) throw_error(ErrorKind::Io, "cannot create " + args.out_path + ": " + ec.message());

    std::vector<RunResult> results;
    for (const auto& name : cfg.strategies) {
        RunResult res = run_walk_forward(name, data, splits, cfg.backtest, cfg.strategy_params,
                                         cfg.training, wants_dls ? &models : nullptr);
        write_run_dir(args.out_path + "/" + name, res, data.prices.asset_names,
                      cfg.resolved_json(), cfg.seed);
        std::printf("%-8s sharpe %8.3f  mdd %6.3f  days %zu\n", name.c_str(),
                    res.metrics.sharpe, res.metrics.mdd, res.equity.days());
        results.push_back(std::move(res));
    }
    atomic_write_file(args.out_path + "/comparison.csv", comparison_csv(results));
    atomic_write_file(args.out_path + "/config.json", cfg.resolved_json() + "\n");
    return 0;
}

int cmd_sensitivity(const CommonArgs& args) {
    RunConfig cfg = resolve_config(args);
    MarketDataset data = load_dataset(cfg, args.data_path);
    if (!args.dump_path.empty()) dump_tables(args.dump_path, data);
    auto splits = resolve_splits(cfg, data);
    auto models = load_models(args.checkpoints_path, splits, data);

    SensitivityMap merged;
    for (std::size_t s = 0; s < splits.size(); ++s) {
        const auto& split = splits[s];
        const std::size_t last =
            std::min(split.test_end - 1, data.prices.rows() >= 2 ? data.prices.rows() - 2 : 0);
        auto blocks = make_training_batches(data.prices, data.returns, cfg.training.features,
                                            split.test_begin, last, cfg.training.batch_size);
        if (blocks.empty()) continue;
        SensitivityMap part =
            sensitivity_over_blocks(models[s].params, blocks, data.prices.asset_names);
        if (merged.labels.empty()) {
            merged = std::move(part);
        } else {
            merged.dates.insert(merged.dates.end(), part.dates.begin(), part.dates.end());
            merged.flagged.insert(merged.flagged.end(), part.flagged.begin(), part.flagged.end());
            const Eigen::Index old_rows = merged.values.rows();
            merged.values.conservativeResize(old_rows + part.values.rows(), Eigen::NoChange);
            merged.values.bottomRows(part.values.rows()) = part.values;
        }
    }
    if (merged.dates.empty())
        throw_error(ErrorKind::InsufficientData, "no evaluation blocks in the test period");

    std::error_code ec;
    fs::create_directories(args.out_path, ec);
    if (ec) throw_error(ErrorKind::Io, "cannot create " + args.out_path + ": " + ec.message());
    atomic_write_file(args.out_path + "/sensitivity.csv", sensitivity_csv(merged));
    atomic_write_file(args.out_path + "/config.json", cfg.resolved_json() + "\n");
    std::printf("wrote %zu sensitivity rows x %zu features\n", merged.dates.size(),
                merged.labels.size());
    return 0;
}

int cmd_report(const std::string& run_dir) {
    std::vector<ReportRow> rows;
    const fs::path root(run_dir);
    if (fs::exists(root / "report.json")) {
        rows.push_back(parse_report_json(read_file((root / "report.json").string()),
                                         (root / "report.json").string()));
    } else if (fs::is_directory(root)) {
        std::vector<fs::path> subdirs;
        for (const auto& entry : fs::directory_iterator(root))
            if (entry.is_directory() && fs::exists(entry.path() / "report.json"))
                subdirs.push_back(entry.path());
        std::sort(subdirs.begin(), subdirs.end());
        for (const auto& dir : subdirs)
            rows.push_back(parse_report_json(read_file((dir / "report.json").string()),
                                             (dir / "report.json").string()));
    }
    if (rows.empty())
        throw_error(ErrorKind::Io, "no report.json found under " + run_dir);
    std::fputs(render_report_table(rows).c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sharpe-ratio portfolio lab: train, backtest, and analyze long-only "
                 "allocation strategies"};
    app.require_subcommand(1);

    CommonArgs synth_args, train_args, backtest_args, sens_args;
    std::string report_dir;

    auto* synth = app.add_subcommand("synth", "generate a synthetic price CSV");
    add_shared_options(synth, synth_args, false, true);

    auto* train = app.add_subcommand("train", "train one model per walk-forward split");
    add_shared_options(train, train_args, true, true);
    train->add_option("--dump", train_args.dump_path, "dump ingested tables to a directory");

    auto* backtest = app.add_subcommand("backtest", "run strategies over the test period");
    add_shared_options(backtest, backtest_args, true, true);
    backtest->add_option("--checkpoints", backtest_args.checkpoints_path,
                         "directory with dls_split<j>.ckpt files");
    backtest->add_option("--strategy", backtest_args.flags.strategies,
                         "strategy to run (repeatable; default: all)");
    backtest->add_option("--sigma-target", backtest_args.flags.sigma_target,
                         "annualized volatility target");
    backtest->add_option("--cost-rate", backtest_args.flags.cost_rate,
                         "linear transaction cost rate");
    backtest->add_flag("--no-scaling", backtest_args.flags.no_scaling,
                       "disable volatility scaling");
    backtest->add_option("--dump", backtest_args.dump_path,
                         "dump ingested tables to a directory");

    auto* sens = app.add_subcommand("sensitivity", "export input-feature sensitivities");
    add_shared_options(sens, sens_args, true, true);
    sens->add_option("--checkpoints", sens_args.checkpoints_path,
                     "directory with dls_split<j>.ckpt files")
        ->required();
    sens->add_option("--dump", sens_args.dump_path, "dump ingested tables to a directory");

    auto* report = app.add_subcommand("report", "print the metric table for a run directory");
    report->add_option("run_dir", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(synth_args);
        if (train->parsed()) return cmd_train(train_args);
        if (backtest->parsed()) return cmd_backtest(backtest_args);
        if (sens->parsed()) return cmd_sensitivity(sens_args);
        if (report->parsed()) return cmd_report(report_dir);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::fprintf(stderr, "error category=config message=\"%s\"\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error category=%s message=\"%s\"\n", e.category(), e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error category=numeric message=\"%s\"\n", e.what());
        return 4;
    }
    return 0;
}
