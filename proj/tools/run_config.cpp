#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "folio/errors.hpp"
#include "folio/rng.hpp"

namespace folio::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
    throw_error(ErrorKind::Config, msg);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) bad("config section '" + path + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) bad("unknown config key '" + path + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad(std::string("config key '") + key + "' has the wrong type");
    }
}

void read_date(const json& obj, const char* key, std::optional<Date>& out) {
    if (!obj.contains(key)) return;
    std::string s;
    read(obj, key, s);
    out = Date::parse(s);
}

std::vector<double> read_scalar_or_vector(const json& obj, const char* key,
                                          const std::vector<double>& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) bad(std::string("config key '") + key + "' must hold numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    bad(std::string("config key '") + key + "' must be a number or an array");
}

Eigen::VectorXd broadcast(const std::vector<double>& v, int n, const char* what) {
    if (v.size() == 1) return Eigen::VectorXd::Constant(n, v[0]);
    if (static_cast<int>(v.size()) == n)
        return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
    bad(std::string(what) + " must be a scalar or have one entry per asset");
}

} // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_error(ErrorKind::Io, "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), path);
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad("cannot parse config " + source + ": " + e.what());
    }

    RunConfig c;

    check_keys(j, "", {"seed", "data", "features", "training", "walkforward", "backtest",
                       "strategies", "strategy_params", "synth"});
    read(j, "seed", c.seed);

    if (j.contains("data")) {
        check_keys(j["data"], "data.", {"assets"});
        read(j["data"], "assets", c.assets);
    }
    if (j.contains("features")) {
        const json& f = j["features"];
        check_keys(f, "features.", {"lookback", "price_normalization"});
        read(f, "lookback", c.training.features.lookback);
        if (f.contains("price_normalization")) {
            std::string mode;
            read(f, "price_normalization", mode);
            if (mode == "window-relative")
                c.training.features.price_normalization = PriceNormalization::WindowRelative;
            else if (mode == "none")
                c.training.features.price_normalization = PriceNormalization::None;
            else
                bad("features.price_normalization must be 'window-relative' or 'none'");
        }
    }
    if (j.contains("training")) {
        const json& t = j["training"];
        check_keys(t, "training.",
                   {"hidden", "epochs", "batch_size", "learning_rate", "beta1", "beta2",
                    "epsilon", "clip_norm", "shuffle_blocks"});
        read(t, "hidden", c.training.hidden);
        read(t, "epochs", c.training.epochs);
        read(t, "batch_size", c.training.batch_size);
        read(t, "learning_rate", c.training.adam.alpha);
        read(t, "beta1", c.training.adam.beta1);
        read(t, "beta2", c.training.adam.beta2);
        read(t, "epsilon", c.training.adam.epsilon);
        read(t, "clip_norm", c.training.clip_norm);
        read(t, "shuffle_blocks", c.training.shuffle_blocks);
    }
    if (j.contains("walkforward")) {
        const json& w = j["walkforward"];
        check_keys(w, "walkforward.",
                   {"first_test_start", "retrain_every_years", "validation_fraction"});
        read_date(w, "first_test_start", c.walkforward.first_test_start);
        read(w, "retrain_every_years", c.walkforward.retrain_every_years);
        read(w, "validation_fraction", c.walkforward.validation_fraction);
    }
    if (j.contains("backtest")) {
        const json& b = j["backtest"];
        check_keys(b, "backtest.",
                   {"sigma_target", "cost_rate", "scaling_enabled", "annualization_factor",
                    "vol_span_days", "vol_floor"});
        read(b, "sigma_target", c.backtest.sigma_target);
        read(b, "cost_rate", c.backtest.cost_rate);
        read(b, "scaling_enabled", c.backtest.scaling_enabled);
        read(b, "annualization_factor", c.backtest.annualization_factor);
        read(b, "vol_span_days", c.backtest.vol_span_days);
        read(b, "vol_floor", c.backtest.vol_floor);
    }
    if (j.contains("strategies")) {
        read(j, "strategies", c.strategies);
        for (const auto& s : c.strategies)
            if (!is_known_strategy(s)) bad("unknown strategy '" + s + "' in config");
    }
    if (j.contains("strategy_params")) {
        const json& p = j["strategy_params"];
        check_keys(p, "strategy_params.", {"dwp", "estimates", "solver"});
        if (p.contains("dwp")) {
            check_keys(p["dwp"], "strategy_params.dwp.", {"exponent"});
            read(p["dwp"], "exponent", c.strategy_params.dwp_exponent);
        }
        if (p.contains("estimates")) {
            check_keys(p["estimates"], "strategy_params.estimates.", {"window"});
            read(p["estimates"], "window", c.strategy_params.estimate_window);
        }
        if (p.contains("solver")) {
            check_keys(p["solver"], "strategy_params.solver.", {"iterations", "restarts"});
            read(p["solver"], "iterations", c.strategy_params.solver.iterations);
            read(p["solver"], "restarts", c.strategy_params.solver.restarts);
        }
    }
    if (j.contains("synth")) {
        const json& s = j["synth"];
        check_keys(s, "synth.",
                   {"n_assets", "days", "drift", "vol", "correlation", "start_date", "planted"});
        read(s, "n_assets", c.synth.n_assets);
        read(s, "days", c.synth.days);
        c.synth.drift = read_scalar_or_vector(s, "drift", c.synth.drift);
        c.synth.vol = read_scalar_or_vector(s, "vol", c.synth.vol);
        if (s.contains("correlation")) {
            const json& corr = s.at("correlation");
            if (corr.is_number()) {
                c.synth.pairwise_correlation = corr.get<double>();
            } else if (corr.is_array()) {
                const int n = static_cast<int>(corr.size());
                Eigen::MatrixXd m(n, n);
                for (int r = 0; r < n; ++r) {
                    if (!corr[static_cast<std::size_t>(r)].is_array() ||
                        static_cast<int>(corr[static_cast<std::size_t>(r)].size()) != n)
                        bad("synth.correlation must be square");
                    for (int col = 0; col < n; ++col)
                        m(r, col) = corr[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]
                                        .get<double>();
                }
                c.synth.correlation = m;
            } else {
                bad("synth.correlation must be a number or a matrix");
            }
        }
        if (s.contains("start_date")) {
            std::optional<Date> d;
            read_date(s, "start_date", d);
            c.synth.start_date = *d;
        }
        if (s.contains("planted")) {
            check_keys(s["planted"], "synth.planted.", {"asset", "sharpe", "vol"});
            c.synth.planted.enabled = true;
            read(s["planted"], "asset", c.synth.planted.asset);
            read(s["planted"], "sharpe", c.synth.planted.sharpe);
            read(s["planted"], "vol", c.synth.planted.vol);
        }
    }

    // Derived seeds: one master seed drives training, solver restarts, and
    // synthetic generation.
    c.training.seed = c.seed;
    c.strategy_params.seed = mix_seed(c.seed, 1);
    return c;
}

void apply_overrides(RunConfig& config, const FlagOverrides& flags) {
    if (flags.seed) {
        config.seed = *flags.seed;
        config.training.seed = *flags.seed;
        config.strategy_params.seed = mix_seed(*flags.seed, 1);
    }
    if (!flags.strategies.empty()) {
        for (const auto& s : flags.strategies)
            if (!is_known_strategy(s))
                throw_error(ErrorKind::Config, "unknown strategy '" + s + "'");
        config.strategies = flags.strategies;
    }
    if (flags.sigma_target) config.backtest.sigma_target = *flags.sigma_target;
    if (flags.cost_rate) config.backtest.cost_rate = *flags.cost_rate;
    if (flags.no_scaling) config.backtest.scaling_enabled = false;
}

SyntheticSpec RunConfig::synth_spec() const {
    if (synth.planted.enabled) {
        SyntheticSpec spec = planted_signal_spec(synth.planted.asset, synth.planted.sharpe,
                                                 synth.n_assets, synth.days, synth.planted.vol,
                                                 seed);
        spec.start_date = synth.start_date;
        return spec;
    }
    SyntheticSpec spec;
    spec.n_assets = synth.n_assets;
    spec.days = synth.days;
    spec.seed = seed;
    spec.start_date = synth.start_date;
    spec.annual_drift = broadcast(synth.drift.empty() ? std::vector<double>{0.02} : synth.drift,
                                  synth.n_assets, "synth.drift");
    spec.annual_vol = broadcast(synth.vol.empty() ? std::vector<double>{0.2} : synth.vol,
                                synth.n_assets, "synth.vol");
    if (synth.correlation) {
        spec.correlation = *synth.correlation;
    } else {
        spec.correlation = Eigen::MatrixXd::Constant(synth.n_assets, synth.n_assets,
                                                     synth.pairwise_correlation);
        spec.correlation.diagonal().setOnes();
    }
    return spec;
}

std::string RunConfig::resolved_json() const {
    json j;
    j["seed"] = seed;
    j["data"]["assets"] = assets;
    j["features"]["lookback"] = training.features.lookback;
    j["features"]["price_normalization"] =
        training.features.price_normalization == PriceNormalization::WindowRelative
            ? "window-relative"
            : "none";
    j["training"] = {
        {"hidden", training.hidden},
        {"epochs", training.epochs},
        {"batch_size", training.batch_size},
        {"learning_rate", training.adam.alpha},
        {"beta1", training.adam.beta1},
        {"beta2", training.adam.beta2},
        {"epsilon", training.adam.epsilon},
        {"clip_norm", training.clip_norm},
        {"shuffle_blocks", training.shuffle_blocks},
    };
    j["walkforward"] = {
        {"retrain_every_years", walkforward.retrain_every_years},
        {"validation_fraction", walkforward.validation_fraction},
    };
    if (walkforward.first_test_start)
        j["walkforward"]["first_test_start"] = walkforward.first_test_start->to_string();
    j["backtest"] = {
        {"sigma_target", backtest.sigma_target},
        {"cost_rate", backtest.cost_rate},
        {"scaling_enabled", backtest.scaling_enabled},
        {"annualization_factor", backtest.annualization_factor},
        {"vol_span_days", backtest.vol_span_days},
        {"vol_floor", backtest.vol_floor},
    };
    j["strategies"] = strategies;
    j["strategy_params"] = {
        {"dwp", {{"exponent", strategy_params.dwp_exponent}}},
        {"estimates", {{"window", strategy_params.estimate_window}}},
        {"solver",
         {{"iterations", strategy_params.solver.iterations},
          {"restarts", strategy_params.solver.restarts}}},
    };
    j["synth"] = {
        {"n_assets", synth.n_assets},
        {"days", synth.days},
        {"start_date", synth.start_date.to_string()},
    };
    if (synth.planted.enabled)
        j["synth"]["planted"] = {{"asset", synth.planted.asset},
                                 {"sharpe", synth.planted.sharpe},
                                 {"vol", synth.planted.vol}};
    return j.dump(2);
}

} // namespace folio::cli
