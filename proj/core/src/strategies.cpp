#include "folio/strategies.hpp"

#include <algorithm>
#include <cmath>

#include "folio/errors.hpp"
#include "folio/rng.hpp"

namespace folio {

namespace {

bool on_simplex(const Eigen::VectorXd& w, double tol = 1e-9) {
    if ((w.array() < -tol).any()) return false;
    return std::abs(w.sum() - 1.0) <= tol;
}

Eigen::VectorXd random_simplex_point(int n, Rng& rng) {
    // Exponential spacings give a uniform draw from the simplex.
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = -std::log(std::max(rng.uniform(), 1e-300));
    return v / v.sum();
}

// Ratio objective mu'w / sqrt(w' sigma w); mu doubles as the per-asset
// volatility vector for the diversification ratio.
struct RatioObjective {
    const Eigen::VectorXd& mu;
    const Eigen::MatrixXd& sigma;

    double value(const Eigen::VectorXd& w) const {
        const double s2 = w.dot(sigma * w);
        return mu.dot(w) / std::sqrt(std::max(s2, 1e-300));
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& w) const {
        const Eigen::VectorXd sw = sigma * w;
        const double s2 = std::max(w.dot(sw), 1e-300);
        const double s = std::sqrt(s2);
        return mu / s - (mu.dot(w) / (s2 * s)) * sw;
    }
};

struct NegVarianceObjective {
    const Eigen::MatrixXd& sigma;

    double value(const Eigen::VectorXd& w) const { return -w.dot(sigma * w); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& w) const { return -2.0 * (sigma * w); }
};

template <typename Objective>
Eigen::VectorXd projected_gradient_ascent(const Objective& obj, Eigen::VectorXd w,
                                          int iterations, double* best_value) {
    double step = 1.0;
    double v = obj.value(w);
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd g = obj.gradient(w);
        bool accepted = false;
        for (int bt = 0; bt < 40 && !accepted; ++bt) {
            Eigen::VectorXd cand = project_to_simplex(w + step * g);
            const double cv = obj.value(cand);
            if (cv >= v - 1e-15) {
                const double moved = (cand - w).norm();
                w = std::move(cand);
                if (cv > v) v = cv;
                accepted = true;
                if (moved < 1e-14) it = iterations; // converged
            } else {
                step *= 0.5;
            }
        }
        if (!accepted) break; // step underflow
        step = std::min(step * 1.25, 1e3);
    }
    *best_value = v;
    return w;
}

template <typename Objective>
SolverResult solve_on_simplex(const Objective& obj, int n, const SimplexSolverConfig& config) {
    SolverResult best;
    best.value = -std::numeric_limits<double>::infinity();
    Rng rng(mix_seed(config.seed, 0x51137ULL));
    for (int r = 0; r < std::max(1, config.restarts); ++r) {
        Eigen::VectorXd start = r == 0 ? Eigen::VectorXd::Constant(n, 1.0 / n)
                                       : random_simplex_point(n, rng);
        double value = 0.0;
        Eigen::VectorXd w = projected_gradient_ascent(obj, std::move(start),
                                                      config.iterations, &value);
        if (value > best.value) {
            best.value = value;
            best.weights = std::move(w);
        }
    }
    return best;
}

Eigen::MatrixXd ridged(const Eigen::MatrixXd& sigma, double ridge_scale) {
    const int n = static_cast<int>(sigma.rows());
    double ridge = ridge_scale * sigma.trace() / n;
    if (!(ridge > 0.0)) ridge = 1e-16; // zero-trace window: keep s.p.d.
    return sigma + ridge * Eigen::MatrixXd::Identity(n, n);
}

} // namespace

Eigen::VectorXd project_to_simplex(Eigen::VectorXd v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    for (int j = 0; j < n; ++j) {
        css += u[static_cast<std::size_t>(j)];
        const double t = (css - 1.0) / (j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) tau = t;
    }
    for (int i = 0; i < n; ++i) v(i) = std::max(v(i) - tau, 0.0);
    return v;
}

Eigen::VectorXd allocation_targets(int which) {
    switch (which) {
        case 1: return Eigen::Vector4d(0.25, 0.25, 0.25, 0.25);
        case 2: return Eigen::Vector4d(0.50, 0.10, 0.20, 0.20);
        case 3: return Eigen::Vector4d(0.10, 0.50, 0.20, 0.20);
        case 4: return Eigen::Vector4d(0.40, 0.40, 0.10, 0.10);
        default:
            throw_error(ErrorKind::Config, "allocation strategy index must be 1..4");
    }
}

WeightPath fixed_allocation_path(const ReturnTable& returns, const Eigen::VectorXd& targets) {
    if (targets.size() != returns.returns.cols())
        throw_error(ErrorKind::Config, "allocation targets do not match asset count");
    if (!on_simplex(targets))
        throw_error(ErrorKind::Config, "allocation targets must lie on the simplex");

    const Eigen::Index t = returns.returns.rows();
    const Eigen::Index n = returns.returns.cols();
    WeightPath path;
    path.dates = returns.dates;
    path.weights.resize(t, n);
    Eigen::VectorXd w = targets;
    path.weights.row(0) = w.transpose();
    for (Eigen::Index r = 1; r < t; ++r) {
        if (returns.dates[static_cast<std::size_t>(r)].year !=
            returns.dates[static_cast<std::size_t>(r - 1)].year) {
            w = targets; // first trading day of the calendar year
        } else {
            Eigen::VectorXd grown =
                w.cwiseProduct((returns.returns.row(r).array() + 1.0).matrix().transpose());
            w = grown / grown.sum();
        }
        path.weights.row(r) = w.transpose();
    }
    return path;
}

RollingEstimates rolling_estimates(const ReturnTable& returns, int window) {
    if (window < 2) throw_error(ErrorKind::Config, "estimate window must be >= 2");
    const Eigen::Index t = returns.returns.rows();
    const Eigen::Index n = returns.returns.cols();
    if (t < window)
        throw_error(ErrorKind::InsufficientData,
                    "need at least " + std::to_string(window) + " returns for rolling estimates");

    RollingEstimates out;
    out.valid_from = static_cast<std::size_t>(window - 1);
    out.mu = Eigen::MatrixXd::Zero(t, n);
    out.cov.assign(static_cast<std::size_t>(t), Eigen::MatrixXd());
    for (Eigen::Index e = window - 1; e < t; ++e) {
        const auto block = returns.returns.middleRows(e - window + 1, window);
        const Eigen::RowVectorXd mean = block.colwise().mean();
        out.mu.row(e) = mean;
        const Eigen::MatrixXd centered = block.rowwise() - mean;
        out.cov[static_cast<std::size_t>(e)] =
            (centered.transpose() * centered) / static_cast<double>(window - 1);
    }
    return out;
}

SolverResult max_sharpe_weights(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                const SimplexSolverConfig& config) {
    if (mu.size() != sigma.rows() || sigma.rows() != sigma.cols())
        throw_error(ErrorKind::Contract, "mu/sigma shape mismatch");
    const Eigen::MatrixXd s = ridged(sigma, config.ridge_scale);
    const int n = static_cast<int>(mu.size());

    if ((mu.array() <= 0.0).all()) {
        // No positive expected return anywhere: hold the minimum-variance
        // portfolio instead.
        NegVarianceObjective mv{s};
        SolverResult best = solve_on_simplex(mv, n, config);
        best.minvar_fallback = true;
        // Report the Sharpe-style value actually achieved (may be <= 0).
        best.value = RatioObjective{mu, s}.value(best.weights);
        return best;
    }

    RatioObjective obj{mu, s};
    return solve_on_simplex(obj, n, config);
}

SolverResult max_diversification_weights(const Eigen::MatrixXd& sigma,
                                         const SimplexSolverConfig& config) {
    if (sigma.rows() != sigma.cols())
        throw_error(ErrorKind::Contract, "sigma must be square");
    const Eigen::MatrixXd s = ridged(sigma, config.ridge_scale);
    const Eigen::VectorXd vols = s.diagonal().cwiseSqrt();
    RatioObjective obj{vols, s};
    return solve_on_simplex(obj, static_cast<int>(sigma.rows()), config);
}

WeightPath diversity_weighted_path(const PriceTable& prices, double exponent) {
    if (!(exponent > 0.0 && exponent <= 1.0))
        throw_error(ErrorKind::Config, "diversity exponent must be in (0, 1]");
    const Eigen::Index t = prices.closes.rows();
    const Eigen::Index n = prices.closes.cols();
    if (t < 2) throw_error(ErrorKind::Contract, "price table too short");

    WeightPath path;
    path.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    path.weights.resize(t - 1, n);
    for (Eigen::Index r = 1; r < t; ++r) {
        Eigen::VectorXd pi = prices.closes.row(r).transpose();
        pi /= pi.sum();
        if (exponent == 1.0) {
            path.weights.row(r - 1) = pi.transpose(); // market portfolio, exactly
        } else {
            Eigen::VectorXd powed = pi.array().pow(exponent);
            path.weights.row(r - 1) = (powed / powed.sum()).transpose();
        }
    }
    return path;
}

} // namespace folio
