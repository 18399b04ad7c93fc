#include "folio/synthetic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "folio/errors.hpp"
#include "folio/rng.hpp"

namespace folio {

SyntheticSpec SyntheticSpec::uncorrelated(int n_assets, int days, double drift, double vol,
                                          std::uint64_t seed) {
    SyntheticSpec s;
    s.n_assets = n_assets;
    s.days = days;
    s.annual_drift = Eigen::VectorXd::Constant(n_assets, drift);
    s.annual_vol = Eigen::VectorXd::Constant(n_assets, vol);
    s.correlation = Eigen::MatrixXd::Identity(n_assets, n_assets);
    s.seed = seed;
    return s;
}

PriceTable generate(const SyntheticSpec& spec) {
    const int n = spec.n_assets;
    if (n < 1) throw_error(ErrorKind::Config, "n_assets must be >= 1");
    if (spec.days < 2) throw_error(ErrorKind::Config, "days must be >= 2");
    if (spec.annual_drift.size() != n || spec.annual_vol.size() != n)
        throw_error(ErrorKind::Config, "drift/vol vectors must have one entry per asset");
    if (spec.correlation.rows() != n || spec.correlation.cols() != n)
        throw_error(ErrorKind::Config, "correlation matrix must be n x n");
    if (!spec.correlation.isApprox(spec.correlation.transpose(), 1e-12))
        throw_error(ErrorKind::Config, "correlation matrix must be symmetric");
    for (int i = 0; i < n; ++i)
        if (std::abs(spec.correlation(i, i) - 1.0) > 1e-12)
            throw_error(ErrorKind::Config, "correlation matrix must have unit diagonal");
    if ((spec.annual_vol.array() < 0.0).any())
        throw_error(ErrorKind::Config, "volatilities must be non-negative");

    // Symmetric square root via eigendecomposition; tolerate tiny negative
    // eigenvalues from rounding.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.correlation);
    Eigen::VectorXd evals = eig.eigenvalues();
    for (int i = 0; i < n; ++i) {
        if (evals(i) < -1e-10)
            throw_error(ErrorKind::Config, "correlation matrix is not positive semidefinite");
        evals(i) = std::max(evals(i), 0.0);
    }
    const Eigen::MatrixXd root =
        eig.eigenvectors() * evals.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();

    const double af = static_cast<double>(spec.annualization_factor);
    const Eigen::ArrayXd step_drift =
        (spec.annual_drift.array() - 0.5 * spec.annual_vol.array().square()) / af;
    const Eigen::ArrayXd step_vol = spec.annual_vol.array() / std::sqrt(af);

    PriceTable table;
    table.dates = weekday_range(spec.start_date, static_cast<std::size_t>(spec.days));
    table.asset_names.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) table.asset_names.push_back("A" + std::to_string(i + 1));
    table.closes.resize(spec.days, n);
    table.closes.row(0).setConstant(100.0);

    Rng rng(spec.seed);
    Eigen::VectorXd z(n);
    for (int t = 1; t < spec.days; ++t) {
        for (int i = 0; i < n; ++i) z(i) = rng.gaussian();
        const Eigen::ArrayXd shock = (root * z).array();
        const Eigen::ArrayXd growth = (step_drift + step_vol * shock).exp();
        table.closes.row(t) =
            (table.closes.row(t - 1).transpose().array() * growth).transpose();
    }
    return table;
}

SyntheticSpec planted_signal_spec(int strong_asset, double sharpe_level, int n_assets, int days,
                                  double vol, std::uint64_t seed) {
    if (strong_asset < 0 || strong_asset >= n_assets)
        throw_error(ErrorKind::Config, "strong_asset index out of range");
    if (!(sharpe_level > 0.0 && sharpe_level <= 4.0))
        throw_error(ErrorKind::Config, "sharpe_level must be in (0, 4]");
    SyntheticSpec s = SyntheticSpec::uncorrelated(n_assets, days, 0.0, vol, seed);
    s.annual_drift(strong_asset) = sharpe_level * vol;
    return s;
}

} // namespace folio
