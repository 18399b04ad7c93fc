#include "folio/objective.hpp"

#include <cmath>

#include "folio/errors.hpp"

namespace folio {

Eigen::VectorXd portfolio_returns(const Eigen::MatrixXd& weights, const TrainingBatch& batch) {
    if (weights.rows() != batch.next_returns.rows() ||
        weights.cols() != batch.next_returns.cols())
        throw_error(ErrorKind::Contract, "weights and batch returns are misaligned");
    return weights.cwiseProduct(batch.next_returns).rowwise().sum();
}

ObjectiveValue sharpe_value(const Eigen::VectorXd& returns) {
    const Eigen::Index b = returns.size();
    if (b < 2) throw_error(ErrorKind::Contract, "sharpe_value needs at least 2 returns");

    ObjectiveValue out;
    out.per_sample = returns;
    out.mean = returns.mean();
    out.second_moment = returns.squaredNorm() / static_cast<double>(b);
    const double variance = out.second_moment - out.mean * out.mean;
    if (variance <= kVarianceEpsilon) {
        out.degenerate = true;
        out.l = 0.0;
        return out;
    }
    out.l = out.mean / std::sqrt(variance);
    return out;
}

Eigen::MatrixXd sharpe_gradient_wrt_weights(const TrainingBatch& batch,
                                            const Eigen::MatrixXd& weights) {
    const Eigen::VectorXd r = portfolio_returns(weights, batch);
    const ObjectiveValue obj = sharpe_value(r);
    if (obj.degenerate) {
        // R_p is constant in w when every asset return vanishes; the gradient
        // is identically zero rather than undefined.
        if (batch.next_returns.cwiseAbs().maxCoeff() == 0.0)
            return Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
        throw_error(ErrorKind::Training, "degenerate batch variance in Sharpe gradient");
    }

    const double b = static_cast<double>(r.size());
    const double variance = obj.second_moment - obj.mean * obj.mean;
    const double s3 = std::pow(variance, 1.5);
    // dL/dR_t for population moments.
    Eigen::VectorXd dl_dr = (obj.second_moment - obj.mean * r.array()).matrix() / (b * s3);
    return batch.next_returns.array().colwise() * dl_dr.array();
}

} // namespace folio
