#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "folio/features.hpp"

namespace folio {

struct AdamConfig {
    double alpha = 1e-3; // learning rate
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Single-layer LSTM plus linear head. Gate order: input, forget, cell
/// candidate, output. All arrays are double precision; the checkpoint format
/// and the Adam/clipping helpers rely on for_each_array's declared order.
struct ModelParams {
    int n_assets = 0;
    int input_dim = 0; // 2 * n_assets for the standard feature layout
    int hidden = 0;

    std::array<Eigen::MatrixXd, 4> w_x;  // hidden x input_dim
    std::array<Eigen::MatrixXd, 4> w_h;  // hidden x hidden
    std::array<Eigen::MatrixXd, 4> bias; // hidden x 1
    Eigen::MatrixXd head_w;              // n_assets x hidden
    Eigen::MatrixXd head_b;              // n_assets x 1

    std::size_t parameter_count() const;

    static ModelParams zeros_like(const ModelParams& shape);

    template <typename F>
    void for_each_array(F&& f) {
        for (int g = 0; g < 4; ++g) f(w_x[g]);
        for (int g = 0; g < 4; ++g) f(w_h[g]);
        for (int g = 0; g < 4; ++g) f(bias[g]);
        f(head_w);
        f(head_b);
    }
    template <typename F>
    void for_each_array(F&& f) const {
        for (int g = 0; g < 4; ++g) f(w_x[g]);
        for (int g = 0; g < 4; ++g) f(w_h[g]);
        for (int g = 0; g < 4; ++g) f(bias[g]);
        f(head_w);
        f(head_b);
    }

    bool all_finite() const;
    double squared_norm() const;
};

/// Activations retained by one (batched) forward pass; sufficient to replay
/// the backward pass deterministically. Matrices are batch x hidden.
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> x;                    // batch x input_dim, per step
    std::vector<std::array<Eigen::MatrixXd, 4>> gate;  // i, f, g, o activations
    std::vector<Eigen::MatrixXd> cell;
    std::vector<Eigen::MatrixXd> cell_tanh;
    std::vector<Eigen::MatrixXd> hidden;
    Eigen::MatrixXd logits;  // batch x n_assets (raw head outputs)
    Eigen::MatrixXd weights; // batch x n_assets (softmax rows)
    int steps = 0;
    int batch = 0;
};

struct AdamState {
    AdamConfig config;
    ModelParams m; // first-moment accumulator, shaped like the parameters
    ModelParams v; // second-moment accumulator
    std::int64_t step = 0;

    static AdamState init(const ModelParams& shape, AdamConfig config = {});
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per matrix,
/// forget-gate bias 1.0, other biases 0. Deterministic per seed.
ModelParams init_params(int n_assets, int hidden, std::uint64_t seed);

/// LSTM over the window's k rows from zero initial state, head on the final
/// hidden state, softmax with max subtraction. Rows of the result are on the
/// open simplex.
Eigen::MatrixXd forward_batch(const ModelParams& params,
                              const std::vector<const FeatureWindow*>& windows,
                              ForwardTrace* trace = nullptr);

/// Single-window convenience wrapper around forward_batch.
Eigen::VectorXd forward(const ModelParams& params, const FeatureWindow& window,
                        ForwardTrace* trace = nullptr);

/// Inference over an arbitrary number of windows in fixed-shape chunks (the
/// tail chunk is padded), so each row's result does not depend on how many
/// windows follow it.
Eigen::MatrixXd forward_windows(const ModelParams& params,
                                const std::vector<const FeatureWindow*>& windows,
                                int chunk = 256);

struct BackwardResult {
    ModelParams grad;
    // dL/dx per window (k x input_dim), filled when requested.
    std::vector<Eigen::MatrixXd> input_grads;
};

/// Exact reverse-mode gradient: softmax Jacobian, head, then BPTT through
/// every step. `upstream` holds dL/dweights per sample (batch x n_assets);
/// the result sums over samples.
BackwardResult backward_batch(const ModelParams& params, const ForwardTrace& trace,
                              const Eigen::MatrixXd& upstream, bool want_input_grads = false);

/// Scales the gradient so its global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
double clip_global_norm(ModelParams& grad, double max_norm);

/// Adam update in the ascent direction (the objective is maximized).
void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state);

struct Checkpoint {
    ModelParams params;
    std::optional<AdamState> adam;
    std::uint64_t seed = 0;
};

/// Versioned binary container; round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const AdamState* adam = nullptr, std::uint64_t seed = 0);
Checkpoint load_checkpoint(const std::string& path);

} // namespace folio
