#include "folio/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "folio/errors.hpp"
#include "folio/rng.hpp"

namespace folio {

namespace {

constexpr int kGateInput = 0;
constexpr int kGateForget = 1;
constexpr int kGateCell = 2;
constexpr int kGateOutput = 3;

constexpr char kCheckpointMagic[8] = {'F', 'O', 'L', 'I', 'O', 'N', 'N', '1'};

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-scale, scale);
    return m;
}

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& a) {
    return 1.0 / (1.0 + (-a.array()).exp());
}

void softmax_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double mx = m.row(r).maxCoeff();
        Eigen::ArrayXd e = (m.row(r).array() - mx).exp();
        m.row(r) = e / e.sum();
    }
}

} // namespace

std::size_t ModelParams::parameter_count() const {
    std::size_t total = 0;
    for_each_array([&](const Eigen::MatrixXd& a) { total += static_cast<std::size_t>(a.size()); });
    return total;
}

ModelParams ModelParams::zeros_like(const ModelParams& shape) {
    ModelParams out;
    out.n_assets = shape.n_assets;
    out.input_dim = shape.input_dim;
    out.hidden = shape.hidden;
    for (int g = 0; g < 4; ++g) {
        out.w_x[g] = Eigen::MatrixXd::Zero(shape.w_x[g].rows(), shape.w_x[g].cols());
        out.w_h[g] = Eigen::MatrixXd::Zero(shape.w_h[g].rows(), shape.w_h[g].cols());
        out.bias[g] = Eigen::MatrixXd::Zero(shape.bias[g].rows(), shape.bias[g].cols());
    }
    out.head_w = Eigen::MatrixXd::Zero(shape.head_w.rows(), shape.head_w.cols());
    out.head_b = Eigen::MatrixXd::Zero(shape.head_b.rows(), shape.head_b.cols());
    return out;
}

bool ModelParams::all_finite() const {
    bool ok = true;
    for_each_array([&](const Eigen::MatrixXd& a) { ok = ok && a.allFinite(); });
    return ok;
}

double ModelParams::squared_norm() const {
    double s = 0.0;
    for_each_array([&](const Eigen::MatrixXd& a) { s += a.squaredNorm(); });
    return s;
}

ModelParams init_params(int n_assets, int hidden, std::uint64_t seed) {
    if (n_assets < 1) throw_error(ErrorKind::Config, "n_assets must be >= 1");
    if (hidden < 1) throw_error(ErrorKind::Config, "hidden width must be >= 1");
    const int input_dim = 2 * n_assets;

    ModelParams p;
    p.n_assets = n_assets;
    p.input_dim = input_dim;
    p.hidden = hidden;

    Rng rng(seed);
    const double sx = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double sh = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (int g = 0; g < 4; ++g) {
        p.w_x[g] = uniform_matrix(hidden, input_dim, sx, rng);
        p.w_h[g] = uniform_matrix(hidden, hidden, sh, rng);
        p.bias[g] = Eigen::MatrixXd::Zero(hidden, 1);
    }
    p.bias[kGateForget].setConstant(1.0);
    p.head_w = uniform_matrix(n_assets, hidden, sh, rng);
    p.head_b = Eigen::MatrixXd::Zero(n_assets, 1);
    return p;
}

Eigen::MatrixXd forward_batch(const ModelParams& params,
                              const std::vector<const FeatureWindow*>& windows,
                              ForwardTrace* trace) {
    if (windows.empty()) throw_error(ErrorKind::Contract, "forward_batch: empty batch");
    const Eigen::Index b = static_cast<Eigen::Index>(windows.size());
    const Eigen::Index k = windows[0]->m.rows();
    const Eigen::Index d = windows[0]->m.cols();
    const Eigen::Index h = params.hidden;
    if (d != params.input_dim)
        throw_error(ErrorKind::Contract, "window width " + std::to_string(d) +
                                             " does not match model input_dim " +
                                             std::to_string(params.input_dim));
    for (const auto* w : windows)
        if (w->m.rows() != k || w->m.cols() != d)
            throw_error(ErrorKind::Contract, "inconsistent window shapes in batch");

    if (trace) {
        trace->x.assign(static_cast<std::size_t>(k), Eigen::MatrixXd());
        trace->gate.assign(static_cast<std::size_t>(k), {});
        trace->cell.assign(static_cast<std::size_t>(k), Eigen::MatrixXd());
        trace->cell_tanh.assign(static_cast<std::size_t>(k), Eigen::MatrixXd());
        trace->hidden.assign(static_cast<std::size_t>(k), Eigen::MatrixXd());
        trace->steps = static_cast<int>(k);
        trace->batch = static_cast<int>(b);
    }

    Eigen::MatrixXd hs = Eigen::MatrixXd::Zero(b, h);
    Eigen::MatrixXd cs = Eigen::MatrixXd::Zero(b, h);
    Eigen::MatrixXd xt(b, d);
    for (Eigen::Index t = 0; t < k; ++t) {
        for (Eigen::Index s = 0; s < b; ++s) xt.row(s) = windows[static_cast<std::size_t>(s)]->m.row(t);

        Eigen::MatrixXd ai = xt * params.w_x[kGateInput].transpose() +
                             hs * params.w_h[kGateInput].transpose();
        Eigen::MatrixXd af = xt * params.w_x[kGateForget].transpose() +
                             hs * params.w_h[kGateForget].transpose();
        Eigen::MatrixXd ag = xt * params.w_x[kGateCell].transpose() +
                             hs * params.w_h[kGateCell].transpose();
        Eigen::MatrixXd ao = xt * params.w_x[kGateOutput].transpose() +
                             hs * params.w_h[kGateOutput].transpose();
        ai.rowwise() += params.bias[kGateInput].col(0).transpose();
        af.rowwise() += params.bias[kGateForget].col(0).transpose();
        ag.rowwise() += params.bias[kGateCell].col(0).transpose();
        ao.rowwise() += params.bias[kGateOutput].col(0).transpose();

        Eigen::MatrixXd gi = sigmoid(ai);
        Eigen::MatrixXd gf = sigmoid(af);
        Eigen::MatrixXd gg = ag.array().tanh();
        Eigen::MatrixXd go = sigmoid(ao);

        cs = gf.cwiseProduct(cs) + gi.cwiseProduct(gg);
        Eigen::MatrixXd ct = cs.array().tanh();
        hs = go.cwiseProduct(ct);

        if (trace) {
            auto u = static_cast<std::size_t>(t);
            trace->x[u] = xt;
            trace->gate[u] = {gi, gf, gg, go};
            trace->cell[u] = cs;
            trace->cell_tanh[u] = ct;
            trace->hidden[u] = hs;
        }
    }

    Eigen::MatrixXd logits = hs * params.head_w.transpose();
    logits.rowwise() += params.head_b.col(0).transpose();
    Eigen::MatrixXd weights = logits;
    softmax_rows(weights);

    if (trace) {
        trace->logits = logits;
        trace->weights = weights;
    }
    return weights;
}

Eigen::VectorXd forward(const ModelParams& params, const FeatureWindow& window,
                        ForwardTrace* trace) {
    std::vector<const FeatureWindow*> one{&window};
    return forward_batch(params, one, trace).row(0).transpose();
}

Eigen::MatrixXd forward_windows(const ModelParams& params,
                                const std::vector<const FeatureWindow*>& windows, int chunk) {
    if (windows.empty()) throw_error(ErrorKind::Contract, "forward_windows: no windows");
    if (chunk < 1) throw_error(ErrorKind::Config, "forward_windows chunk must be >= 1");
    const std::size_t total = windows.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(total), params.n_assets);
    for (std::size_t base = 0; base < total; base += static_cast<std::size_t>(chunk)) {
        const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(chunk),
                                                        total - base);
        // Pad with repeats of the last window; row results are row-local, so
        // padding only pins the GEMM shapes.
        std::vector<const FeatureWindow*> batch(static_cast<std::size_t>(chunk),
                                                windows[base + count - 1]);
        for (std::size_t j = 0; j < count; ++j) batch[j] = windows[base + j];
        out.middleRows(static_cast<Eigen::Index>(base), static_cast<Eigen::Index>(count)) =
            forward_batch(params, batch, nullptr).topRows(static_cast<Eigen::Index>(count));
    }
    return out;
}

BackwardResult backward_batch(const ModelParams& params, const ForwardTrace& trace,
                              const Eigen::MatrixXd& upstream, bool want_input_grads) {
    const Eigen::Index b = trace.batch;
    const Eigen::Index k = trace.steps;
    if (upstream.rows() != b || upstream.cols() != params.n_assets)
        throw_error(ErrorKind::Contract, "upstream gradient shape mismatch");
    if (trace.hidden.empty())
        throw_error(ErrorKind::Contract, "backward called without a retained trace");

    BackwardResult out;
    out.grad = ModelParams::zeros_like(params);
    if (want_input_grads)
        out.input_grads.assign(static_cast<std::size_t>(b),
                               Eigen::MatrixXd::Zero(k, params.input_dim));

    // Softmax Jacobian per row: dlogit = w .* (g - <g, w>).
    const Eigen::MatrixXd& w = trace.weights;
    Eigen::VectorXd dot = (upstream.cwiseProduct(w)).rowwise().sum();
    Eigen::MatrixXd dlogits = w.cwiseProduct(upstream.colwise() - dot);

    const Eigen::MatrixXd& h_last = trace.hidden[static_cast<std::size_t>(k - 1)];
    out.grad.head_w += dlogits.transpose() * h_last;
    out.grad.head_b.col(0) += dlogits.colwise().sum().transpose();

    Eigen::MatrixXd dh = dlogits * params.head_w; // b x h
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(b, params.hidden);

    for (Eigen::Index t = k - 1; t >= 0; --t) {
        const auto u = static_cast<std::size_t>(t);
        const Eigen::MatrixXd& gi = trace.gate[u][kGateInput];
        const Eigen::MatrixXd& gf = trace.gate[u][kGateForget];
        const Eigen::MatrixXd& gg = trace.gate[u][kGateCell];
        const Eigen::MatrixXd& go = trace.gate[u][kGateOutput];
        const Eigen::MatrixXd& ct = trace.cell_tanh[u];

        dc += dh.cwiseProduct(go).cwiseProduct(
            (1.0 - ct.array().square()).matrix());

        Eigen::MatrixXd da_o =
            dh.cwiseProduct(ct).cwiseProduct(go.cwiseProduct((1.0 - go.array()).matrix()));
        Eigen::MatrixXd da_i =
            dc.cwiseProduct(gg).cwiseProduct(gi.cwiseProduct((1.0 - gi.array()).matrix()));
        Eigen::MatrixXd da_g = dc.cwiseProduct(gi).cwiseProduct(
            (1.0 - gg.array().square()).matrix());
        Eigen::MatrixXd da_f;
        if (t > 0) {
            const Eigen::MatrixXd& c_prev = trace.cell[u - 1];
            da_f = dc.cwiseProduct(c_prev).cwiseProduct(
                gf.cwiseProduct((1.0 - gf.array()).matrix()));
        } else {
            da_f = Eigen::MatrixXd::Zero(b, params.hidden); // c_{-1} = 0
        }

        const std::array<const Eigen::MatrixXd*, 4> da = {&da_i, &da_f, &da_g, &da_o};
        const Eigen::MatrixXd& xt = trace.x[u];
        for (int g = 0; g < 4; ++g) {
            out.grad.w_x[g] += da[g]->transpose() * xt;
            if (t > 0) out.grad.w_h[g] += da[g]->transpose() * trace.hidden[u - 1];
            out.grad.bias[g].col(0) += da[g]->colwise().sum().transpose();
        }

        if (want_input_grads) {
            Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(b, params.input_dim);
            for (int g = 0; g < 4; ++g) dx += *da[g] * params.w_x[g];
            for (Eigen::Index s = 0; s < b; ++s)
                out.input_grads[static_cast<std::size_t>(s)].row(t) = dx.row(s);
        }

        if (t > 0) {
            Eigen::MatrixXd dh_prev = Eigen::MatrixXd::Zero(b, params.hidden);
            for (int g = 0; g < 4; ++g) dh_prev += *da[g] * params.w_h[g];
            dh = std::move(dh_prev);
            dc = dc.cwiseProduct(gf);
        }
    }
    return out;
}

double clip_global_norm(ModelParams& grad, double max_norm) {
    const double norm = std::sqrt(grad.squared_norm());
    if (max_norm > 0.0 && norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        grad.for_each_array([&](Eigen::MatrixXd& a) { a *= scale; });
    }
    return norm;
}

AdamState AdamState::init(const ModelParams& shape, AdamConfig config) {
    AdamState s;
    s.config = config;
    s.m = ModelParams::zeros_like(shape);
    s.v = ModelParams::zeros_like(shape);
    s.step = 0;
    return s;
}

void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state) {
    if (!grad.all_finite())
        throw_error(ErrorKind::Training, "non-finite gradient encountered in adam_step");

    state.step += 1;
    const double b1 = state.config.beta1;
    const double b2 = state.config.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    const double alpha = state.config.alpha;
    const double eps = state.config.epsilon;

    std::array<Eigen::MatrixXd*, 14> ps{}, ms{}, vs{};
    std::array<const Eigen::MatrixXd*, 14> gs{};
    std::size_t i = 0;
    params.for_each_array([&](Eigen::MatrixXd& a) { ps[i++] = &a; });
    i = 0;
    grad.for_each_array([&](const Eigen::MatrixXd& a) { gs[i++] = &a; });
    i = 0;
    state.m.for_each_array([&](Eigen::MatrixXd& a) { ms[i++] = &a; });
    i = 0;
    state.v.for_each_array([&](Eigen::MatrixXd& a) { vs[i++] = &a; });

    for (std::size_t j = 0; j < ps.size(); ++j) {
        Eigen::MatrixXd& m = *ms[j];
        Eigen::MatrixXd& v = *vs[j];
        const Eigen::MatrixXd& g = *gs[j];
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        // Ascent direction: the objective is maximized.
        ps[j]->array() += alpha * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
    }
}

namespace {

void write_raw(std::ostream& out, const void* p, std::size_t bytes) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
}

void read_raw(std::istream& in, void* p, std::size_t bytes, const std::string& path) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
    if (!in) throw_error(ErrorKind::Parse, "truncated checkpoint file: " + path);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    const std::int32_t rows = static_cast<std::int32_t>(m.rows());
    const std::int32_t cols = static_cast<std::int32_t>(m.cols());
    write_raw(out, &rows, sizeof(rows));
    write_raw(out, &cols, sizeof(cols));
    write_raw(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

Eigen::MatrixXd read_matrix(std::istream& in, const std::string& path) {
    std::int32_t rows = 0, cols = 0;
    read_raw(in, &rows, sizeof(rows), path);
    read_raw(in, &cols, sizeof(cols), path);
    if (rows < 0 || cols < 0 || rows > 1 << 24 || cols > 1 << 24)
        throw_error(ErrorKind::Parse, "corrupt checkpoint dimensions in " + path);
    Eigen::MatrixXd m(rows, cols);
    read_raw(in, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), path);
    return m;
}

void write_params(std::ostream& out, const ModelParams& p) {
    p.for_each_array([&](const Eigen::MatrixXd& a) { write_matrix(out, a); });
}

ModelParams read_params(std::istream& in, int n_assets, int input_dim, int hidden,
                        const std::string& path) {
    ModelParams p;
    p.n_assets = n_assets;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.for_each_array([&](Eigen::MatrixXd& a) { a = read_matrix(in, path); });
    return p;
}

} // namespace

void save_checkpoint(const std::string& path, const ModelParams& params, const AdamState* adam,
                     std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_error(ErrorKind::Io, "cannot write checkpoint: " + path);
    write_raw(out, kCheckpointMagic, sizeof(kCheckpointMagic));
    const std::int32_t dims[3] = {params.n_assets, params.input_dim, params.hidden};
    write_raw(out, dims, sizeof(dims));
    write_raw(out, &seed, sizeof(seed));
    write_params(out, params);
    const std::uint8_t has_adam = adam ? 1 : 0;
    write_raw(out, &has_adam, sizeof(has_adam));
    if (adam) {
        write_raw(out, &adam->config, sizeof(adam->config));
        write_raw(out, &adam->step, sizeof(adam->step));
        write_params(out, adam->m);
        write_params(out, adam->v);
    }
    if (!out) throw_error(ErrorKind::Io, "failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(ErrorKind::Io, "cannot open checkpoint: " + path);
    char magic[8];
    read_raw(in, magic, sizeof(magic), path);
    if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw_error(ErrorKind::Parse, "not a model checkpoint: " + path);
    std::int32_t dims[3];
    read_raw(in, dims, sizeof(dims), path);
    Checkpoint ck;
    read_raw(in, &ck.seed, sizeof(ck.seed), path);
    ck.params = read_params(in, dims[0], dims[1], dims[2], path);
    std::uint8_t has_adam = 0;
    read_raw(in, &has_adam, sizeof(has_adam), path);
    if (has_adam) {
        AdamState s;
        read_raw(in, &s.config, sizeof(s.config), path);
        read_raw(in, &s.step, sizeof(s.step), path);
        s.m = read_params(in, dims[0], dims[1], dims[2], path);
        s.v = read_params(in, dims[0], dims[1], dims[2], path);
        ck.adam = std::move(s);
    }
    return ck;
}

} // namespace folio
