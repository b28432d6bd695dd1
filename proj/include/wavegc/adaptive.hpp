// SPDX-License-Identifier: Apache-2.0
//
// Eigenvalue encoding and the heads that make the bank learnable.
//
// Each eigenvalue is lifted to [lambda || sin/cos features] with frequencies
// eps / 10000^{2m/dim}, passed through a one-layer residual set encoder, and
// reduced by a row mean into coefficient vectors a~, b~ and bounded scales
// s~_j = sigmoid(mean)_j * s_bar_j in (0, s_bar_j). A small full-batch
// gradient-descent loop trains the whole stack (input embed, encoder, heads,
// hybrid block, readout) on node classification; everything is deterministic
// given the config seed.

#pragma once

#include "wavegc/graph.hpp"
#include "wavegc/kernel_conv.hpp"
#include "wavegc/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavegc {

struct EigEncoding {
    double eps = 100.0;
    int dim = 0;          // sin/cos feature width (even)
    Eigen::MatrixXd z;    // n x (dim+1); column 0 is lambda itself
};

/// Raw encoding row: [lambda, sin(eps*lambda/10000^{0}), cos(...), ...].
inline EigEncoding eig_encode(const Eigen::VectorXd& lambdas, double eps, int dim) {
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("eig_encode: dim must be even, >= 2");
    EigEncoding e;
    e.eps = eps;
    e.dim = dim;
    e.z.resize(lambdas.size(), dim + 1);
    e.z.col(0) = lambdas;
    for (int m = 0; m < dim / 2; ++m) {
        double freq = eps / std::pow(10000.0, 2.0 * m / dim);
        for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
            e.z(i, 1 + 2 * m) = std::sin(freq * lambdas(i));
            e.z(i, 2 + 2 * m) = std::cos(freq * lambdas(i));
        }
    }
    return e;
}

/// One feedforward layer with a residual: Zhat = Z + tanh(Z We + be).
/// Stands in for the full set-attention encoder at desk scale.
struct SetEncoder {
    Eigen::MatrixXd w;  // (dim+1) x (dim+1)
    Eigen::VectorXd b;

    Eigen::MatrixXd encode(const Eigen::MatrixXd& z) const {
        Eigen::MatrixXd pre = z * w;
        pre.rowwise() += b.transpose();
        return z + pre.array().tanh().matrix();
    }
};

struct HeadParams {
    Eigen::MatrixXd w_a, w_b;  // dim' x rho
    Eigen::VectorXd b_a, b_b;  // rho
    Eigen::MatrixXd w_s;       // dim' x J
    Eigen::VectorXd b_s;       // J
    Eigen::VectorXd s_bar;     // J, strictly positive
};

struct AdaptedParams {
    Eigen::VectorXd a, b;       // rho each
    Eigen::VectorXd scale_logits;  // J (pre-sigmoid row means)
    Eigen::VectorXd scales;     // J, in (0, s_bar_j)
};

/// Row-mean heads: a~ = mean(Zhat Wa + ba), same for b~; scales squashed
/// through a sigmoid and capped by s_bar.
inline AdaptedParams adapt_params(const Eigen::MatrixXd& zhat, const HeadParams& p) {
    if (p.s_bar.minCoeff() <= 0.0) throw std::invalid_argument("adapt_params: s_bar must be positive");
    if (zhat.cols() != p.w_a.rows() || zhat.cols() != p.w_b.rows() || zhat.cols() != p.w_s.rows())
        throw std::invalid_argument("adapt_params: encoder width mismatch");
    AdaptedParams out;
    const double n = static_cast<double>(zhat.rows());
    out.a = ((zhat * p.w_a).colwise().sum() / n).transpose() + p.b_a;
    out.b = ((zhat * p.w_b).colwise().sum() / n).transpose() + p.b_b;
    out.scale_logits = ((zhat * p.w_s).colwise().sum() / n).transpose() + p.b_s;
    out.scales.resize(out.scale_logits.size());
    for (Eigen::Index j = 0; j < out.scales.size(); ++j)
        out.scales(j) = p.s_bar(j) / (1.0 + std::exp(-out.scale_logits(j)));
    return out;
}

struct HeadGrads {
    Eigen::MatrixXd d_w_a, d_w_b, d_w_s;
    Eigen::VectorXd d_b_a, d_b_b, d_b_s;
    Eigen::MatrixXd d_zhat;
};

/// Backward through adapt_params given gradients for a~, b~ and the scale
/// logits (the sigmoid/s_bar chain is scale_logit_gradients' job).
inline HeadGrads adapt_params_backward(const Eigen::MatrixXd& zhat, const HeadParams& p,
                                       const Eigen::VectorXd& d_a, const Eigen::VectorXd& d_b,
                                       const Eigen::VectorXd& d_logits) {
    HeadGrads g;
    const double n = static_cast<double>(zhat.rows());
    Eigen::VectorXd mean_row = zhat.colwise().sum().transpose() / n;
    g.d_w_a = mean_row * d_a.transpose();
    g.d_w_b = mean_row * d_b.transpose();
    g.d_w_s = mean_row * d_logits.transpose();
    g.d_b_a = d_a;
    g.d_b_b = d_b;
    g.d_b_s = d_logits;
    Eigen::RowVectorXd mix = (p.w_a * d_a + p.w_b * d_b + p.w_s * d_logits).transpose() / n;
    g.d_zhat = Eigen::VectorXd::Ones(zhat.rows()) * mix;
    return g;
}

// ---------------------------------------------------------------------------
// Desk-scale training
// ---------------------------------------------------------------------------

struct TrainConfig {
    std::uint64_t seed = 7;
    double lr = 0.1;
    int epochs = 300;
    int rho = 3;
    int num_scales = 2;                 // J
    std::vector<double> s_bar{2.0, 5.0};
    double eps = 100.0;
    int enc_dim = 16;                   // eigenvalue encoding width (even)
    bool tight = true;
    KernelMode kernel_mode = KernelMode::matrix;
    std::optional<double> threshold;
    Activation wave_activation = Activation::tanh_;
    int hidden = 16;
    int ffn_hidden = 32;
    int lappe_k = 2;   // Laplacian positional-encoding columns in the features
    bool use_mpnn = true;
    bool use_norm = true;
    double train_frac = 0.5, val_frac = 0.25;
};

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
    if (j.contains("rho")) c.rho = j.at("rho").get<int>();
    if (j.contains("J")) c.num_scales = j.at("J").get<int>();
    if (j.contains("s_bar")) c.s_bar = j.at("s_bar").get<std::vector<double>>();
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("dim")) c.enc_dim = j.at("dim").get<int>();
    if (j.contains("tight")) c.tight = j.at("tight").get<bool>();
    if (j.contains("kernel_mode"))
        c.kernel_mode = kernel_mode_from_string(j.at("kernel_mode").get<std::string>());
    if (j.contains("threshold") && !j.at("threshold").is_null())
        c.threshold = j.at("threshold").get<double>();
    if (j.contains("activation"))
        c.wave_activation = activation_from_string(j.at("activation").get<std::string>());
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<int>();
    if (j.contains("ffn_hidden")) c.ffn_hidden = j.at("ffn_hidden").get<int>();
    if (j.contains("lappe_k")) c.lappe_k = j.at("lappe_k").get<int>();
    if (j.contains("use_mpnn")) c.use_mpnn = j.at("use_mpnn").get<bool>();
    if (j.contains("use_norm")) c.use_norm = j.at("use_norm").get<bool>();
    if (static_cast<int>(c.s_bar.size()) != c.num_scales)
        throw std::runtime_error("train config: s_bar length != J");
    return c;
}

struct Dataset {
    Graph graph;
    Eigen::MatrixXd features;  // n x d0
    std::vector<int> labels;   // n, in 0..C-1
    std::vector<int> train_idx, val_idx, test_idx;
};

/// Structural node features: constant, scaled degree, and the first k
/// nontrivial Laplacian eigenvectors with a deterministic sign convention.
inline Eigen::MatrixXd structural_features(const Graph& g, const Spectrum& spec, int lappe_k) {
    const int n = g.n;
    if (lappe_k < 0 || lappe_k >= n) throw std::invalid_argument("structural_features: bad lappe_k");
    Eigen::MatrixXd x(n, 2 + lappe_k);
    double dmax = static_cast<double>(g.max_degree());
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = static_cast<double>(g.degrees[static_cast<std::size_t>(i)]) / dmax;
    }
    for (int k = 0; k < lappe_k; ++k) {
        Eigen::VectorXd u = spec.eigenvectors.col(k + 1);
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            if (std::abs(u(i)) > 1e-12) {
                if (u(i) < 0.0) u = -u;
                break;
            }
        }
        x.col(2 + k) = u;
    }
    return x;
}

/// Deterministic stratified split so every class appears in each split in
/// its global proportion.
inline void stratified_split(const std::vector<int>& labels, double train_frac, double val_frac,
                             std::mt19937_64& rng, std::vector<int>& train_idx,
                             std::vector<int>& val_idx, std::vector<int>& test_idx) {
    train_idx.clear();
    val_idx.clear();
    test_idx.clear();
    int num_classes = 1;
    for (int y : labels) num_classes = std::max(num_classes, y + 1);
    for (int c = 0; c < num_classes; ++c) {
        std::vector<int> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) members.push_back(static_cast<int>(i));
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t n_train = static_cast<std::size_t>(train_frac * members.size());
        std::size_t n_val = static_cast<std::size_t>(val_frac * members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i < n_train)
                train_idx.push_back(members[i]);
            else if (i < n_train + n_val)
                val_idx.push_back(members[i]);
            else
                test_idx.push_back(members[i]);
        }
    }
}

/// The sbm2 fixture: two planted blocks, stratified split, all seeded.
inline Dataset make_sbm2_dataset(int n, double p, double q, std::uint64_t seed,
                                 const TrainConfig& cfg) {
    Dataset d;
    d.graph = generate_graph(GraphKind::sbm2, GraphParams{n, p, q}, seed);
    if (!d.graph.connected())
        throw std::runtime_error("sbm2 dataset: generated graph is disconnected; change seed");
    Spectrum spec = spectrum(d.graph);
    d.features = structural_features(d.graph, spec, cfg.lappe_k);
    d.labels = sbm2_labels(n);
    std::mt19937_64 rng(seed);
    stratified_split(d.labels, cfg.train_frac, cfg.val_frac, rng, d.train_idx, d.val_idx,
                     d.test_idx);
    return d;
}

struct MetricsRow {
    int epoch = 0;
    double loss = 0.0, train_acc = 0.0, val_acc = 0.0, test_acc = 0.0;
};

struct TrainResult {
    std::vector<MetricsRow> metrics;
    double final_train_acc = 0.0, final_val_acc = 0.0, final_test_acc = 0.0;
    nlohmann::json checkpoint;
};

namespace detail {

struct ModelParams {
    Eigen::MatrixXd w_in;
    Eigen::VectorXd b_in;
    SetEncoder encoder;
    HeadParams heads;
    HybridParams hybrid;
    Eigen::MatrixXd w_read;
    Eigen::VectorXd b_read;
};

inline Eigen::MatrixXd uniform_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                                      double scale) {
    std::uniform_real_distribution<double> unif(-scale, scale);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = unif(rng);
    return m;
}

inline ModelParams init_model(const TrainConfig& cfg, int d0, int num_classes,
                              std::mt19937_64& rng) {
    const int d = cfg.hidden;
    const int enc_w = cfg.enc_dim + 1;
    const double sc = 0.3;
    ModelParams m;
    m.w_in = uniform_matrix(rng, d0, d, sc);
    m.b_in = Eigen::VectorXd::Zero(d);
    m.encoder.w = uniform_matrix(rng, enc_w, enc_w, sc);
    m.encoder.b = Eigen::VectorXd::Zero(enc_w);
    m.heads.w_a = uniform_matrix(rng, enc_w, cfg.rho, sc);
    m.heads.w_b = uniform_matrix(rng, enc_w, cfg.rho, sc);
    m.heads.w_s = uniform_matrix(rng, enc_w, cfg.num_scales, sc);
    m.heads.b_a = Eigen::VectorXd::Constant(cfg.rho, 0.3);
    m.heads.b_b = Eigen::VectorXd::Constant(cfg.rho, 0.3);
    m.heads.b_s = Eigen::VectorXd::Zero(cfg.num_scales);
    m.heads.s_bar = Eigen::Map<const Eigen::VectorXd>(cfg.s_bar.data(),
                                                      static_cast<Eigen::Index>(cfg.s_bar.size()));
    LayerParams wave;
    wave.kernel_mode = cfg.kernel_mode;
    wave.activation = cfg.wave_activation;
    const int kcols = cfg.kernel_mode == KernelMode::matrix ? d : 1;
    for (int h = 0; h < cfg.num_scales + 1; ++h) {
        wave.head_kernels.push_back(uniform_matrix(rng, d, kcols, sc));
        wave.head_biases.push_back(Eigen::VectorXd::Zero(d));
    }
    wave.out_weight = uniform_matrix(rng, static_cast<Eigen::Index>(cfg.num_scales + 1) * d, d, sc);
    m.hybrid = make_hybrid_params(wave, d, cfg.ffn_hidden);
    m.hybrid.mpnn_weight = uniform_matrix(rng, d, d, sc);
    m.hybrid.ffn_w1 = uniform_matrix(rng, d, cfg.ffn_hidden, sc);
    m.hybrid.ffn_w2 = uniform_matrix(rng, cfg.ffn_hidden, d, sc);
    m.hybrid.use_mpnn = cfg.use_mpnn;
    m.hybrid.use_norm = cfg.use_norm;
    m.w_read = uniform_matrix(rng, d, num_classes, sc);
    m.b_read = Eigen::VectorXd::Zero(num_classes);
    return m;
}

inline double accuracy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                       const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    int hit = 0;
    for (int i : idx) {
        Eigen::Index arg = 0;
        logits.row(i).maxCoeff(&arg);
        if (static_cast<int>(arg) == labels[static_cast<std::size_t>(i)]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(idx.size());
}

}  // namespace detail

/// Full-batch gradient descent on cross-entropy through the hybrid block and
/// the adaptive heads. Deterministic for a fixed config.
inline TrainResult train_toy(const Dataset& data, const TrainConfig& cfg) {
    if (data.train_idx.empty() || data.val_idx.empty() || data.test_idx.empty())
        throw std::invalid_argument("train_toy: empty split");
    if (!data.graph.connected())
        throw std::invalid_argument("train_toy: fixture graph must be connected");
    const int n = data.graph.n;
    int num_classes = 1;
    for (int y : data.labels) num_classes = std::max(num_classes, y + 1);
    num_classes = std::max(num_classes, 2);

    Spectrum spec = spectrum(data.graph);
    EigEncoding enc = eig_encode(spec.eigenvalues, cfg.eps, cfg.enc_dim);

    std::mt19937_64 rng(cfg.seed);
    detail::ModelParams m = detail::init_model(cfg, static_cast<int>(data.features.cols()),
                                               num_classes, rng);

    TrainResult result;
    Eigen::MatrixXd logits;  // n x C, refreshed per epoch
    for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
        // forward
        Eigen::MatrixXd zhat = m.encoder.encode(enc.z);
        AdaptedParams ap = adapt_params(zhat, m.heads);
        WaveletBank bank = build_bank(std::vector<double>(ap.a.data(), ap.a.data() + ap.a.size()),
                                      std::vector<double>(ap.b.data(), ap.b.data() + ap.b.size()),
                                      std::vector<double>(ap.scales.data(),
                                                          ap.scales.data() + ap.scales.size()),
                                      spec, cfg.tight);
        FrameOperators ops = frame_operators(bank, spec, cfg.threshold);
        Eigen::MatrixXd h0 = data.features * m.w_in;
        h0.rowwise() += m.b_in.transpose();
        Eigen::MatrixXd out = hybrid_block(m.hybrid, ops, data.graph, h0);
        logits = out * m.w_read;
        logits.rowwise() += m.b_read.transpose();

        // softmax cross-entropy over the train mask
        double loss = 0.0;
        Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(n, num_classes);
        const double inv_train = 1.0 / static_cast<double>(data.train_idx.size());
        for (int i : data.train_idx) {
            Eigen::RowVectorXd row = logits.row(i);
            double mx = row.maxCoeff();
            Eigen::RowVectorXd ex = (row.array() - mx).exp();
            double z = ex.sum();
            int y = data.labels[static_cast<std::size_t>(i)];
            loss += (std::log(z) - (row(y) - mx)) * inv_train;
            d_logits.row(i) = (ex / z) * inv_train;
            d_logits(i, y) -= inv_train;
        }
        if (!std::isfinite(loss))
            throw std::runtime_error("train_toy: non-finite loss at epoch " +
                                     std::to_string(epoch));

        MetricsRow row;
        row.epoch = epoch;
        row.loss = loss;
        row.train_acc = detail::accuracy(logits, data.labels, data.train_idx);
        row.val_acc = detail::accuracy(logits, data.labels, data.val_idx);
        row.test_acc = detail::accuracy(logits, data.labels, data.test_idx);
        result.metrics.push_back(row);
        if (epoch == cfg.epochs) break;

        // backward
        Eigen::MatrixXd d_out = d_logits * m.w_read.transpose();
        Eigen::MatrixXd d_w_read = out.transpose() * d_logits;
        Eigen::VectorXd d_b_read = d_logits.colwise().sum().transpose();
        HybridGrads hg = hybrid_gradients(m.hybrid, ops, data.graph, h0, d_out);
        Eigen::MatrixXd d_w_in = data.features.transpose() * hg.d_x;
        Eigen::VectorXd d_b_in = hg.d_x.colwise().sum().transpose();
        Eigen::VectorXd d_logits_s =
            scale_logit_gradients(hg.wave.d_scales, ap.scale_logits, m.heads.s_bar);
        HeadGrads hd = adapt_params_backward(zhat, m.heads, hg.wave.d_a, hg.wave.d_b, d_logits_s);
        // encoder backward: zhat = z + tanh(z We + be)
        Eigen::MatrixXd pre = enc.z * m.encoder.w;
        pre.rowwise() += m.encoder.b.transpose();
        Eigen::MatrixXd d_pre =
            hd.d_zhat.cwiseProduct((1.0 - pre.array().tanh().square()).matrix());
        Eigen::MatrixXd d_w_e = enc.z.transpose() * d_pre;
        Eigen::VectorXd d_b_e = d_pre.colwise().sum().transpose();

        // plain gradient descent
        const double lr = cfg.lr;
        m.w_read -= lr * d_w_read;
        m.b_read -= lr * d_b_read;
        m.w_in -= lr * d_w_in;
        m.b_in -= lr * d_b_in;
        m.encoder.w -= lr * d_w_e;
        m.encoder.b -= lr * d_b_e;
        m.heads.w_a -= lr * hd.d_w_a;
        m.heads.w_b -= lr * hd.d_w_b;
        m.heads.w_s -= lr * hd.d_w_s;
        m.heads.b_a -= lr * hd.d_b_a;
        m.heads.b_b -= lr * hd.d_b_b;
        m.heads.b_s -= lr * hd.d_b_s;
        m.hybrid.mpnn_weight -= lr * hg.d_mpnn_weight;
        m.hybrid.ffn_w1 -= lr * hg.d_ffn_w1;
        m.hybrid.ffn_b1 -= lr * hg.d_ffn_b1;
        m.hybrid.ffn_w2 -= lr * hg.d_ffn_w2;
        m.hybrid.ffn_b2 -= lr * hg.d_ffn_b2;
        for (int i = 0; i < 3; ++i) {
            m.hybrid.ln_gain[i] -= lr * hg.d_ln_gain[i];
            m.hybrid.ln_offset[i] -= lr * hg.d_ln_offset[i];
        }
        for (int h = 0; h < m.hybrid.wave.num_heads(); ++h) {
            m.hybrid.wave.head_kernels[static_cast<std::size_t>(h)] -=
                lr * hg.wave.d_kernels[static_cast<std::size_t>(h)];
            m.hybrid.wave.head_biases[static_cast<std::size_t>(h)] -=
                lr * hg.wave.d_biases[static_cast<std::size_t>(h)];
        }
        m.hybrid.wave.out_weight -= lr * hg.wave.d_out_weight;
    }

    const MetricsRow& last = result.metrics.back();
    result.final_train_acc = last.train_acc;
    result.final_val_acc = last.val_acc;
    result.final_test_acc = last.test_acc;

    nlohmann::json ck = layer_params_to_json(m.hybrid.wave, &m.hybrid.mpnn_weight);
    ck["ffn"] = {{"w1", matrix_to_json(m.hybrid.ffn_w1)}, {"b1", matrix_to_json(m.hybrid.ffn_b1)},
                 {"w2", matrix_to_json(m.hybrid.ffn_w2)}, {"b2", matrix_to_json(m.hybrid.ffn_b2)}};
    ck["input"] = {{"w", matrix_to_json(m.w_in)}, {"b", matrix_to_json(m.b_in)}};
    ck["readout"] = {{"w", matrix_to_json(m.w_read)}, {"b", matrix_to_json(m.b_read)}};
    ck["encoder"] = {{"w", matrix_to_json(m.encoder.w)}, {"b", matrix_to_json(m.encoder.b)}};
    ck["heads"] = {{"w_a", matrix_to_json(m.heads.w_a)}, {"b_a", matrix_to_json(m.heads.b_a)},
                   {"w_b", matrix_to_json(m.heads.w_b)}, {"b_b", matrix_to_json(m.heads.b_b)},
                   {"w_s", matrix_to_json(m.heads.w_s)}, {"b_s", matrix_to_json(m.heads.b_s)},
                   {"s_bar", matrix_to_json(m.heads.s_bar)}};
    result.checkpoint = ck;
    return result;
}

inline std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
    std::string out = "epoch,loss,train_acc,val_acc,test_acc\n";
    for (const auto& r : rows)
        out += std::to_string(r.epoch) + "," + fmt12(r.loss) + "," + fmt12(r.train_acc) + "," +
               fmt12(r.val_acc) + "," + fmt12(r.test_acc) + "\n";
    return out;
}

}  // namespace wavegc
