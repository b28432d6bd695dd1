// SPDX-License-Identifier: Apache-2.0
//
// The wavelet convolution layer. Each frame operator acts as a "head":
//
//   H' = sigma( [Phi k_0(Phi X) || Psi_1 k_1(Psi_1 X) || ... ] * W )
//
// where k_h is one affine kernel per head, shared across all rows/modes
// (matrix mode: d x d weight + bias; vector mode: per-feature diagonal).
// Reverse-mode gradients are hand-rolled and cover the kernels, the output
// mixing weight, the input signal, and - through the per-eigenvalue filter
// values and the tight-frame normalization - the bank coefficients a, b and
// the scales. A hybrid block pairs the layer with mean-aggregation message
// passing, per-branch skip + layer norm, and a feedforward tail.

#pragma once

#include "wavegc/wavelet_bank.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavegc {

enum class Activation { identity, relu, tanh_ };

inline Activation activation_from_string(const std::string& s) {
    if (s == "identity") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh_;
    throw std::invalid_argument("unknown activation: " + s);
}

inline std::string activation_to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh_: return "tanh";
    }
    return "identity";
}

inline Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::relu: return x.cwiseMax(0.0);
        case Activation::tanh_: return x.array().tanh().matrix();
    }
    return x;
}

/// Derivative evaluated at the pre-activation; relu uses subgradient 0 at 0.
inline Eigen::MatrixXd activate_grad(Activation a, const Eigen::MatrixXd& x) {
    switch (a) {
        case Activation::identity: return Eigen::MatrixXd::Ones(x.rows(), x.cols());
        case Activation::relu:
            return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        case Activation::tanh_: {
            Eigen::ArrayXXd t = x.array().tanh();
            return (1.0 - t.square()).matrix();
        }
    }
    return Eigen::MatrixXd::Ones(x.rows(), x.cols());
}

enum class KernelMode { matrix, vector };

inline KernelMode kernel_mode_from_string(const std::string& s) {
    if (s == "matrix") return KernelMode::matrix;
    if (s == "vector") return KernelMode::vector;
    throw std::invalid_argument("unknown kernel mode: " + s);
}

inline std::string kernel_mode_to_string(KernelMode m) {
    return m == KernelMode::matrix ? "matrix" : "vector";
}

struct LayerParams {
    KernelMode kernel_mode = KernelMode::matrix;
    Activation activation = Activation::relu;
    // matrix mode: d x d per head; vector mode: d x 1 per-feature diagonal
    std::vector<Eigen::MatrixXd> head_kernels;
    std::vector<Eigen::VectorXd> head_biases;
    Eigen::MatrixXd out_weight;  // (J+1)d x d

    int num_heads() const { return static_cast<int>(head_kernels.size()); }
    int dim() const { return head_kernels.empty() ? 0 : static_cast<int>(head_kernels[0].rows()); }
};

/// Identity-configured parameters: k_h = I, bias 0, W = stack of identities.
/// With a tight bank and identity activation the layer reproduces its input.
inline LayerParams identity_layer_params(int heads, int d,
                                         Activation act = Activation::identity) {
    LayerParams p;
    p.kernel_mode = KernelMode::matrix;
    p.activation = act;
    p.head_kernels.assign(static_cast<std::size_t>(heads), Eigen::MatrixXd::Identity(d, d));
    p.head_biases.assign(static_cast<std::size_t>(heads), Eigen::VectorXd::Zero(d));
    p.out_weight.resize(static_cast<Eigen::Index>(heads) * d, d);
    for (int h = 0; h < heads; ++h)
        p.out_weight.middleRows(static_cast<Eigen::Index>(h) * d, d) =
            Eigen::MatrixXd::Identity(d, d);
    return p;
}

inline void validate_layer(const LayerParams& p, const FrameOperators& ops,
                           const Eigen::MatrixXd& x) {
    const int d = static_cast<int>(x.cols());
    if (p.num_heads() != ops.num_heads())
        throw std::invalid_argument("layer: head count != bank head count");
    if (x.rows() != ops.n()) throw std::invalid_argument("layer: signal rows != node count");
    for (int h = 0; h < p.num_heads(); ++h) {
        const auto& k = p.head_kernels[static_cast<std::size_t>(h)];
        if (p.kernel_mode == KernelMode::matrix) {
            if (k.rows() != d || k.cols() != d)
                throw std::invalid_argument("layer: kernel shape mismatch");
        } else {
            if (k.rows() != d || k.cols() != 1)
                throw std::invalid_argument("layer: vector kernel shape mismatch");
        }
        if (p.head_biases[static_cast<std::size_t>(h)].size() != d)
            throw std::invalid_argument("layer: bias size mismatch");
    }
    if (p.out_weight.rows() != static_cast<Eigen::Index>(p.num_heads()) * d ||
        p.out_weight.cols() != d)
        throw std::invalid_argument("layer: out_weight shape mismatch");
}

/// Per-head kernel, applied row-wise (mode-independent by construction).
inline Eigen::MatrixXd apply_head_kernel(const LayerParams& p, int h, const Eigen::MatrixXd& y) {
    const auto& k = p.head_kernels[static_cast<std::size_t>(h)];
    const auto& bias = p.head_biases[static_cast<std::size_t>(h)];
    Eigen::MatrixXd z;
    if (p.kernel_mode == KernelMode::matrix)
        z = y * k;
    else
        z = y * k.col(0).asDiagonal();
    z.rowwise() += bias.transpose();
    return z;
}

inline Eigen::MatrixXd wavegc_layer(const LayerParams& p, const FrameOperators& ops,
                                    const Eigen::MatrixXd& x) {
    validate_layer(p, ops, x);
    if (!x.allFinite()) throw std::invalid_argument("layer: non-finite input");
    const int n = ops.n();
    const int d = static_cast<int>(x.cols());
    Eigen::MatrixXd concat(n, static_cast<Eigen::Index>(p.num_heads()) * d);
    for (int h = 0; h < p.num_heads(); ++h) {
        const Eigen::MatrixXd& op = ops.head(h);
        Eigen::MatrixXd y = op * x;
        concat.middleCols(static_cast<Eigen::Index>(h) * d, d) = op * apply_head_kernel(p, h, y);
    }
    return activate(p.activation, concat * p.out_weight);
}

// ---------------------------------------------------------------------------
// Reverse-mode gradients
// ---------------------------------------------------------------------------

struct LayerGrads {
    std::vector<Eigen::MatrixXd> d_kernels;
    std::vector<Eigen::VectorXd> d_biases;
    Eigen::MatrixXd d_out_weight;
    Eigen::MatrixXd d_x;
    std::vector<Eigen::VectorXd> d_filters;  // per head, per eigenvalue
    // chain through the bank, filled by layer_gradients
    Eigen::VectorXd d_a, d_b, d_scales;
};

/// Pulls gradients w.r.t. per-eigenvalue filter values back onto the bank
/// coefficients and scales, through the tight normalization when active.
/// d_filters[0] pairs with h_vals, d_filters[1+j] with g_vals[j].
inline void bank_coefficient_gradients(const WaveletBank& bank, const Spectrum& spec,
                                       const std::vector<Eigen::VectorXd>& d_filters,
                                       Eigen::VectorXd& d_a, Eigen::VectorXd& d_b,
                                       Eigen::VectorXd& d_scales) {
    const int n = spec.n();
    const int rho = bank.rho();
    const int j_count = bank.num_scales();
    d_a = Eigen::VectorXd::Zero(rho);
    d_b = Eigen::VectorXd::Zero(rho);
    d_scales = Eigen::VectorXd::Zero(j_count);

    Eigen::VectorXd df(j_count + 1), dr(j_count + 1), f(j_count + 1);
    for (int i = 0; i < n; ++i) {
        df(0) = d_filters[0](i);
        for (int j = 0; j < j_count; ++j) df(j + 1) = d_filters[static_cast<std::size_t>(j + 1)](i);
        if (bank.tight) {
            const double v = bank.v_norms(i);
            if (v < kDegenerateTol) continue;  // filters pinned at zero
            f(0) = bank.h_vals(i);
            for (int j = 0; j < j_count; ++j) f(j + 1) = bank.g_vals[static_cast<std::size_t>(j)](i);
            // d(r/v)/dr = (I - f f^T)/v
            dr = (df - f * f.dot(df)) / v;
        } else {
            dr = df;
        }
        const double lam = spec.eigenvalues(i);
        for (int k = 1; k <= rho; ++k)
            d_b(k - 1) += dr(0) * shifted_term(term_order(Parity::odd, k), lam);
        for (int j = 0; j < j_count; ++j) {
            const double s = bank.scales[static_cast<std::size_t>(j)];
            const double x = s * lam;
            if (x > 2.0) continue;  // truncated: no dependence on a or s here
            double dgds = 0.0;
            for (int k = 1; k <= rho; ++k) {
                const int order = term_order(Parity::even, k);
                d_a(k - 1) += dr(j + 1) * shifted_term(order, x);
                dgds += bank.a[static_cast<std::size_t>(k - 1)] * shifted_term_derivative(order, x);
            }
            d_scales(j) += dr(j + 1) * lam * dgds;
        }
    }
}

/// Gradient of <upstream, layer(x)> w.r.t. all layer parameters, the input,
/// the per-eigenvalue filter values, and the bank's (a, b, scales).
inline LayerGrads layer_gradients(const LayerParams& p, const FrameOperators& ops,
                                  const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream) {
    validate_layer(p, ops, x);
    if (!x.allFinite() || !upstream.allFinite())
        throw std::invalid_argument("layer_gradients: non-finite input");
    const int n = ops.n();
    const int d = static_cast<int>(x.cols());
    const int heads = p.num_heads();
    const Eigen::MatrixXd& u = ops.spec.eigenvectors;

    // forward pass, caching per-head intermediates
    std::vector<Eigen::MatrixXd> ys(static_cast<std::size_t>(heads));
    std::vector<Eigen::MatrixXd> zs(static_cast<std::size_t>(heads));
    Eigen::MatrixXd concat(n, static_cast<Eigen::Index>(heads) * d);
    for (int h = 0; h < heads; ++h) {
        const Eigen::MatrixXd& op = ops.head(h);
        ys[static_cast<std::size_t>(h)] = op * x;
        zs[static_cast<std::size_t>(h)] = apply_head_kernel(p, h, ys[static_cast<std::size_t>(h)]);
        concat.middleCols(static_cast<Eigen::Index>(h) * d, d) = op * zs[static_cast<std::size_t>(h)];
    }
    Eigen::MatrixXd pre = concat * p.out_weight;

    LayerGrads g;
    Eigen::MatrixXd d_pre = upstream.cwiseProduct(activate_grad(p.activation, pre));
    g.d_out_weight = concat.transpose() * d_pre;
    Eigen::MatrixXd d_concat = d_pre * p.out_weight.transpose();

    g.d_kernels.resize(static_cast<std::size_t>(heads));
    g.d_biases.resize(static_cast<std::size_t>(heads));
    g.d_filters.assign(static_cast<std::size_t>(heads), Eigen::VectorXd::Zero(n));
    g.d_x = Eigen::MatrixXd::Zero(n, d);

    for (int h = 0; h < heads; ++h) {
        const Eigen::MatrixXd& op = ops.head(h);
        const Eigen::MatrixXd& y = ys[static_cast<std::size_t>(h)];
        Eigen::MatrixXd d_c = d_concat.middleCols(static_cast<Eigen::Index>(h) * d, d);
        Eigen::MatrixXd d_z = op.transpose() * d_c;
        const auto& k = p.head_kernels[static_cast<std::size_t>(h)];
        Eigen::MatrixXd d_y;
        if (p.kernel_mode == KernelMode::matrix) {
            g.d_kernels[static_cast<std::size_t>(h)] = y.transpose() * d_z;
            d_y = d_z * k.transpose();
        } else {
            g.d_kernels[static_cast<std::size_t>(h)] =
                (y.cwiseProduct(d_z)).colwise().sum().transpose();
            d_y = d_z * k.col(0).asDiagonal();
        }
        g.d_biases[static_cast<std::size_t>(h)] = d_z.colwise().sum().transpose();
        g.d_x += op.transpose() * d_y;
        // operator appears twice: concat_h = op * z_h and y_h = op * x
        Eigen::MatrixXd d_op = d_c * zs[static_cast<std::size_t>(h)].transpose() + d_y * x.transpose();
        // op = U diag(f) U^T, so df_i = u_i^T d_op u_i
        g.d_filters[static_cast<std::size_t>(h)] = ((u.transpose() * d_op) * u).diagonal();
    }

    bank_coefficient_gradients(ops.bank, ops.spec, g.d_filters, g.d_a, g.d_b, g.d_scales);
    return g;
}

/// Chain rule for the scale head s_j = sigmoid(l_j) * s_bar_j.
inline Eigen::VectorXd scale_logit_gradients(const Eigen::VectorXd& d_scales,
                                             const Eigen::VectorXd& logits,
                                             const Eigen::VectorXd& s_bar) {
    if (d_scales.size() != logits.size() || logits.size() != s_bar.size())
        throw std::invalid_argument("scale_logit_gradients: size mismatch");
    Eigen::VectorXd out(logits.size());
    for (Eigen::Index j = 0; j < logits.size(); ++j) {
        double sig = 1.0 / (1.0 + std::exp(-logits(j)));
        out(j) = d_scales(j) * s_bar(j) * sig * (1.0 - sig);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hybrid block: MPNN branch + wavelet branch, per-branch skip + norm,
// feedforward tail with skip + norm
// ---------------------------------------------------------------------------

inline constexpr double kLayerNormEps = 1e-5;

/// Row-wise layer norm with learnable gain/offset.
inline Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& gain,
                                  const Eigen::VectorXd& offset) {
    const double d = static_cast<double>(x.cols());
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double mu = x.row(i).mean();
        double var = (x.row(i).array() - mu).square().sum() / d;
        out.row(i) = (((x.row(i).array() - mu) / std::sqrt(var + kLayerNormEps)) *
                          gain.transpose().array() +
                      offset.transpose().array())
                         .matrix();
    }
    return out;
}

struct HybridParams {
    LayerParams wave;
    Eigen::MatrixXd mpnn_weight;  // d x d
    Eigen::MatrixXd ffn_w1;       // d x d_ff
    Eigen::VectorXd ffn_b1;
    Eigen::MatrixXd ffn_w2;  // d_ff x d
    Eigen::VectorXd ffn_b2;
    Eigen::VectorXd ln_gain[3], ln_offset[3];  // mpnn branch, wave branch, tail
    bool use_mpnn = true;
    bool use_norm = true;
};

inline HybridParams make_hybrid_params(const LayerParams& wave, int d, int d_ff) {
    HybridParams h;
    h.wave = wave;
    h.mpnn_weight = Eigen::MatrixXd::Zero(d, d);
    h.ffn_w1 = Eigen::MatrixXd::Zero(d, d_ff);
    h.ffn_b1 = Eigen::VectorXd::Zero(d_ff);
    h.ffn_w2 = Eigen::MatrixXd::Zero(d_ff, d);
    h.ffn_b2 = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < 3; ++i) {
        h.ln_gain[i] = Eigen::VectorXd::Ones(d);
        h.ln_offset[i] = Eigen::VectorXd::Zero(d);
    }
    return h;
}

struct HybridCache {
    Eigen::MatrixXd x, mpnn_pre, mpnn_out, wave_out, b1, b2, s, ffn_hidden_pre, ffn_out, tail_pre;
    Eigen::MatrixXd amean;  // D^{-1} A of the graph
};

/// Forward pass. Branches: B1 = LN(X + Amean X Wm), B2 = LN(X + wave(X)).
/// The two normalized streams are averaged (so the zero-weight configuration
/// passes X through unchanged), then S + FFN(S) with a final norm.
inline Eigen::MatrixXd hybrid_block(const HybridParams& hp, const FrameOperators& ops,
                                    const Graph& g, const Eigen::MatrixXd& x,
                                    HybridCache* cache = nullptr) {
    const auto ln = [&](const Eigen::MatrixXd& m, int i) {
        return hp.use_norm ? layer_norm(m, hp.ln_gain[i], hp.ln_offset[i]) : m;
    };
    HybridCache local;
    HybridCache& c = cache ? *cache : local;
    c.x = x;
    c.amean = mean_aggregation(g);
    c.wave_out = wavegc_layer(hp.wave, ops, x);
    c.b2 = ln(x + c.wave_out, 1);
    if (hp.use_mpnn) {
        c.mpnn_pre = c.amean * x;
        c.mpnn_out = c.mpnn_pre * hp.mpnn_weight;
        c.b1 = ln(x + c.mpnn_out, 0);
        c.s = 0.5 * (c.b1 + c.b2);
    } else {
        c.s = c.b2;
    }
    c.ffn_hidden_pre = c.s * hp.ffn_w1;
    c.ffn_hidden_pre.rowwise() += hp.ffn_b1.transpose();
    c.ffn_out = c.ffn_hidden_pre.cwiseMax(0.0) * hp.ffn_w2;
    c.ffn_out.rowwise() += hp.ffn_b2.transpose();
    c.tail_pre = c.s + c.ffn_out;
    return ln(c.tail_pre, 2);
}

struct HybridGrads {
    LayerGrads wave;
    Eigen::MatrixXd d_mpnn_weight;
    Eigen::MatrixXd d_ffn_w1, d_ffn_w2;
    Eigen::VectorXd d_ffn_b1, d_ffn_b2;
    Eigen::VectorXd d_ln_gain[3], d_ln_offset[3];
    Eigen::MatrixXd d_x;
};

/// Layer-norm backward for one row-normalized matrix.
inline Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& x, const Eigen::VectorXd& gain,
                                           const Eigen::MatrixXd& d_out, Eigen::VectorXd& d_gain,
                                           Eigen::VectorXd& d_offset) {
    const double d = static_cast<double>(x.cols());
    Eigen::MatrixXd d_x(x.rows(), x.cols());
    d_gain = Eigen::VectorXd::Zero(x.cols());
    d_offset = Eigen::VectorXd::Zero(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double mu = x.row(i).mean();
        double var = (x.row(i).array() - mu).square().sum() / d;
        double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
        Eigen::ArrayXd xhat = (x.row(i).transpose().array() - mu) * inv_std;
        Eigen::ArrayXd dy = d_out.row(i).transpose().array();
        d_gain += (dy * xhat).matrix();
        d_offset += dy.matrix();
        Eigen::ArrayXd dxhat = dy * gain.array();
        double m1 = dxhat.mean();
        double m2 = (dxhat * xhat).mean();
        d_x.row(i) = ((dxhat - m1 - xhat * m2) * inv_std).matrix().transpose();
    }
    return d_x;
}

/// Gradient of <upstream, hybrid_block(x)> w.r.t. every hybrid parameter,
/// the bank coefficients (through the wave branch), and the input.
inline HybridGrads hybrid_gradients(const HybridParams& hp, const FrameOperators& ops,
                                    const Graph& g, const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& upstream) {
    HybridCache c;
    hybrid_block(hp, ops, g, x, &c);
    HybridGrads out;

    Eigen::MatrixXd d_tail_pre;
    if (hp.use_norm)
        d_tail_pre = layer_norm_backward(c.tail_pre, hp.ln_gain[2], upstream, out.d_ln_gain[2],
                                         out.d_ln_offset[2]);
    else {
        d_tail_pre = upstream;
        out.d_ln_gain[2] = Eigen::VectorXd::Zero(x.cols());
        out.d_ln_offset[2] = Eigen::VectorXd::Zero(x.cols());
    }

    // tail: out_pre = s + relu(s W1 + b1) W2 + b2
    Eigen::MatrixXd d_ffn_out = d_tail_pre;
    Eigen::MatrixXd hidden = c.ffn_hidden_pre.cwiseMax(0.0);
    out.d_ffn_w2 = hidden.transpose() * d_ffn_out;
    out.d_ffn_b2 = d_ffn_out.colwise().sum().transpose();
    Eigen::MatrixXd d_hidden = (d_ffn_out * hp.ffn_w2.transpose())
                                   .cwiseProduct(c.ffn_hidden_pre.unaryExpr(
                                       [](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    out.d_ffn_w1 = c.s.transpose() * d_hidden;
    out.d_ffn_b1 = d_hidden.colwise().sum().transpose();
    Eigen::MatrixXd d_s = d_tail_pre + d_hidden * hp.ffn_w1.transpose();

    Eigen::MatrixXd d_b2 = hp.use_mpnn ? (0.5 * d_s).eval() : d_s;
    Eigen::MatrixXd d_x_total = Eigen::MatrixXd::Zero(x.rows(), x.cols());

    if (hp.use_mpnn) {
        Eigen::MatrixXd d_b1 = 0.5 * d_s;
        Eigen::MatrixXd d_skip1;
        if (hp.use_norm)
            d_skip1 = layer_norm_backward(c.x + c.mpnn_out, hp.ln_gain[0], d_b1, out.d_ln_gain[0],
                                          out.d_ln_offset[0]);
        else {
            d_skip1 = d_b1;
            out.d_ln_gain[0] = Eigen::VectorXd::Zero(x.cols());
            out.d_ln_offset[0] = Eigen::VectorXd::Zero(x.cols());
        }
        out.d_mpnn_weight = c.mpnn_pre.transpose() * d_skip1;
        d_x_total += d_skip1 + c.amean.transpose() * (d_skip1 * hp.mpnn_weight.transpose());
    } else {
        out.d_mpnn_weight = Eigen::MatrixXd::Zero(x.cols(), x.cols());
        out.d_ln_gain[0] = Eigen::VectorXd::Zero(x.cols());
        out.d_ln_offset[0] = Eigen::VectorXd::Zero(x.cols());
    }

    Eigen::MatrixXd d_skip2;
    if (hp.use_norm)
        d_skip2 = layer_norm_backward(c.x + c.wave_out, hp.ln_gain[1], d_b2, out.d_ln_gain[1],
                                      out.d_ln_offset[1]);
    else {
        d_skip2 = d_b2;
        out.d_ln_gain[1] = Eigen::VectorXd::Zero(x.cols());
        out.d_ln_offset[1] = Eigen::VectorXd::Zero(x.cols());
    }
    out.wave = layer_gradients(hp.wave, ops, x, d_skip2);
    d_x_total += d_skip2 + out.wave.d_x;
    out.d_x = d_x_total;
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> flat(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            flat[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);  // row-major
    return nlohmann::json(flat);
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                        Eigen::Index cols) {
    auto flat = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw std::runtime_error("checkpoint: flat array size mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index jj = 0; jj < cols; ++jj)
            m(i, jj) = flat[static_cast<std::size_t>(i * cols + jj)];
    return m;
}

inline nlohmann::json layer_params_to_json(const LayerParams& p,
                                           const Eigen::MatrixXd* mpnn_weight = nullptr) {
    nlohmann::json j;
    const int d = p.dim();
    j["d"] = d;
    j["J"] = p.num_heads() - 1;
    j["kernel_mode"] = kernel_mode_to_string(p.kernel_mode);
    j["activation"] = activation_to_string(p.activation);
    j["head_kernels"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (int h = 0; h < p.num_heads(); ++h) {
        j["head_kernels"].push_back(matrix_to_json(p.head_kernels[static_cast<std::size_t>(h)]));
        j["biases"].push_back(matrix_to_json(p.head_biases[static_cast<std::size_t>(h)]));
    }
    j["out_weight"] = matrix_to_json(p.out_weight);
    j["mpnn_weight"] = mpnn_weight ? matrix_to_json(*mpnn_weight)
                                   : matrix_to_json(Eigen::MatrixXd::Zero(d, d));
    return j;
}

inline LayerParams layer_params_from_json(const nlohmann::json& j,
                                          Eigen::MatrixXd* mpnn_weight = nullptr) {
    LayerParams p;
    const int d = j.at("d").get<int>();
    const int heads = j.at("J").get<int>() + 1;
    p.kernel_mode = kernel_mode_from_string(j.at("kernel_mode").get<std::string>());
    if (j.contains("activation"))
        p.activation = activation_from_string(j.at("activation").get<std::string>());
    const int kcols = p.kernel_mode == KernelMode::matrix ? d : 1;
    for (int h = 0; h < heads; ++h) {
        p.head_kernels.push_back(matrix_from_json(j.at("head_kernels").at(h), d, kcols));
        p.head_biases.push_back(matrix_from_json(j.at("biases").at(h), d, 1).col(0));
    }
    p.out_weight = matrix_from_json(j.at("out_weight"), static_cast<Eigen::Index>(heads) * d, d);
    if (mpnn_weight && j.contains("mpnn_weight"))
        *mpnn_weight = matrix_from_json(j.at("mpnn_weight"), d, d);
    return p;
}

}  // namespace wavegc
