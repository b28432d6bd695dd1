// SPDX-License-Identifier: Apache-2.0

#include "wavegc/kernel_conv.hpp"
#include "helpers.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace wavegc;
using Catch::Approx;

namespace {

// Bank whose tight normalization is safely bounded away from zero: b_1 > 0
// keeps h positive below lambda = 2 and the odd-cycle graphs keep the top
// eigenvalue strictly below 2, so no degenerate modes appear.
struct Instance {
    Graph graph;
    Spectrum spec;
    WaveletBank bank;
    FrameOperators ops;
    std::vector<double> a, b, scales;
};

Instance make_instance(std::mt19937_64& rng, int n, int j_count, bool tight,
                       double scale_max = 1.5) {
    Instance inst;
    inst.graph = testutil::random_connected_graph(rng, n, 0.4, /*make_odd_cycle=*/true);
    inst.spec = spectrum(inst.graph);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    // redraw until every s*lambda_i is at least 1e-3 from the truncation cut
    // and the normalization norms are well-conditioned: finite-difference
    // checks need smoothness, and a near-zero v_i ruins both
    while (true) {
        inst.a = {unif(rng), unif(rng)};
        inst.b = {0.6 + 0.4 * std::abs(unif(rng)), unif(rng) * 0.3};
        inst.scales.clear();
        bool ok = true;
        for (int j = 0; j < j_count; ++j) {
            double s = 0.3 + scale_max * (unif(rng) + 0.5);
            for (int i = 0; i < inst.graph.n; ++i)
                if (std::abs(s * inst.spec.eigenvalues(i) - 2.0) < 1e-3) ok = false;
            inst.scales.push_back(s);
        }
        if (!ok) continue;
        inst.bank = build_bank(inst.a, inst.b, inst.scales, inst.spec, tight);
        if (tight && inst.bank.v_norms.minCoeff() < 0.05) continue;
        break;
    }
    inst.ops = frame_operators(inst.bank, inst.spec);
    return inst;
}

LayerParams random_layer(std::mt19937_64& rng, int heads, int d, KernelMode mode,
                         Activation act) {
    LayerParams p;
    p.kernel_mode = mode;
    p.activation = act;
    const int kcols = mode == KernelMode::matrix ? d : 1;
    for (int h = 0; h < heads; ++h) {
        p.head_kernels.push_back(testutil::random_matrix(rng, d, kcols, 0.5));
        p.head_biases.push_back(testutil::random_matrix(rng, d, 1, 0.3).col(0));
    }
    p.out_weight = testutil::random_matrix(rng, static_cast<Eigen::Index>(heads) * d, d, 0.5);
    return p;
}

double layer_loss(const LayerParams& p, const FrameOperators& ops, const Eigen::MatrixXd& x,
                  const Eigen::MatrixXd& upstream) {
    return (upstream.cwiseProduct(wavegc_layer(p, ops, x))).sum();
}

}  // namespace

TEST_CASE("zero input and zero biases give zero output") {
    std::mt19937_64 rng(20);
    Instance inst = make_instance(rng, 7, 2, true);
    LayerParams p = random_layer(rng, 3, 4, KernelMode::matrix, Activation::relu);
    for (auto& b : p.head_biases) b.setZero();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(7, 4);
    CHECK(wavegc_layer(p, inst.ops, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("layer rejects shape and head-count mismatches") {
    std::mt19937_64 rng(32);
    Instance inst = make_instance(rng, 7, 2, true);  // 3 heads
    LayerParams p = random_layer(rng, 3, 4, KernelMode::matrix, Activation::relu);
    CHECK_THROWS_AS(wavegc_layer(p, inst.ops, Eigen::MatrixXd::Zero(6, 4)),
                    std::invalid_argument);
    LayerParams wrong_heads = random_layer(rng, 2, 4, KernelMode::matrix, Activation::relu);
    CHECK_THROWS_AS(wavegc_layer(wrong_heads, inst.ops, Eigen::MatrixXd::Zero(7, 4)),
                    std::invalid_argument);
    Eigen::MatrixXd bad(7, 4);
    bad.setZero();
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(wavegc_layer(p, inst.ops, bad), std::invalid_argument);
}

TEST_CASE("identity kernels over a tight bank reproduce the input") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        Instance inst = make_instance(rng, 5 + static_cast<int>(rng() % 12), 2, true);
        REQUIRE(inst.bank.degenerate_modes.empty());
        const int d = 3;
        LayerParams p = identity_layer_params(3, d);
        Eigen::MatrixXd x = testutil::random_matrix(rng, inst.graph.n, d);
        Eigen::MatrixXd y = wavegc_layer(p, inst.ops, x);
        CHECK((y - x).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("vector mode equals a diagonal matrix kernel exactly") {
    std::mt19937_64 rng(22);
    Instance inst = make_instance(rng, 8, 1, true);
    const int d = 4;
    LayerParams vec = random_layer(rng, 2, d, KernelMode::vector, Activation::tanh_);
    LayerParams mat = vec;
    mat.kernel_mode = KernelMode::matrix;
    for (int h = 0; h < 2; ++h) {
        Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(d, d);
        diag.diagonal() = vec.head_kernels[static_cast<std::size_t>(h)].col(0);
        mat.head_kernels[static_cast<std::size_t>(h)] = diag;
    }
    Eigen::MatrixXd x = testutil::random_matrix(rng, 8, d);
    Eigen::MatrixXd yv = wavegc_layer(vec, inst.ops, x);
    Eigen::MatrixXd ym = wavegc_layer(mat, inst.ops, x);
    CHECK((yv - ym).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel application commutes with row permutation") {
    std::mt19937_64 rng(23);
    Instance inst = make_instance(rng, 6, 1, false);
    LayerParams p = random_layer(rng, 2, 3, KernelMode::matrix, Activation::identity);
    Eigen::MatrixXd y = testutil::random_matrix(rng, 12, 3);  // stacked rows from any modes
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 12, rng);
    Eigen::MatrixXd lhs = apply_head_kernel(p, 0, perm * y);
    Eigen::MatrixXd rhs = perm * apply_head_kernel(p, 0, y);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero upstream gives an all-zero gradient bundle") {
    std::mt19937_64 rng(24);
    Instance inst = make_instance(rng, 6, 2, true);
    LayerParams p = random_layer(rng, 3, 3, KernelMode::matrix, Activation::tanh_);
    Eigen::MatrixXd x = testutil::random_matrix(rng, 6, 3);
    LayerGrads g = layer_gradients(p, inst.ops, x, Eigen::MatrixXd::Zero(6, 3));
    for (const auto& k : g.d_kernels) CHECK(k.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_out_weight.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_a.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_b.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.d_scales.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar-width layer matches the hand-derived gradient") {
    // d = 1 on K2 with identity activation: everything reduces to products of
    // 2-vectors, so each gradient has a short closed form.
    Graph g = generate_graph(GraphKind::path, {2});
    Spectrum s = spectrum(g);
    WaveletBank bank = build_bank({0.4}, {0.8}, {0.6}, s, false);
    FrameOperators ops = frame_operators(bank, s);
    LayerParams p;
    p.kernel_mode = KernelMode::matrix;
    p.activation = Activation::identity;
    p.head_kernels = {Eigen::MatrixXd::Constant(1, 1, 0.7), Eigen::MatrixXd::Constant(1, 1, -0.3)};
    p.head_biases = {Eigen::VectorXd::Constant(1, 0.2), Eigen::VectorXd::Constant(1, 0.1)};
    p.out_weight.resize(2, 1);
    p.out_weight << 0.9, -0.5;
    Eigen::MatrixXd x(2, 1), up(2, 1);
    x << 1.0, -2.0;
    up << 0.3, 0.7;
    LayerGrads grads = layer_gradients(p, ops, x, up);

    const Eigen::MatrixXd& phi = ops.phi;
    const Eigen::MatrixXd& psi = ops.psis[0];
    Eigen::VectorXd one = Eigen::VectorXd::Ones(2);
    double w0 = p.out_weight(0, 0), w1 = p.out_weight(1, 0);
    // dL/dk0 = w0 * (Phi^T up)^T (Phi x), dL/dbeta0 = w0 * up^T Phi 1
    CHECK(grads.d_kernels[0](0, 0) ==
          Approx(w0 * ((phi.transpose() * up).transpose() * (phi * x))(0, 0)).margin(1e-12));
    CHECK(grads.d_kernels[1](0, 0) ==
          Approx(w1 * ((psi.transpose() * up).transpose() * (psi * x))(0, 0)).margin(1e-12));
    CHECK(grads.d_biases[0](0) == Approx(w0 * (up.transpose() * phi * one)(0, 0)).margin(1e-12));
    double k0 = 0.7, beta0 = 0.2;
    CHECK(grads.d_out_weight(0, 0) ==
          Approx((up.transpose() * phi * (phi * x * k0 + one * beta0))(0, 0)).margin(1e-12));
}

TEST_CASE("reverse-mode gradients match central finite differences") {
    std::mt19937_64 rng(25);
    const double step = 1e-5, tol = 1e-4;
    int checked = 0;
    for (int t = 0; t < 6; ++t) {
        Instance inst = make_instance(rng, 8, 2, true);
        const int d = 4;
        LayerParams p = random_layer(rng, 3, d, KernelMode::matrix, Activation::tanh_);
        Eigen::MatrixXd x = testutil::random_matrix(rng, inst.graph.n, d);
        Eigen::MatrixXd up = testutil::random_matrix(rng, inst.graph.n, d);
        LayerGrads grads = layer_gradients(p, inst.ops, x, up);

        auto check_entry = [&](double analytic, double fd) {
            if (std::abs(analytic) < 1e-8 && std::abs(fd) < 1e-8) return;
            CHECK(std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-8}) <
                  tol);
            ++checked;
        };

        for (int h = 0; h < 3; ++h)
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j) {
                    LayerParams pp = p, pm = p;
                    pp.head_kernels[static_cast<std::size_t>(h)](i, j) += step;
                    pm.head_kernels[static_cast<std::size_t>(h)](i, j) -= step;
                    double fd = (layer_loss(pp, inst.ops, x, up) -
                                 layer_loss(pm, inst.ops, x, up)) /
                                (2 * step);
                    check_entry(grads.d_kernels[static_cast<std::size_t>(h)](i, j), fd);
                }
        for (Eigen::Index i = 0; i < p.out_weight.rows(); ++i) {
            LayerParams pp = p, pm = p;
            pp.out_weight(i, 0) += step;
            pm.out_weight(i, 0) -= step;
            double fd =
                (layer_loss(pp, inst.ops, x, up) - layer_loss(pm, inst.ops, x, up)) / (2 * step);
            check_entry(grads.d_out_weight(i, 0), fd);
        }
        // bank parameters: rebuild the bank around perturbed values
        auto bank_loss = [&](const std::vector<double>& a, const std::vector<double>& b,
                             const std::vector<double>& scales) {
            WaveletBank bk = build_bank(a, b, scales, inst.spec, true);
            return layer_loss(p, frame_operators(bk, inst.spec), x, up);
        };
        for (std::size_t k = 0; k < inst.a.size(); ++k) {
            auto ap = inst.a, am = inst.a;
            ap[k] += step;
            am[k] -= step;
            check_entry(grads.d_a(static_cast<Eigen::Index>(k)),
                        (bank_loss(ap, inst.b, inst.scales) - bank_loss(am, inst.b, inst.scales)) /
                            (2 * step));
            auto bp = inst.b, bm = inst.b;
            bp[k] += step;
            bm[k] -= step;
            check_entry(grads.d_b(static_cast<Eigen::Index>(k)),
                        (bank_loss(inst.a, bp, inst.scales) - bank_loss(inst.a, bm, inst.scales)) /
                            (2 * step));
        }
        for (std::size_t j = 0; j < inst.scales.size(); ++j) {
            auto sp = inst.scales, sm = inst.scales;
            sp[j] += step;
            sm[j] -= step;
            check_entry(grads.d_scales(static_cast<Eigen::Index>(j)),
                        (bank_loss(inst.a, inst.b, sp) - bank_loss(inst.a, inst.b, sm)) /
                            (2 * step));
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("scale logit chain matches finite differences") {
    std::mt19937_64 rng(26);
    Instance inst = make_instance(rng, 7, 2, true);
    Eigen::VectorXd s_bar(2);
    s_bar << 2.0, 3.0;
    Eigen::VectorXd logits(2);
    logits << 0.3, -0.4;
    std::vector<double> scales(2);
    for (int j = 0; j < 2; ++j) scales[static_cast<std::size_t>(j)] = s_bar(j) / (1.0 + std::exp(-logits(j)));
    WaveletBank bank = build_bank(inst.a, inst.b, scales, inst.spec, true);
    FrameOperators ops = frame_operators(bank, inst.spec);
    LayerParams p = random_layer(rng, 3, 3, KernelMode::matrix, Activation::tanh_);
    Eigen::MatrixXd x = testutil::random_matrix(rng, 7, 3);
    Eigen::MatrixXd up = testutil::random_matrix(rng, 7, 3);
    LayerGrads grads = layer_gradients(p, ops, x, up);
    Eigen::VectorXd d_logits = scale_logit_gradients(grads.d_scales, logits, s_bar);
    CHECK(d_logits.cwiseAbs().maxCoeff() > 0.0);  // scales actually receive gradient
    const double step = 1e-5;
    for (int j = 0; j < 2; ++j) {
        auto loss_at = [&](double l) {
            auto sc = scales;
            sc[static_cast<std::size_t>(j)] = s_bar(j) / (1.0 + std::exp(-l));
            WaveletBank bk = build_bank(inst.a, inst.b, sc, inst.spec, true);
            return layer_loss(p, frame_operators(bk, inst.spec), x, up);
        };
        double fd = (loss_at(logits(j) + step) - loss_at(logits(j) - step)) / (2 * step);
        CHECK(std::abs(d_logits(j) - fd) / std::max({std::abs(fd), 1e-8}) < 1e-4);
    }
}

TEST_CASE("relu gradients are exact away from the kink") {
    std::mt19937_64 rng(27);
    Instance inst = make_instance(rng, 6, 1, true);
    LayerParams p = random_layer(rng, 2, 3, KernelMode::matrix, Activation::relu);
    Eigen::MatrixXd x = testutil::random_matrix(rng, 6, 3);
    Eigen::MatrixXd up = testutil::random_matrix(rng, 6, 3);
    LayerGrads grads = layer_gradients(p, inst.ops, x, up);
    const double step = 1e-6;
    LayerParams pp = p, pm = p;
    pp.head_kernels[0](0, 0) += step;
    pm.head_kernels[0](0, 0) -= step;
    double fd = (layer_loss(pp, inst.ops, x, up) - layer_loss(pm, inst.ops, x, up)) / (2 * step);
    CHECK(std::abs(grads.d_kernels[0](0, 0) - fd) <
          1e-3 * std::max(1.0, std::abs(fd)));
}

TEST_CASE("hybrid block with zero branches and no norm is the identity") {
    std::mt19937_64 rng(28);
    Instance inst = make_instance(rng, 6, 1, true);
    const int d = 3;
    LayerParams wave = random_layer(rng, 2, d, KernelMode::matrix, Activation::relu);
    for (auto& k : wave.head_kernels) k.setZero();
    for (auto& b : wave.head_biases) b.setZero();
    HybridParams hp = make_hybrid_params(wave, d, 5);
    hp.use_norm = false;
    Eigen::MatrixXd x = testutil::random_matrix(rng, 6, d);
    Eigen::MatrixXd y = hybrid_block(hp, inst.ops, inst.graph, x);
    CHECK((y - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mpnn branch can be removed by flag") {
    std::mt19937_64 rng(29);
    Instance inst = make_instance(rng, 6, 1, true);
    const int d = 3;
    HybridParams hp = make_hybrid_params(random_layer(rng, 2, d, KernelMode::matrix,
                                                      Activation::tanh_), d, 5);
    hp.mpnn_weight = testutil::random_matrix(rng, d, d);
    hp.use_mpnn = false;
    Eigen::MatrixXd x = testutil::random_matrix(rng, 6, d);
    Eigen::MatrixXd y1 = hybrid_block(hp, inst.ops, inst.graph, x);
    hp.mpnn_weight = testutil::random_matrix(rng, d, d);  // must not matter
    Eigen::MatrixXd y2 = hybrid_block(hp, inst.ops, inst.graph, x);
    CHECK((y1 - y2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mean aggregation on K2 swaps the two rows") {
    Graph g = generate_graph(GraphKind::path, {2});
    Eigen::MatrixXd amean = mean_aggregation(g);
    CHECK(amean(0, 0) == 0.0);
    CHECK(amean(0, 1) == 1.0);
    CHECK(amean(1, 0) == 1.0);
    CHECK(amean(1, 1) == 0.0);
    Eigen::MatrixXd x(2, 2);
    x << 1.0, 2.0, 3.0, 4.0;
    Eigen::MatrixXd y = amean * x;
    CHECK(y(0, 0) == 3.0);
    CHECK(y(1, 1) == 2.0);
}

TEST_CASE("hybrid gradients match central finite differences") {
    std::mt19937_64 rng(30);
    Instance inst = make_instance(rng, 5, 1, true);
    const int d = 3, dff = 4;
    LayerParams wave = random_layer(rng, 2, d, KernelMode::matrix, Activation::tanh_);
    HybridParams hp = make_hybrid_params(wave, d, dff);
    hp.mpnn_weight = testutil::random_matrix(rng, d, d, 0.5);
    hp.ffn_w1 = testutil::random_matrix(rng, d, dff, 0.5);
    hp.ffn_w2 = testutil::random_matrix(rng, dff, d, 0.5);
    hp.ffn_b1 = testutil::random_matrix(rng, dff, 1, 0.2).col(0);
    hp.ffn_b2 = testutil::random_matrix(rng, d, 1, 0.2).col(0);
    Eigen::MatrixXd x = testutil::random_matrix(rng, 5, d);
    Eigen::MatrixXd up = testutil::random_matrix(rng, 5, d);
    auto loss = [&](const HybridParams& h, const Eigen::MatrixXd& xin) {
        return (up.cwiseProduct(hybrid_block(h, inst.ops, inst.graph, xin))).sum();
    };
    HybridGrads grads = hybrid_gradients(hp, inst.ops, inst.graph, x, up);
    const double step = 1e-5, tol = 2e-4;
    auto rel = [&](double a, double f) {
        return std::abs(a - f) / std::max({std::abs(a), std::abs(f), 1e-6});
    };
    {
        HybridParams p1 = hp, p2 = hp;
        p1.mpnn_weight(0, 1) += step;
        p2.mpnn_weight(0, 1) -= step;
        CHECK(rel(grads.d_mpnn_weight(0, 1), (loss(p1, x) - loss(p2, x)) / (2 * step)) < tol);
    }
    {
        HybridParams p1 = hp, p2 = hp;
        p1.ffn_w1(1, 2) += step;
        p2.ffn_w1(1, 2) -= step;
        CHECK(rel(grads.d_ffn_w1(1, 2), (loss(p1, x) - loss(p2, x)) / (2 * step)) < tol);
    }
    {
        HybridParams p1 = hp, p2 = hp;
        p1.ln_gain[2](1) += step;
        p2.ln_gain[2](1) -= step;
        CHECK(rel(grads.d_ln_gain[2](1), (loss(p1, x) - loss(p2, x)) / (2 * step)) < tol);
    }
    {
        HybridParams p1 = hp, p2 = hp;
        p1.wave.head_kernels[1](0, 2) += step;
        p2.wave.head_kernels[1](0, 2) -= step;
        CHECK(rel(grads.wave.d_kernels[1](0, 2), (loss(p1, x) - loss(p2, x)) / (2 * step)) < tol);
    }
    {
        Eigen::MatrixXd x1 = x, x2 = x;
        x1(2, 1) += step;
        x2(2, 1) -= step;
        CHECK(rel(grads.d_x(2, 1), (loss(hp, x1) - loss(hp, x2)) / (2 * step)) < tol);
    }
}

TEST_CASE("layer parameter checkpoint round-trips through json") {
    std::mt19937_64 rng(31);
    LayerParams p = random_layer(rng, 3, 4, KernelMode::matrix, Activation::relu);
    Eigen::MatrixXd mpnn = testutil::random_matrix(rng, 4, 4);
    nlohmann::json j = layer_params_to_json(p, &mpnn);
    CHECK(j.at("d") == 4);
    CHECK(j.at("J") == 2);
    Eigen::MatrixXd mpnn_back;
    LayerParams q = layer_params_from_json(j, &mpnn_back);
    CHECK(q.kernel_mode == p.kernel_mode);
    for (int h = 0; h < 3; ++h) {
        CHECK((q.head_kernels[static_cast<std::size_t>(h)] -
               p.head_kernels[static_cast<std::size_t>(h)]).cwiseAbs().maxCoeff() == 0.0);
        CHECK((q.head_biases[static_cast<std::size_t>(h)] -
               p.head_biases[static_cast<std::size_t>(h)]).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK((q.out_weight - p.out_weight).cwiseAbs().maxCoeff() == 0.0);
    CHECK((mpnn_back - mpnn).cwiseAbs().maxCoeff() == 0.0);
}
