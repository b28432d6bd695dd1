// SPDX-License-Identifier: Apache-2.0
//
// Wavelet bank construction from odd/even Chebyshev combinations.
//
// Per eigenvalue lambda_i the bank evaluates a low-pass value
// h(lambda_i) = sum_k b_k t_{2k-1}(lambda_i) and J band-pass values
// g(s_j lambda_i) = sum_k a_k t_{2k}(s_j lambda_i), hard-zeroed once
// s_j lambda_i leaves [0,2]. Tight banks rescale the per-eigenvalue filter
// vector to unit length, v_i = sqrt(h^2 + sum_j g_j^2), which makes the
// stacked transform T = [Phi; Psi_1; ...; Psi_J] satisfy T^T T = I and turns
// the pseudo-inverse into the plain adjoint. Eigenvalues where v_i ~ 0 are
// recorded as degenerate and their filters stay exactly zero; reconstruction
// is then exact on the orthogonal complement of those modes.

#pragma once

#include "wavegc/chebyshev.hpp"
#include "wavegc/spectrum.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavegc {

inline constexpr double kDegenerateTol = 1e-12;

/// Serializable bank description; filter values are always recomputed from a
/// spectrum, never stored.
struct BankParams {
    std::vector<double> a;       // even-term coefficients
    std::vector<double> b;       // odd-term coefficients
    std::vector<double> scales;  // s_1..s_J, all > 0
    bool tight = true;
    std::optional<double> threshold;  // entry sparsification for the operators

    int rho() const { return static_cast<int>(a.size()); }
    int num_scales() const { return static_cast<int>(scales.size()); }
};

inline nlohmann::json bank_params_to_json(const BankParams& p) {
    nlohmann::json j;
    j["rho"] = p.rho();
    j["J"] = p.num_scales();
    j["a"] = p.a;
    j["b"] = p.b;
    j["scales"] = p.scales;
    j["tight"] = p.tight;
    j["threshold"] = p.threshold ? nlohmann::json(*p.threshold) : nlohmann::json(nullptr);
    return j;
}

inline BankParams bank_params_from_json(const nlohmann::json& j) {
    BankParams p;
    p.a = j.at("a").get<std::vector<double>>();
    p.b = j.at("b").get<std::vector<double>>();
    p.scales = j.at("scales").get<std::vector<double>>();
    p.tight = j.at("tight").get<bool>();
    if (j.contains("threshold") && !j.at("threshold").is_null())
        p.threshold = j.at("threshold").get<double>();
    if (j.contains("rho") && j.at("rho").get<int>() != p.rho())
        throw std::runtime_error("bank json: rho does not match coefficient length");
    if (j.contains("J") && j.at("J").get<int>() != p.num_scales())
        throw std::runtime_error("bank json: J does not match scales length");
    return p;
}

struct WaveletBank {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> scales;
    bool tight = false;

    Eigen::VectorXd h_vals;               // per eigenvalue, post-normalization
    std::vector<Eigen::VectorXd> g_vals;  // J vectors, post-normalization
    Eigen::VectorXd frame_vals;           // G(lambda_i) of the stored filters
    std::vector<int> degenerate_modes;

    // pre-normalization values and norms, kept for the gradient chain
    Eigen::VectorXd raw_h;
    std::vector<Eigen::VectorXd> raw_g;
    Eigen::VectorXd v_norms;

    int rho() const { return static_cast<int>(a.size()); }
    int num_scales() const { return static_cast<int>(scales.size()); }
};

/// h^2 + sum_j g_j^2 per eigenvalue for the stored (possibly normalized)
/// filter values; identically 1 off degenerate modes when the bank is tight.
inline Eigen::VectorXd frame_function(const WaveletBank& bank) {
    Eigen::VectorXd g = bank.h_vals.array().square();
    for (const auto& gv : bank.g_vals) g += gv.array().square().matrix();
    return g;
}

inline WaveletBank build_bank(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<double>& scales, const Spectrum& spec,
                              bool tight) {
    if (a.empty() || b.empty()) throw std::invalid_argument("build_bank: rho must be >= 1");
    if (a.size() != b.size())
        throw std::invalid_argument("build_bank: coefficient vectors must share length rho");
    if (scales.empty()) throw std::invalid_argument("build_bank: at least one scale required");
    for (double s : scales)
        if (!(s > 0.0)) throw std::invalid_argument("build_bank: scales must be positive");
    for (double v : a)
        if (!std::isfinite(v)) throw std::invalid_argument("build_bank: non-finite coefficient");
    for (double v : b)
        if (!std::isfinite(v)) throw std::invalid_argument("build_bank: non-finite coefficient");

    const int n = spec.n();
    const int rho = static_cast<int>(a.size());
    const int j_count = static_cast<int>(scales.size());

    WaveletBank bank;
    bank.a = a;
    bank.b = b;
    bank.scales = scales;
    bank.tight = tight;
    bank.raw_h.resize(n);
    bank.raw_g.assign(static_cast<std::size_t>(j_count), Eigen::VectorXd::Zero(n));

    for (int i = 0; i < n; ++i) {
        const double lam = spec.eigenvalues(i);
        double h = 0.0;
        for (int k = 1; k <= rho; ++k)
            h += b[static_cast<std::size_t>(k - 1)] * shifted_term(term_order(Parity::odd, k), lam);
        bank.raw_h(i) = h;
        for (int j = 0; j < j_count; ++j) {
            const double x = scales[static_cast<std::size_t>(j)] * lam;
            if (x > 2.0) continue;  // truncation: intersection of [0,2] and [0,2/s]
            double g = 0.0;
            for (int k = 1; k <= rho; ++k)
                g += a[static_cast<std::size_t>(k - 1)] * shifted_term(term_order(Parity::even, k), x);
            bank.raw_g[static_cast<std::size_t>(j)](i) = g;
        }
    }

    bank.v_norms.resize(n);
    bank.h_vals = bank.raw_h;
    bank.g_vals = bank.raw_g;
    for (int i = 0; i < n; ++i) {
        double v2 = bank.raw_h(i) * bank.raw_h(i);
        for (const auto& gv : bank.raw_g) v2 += gv(i) * gv(i);
        double v = std::sqrt(v2);
        bank.v_norms(i) = v;
        if (!tight) continue;
        if (v < kDegenerateTol) {
            bank.degenerate_modes.push_back(i);
            bank.h_vals(i) = 0.0;
            for (auto& gv : bank.g_vals) gv(i) = 0.0;
        } else {
            bank.h_vals(i) /= v;
            for (auto& gv : bank.g_vals) gv(i) /= v;
        }
    }
    bank.frame_vals = frame_function(bank);
    return bank;
}

inline WaveletBank build_bank(const BankParams& p, const Spectrum& spec) {
    return build_bank(p.a, p.b, p.scales, spec, p.tight);
}

// ---------------------------------------------------------------------------
// Dense frame operators and the stacked transform
// ---------------------------------------------------------------------------

struct FrameOperators {
    Eigen::MatrixXd phi;                // U h(Lambda) U^T
    std::vector<Eigen::MatrixXd> psis;  // U g(s_j Lambda) U^T
    std::optional<double> threshold;    // entry filter that was applied, if any
    WaveletBank bank;                   // source bank (filters, coefficients)
    Spectrum spec;                      // source spectrum

    int n() const { return static_cast<int>(phi.rows()); }
    int num_heads() const { return 1 + static_cast<int>(psis.size()); }
    bool tight() const { return bank.tight; }

    const Eigen::MatrixXd& head(int h) const {
        return h == 0 ? phi : psis[static_cast<std::size_t>(h - 1)];
    }
};

inline FrameOperators frame_operators(const WaveletBank& bank, const Spectrum& spec,
                                      std::optional<double> threshold = std::nullopt) {
    if (bank.h_vals.size() != spec.eigenvalues.size())
        throw std::invalid_argument("frame_operators: bank and spectrum sizes differ");
    FrameOperators ops;
    ops.bank = bank;
    ops.spec = spec;
    ops.threshold = threshold;
    const Eigen::MatrixXd& u = spec.eigenvectors;
    auto assemble = [&](const Eigen::VectorXd& filt) {
        Eigen::MatrixXd m = u * filt.asDiagonal() * u.transpose();
        if (threshold) {
            double t = *threshold;
            m = m.unaryExpr([t](double v) { return std::abs(v) < t ? 0.0 : v; });
        }
        return m;
    };
    ops.phi = assemble(bank.h_vals);
    ops.psis.reserve(bank.g_vals.size());
    for (const auto& gv : bank.g_vals) ops.psis.push_back(assemble(gv));
    return ops;
}

/// Stacked transform [Phi X; Psi_1 X; ...; Psi_J X], shape (J+1)n x d.
inline Eigen::MatrixXd forward_transform(const FrameOperators& ops, const Eigen::MatrixXd& x) {
    if (x.rows() != ops.n()) throw std::invalid_argument("forward_transform: row count mismatch");
    const int n = ops.n();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ops.num_heads()) * n, x.cols());
    out.topRows(n) = ops.phi * x;
    for (std::size_t j = 0; j < ops.psis.size(); ++j)
        out.middleRows(static_cast<Eigen::Index>(j + 1) * n, n) = ops.psis[j] * x;
    return out;
}

/// Adjoint synthesis T^T C. Valid as an inverse only for tight banks, so
/// non-tight banks are rejected.
inline Eigen::MatrixXd inverse_transform(const FrameOperators& ops, const Eigen::MatrixXd& c) {
    if (!ops.tight())
        throw std::logic_error("inverse_transform: adjoint inverse requires a tight bank");
    const int n = ops.n();
    if (c.rows() != static_cast<Eigen::Index>(ops.num_heads()) * n)
        throw std::invalid_argument("inverse_transform: coefficient row count mismatch");
    Eigen::MatrixXd out = ops.phi.transpose() * c.topRows(n);
    for (std::size_t j = 0; j < ops.psis.size(); ++j)
        out += ops.psis[j].transpose() * c.middleRows(static_cast<Eigen::Index>(j + 1) * n, n);
    return out;
}

/// Projector onto the degenerate eigenspace (zero matrix when none).
inline Eigen::MatrixXd degenerate_projector(const WaveletBank& bank, const Spectrum& spec) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(spec.n(), spec.n());
    for (int i : bank.degenerate_modes) {
        Eigen::VectorXd u = spec.eigenvectors.col(i);
        p += u * u.transpose();
    }
    return p;
}

/// Frobenius deviation of Phi^2 + sum_j Psi_j^2 from the identity restricted
/// off the degenerate modes. Uses the operators as stored, so a thresholded
/// FrameOperators reports its post-threshold deviation.
inline double frame_identity_error(const FrameOperators& ops) {
    Eigen::MatrixXd acc = ops.phi * ops.phi;
    for (const auto& psi : ops.psis) acc += psi * psi;
    Eigen::MatrixXd target = Eigen::MatrixXd::Identity(ops.n(), ops.n()) -
                             degenerate_projector(ops.bank, ops.spec);
    return (acc - target).norm();
}

}  // namespace wavegc
