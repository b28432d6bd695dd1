// SPDX-License-Identifier: Apache-2.0
//
// Eigendecomposition-free application of the bank.
//
// The scaling head is an odd operator polynomial applied by recurrence. Each
// wavelet head is the even polynomial in s*lambda; for s <= 1 that polynomial
// is exact over the whole spectral interval, while for s > 1 the part of
// g(s*lambda) beyond lambda = 2/s must be suppressed. A window polynomial is
// least-squares fitted against a raised-cosine-tapered step (taper just
// inside the cut; a hard step would ring), with the stop region weighted
// exponentially so the fit is smallest exactly where the un-truncated
// g(s*lambda) grows fastest. The head polynomial is then the Chebyshev
// product g(s*lambda) * w(lambda). Everything stays O(degree * |E| * d).
//
// Tight-frame normalization needs the per-eigenvalue norms v_i and therefore
// has no polynomial form; this path serves untight banks only.

#pragma once

#include "wavegc/wavelet_bank.hpp"
#include "wavegc/io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wavegc {

struct WindowConfig {
    int degree = 60;
    double taper = 0.1;              // width of the raised-cosine band inside the cut
    double stop_weight_exponent = 4.0;  // stop-band emphasis: weight 10^{e*(lam-c)/(2-c)}
    int grid_points = 2001;
    int product_degree_cap = -1;     // <0: keep full degree of the Chebyshev product
    double tol = 5e-2;               // acceptable fit error outside the taper band
};

struct WindowFit {
    double s = 1.0;
    int degree = 0;
    double taper = 0.0;
    ChebSeries series;
    double rms_residual = 0.0;       // weighted rms over the fit grid
    double max_err_outside_band = 0.0;
    double min_value = 0.0, max_value = 1.0;  // fitted range on the grid
};

/// Tapered step target: 1 on [0, 2/s - taper], raised cosine down to 0 at
/// 2/s, 0 beyond.
inline double window_target(double lambda, double s, double taper) {
    const double cut = 2.0 / s;
    if (lambda <= cut - taper) return 1.0;
    if (lambda >= cut) return 0.0;
    return 0.5 * (1.0 + std::cos(M_PI * (lambda - (cut - taper)) / taper));
}

inline WindowFit fit_window(double s, int degree, double taper = 0.1,
                            double stop_weight_exponent = 4.0, int grid_points = 2001) {
    if (!(s > 0.0)) throw std::invalid_argument("fit_window: scale must be positive");
    if (degree < 0) throw std::invalid_argument("fit_window: degree must be >= 0");
    WindowFit fit;
    fit.s = s;
    fit.degree = degree;
    fit.taper = taper;
    if (s <= 1.0) {
        fit.series.coeffs = {1.0};  // whole interval valid, window is the constant 1
        fit.rms_residual = 0.0;
        fit.max_err_outside_band = 0.0;
        fit.min_value = fit.max_value = 1.0;
        return fit;
    }
    const double cut = 2.0 / s;
    Eigen::VectorXd lam(grid_points), target(grid_points), weight(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        double x = 2.0 * i / (grid_points - 1);
        lam(i) = x;
        target(i) = window_target(x, s, taper);
        weight(i) = x <= cut ? 1.0
                             : std::pow(10.0, stop_weight_exponent * (x - cut) / (2.0 - cut));
    }
    Eigen::MatrixXd v(grid_points, degree + 1);
    for (int i = 0; i < grid_points; ++i)
        for (int m = 0; m <= degree; ++m) v(i, m) = chebyshev_t(m, lam(i) - 1.0);
    Eigen::MatrixXd vw = weight.asDiagonal() * v;
    Eigen::VectorXd tw = weight.cwiseProduct(target);
    Eigen::VectorXd coef = vw.colPivHouseholderQr().solve(tw);
    fit.series.coeffs.assign(coef.data(), coef.data() + coef.size());

    Eigen::VectorXd fitted = v * coef;
    fit.rms_residual = std::sqrt((weight.cwiseProduct(fitted - target)).squaredNorm() /
                                 static_cast<double>(grid_points));
    fit.min_value = fitted.minCoeff();
    fit.max_value = fitted.maxCoeff();
    double max_err = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        bool in_band = lam(i) > cut - taper - 1e-12 && lam(i) < cut + 1e-12;
        if (!in_band) max_err = std::max(max_err, std::abs(fitted(i) - target(i)));
    }
    fit.max_err_outside_band = max_err;
    return fit;
}

/// Chebyshev series for one wavelet head: g(s*lambda) for s <= 1, otherwise
/// the product with the fitted window, optionally re-truncated.
inline ChebSeries wavelet_head_series(const std::vector<double>& a, double s,
                                      const WindowConfig& cfg) {
    ChebSeries gs = series_even_combination_scaled(a, s);
    if (s <= 1.0) return gs;
    WindowFit w = fit_window(s, cfg.degree, cfg.taper, cfg.stop_weight_exponent, cfg.grid_points);
    ChebSeries prod = cheb_mul(gs, w.series);
    if (cfg.product_degree_cap >= 0) prod = cheb_truncate(prod, cfg.product_degree_cap);
    return prod;
}

/// Polynomial-path forward transform: stacked [Phi X; Psi_1 X; ...] computed
/// via operator recurrences only. Untight banks only (see header comment).
inline Eigen::MatrixXd approx_forward(const std::vector<double>& a, const std::vector<double>& b,
                                      const std::vector<double>& scales, const Graph& g,
                                      const Eigen::MatrixXd& x, const WindowConfig& cfg = {},
                                      std::vector<std::size_t>* ops_per_head = nullptr) {
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("approx_forward: coefficient vectors must share length rho");
    for (double s : scales)
        if (!(s > 0.0)) throw std::invalid_argument("approx_forward: scales must be positive");
    const int n = g.n;
    if (x.rows() != n) throw std::invalid_argument("approx_forward: signal rows != node count");
    const int heads = static_cast<int>(scales.size()) + 1;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(heads) * n, x.cols());
    if (ops_per_head) ops_per_head->assign(static_cast<std::size_t>(heads), 0);
    std::size_t count = 0;
    out.topRows(n) = apply_cheb_series(series_odd_combination(b), g, x, &count);
    if (ops_per_head) (*ops_per_head)[0] = count;
    for (std::size_t j = 0; j < scales.size(); ++j) {
        ChebSeries series = wavelet_head_series(a, scales[j], cfg);
        out.middleRows(static_cast<Eigen::Index>(j + 1) * n, n) =
            apply_cheb_series(series, g, x, &count);
        if (ops_per_head) (*ops_per_head)[j + 1] = count;
    }
    return out;
}

struct HeadDeviation {
    int head = 0;
    double max_abs = 0.0;
    double rel = 0.0;
};

struct CompareReport {
    std::vector<HeadDeviation> heads;
    double max_abs = 0.0;
    double rel = 0.0;
    int degree = 0;
    double taper = 0.0;
    double t_spectral_ms = 0.0;
    double t_poly_ms = 0.0;
};

/// Runs both paths on the same (graph, bank, signal) and reports per-head
/// deviations plus timings. The spectral side is the oracle.
inline CompareReport compare_paths(const Graph& g, const BankParams& params,
                                   const Eigen::MatrixXd& x, const WindowConfig& cfg = {}) {
    if (params.tight)
        throw std::logic_error("compare_paths: polynomial path supports tight=false only");
    if (g.n > 500) throw std::invalid_argument("compare_paths: spectral oracle capped at n=500");
    using clock = std::chrono::steady_clock;

    auto t0 = clock::now();
    Spectrum spec = spectrum(g);
    WaveletBank bank = build_bank(params, spec);
    FrameOperators ops = frame_operators(bank, spec);
    Eigen::MatrixXd spectral = forward_transform(ops, x);
    auto t1 = clock::now();
    Eigen::MatrixXd poly = approx_forward(params.a, params.b, params.scales, g, x, cfg);
    auto t2 = clock::now();

    CompareReport report;
    report.degree = cfg.degree;
    report.taper = cfg.taper;
    report.t_spectral_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    report.t_poly_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
    const int n = g.n;
    for (int h = 0; h < params.num_scales() + 1; ++h) {
        HeadDeviation d;
        d.head = h;
        Eigen::MatrixXd ref = spectral.middleRows(static_cast<Eigen::Index>(h) * n, n);
        Eigen::MatrixXd got = poly.middleRows(static_cast<Eigen::Index>(h) * n, n);
        d.max_abs = (ref - got).cwiseAbs().maxCoeff();
        double denom = ref.cwiseAbs().maxCoeff();
        d.rel = denom > 0.0 ? d.max_abs / denom : d.max_abs;
        report.max_abs = std::max(report.max_abs, d.max_abs);
        report.rel = std::max(report.rel, d.rel);
        report.heads.push_back(d);
    }
    return report;
}

inline nlohmann::json compare_report_to_json(const CompareReport& r) {
    nlohmann::json heads = nlohmann::json::array();
    for (const auto& h : r.heads)
        heads.push_back({{"head", h.head}, {"max_abs", h.max_abs}, {"rel", h.rel}});
    return nlohmann::json{{"heads", heads},
                          {"max_abs", r.max_abs},
                          {"rel", r.rel},
                          {"degree", r.degree},
                          {"taper", r.taper},
                          {"t_spectral_ms", r.t_spectral_ms},
                          {"t_poly_ms", r.t_poly_ms}};
}

}  // namespace wavegc
