#pragma once

#include <map>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "magnl/fiber.hpp"

namespace magnl {

/// Calibration of the universal constants of the single-obstacle expansion:
///   (a) c2 from the continuous-m minimizer m*(h) of the fiber energy,
///   (b) c1 from the h^{3/2} coefficient along an e0-sequence,
///   (c) the h^2 coefficients along two e0-sequences, solved for the rate
///       c0 and the offset C0.
struct CalibrationOptions {
    double B = 1.0;
    double R = 1.0;
    double c2_h_max = 0.02;
    double c2_h_ratio = 0.62;
    int c2_points = 9;
    double e0_a = 0.25;
    double e0_b = 0.45;
    long long n_lo = 20;
    long long n_hi = 46;
    long long n_step = 2;
};

struct SequenceFit {
    double e0 = 0.0;
    double c1 = 0.0;        // h^{3/2} coefficient, scaled by R/sqrt(B)
    double h2_coef = 0.0;   // coefficient of h^2 = c0 (e0^2 + C0)
    double residual = 0.0;  // max absolute residual of the LSQ fit
    std::vector<double> h;
    std::vector<double> mu1;
};

struct CalibrationResult {
    SpectralConstants consts;
    double c2_residual = 0.0;
    SequenceFit fit_a, fit_b;
    double c0_rate_fitted = 0.0;   // from the two h^2 coefficients
    double c0_rate_from_c1 = 0.0;  // 3 c1 sqrt(theta0)/R^2
};

namespace detail {

inline SequenceFit fit_sequence(double B, double R, const SpectralConstants& c, double e0,
                                const CalibrationOptions& opt) {
    SequenceFit f;
    f.e0 = e0;
    for (long long n = opt.n_lo; n <= opt.n_hi; n += opt.n_step) {
        double h = e0_sequence_h(B, R, c, e0, n);
        ModelParams p{B, R, h};
        f.h.push_back(h);
        f.mu1.push_back(fiber_ground_energy(p, static_cast<double>(n)));
    }
    const std::size_t k = f.h.size();
    Eigen::MatrixXd A(k, 3);
    Eigen::VectorXd b(k);
    for (std::size_t i = 0; i < k; ++i) {
        double h = f.h[i];
        // (mu1 - Theta0 B h) / h^{3/2} = c1 sqrt(B)/R + A(e0) sqrt(h) + O(h)
        A(i, 0) = 1.0;
        A(i, 1) = std::sqrt(h);
        A(i, 2) = h;
        b(i) = (f.mu1[i] - c.theta0 * B * h) / std::pow(h, 1.5);
    }
    Eigen::Vector3d sol = A.colPivHouseholderQr().solve(b);
    f.c1 = sol(0) * R / std::sqrt(B);
    f.h2_coef = sol(1);
    f.residual = (A * sol - b).cwiseAbs().maxCoeff();
    return f;
}

}  // namespace detail

inline CalibrationResult calibrate_constants(const CalibrationOptions& opt = {}) {
    const auto& dg = degennes_constants();
    CalibrationResult out;
    out.consts.theta0 = dg.theta0;
    out.consts.xi0 = dg.xi0;
    out.consts.k0 = dg.k0;

    // (a) continuous-m minimizer against the c2-free part of xi_h
    std::vector<double> hs, ys;
    double h = opt.c2_h_max;
    for (int i = 0; i < opt.c2_points; ++i, h *= opt.c2_h_ratio) {
        ModelParams p{opt.B, opt.R, h};
        double xi0h = 0.5 * p.flux() + std::sqrt(dg.theta0 * p.flux());
        double mstar = fiber_mu_argmin_m(p, xi0h - 2.0, xi0h + 2.0, 1e-8);
        hs.push_back(h);
        ys.push_back(mstar - xi0h);
    }
    Eigen::MatrixXd A(hs.size(), 4);
    Eigen::VectorXd b(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = std::sqrt(hs[i]);
        A(i, 2) = hs[i];
        A(i, 3) = std::pow(hs[i], 1.5);
        b(i) = ys[i];
    }
    Eigen::Vector4d sol = A.colPivHouseholderQr().solve(b);
    out.consts.c2 = sol(0);
    out.c2_residual = (A * sol - b).cwiseAbs().maxCoeff();
    out.consts.calibrated = true;  // c2 available for sequence construction

    // (b)+(c) two e0-sequences
    out.fit_a = detail::fit_sequence(opt.B, opt.R, out.consts, opt.e0_a, opt);
    out.fit_b = detail::fit_sequence(opt.B, opt.R, out.consts, opt.e0_b, opt);
    out.consts.c1 = 0.5 * (out.fit_a.c1 + out.fit_b.c1);

    // h2_coef_i = c0 (e0_i^2 + C0): two equations, unknowns c0 and c0*C0
    double ea2 = opt.e0_a * opt.e0_a, eb2 = opt.e0_b * opt.e0_b;
    double c0 = (out.fit_b.h2_coef - out.fit_a.h2_coef) / (eb2 - ea2);
    double c0C0 = out.fit_a.h2_coef - c0 * ea2;
    out.c0_rate_fitted = c0;
    out.consts.c0_univ = c0C0 / c0;
    out.c0_rate_from_c1 = out.consts.c0_rate(opt.R);
    return out;
}

/// Cached calibration for repeated use in tests and the CLI (keyed by B, R).
inline const CalibrationResult& calibration(double B = 1.0, double R = 1.0) {
    static std::map<std::pair<double, double>, CalibrationResult> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(B, R);
    auto it = cache.find(key);
    if (it == cache.end()) {
        CalibrationOptions opt;
        opt.B = B;
        opt.R = R;
        it = cache.emplace(key, calibrate_constants(opt)).first;
    }
    return it->second;
}

/// Locates an eigenvalue crossing mu_m(h) = mu_{m+1}(h) by bisection in h
/// near the n-th predicted crossing (xi_h = n + 1/2).
struct CrossingResult {
    double h = 0.0;
    double mu = 0.0;
    double e_at_crossing = 0.0;
};

inline CrossingResult find_crossing(double B, double R, const SpectralConstants& c,
                                    long long n) {
    double h_guess = e0_sequence_h(B, R, c, 0.5, n);
    const double m = static_cast<double>(n);
    auto f = [&](double h) {
        ModelParams p{B, R, h};
        return fiber_ground_energy(p, m) - fiber_ground_energy(p, m + 1.0);
    };
    double dh = h_guess * 1e-3;
    double lo = h_guess - dh, hi = h_guess + dh;
    double flo = f(lo), fhi = f(hi);
    for (int grow = 0; (flo < 0.0) == (fhi < 0.0) && grow < 14; ++grow) {
        dh *= 2.0;
        lo = h_guess - dh;
        hi = h_guess + dh;
        flo = f(lo);
        fhi = f(hi);
    }
    if ((flo < 0.0) == (fhi < 0.0))
        throw std::runtime_error("find_crossing: could not bracket mu_-(h) = mu_+(h)");
    for (int it = 0; it < 64; ++it) {
        double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    CrossingResult r;
    r.h = 0.5 * (lo + hi);
    r.mu = fiber_ground_energy({B, R, r.h}, m);
    r.e_at_crossing = xi_and_e({B, R, r.h}, c).e;
    return r;
}

}  // namespace magnl
