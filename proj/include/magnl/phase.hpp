#pragma once

#include <cmath>
#include <complex>

#include "magnl/model.hpp"
#include "magnl/types.hpp"

namespace magnl {

/// Parameters of the two-centre interaction phase s_h^{ss'}: centre
/// distance ell and the two fiber indices entering the log terms.
struct PhaseParams {
    double ell = 6.0;
    double B = 1.0;
    double h = 0.1;
    double R = 1.0;
    double m_sigma = 0.0;
    double m_sigma_prime = 0.0;
};

namespace detail {

inline void check_log_args(Complex a1, Complex a2) {
    if (!(a1.real() > 0.0) || !(a2.real() > 0.0))
        throw std::invalid_argument("phase_eval: log argument with nonpositive real part");
}

}  // namespace detail

/// The interaction phase
///   s_h(x1,x2) = B/4 (x1+l/2)^2 + B/4 (x1-l/2)^2 + B/2 x2^2 - B R^2/2
///                + i B l x2 / 2 - h m_s log((l/2+x1+i x2)/R)
///                - h m_s' log((l/2-x1+i x2)/R)
/// with principal logarithms, holomorphic on the strip Re(x1) in
/// (-l/2, l/2), Im(x2) <= 0.
inline Complex phase_eval_sh(const PhaseParams& p, Complex x1, Complex x2) {
    Complex a1 = (0.5 * p.ell + x1 + Complex(0.0, 1.0) * x2) / p.R;
    Complex a2 = (0.5 * p.ell - x1 + Complex(0.0, 1.0) * x2) / p.R;
    detail::check_log_args(a1, a2);
    Complex q1 = x1 + 0.5 * p.ell, q2 = x1 - 0.5 * p.ell;
    return 0.25 * p.B * (q1 * q1 + q2 * q2) + 0.5 * p.B * x2 * x2 -
           0.5 * p.B * p.R * p.R + Complex(0.0, 0.5 * p.B * p.ell) * x2 -
           p.h * p.m_sigma * std::log(a1) - p.h * p.m_sigma_prime * std::log(a2);
}

/// Principal part s_0: both log coefficients frozen at B R^2 / 2.
inline Complex phase_eval_s0(double ell, double B, double R, Complex x1, Complex x2) {
    PhaseParams p;
    p.ell = ell;
    p.B = B;
    p.R = R;
    p.h = 1.0;
    p.m_sigma = 0.5 * B * R * R;
    p.m_sigma_prime = 0.5 * B * R * R;
    return phase_eval_sh(p, x1, x2);
}

/// Saddle data of s_0: critical point (0, x2*), critical value S_0(l),
/// diagonal Hessian entries (the cross term vanishes).
struct SaddleData {
    Complex x2_star;
    double crit_s0 = 0.0;
    double hess11 = 0.0;
    double hess22 = 0.0;
};

inline SaddleData saddle(double ell, double R, double B) {
    if (!(ell > 2.0 * R)) throw std::invalid_argument("saddle: ell <= 2R");
    SaddleData s;
    const double root = std::sqrt(ell * ell - 4.0 * R * R);
    s.x2_star = Complex(0.0, -std::sqrt(0.25 * ell * ell - R * R));
    s.crit_s0 = 0.25 * B * ell * root - B * R * R * std::log((ell + root) / (2.0 * R));
    s.hess11 = 0.5 * B * ell * (ell - root) / (R * R);
    s.hess22 = 0.5 * B * root * (ell - root) / (R * R);
    return s;
}

/// Both displayed forms of the critical value s_h(0, x2*):
///   direct = B l/4 sqrt(l^2-4R^2) - h (m_s + m_s') log K_l
///   via_sh = S_h(l) - h (2 c2 + m_s + m_s' - 2 xi_h) log K_l
/// They agree identically; the pair is returned for cross-checking.
struct CriticalValueSh {
    double direct = 0.0;
    double via_action = 0.0;
};

inline CriticalValueSh critical_value_sh(const PhaseParams& p, const SpectralConstants& c) {
    CriticalValueSh out;
    const double root = std::sqrt(p.ell * p.ell - 4.0 * p.R * p.R);
    const double logK = std::log(k_factor(p.ell, p.R));
    out.direct =
        0.25 * p.B * p.ell * root - p.h * (p.m_sigma + p.m_sigma_prime) * logK;
    ModelParams mp{p.B, p.R, p.h};
    double sh = tunneling_action(mp, c.theta0, p.ell).sh;
    double xi = xi_of_h(mp, c);
    out.via_action =
        sh - p.h * (2.0 * c.c2 + p.m_sigma + p.m_sigma_prime - 2.0 * xi) * logK;
    return out;
}

}  // namespace magnl
