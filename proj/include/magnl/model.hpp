#pragma once

#include <cmath>
#include <optional>

#include "magnl/types.hpp"

namespace magnl {

/// Agmon distance d(r) = (B/4)(r^2 - R^2) - (BR^2/2) log(r/R) governing the
/// decay of boundary states away from the disc. Zero at r = R, increasing.
inline double agmon_distance(const ModelParams& p, double r) {
    p.validate();
    if (r < p.R) throw std::invalid_argument("agmon_distance: r < R");
    return 0.25 * p.B * (r * r - p.R * p.R) - 0.5 * p.B * p.R * p.R * std::log(r / p.R);
}

/// Hopping factor K_l = l/(2R) + sqrt(l^2/(4R^2) - 1), >= 1 for l >= 2R.
inline double k_factor(double ell, double R) {
    if (ell < 2.0 * R) throw std::invalid_argument("k_factor: ell < 2R");
    double u = ell / (2.0 * R);
    return u + std::sqrt(u * u - 1.0);
}

/// Tunneling action split S_h(l) = S0(l) - sqrt(h) S1(l):
///   S0(l) = (B l/4) sqrt(l^2-4R^2) - B R^2 log K_l,
///   S1(l) = 2 sqrt(Theta0 B R^2) log K_l.
struct ActionParts {
    double s0 = 0.0;
    double s1 = 0.0;
    double sh = 0.0;
};

inline ActionParts tunneling_action(const ModelParams& p, double theta0, double ell) {
    p.validate();
    if (ell < 2.0 * p.R) throw std::invalid_argument("tunneling_action: ell < 2R");
    double root = std::sqrt(std::max(0.0, ell * ell - 4.0 * p.R * p.R));
    double logK = std::log(k_factor(ell, p.R));
    ActionParts a;
    a.s0 = 0.25 * p.B * ell * root - p.B * p.R * p.R * logK;
    a.s1 = 2.0 * std::sqrt(theta0 * p.B * p.R * p.R) * logK;
    a.sh = a.s0 - std::sqrt(p.h) * a.s1;
    return a;
}

/// Magnetic translation composition phase e^{iB (a ^ b) / (2h)}.
inline Complex wedge_phase(Vec2 a, Vec2 b, double B, double h) {
    return std::polar(1.0, 0.5 * B * wedge(a, b) / h);
}

/// The oscillating spectral parameter xi_h, its distance e(h) to the
/// integers, and the fiber labels. m_nearest is the closest integer;
/// (m_minus, m_plus) is the bracketing pair of the two closest integers,
/// relabeled so that m_plus = m_minus + 1. At a tie (e = 1/2) both are
/// equidistant and `tie` is set.
struct XiSplit {
    double xi = 0.0;
    double e = 0.0;         // distance to nearest integer, in [0, 1/2]
    double e0_signed = 0.0; // xi - m_nearest, in (-1/2, 1/2]
    long long m_nearest = 0;
    long long m_minus = 0;
    long long m_plus = 0;
    bool tie = false;
    bool calibrated = false;
};

inline double xi_of_h(const ModelParams& p, const SpectralConstants& c) {
    return 0.5 * p.flux() + std::sqrt(c.theta0 * p.flux()) + c.c2;
}

inline XiSplit xi_and_e(const ModelParams& p, const SpectralConstants& c) {
    p.validate();
    XiSplit s;
    s.xi = xi_of_h(p, c);
    s.calibrated = c.calibrated;
    double fl = std::floor(s.xi);
    double frac = s.xi - fl;
    // ties break toward the smaller integer
    s.m_nearest = (frac <= 0.5) ? static_cast<long long>(fl) : static_cast<long long>(fl) + 1;
    s.e = std::abs(s.xi - static_cast<double>(s.m_nearest));
    s.e0_signed = s.xi - static_cast<double>(s.m_nearest);
    s.tie = std::abs(s.e - 0.5) < 1e-14;
    // bracketing pair with m_plus = m_minus + 1
    s.m_minus = static_cast<long long>(fl);
    s.m_plus = s.m_minus + 1;
    return s;
}

/// Solves xi_h = n + e0 for h (the n-th member of an e0-sequence). With
/// x = h^{-1/2} this is a quadratic; fails when n + e0 <= c2.
inline double e0_sequence_h(double B, double R, const SpectralConstants& c, double e0,
                            long long n) {
    double target = static_cast<double>(n) + e0 - c.c2;
    if (!(target > 0.0))
        throw std::invalid_argument("e0_sequence_h: n + e0 <= c2, no positive root");
    double br2 = B * R * R;
    double s = std::sqrt(c.theta0 * br2);
    double x = (-s + std::sqrt(s * s + 2.0 * br2 * target)) / br2;
    if (!(x > 0.0)) throw std::invalid_argument("e0_sequence_h: no positive root");
    return 1.0 / (x * x);
}

/// Margins of the two Appendix-C inequalities with the eta-shifted
/// arguments that appear in the error order E_{eps,L}:
///   margin_pair  = 2 d(L-R-4eta) - S0(L)
///   margin_mixed = d(L-R-4eta) + d(eps L + R + 2eta) - S0(L)
/// Both must be strictly positive for the remainders to be negligible
/// against the leading interaction term.
struct ErrorBudget {
    double s0_L = 0.0;
    double two_d = 0.0;       // 2 d(L-R-4eta)
    double mixed_d = 0.0;     // d(L-R-4eta) + d(eps L + R + 2eta)
    double margin_pair = 0.0;
    double margin_mixed = 0.0;
    bool pass = false;
};

inline ErrorBudget error_budget(double L, double R, double eps, double eta, double B = 1.0) {
    if (!(L > 2.0 * R)) throw std::invalid_argument("error_budget: L <= 2R");
    if (!(eps > 0.0) || eta < 0.0) throw std::invalid_argument("error_budget: bad eps/eta");
    ModelParams p{B, R, 1.0};
    ErrorBudget r;
    r.s0_L = tunneling_action(p, 0.0, L).s0;
    r.two_d = 2.0 * agmon_distance(p, L - R - 4.0 * eta);
    r.mixed_d = agmon_distance(p, L - R - 4.0 * eta) + agmon_distance(p, eps * L + R + 2.0 * eta);
    r.margin_pair = r.two_d - r.s0_L;
    r.margin_mixed = r.mixed_d - r.s0_L;
    r.pass = r.margin_pair > 0.0 && r.margin_mixed > 0.0;
    return r;
}

}  // namespace magnl
