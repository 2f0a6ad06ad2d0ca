#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "magnl/types.hpp"

namespace magnl {

/// Result of evaluating the radial Kummer integral
///   I(r^2) = int_0^inf exp(-B r^2 (1+2s)/(4h)) (1+s)^{m-delta} s^{delta-1} ds
/// in log-domain, together with the logarithmic derivative in r^2. The
/// integral is analytic in r^2 on Re(r^2) > 0, which is what the complex
/// contour shifts rely on.
struct KummerEval {
    LogComplex I;
    Complex dlog_dr2;  // I'(r^2) / I
};

inline KummerEval kummer_integral_r2(const ModelParams& p, double m, double mu, Complex r2,
                                    double tol = 1e-11) {
    const double delta = 0.5 - mu / (2.0 * p.B * p.h);
    if (!(delta > 0.0))
        throw std::invalid_argument("kummer_integral_r2: delta <= 0, representation invalid");
    if (!(r2.real() > 0.0))
        throw std::invalid_argument("kummer_integral_r2: Re(r^2) <= 0 outside analyticity domain");

    const double a = p.B / (4.0 * p.h);     // decay rate factor
    const double nu = m - delta;            // power of (1+s)
    const Complex c = a * r2;

    // complex exponent, with the magnitude part controlled by Re(r2)
    auto E = [&](double s) -> Complex { return -c * (1.0 + 2.0 * s) + nu * std::log1p(s); };
    auto Ere = [&](double s) { return -c.real() * (1.0 + 2.0 * s) + nu * std::log1p(s); };

    // interior maximum of the magnitude exponent (0 when the integrand is
    // decreasing from the endpoint)
    double s_peak = 0.0;
    if (nu > 0.0) s_peak = std::max(0.0, nu / (2.0 * c.real()) - 1.0);
    const Complex E0 = E(s_peak);
    const double Ere0 = Ere(s_peak);

    // truncation point: walk outward until 75 e-folds below the peak
    double width = (nu > 0.0) ? (1.0 + s_peak) / std::sqrt(nu) : 1.0 / (2.0 * c.real());
    double b = s_peak + width;
    for (int k = 0; k < 200 && Ere(b) - Ere0 > -75.0; ++k) b += width * std::pow(1.5, k);

    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto g = [&](double s) -> Complex {
        return std::exp(E(s) - E0 + (delta - 1.0) * std::log(s));
    };
    auto gs = [&](double s) -> Complex { return g(s) * s; };

    // tanh_sinh owns the singular head [0, s1]; adaptive Gauss-Kronrod the
    // smooth remainder (which may contain the interior peak)
    const double s1 = std::min(0.125 * std::max(s_peak, width), 0.5 * b);
    Complex J = ts.integrate(g, 0.0, s1, tol) + GK::integrate(g, s1, b, 15, tol);
    Complex J2 = ts.integrate(gs, 0.0, s1, tol) + GK::integrate(gs, s1, b, 15, tol);

    KummerEval out;
    out.I = LogComplex::from_log(E0.real() + std::log(std::abs(J)), E0.imag() + std::arg(J));
    out.dlog_dr2 = -a * (1.0 + 2.0 * J2 / J);
    return out;
}

/// Same integral with the first and second logarithmic derivatives in r^2
/// (used by the pointwise ODE-residual checks).
struct KummerEval2 {
    LogComplex I;
    Complex dlog_dr2;
    Complex d2log_dr2;  // I''(r^2)/I
};

inline KummerEval2 kummer_integral_moments(const ModelParams& p, double m, double mu,
                                           Complex r2) {
    const double delta = 0.5 - mu / (2.0 * p.B * p.h);
    if (!(delta > 0.0)) throw std::invalid_argument("kummer_integral_moments: delta <= 0");
    if (!(r2.real() > 0.0)) throw std::invalid_argument("kummer_integral_moments: Re(r^2) <= 0");
    const double a = p.B / (4.0 * p.h);
    const double nu = m - delta;
    const Complex c = a * r2;
    auto E = [&](double s) -> Complex { return -c * (1.0 + 2.0 * s) + nu * std::log1p(s); };
    auto Ere = [&](double s) { return -c.real() * (1.0 + 2.0 * s) + nu * std::log1p(s); };
    double s_peak = 0.0;
    if (nu > 0.0) s_peak = std::max(0.0, nu / (2.0 * c.real()) - 1.0);
    const Complex E0 = E(s_peak);
    const double Ere0 = Ere(s_peak);
    double width = (nu > 0.0) ? (1.0 + s_peak) / std::sqrt(nu) : 1.0 / (2.0 * c.real());
    double b = s_peak + width;
    for (int k = 0; k < 200 && Ere(b) - Ere0 > -75.0; ++k) b += width * std::pow(1.5, k);
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double s1 = std::min(0.125 * std::max(s_peak, width), 0.5 * b);
    auto moment = [&](int pw) {
        auto g = [&](double s) -> Complex {
            return std::exp(E(s) - E0 + (delta - 1.0) * std::log(s)) * std::pow(s, pw);
        };
        return ts.integrate(g, 0.0, s1, 1e-13) + GK::integrate(g, s1, b, 15, 1e-13);
    };
    Complex J = moment(0), J2 = moment(1), J3 = moment(2);
    KummerEval2 out;
    out.I = LogComplex::from_log(E0.real() + std::log(std::abs(J)), E0.imag() + std::arg(J));
    out.dlog_dr2 = -a * (1.0 + 2.0 * J2 / J);
    out.d2log_dr2 = a * a * (1.0 + 4.0 * J2 / J + 4.0 * J3 / J);
    return out;
}

}  // namespace magnl
