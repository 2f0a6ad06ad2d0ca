#pragma once

#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "magnl/phase.hpp"
#include "magnl/types.hpp"

namespace magnl {

struct SaddleQuadOptions {
    double trunc_c = 5.0;          // truncate at |x2| <= C h^{1/4}
    double tail_tol = 1e-10;       // tail magnitude triggering C doubling
    int max_doublings = 4;
    double shift_factor = 1.0;     // fraction of x2* to shift (tests use 0.9)
    bool check_analytic = false;   // Cauchy-box residual assertion
    double quad_tol = 1e-11;
};

/// Exponentially small oscillatory integral
///   int_R exp(-s(0,x2)/h) a(x2) dx2
/// evaluated along the shifted contour R + x2*. `phase` is the analytic
/// phase x2 -> s(0,x2), `amp` the analytic amplitude in log form. The
/// result is returned in log form with the critical value factored out.
template <class PhaseFn, class AmpFn>
LogComplex saddle_shifted_integral_log(PhaseFn&& phase, AmpFn&& amp, double h,
                                       const SaddleData& sd, SaddleQuadOptions opt = {}) {
    const Complex shift = opt.shift_factor * sd.x2_star;
    auto log_integrand = [&](double t) -> Complex {
        Complex z = Complex(t, 0.0) + shift;
        Complex s = phase(z);
        LogComplex a = amp(z);
        return Complex(-s.real() / h + a.log_abs, -s.imag() / h + a.phase);
    };

    const double width = std::sqrt(h / sd.hess22);
    double X = opt.trunc_c * std::pow(h, 0.25);
    X = std::max(X, 6.0 * width);

    Complex ref = log_integrand(0.0);
    for (int attempt = 0;; ++attempt) {
        double tail = std::max(std::exp((log_integrand(X) - ref).real()),
                               std::exp((log_integrand(-X) - ref).real()));
        if (tail < opt.tail_tol || attempt >= opt.max_doublings) {
            if (tail >= opt.tail_tol)
                throw std::runtime_error("saddle_shifted_integral: truncation tail above tolerance");
            break;
        }
        X *= 2.0;
    }

    if (opt.check_analytic) {
        // Cauchy box on a thin band below the shifted contour (a full box
        // down to the real axis is exact on paper but the magnitudes there
        // exceed the contour scale by e^{O(1/h)} and drown the residual)
        auto f_at = [&](Complex z) -> Complex {
            Complex s = phase(z);
            LogComplex a = amp(z);
            return std::polar(std::exp(-s.real() / h + a.log_abs - ref.real()),
                              -s.imag() / h + a.phase - ref.imag());
        };
        const Complex inner = 0.9 * shift;
        const Complex rung = shift - inner;
        using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
        Complex loop =
            GK::integrate([&](double t) { return f_at(Complex(t, 0.0) + inner); }, -X, X, 10,
                          1e-9) +
            GK::integrate([&](double s) { return f_at(Complex(X, 0.0) + inner + s * rung) * rung; },
                          0.0, 1.0, 10, 1e-9) -
            GK::integrate([&](double t) { return f_at(Complex(t, 0.0) + shift); }, -X, X, 10,
                          1e-9) -
            GK::integrate([&](double s) { return f_at(Complex(-X, 0.0) + inner + s * rung) * rung; },
                          0.0, 1.0, 10, 1e-9);
        double scale = GK::integrate(
            [&](double t) { return std::abs(f_at(Complex(t, 0.0) + shift)); }, -X, X, 10, 1e-9);
        if (std::abs(loop) > 1e-6 * scale)
            throw std::runtime_error("saddle_shifted_integral: integrand fails Cauchy-box check");
    }

    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto g = [&](double t) -> Complex {
        Complex lf = log_integrand(t) - ref;
        return std::polar(std::exp(lf.real()), lf.imag());
    };
    // integrate the saddle window and the two tails separately; the window
    // carries the Gaussian mass on scale sqrt(h/hess22)
    double W = std::min(X, 8.0 * width);
    Complex q = GK::integrate(g, -W, W, 15, opt.quad_tol);
    if (X > W) {
        q += GK::integrate(g, W, X, 15, opt.quad_tol);
        q += GK::integrate(g, -X, -W, 15, opt.quad_tol);
    }
    return LogComplex::from_log(ref.real() + std::log(std::abs(q)), ref.imag() + std::arg(q));
}

/// Convenience overload for O(1) amplitudes.
template <class PhaseFn>
LogComplex saddle_shifted_integral(PhaseFn&& phase, std::function<Complex(Complex)> amp,
                                   double h, const SaddleData& sd, SaddleQuadOptions opt = {}) {
    return saddle_shifted_integral_log(
        std::forward<PhaseFn>(phase), [&](Complex z) { return LogComplex::from(amp(z)); }, h,
        sd, opt);
}

}  // namespace magnl
