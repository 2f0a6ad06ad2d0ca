#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "magnl/types.hpp"

namespace magnl {

/// Half-line de Gennes model -v'' + (t-xi)^2 v on [0, inf), Neumann at 0.
struct HalfLineProblem {
    double xi = 0.76;
    double t_max = 0.0;  // 0 -> auto xi + 12
    int nodes = 6000;

    double tmax() const { return t_max > 0.0 ? t_max : xi + 12.0; }
};

namespace detail {

/// Numerov sweep from t_max toward 0 for -y'' + ((t-xi)^2 - mu) y = 0.
/// Returns y'(0)/max|y| (one-sided 4th order) and the node count.
struct ShootResult {
    double f0 = 0.0;   // scaled y'(0)
    int nodes = 0;     // sign changes of y in (0, t_max)
};

inline ShootResult numerov_shoot(double xi, double mu, double t_max, int n,
                                 std::vector<double>* store_y = nullptr) {
    const double dt = t_max / n;
    auto f = [&](double t) { double u = t - xi; return u * u - mu; };
    std::vector<double> y(static_cast<std::size_t>(n) + 1, 0.0);
    y[n] = 0.0;
    y[n - 1] = 1e-200;
    const double c = dt * dt / 12.0;
    int nodes = 0;
    for (int i = n - 1; i >= 1; --i) {
        double ti = i * dt;
        double yi = y[i], yp = y[i + 1];
        double num = 2.0 * yi * (1.0 + 5.0 * c * f(ti)) - yp * (1.0 - c * f(ti + dt));
        double ym = num / (1.0 - c * f(ti - dt));
        y[i - 1] = ym;
        if ((ym > 0.0 && yi < 0.0) || (ym < 0.0 && yi > 0.0)) ++nodes;
        double a = std::abs(ym);
        if (a > 1e100) {
            for (int j = i - 1; j <= n; ++j) y[j] /= a;
        }
    }
    double scale = 0.0;
    for (int i = 0; i <= std::min(n, 8); ++i) scale = std::max(scale, std::abs(y[i]));
    if (scale == 0.0) scale = 1.0;
    double d0 = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) /
                (12.0 * dt);
    if (store_y) *store_y = std::move(y);
    return {d0 / scale, nodes};
}

/// Ground eigenvalue at fixed step count (no extrapolation).
inline double mu_shoot_raw(double xi, double t_max, int n) {
    auto F = [&](double mu) { return numerov_shoot(xi, mu, t_max, n).f0; };
    // bracket the lowest root: walk up until the Neumann mismatch changes
    // sign with zero interior nodes
    double lo = std::max(0.05, xi < 0.0 ? 1.0 + xi * xi - 0.5 : 0.05);
    double flo = F(lo);
    double hi = lo;
    double step = 0.05;
    for (int k = 0; k < 400; ++k) {
        hi = lo + step;
        double fhi = F(hi);
        if ((flo < 0.0) != (fhi < 0.0)) break;
        lo = hi;
        flo = fhi;
        if (k > 40) step *= 1.3;
    }
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(F, lo, hi, tol, it);
    return 0.5 * (r.first + r.second);
}

}  // namespace detail

/// Ground eigenvalue mu(xi) by Numerov shooting with Richardson
/// extrapolation (O(dt^4) base scheme).
inline double mu_halfline_shoot(const HalfLineProblem& p) {
    double m1 = detail::mu_shoot_raw(p.xi, p.tmax(), p.nodes);
    double m2 = detail::mu_shoot_raw(p.xi, p.tmax(), 2 * p.nodes);
    return m2 + (m2 - m1) / 15.0;
}

/// Ground eigenvalue mu(xi) from the staggered-grid symmetric tridiagonal
/// discretization (natural Neumann at 0, Dirichlet cap), Richardson in dt.
inline double mu_halfline_fd(const HalfLineProblem& p) {
    auto smallest = [&](int n) {
        const double t_max = p.tmax();
        const double dt = t_max / n;
        std::vector<double> diag(n), off(n - 1, -1.0 / (dt * dt));
        for (int i = 0; i < n; ++i) {
            double t = (i + 0.5) * dt;
            double u = t - p.xi;
            double lap = (i == 0 || i == n - 1) ? 1.0 : 2.0;  // natural at 0
            if (i == n - 1) lap = 2.0;                         // Dirichlet cap
            diag[i] = lap / (dt * dt) + u * u;
        }
        // Sturm bisection for the smallest eigenvalue
        auto count_below = [&](double mu) {
            int cnt = 0;
            double d = diag[0] - mu;
            if (d < 0.0) ++cnt;
            for (int i = 1; i < n; ++i) {
                d = (diag[i] - mu) - off[i - 1] * off[i - 1] / d;
                if (d == 0.0) d = -1e-300;
                if (d < 0.0) ++cnt;
            }
            return cnt;
        };
        double lo = 0.0, hi = 4.0 + p.xi * p.xi;
        while (count_below(hi) < 1) hi *= 2.0;
        for (int it = 0; it < 120 && hi - lo > 1e-14 * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            if (count_below(mid) >= 1) hi = mid; else lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    double m1 = smallest(p.nodes);
    double m2 = smallest(2 * p.nodes);
    return (4.0 * m2 - m1) / 3.0;
}

/// d mu / d xi by the Feynman-Hellmann identity -2 <(t-xi)> on the shooting
/// eigenfunction (converged at the same grid, Simpson weights).
inline double mu_halfline_derivative(double xi, double mu, double t_max, int n) {
    std::vector<double> y;
    detail::numerov_shoot(xi, mu, t_max, n, &y);
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    for (double& v : y) v /= ymax;
    const double dt = t_max / n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        double t = i * dt;
        num += w * (t - xi) * y[i] * y[i];
        den += w * y[i] * y[i];
    }
    return -2.0 * num / den;
}

/// Universal constants of the half-line model.
struct DeGennesResult {
    double theta0 = 0.0;
    double xi0 = 0.0;
    double k0 = 0.0;
    double delta0 = 0.0;  // (1 - theta0)/2
};

/// Boundary profile v(t) = int_0^inf exp(-(s^2/4 + t s - sqrt(Theta0) s))
/// s^{delta0 - 1} ds, evaluated for complex t on the closed lower half
/// plane (the Appendix-B contour uses t = -i tau).
inline Complex v_profile_c(Complex t, double theta0) {
    const double delta0 = 0.5 * (1.0 - theta0);
    const double s0 = std::sqrt(theta0);
    auto f = [&](double s) -> Complex {
        Complex ex = -(0.25 * s * s - s0 * s) - t * s;
        return std::exp(ex + (delta0 - 1.0) * std::log(s));
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    Complex a = ts.integrate(f, 0.0, 1.0, 1e-13);
    boost::math::quadrature::exp_sinh<double> es;
    auto g = [&](double u) -> Complex { return f(1.0 + u); };
    Complex b = es.integrate(g, 1e-13);
    return a + b;
}

inline double v_profile(double t, double theta0) { return v_profile_c(Complex(t, 0.0), theta0).real(); }

/// dv/dt = -int s * integrand ds (by differentiation under the integral).
inline double v_profile_derivative(double t, double theta0) {
    const double delta0 = 0.5 * (1.0 - theta0);
    const double s0 = std::sqrt(theta0);
    auto f = [&](double s) {
        return -std::exp(-(0.25 * s * s + t * s - s0 * s) + delta0 * std::log(s));
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    auto g = [&](double u) { return f(1.0 + u); };
    return ts.integrate(f, 0.0, 1.0, 1e-13) + es.integrate(g, 1e-13);
}

/// K0 with K0^{-2} = 2 pi int_0^inf exp(-(t^2 - 2 t sqrt(Theta0))) v(t)^2 dt.
inline double k0_constant(double theta0) {
    const double s0 = std::sqrt(theta0);
    auto f = [&](double t) {
        double v = v_profile(t, theta0);
        return std::exp(-(t * t - 2.0 * t * s0)) * v * v;
    };
    boost::math::quadrature::exp_sinh<double> es;
    double integral = es.integrate(f, 1e-10);
    return 1.0 / std::sqrt(2.0 * M_PI * integral);
}

namespace detail {

/// Minimizer of the discrete mu_n(xi) at one fixed grid: golden bracket
/// followed by Newton on the grid-consistent Feynman-Hellmann derivative.
inline double xi_min_on_grid(double t_max, int n, double xi_lo, double xi_hi) {
    auto deriv = [&](double xi) {
        double m = mu_shoot_raw(xi, t_max, n);
        return mu_halfline_derivative(xi, m, t_max, n);
    };
    double xi = 0.5 * (xi_lo + xi_hi);
    for (int it = 0; it < 60; ++it) {
        double d1 = deriv(xi);
        const double dd = 2e-3;
        double d2 = (deriv(xi + dd) - deriv(xi - dd)) / (2.0 * dd);
        if (!(d2 > 0.0)) break;
        double step = d1 / d2;
        xi -= step;
        if (std::abs(step) < 1e-12) break;
    }
    return xi;
}

}  // namespace detail

/// Solves the half-line model: minimizes mu(xi) by golden-section bracketing
/// plus grid-consistent Newton refinement, Richardson-extrapolated over a
/// grid doubling, then assembles the derived constants.
inline DeGennesResult solve_degennes(int nodes = 6000) {
    auto mu = [&](double xi) { return mu_halfline_shoot({xi, 0.0, nodes}); };
    // golden section on [0.5, 1.1] to localize the minimum
    double a = 0.5, b = 1.1;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = mu(x1), f2 = mu(x2);
    for (int it = 0; it < 25; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = mu(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = mu(x2);
        }
        if (b - a < 1e-3) break;
    }
    const double t_max = 0.5 * (a + b) + 12.0;
    double xi_c = detail::xi_min_on_grid(t_max, nodes, a, b);
    double xi_f = detail::xi_min_on_grid(t_max, 2 * nodes, a, b);
    DeGennesResult r;
    r.xi0 = xi_f + (xi_f - xi_c) / 15.0;  // Numerov is O(dt^4)
    r.theta0 = mu(r.xi0);
    r.delta0 = 0.5 * (1.0 - r.theta0);
    r.k0 = k0_constant(r.theta0);
    return r;
}

/// Cached constants (the model is parameter-free).
inline const DeGennesResult& degennes_constants() {
    static const DeGennesResult r = solve_degennes();
    return r;
}

}  // namespace magnl
