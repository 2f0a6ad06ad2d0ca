#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "magnl/degennes.hpp"
#include "magnl/kummer.hpp"
#include "magnl/model.hpp"
#include "magnl/types.hpp"

namespace magnl {

namespace detail {

/// Natural cubic spline through (x_i, y_i), strictly increasing x.
struct CubicSpline {
    std::vector<double> x, y, m2;  // m2: second derivatives

    void build(std::vector<double> xs, std::vector<double> ys) {
        x = std::move(xs);
        y = std::move(ys);
        const std::size_t n = x.size();
        m2.assign(n, 0.0);
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        // Thomas solve on the interior
        for (std::size_t i = 2; i + 1 < n; ++i) {
            double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m2[i] = (d[i] - c[i] * (i + 2 < n ? m2[i + 1] : 0.0)) / b[i];
            if (i == 1) break;
        }
    }

    double eval(double xv) const {
        auto it = std::upper_bound(x.begin(), x.end(), xv);
        std::size_t i = std::min(x.size() - 2, std::max<std::size_t>(1, it - x.begin()) - 1);
        double h = x[i + 1] - x[i];
        double A = (x[i + 1] - xv) / h, B = (xv - x[i]) / h;
        return A * y[i] + B * y[i + 1] +
               ((A * A * A - A) * m2[i] + (B * B * B - B) * m2[i + 1]) * h * h / 6.0;
    }

    double deriv(double xv) const {
        auto it = std::upper_bound(x.begin(), x.end(), xv);
        std::size_t i = std::min(x.size() - 2, std::max<std::size_t>(1, it - x.begin()) - 1);
        double h = x[i + 1] - x[i];
        double A = (x[i + 1] - xv) / h, B = (xv - x[i]) / h;
        return (y[i + 1] - y[i]) / h +
               ((1.0 - 3.0 * A * A) * m2[i] + (3.0 * B * B - 1.0) * m2[i + 1]) * h / 6.0;
    }
};

}  // namespace detail

/// Neumann mismatch F(mu) = d/dr log(r^m I(r^2; mu)) at r = R; the fiber
/// ground energy is its root. Both terms are O(1/h); the root is well
/// separated inside the standard bracket.
inline double neumann_mismatch(const ModelParams& p, double m, double mu) {
    auto kv = kummer_integral_r2(p, m, mu, Complex(p.R * p.R, 0.0));
    return m / p.R + 2.0 * p.R * kv.dlog_dr2.real();
}

/// Ground eigenvalue of the fiber operator L_{h,m} through the Kummer
/// representation: bracketed root of the Neumann condition, tolerance
/// 1e-12 relative in mu. m may be real (used by the calibration).
inline double fiber_ground_energy(const ModelParams& p, double m) {
    p.validate();
    const double theta0 = degennes_constants().theta0;
    const double scale = p.B * p.h;
    double lo = 0.55 * theta0 * scale;
    double hi = 0.999 * scale;
    auto F = [&](double mu) { return neumann_mismatch(p, m, mu); };
    double flo = F(lo), fhi = F(hi);
    if ((flo < 0.0) == (fhi < 0.0)) {
        // diagnostic scan for the error report
        std::ostringstream os;
        os << "fiber_ground_energy: no sign change in bracket; F scan:";
        for (int i = 0; i <= 12; ++i) {
            double mu = lo + (hi - lo) * i / 12.0;
            os << " (" << mu / scale << "," << F(mu) << ")";
        }
        throw std::runtime_error(os.str());
    }
    boost::math::tools::eps_tolerance<double> tol(48);
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(F, lo, hi, flo, fhi, tol, it);
    return 0.5 * (r.first + r.second);
}

/// Brute-force oracle: symmetric staggered finite-difference discretization
/// of the radial fiber operator with natural Neumann at R and a Dirichlet
/// cap, smallest eigenvalue by Sturm bisection, Richardson-extrapolated.
struct FdFiberOptions {
    int nodes = 4096;
    double cap_widths = 20.0;  // cap at R + cap_widths * sqrt(h/B)
    bool richardson = true;
    double* disagreement = nullptr;  // optional: |extrapolation step|
};

inline double fd_fiber_mu(const ModelParams& p, double m, FdFiberOptions opt = {}) {
    p.validate();
    const double r_cap = p.R + opt.cap_widths * p.layer_width();
    auto smallest = [&](int n) {
        const double dr = (r_cap - p.R) / n;
        std::vector<double> diag(n), off(n - 1);
        const double h2 = p.h * p.h;
        for (int i = 0; i < n; ++i) {
            double r = p.R + (i + 0.5) * dr;
            double rin = p.R + i * dr, rout = p.R + (i + 1) * dr;
            double v = p.h * m - 0.5 * p.B * r * r;
            double flux_in = (i == 0) ? 0.0 : rin;  // natural Neumann at R
            diag[i] = h2 * (flux_in + rout) / (r * dr * dr) + v * v / (r * r);
        }
        for (int i = 0; i + 1 < n; ++i) {
            double r0 = p.R + (i + 0.5) * dr, r1 = r0 + dr;
            off[i] = -h2 * (p.R + (i + 1) * dr) / (dr * dr * std::sqrt(r0 * r1));
        }
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
        double lo = 0.0, hi = 2.0 * p.B * p.h;
        while (count_below(hi) < 1) hi *= 2.0;
        for (int it = 0; it < 140 && hi - lo > 1e-15 * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            if (count_below(mid) >= 1) hi = mid; else lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    double m1 = smallest(opt.nodes);
    if (!opt.richardson) return m1;
    double m2 = smallest(2 * opt.nodes);
    double ext = (4.0 * m2 - m1) / 3.0;
    if (opt.disagreement) *opt.disagreement = std::abs(ext - m2);
    return ext;
}

/// A solved, normalized fiber eigenpair. The radial part w(r) = C r^m
/// I(r^2) is kept in log form; an optional table of log w on [R, r_table]
/// supports the 2D overlap quadratures.
struct KummerEigenpair {
    ModelParams params;
    double m = 0.0;
    double mu = 0.0;
    double delta = 0.0;
    double log_c = 0.0;  // normalization, C > 0 real
    double neumann_residual = 0.0;
    double norm_residual = 0.0;
    double r_table = 0.0;
    detail::CubicSpline logw_spline;

    /// log of the radial magnitude log|w(r)| = log_c + m log r + log I.
    double logw(double r) const {
        auto kv = kummer_integral_r2(params, m, mu, Complex(r * r, 0.0));
        return log_c + m * std::log(r) + kv.I.log_abs;
    }
    double logw_fast(double r) const { return logw_spline.eval(r); }

    /// d/dr log w(r) = m/r + 2 r I'/I (real radius).
    double dlogw(double r) const {
        auto kv = kummer_integral_r2(params, m, mu, Complex(r * r, 0.0));
        return m / r + 2.0 * r * kv.dlog_dr2.real();
    }
};

/// Eigenfunction value and gradient at a point, in log form.
struct EigenfunctionValue {
    LogComplex value;
    LogComplex grad_x;
    LogComplex grad_y;
};

inline EigenfunctionValue eigenfunction_eval(const KummerEigenpair& pair, Vec2 x) {
    const double r2 = x.x * x.x + x.y * x.y;
    auto kv = kummer_integral_r2(pair.params, pair.m, pair.mu, Complex(r2, 0.0));
    const Complex z(x.x, x.y);
    const double theta = std::arg(z);
    EigenfunctionValue out;
    out.value = LogComplex::from_log(
        pair.log_c + 0.5 * pair.m * std::log(r2) + kv.I.log_abs, pair.m * theta + kv.I.phase);
    // grad = value * (m/z * (1, i) + 2 (x, y) * I'/I)
    Complex gx = pair.m / z + 2.0 * x.x * kv.dlog_dr2;
    Complex gy = pair.m / z * Complex(0.0, 1.0) + 2.0 * x.y * kv.dlog_dr2;
    out.grad_x = out.value * gx;
    out.grad_y = out.value * gy;
    return out;
}

/// Complex-radius evaluation of the scalar radial profile w(r) (the
/// analytic continuation used on the shifted contour); r^m uses the
/// principal branch, valid on Re(r) > 0.
inline LogComplex radial_eval_complex(const KummerEigenpair& pair, Complex r) {
    auto kv = kummer_integral_r2(pair.params, pair.m, pair.mu, r * r);
    Complex lr = std::log(r);
    return LogComplex::from_log(pair.log_c + pair.m * lr.real() + kv.I.log_abs,
                                pair.m * lr.imag() + kv.I.phase);
}

/// Builds a normalized eigenpair for integer or real fiber index m.
/// When table_r_max > R the attached log-w table extends out to it (the
/// boundary-layer zone is always tabulated; the normalization integral runs
/// on the spline).
inline KummerEigenpair make_eigenpair(const ModelParams& p, double m, double table_r_max = 0.0) {
    KummerEigenpair pair;
    pair.params = p;
    pair.m = m;
    pair.mu = fiber_ground_energy(p, m);
    pair.delta = 0.5 - pair.mu / (2.0 * p.B * p.h);
    pair.log_c = 0.0;

    const double lw = p.layer_width();
    const double r_layer = p.R + 45.0 * lw;

    // normalization 1 = 2 pi int r e^{2 log w} dr by fixed-order Gauss
    // panels of boundary-layer width on direct Kummer evaluations
    auto f_log = [&](double r) {
        auto kv = kummer_integral_r2(p, m, pair.mu, Complex(r * r, 0.0));
        return std::log(r) + 2.0 * (m * std::log(r) + kv.I.log_abs);
    };
    double fmax = -1e300;
    for (int i = 0; i <= 90; ++i)
        fmax = std::max(fmax, f_log(p.R + (r_layer - p.R) * i / 90.0));
    using GL = boost::math::quadrature::gauss<double, 16>;
    auto panel_sum = [&](int npanel) {
        double acc = 0.0;
        const double pw = (r_layer - p.R) / npanel;
        for (int i = 0; i < npanel; ++i) {
            double a = p.R + i * pw;
            acc += GL::integrate([&](double r) { return std::exp(f_log(r) - fmax); }, a,
                                 a + pw);
        }
        return acc;
    };
    double q = panel_sum(45);
    pair.log_c = -0.5 * (std::log(2.0 * M_PI) + fmax + std::log(q));
    // independent re-quadrature with a different panelization
    pair.norm_residual = std::abs(panel_sum(31) / q - 1.0);

    if (table_r_max > p.R) {
        pair.r_table = std::max(table_r_max, r_layer);
        std::vector<double> rs, ys;
        const int n1 = 1400;
        for (int i = 0; i <= n1; ++i) rs.push_back(p.R + (r_layer - p.R) * i / n1);
        if (pair.r_table > r_layer + 1e-12) {
            const int n2 = 2200;
            for (int i = 1; i <= n2; ++i)
                rs.push_back(r_layer + (pair.r_table - r_layer) * i / n2);
        }
        ys.reserve(rs.size());
        for (double r : rs) ys.push_back(pair.logw(r));
        pair.logw_spline.build(std::move(rs), std::move(ys));
    }

    // Neumann residual, scaled against the individual terms
    double mm = neumann_mismatch(p, m, pair.mu);
    pair.neumann_residual = std::abs(mm) / (m / p.R);
    return pair;
}

/// Ground energies of the two fibers bracketing xi_h, with the crossing
/// flag when they coincide at the h^2 gap scale.
struct MuPair {
    double mu_minus = 0.0;
    double mu_plus = 0.0;
    long long m_minus = 0;
    long long m_plus = 0;
    double e = 0.0;
    bool crossing = false;
};

inline MuPair mu_pm(const ModelParams& p, const SpectralConstants& c) {
    auto s = xi_and_e(p, c);
    MuPair out;
    out.m_minus = s.m_minus;
    out.m_plus = s.m_plus;
    out.e = s.e;
    out.mu_minus = fiber_ground_energy(p, static_cast<double>(s.m_minus));
    out.mu_plus = fiber_ground_energy(p, static_cast<double>(s.m_plus));
    double rate = c.calibrated ? c.c0_rate(p.R) : p.B;
    out.crossing = std::abs(out.mu_minus - out.mu_plus) < 1e-4 * p.h * p.h * rate;
    return out;
}

/// Minimizes mu over real m (the fiber family is well defined for real m);
/// used to calibrate the constant term of xi_h.
inline double fiber_mu_argmin_m(const ModelParams& p, double m_lo, double m_hi,
                                double tol = 1e-7) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = m_lo, b = m_hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = fiber_ground_energy(p, x1), f2 = fiber_ground_energy(p, x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = fiber_ground_energy(p, x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = fiber_ground_energy(p, x2);
        }
    }
    // parabolic polish from three samples
    double xm = 0.5 * (a + b), d = std::max(tol, 1e-7);
    double fm = fiber_ground_energy(p, xm);
    double fp = fiber_ground_energy(p, xm + d), fq = fiber_ground_energy(p, xm - d);
    double denom = fp - 2.0 * fm + fq;
    if (denom > 0.0) xm += 0.5 * d * (fq - fp) / denom;
    return xm;
}

}  // namespace magnl
