#pragma once

#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "magnl/calibrate.hpp"
#include "magnl/fiber.hpp"
#include "magnl/laplace.hpp"
#include "magnl/phase.hpp"

namespace magnl {

/// Smooth radial cutoff equal to 1 on |x| < L-R-2eta and 0 on |x| > L-R-eta
/// with a C^2 quintic transition.
struct CutoffSpec {
    double L = 6.0;
    double R = 1.0;
    double eta = 0.0;  // 0 -> default 0.05 (L - 2R)

    double eta_eff() const { return eta > 0.0 ? eta : 0.05 * (L - 2.0 * R); }
    double inner() const { return L - R - 2.0 * eta_eff(); }
    double outer() const { return L - R - eta_eff(); }

    double operator()(double rho) const {
        double a = inner(), b = outer();
        if (rho <= a) return 1.0;
        if (rho >= b) return 0.0;
        double t = (rho - a) / (b - a);
        return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    }
};

enum class WMethod { real_axis, saddle_shifted };

struct InteractionCoefficient {
    int sigma = -1;        // +1 or -1
    int sigma_prime = -1;
    double ell = 0.0;
    LogComplex value;
    WMethod method = WMethod::saddle_shifted;
    bool converged = true;       // conditioning of the real-axis quadrature
    double cancellation = 1.0;   // |result| over the envelope-scale estimate
};

namespace detail {

/// Log of the w-integrand e^{-iB l x2/(2h)} Phi^s(l/2,x2) d1 Phi^{s'}(l/2,x2)
/// for complex x2 (analytic continuation through the Kummer integral).
inline LogComplex w_integrand(const KummerEigenpair& ps, const KummerEigenpair& psp,
                              double ell, Complex x2, double tol = 1e-11) {
    const auto& p = ps.params;
    const Complex z(0.5 * ell, 0.0);
    const Complex zz = z + Complex(0.0, 1.0) * x2;       // l/2 + i x2
    const Complex r2 = 0.25 * ell * ell + x2 * x2;       // analytic radius^2
    auto ks = kummer_integral_r2(p, ps.m, ps.mu, r2, tol);
    auto kp = kummer_integral_r2(p, psp.m, psp.mu, r2, tol);
    const Complex logz = std::log(zz);
    // d1 Phi^{s'} = Phi^{s'} * (m'/zz + l * I'/I)  (d r^2/d x1 = l at x1=l/2)
    const Complex dfac = psp.m / zz + ell * kp.dlog_dr2;
    const Complex osc = Complex(0.0, -0.5 * p.B * ell / p.h) * x2;
    LogComplex out;
    out.log_abs = ps.log_c + psp.log_c + (ps.m + psp.m) * logz.real() + ks.I.log_abs +
                  kp.I.log_abs + std::log(std::abs(dfac)) + osc.real();
    out.phase = (ps.m + psp.m) * logz.imag() + ks.I.phase + kp.I.phase + std::arg(dfac) +
                osc.imag();
    return out;
}

/// Trapezoid quadrature of exp(LF(t)) over [-X, X] with the reference value
/// factored at t = 0. For analytic integrands with Gaussian-type decay the
/// trapezoid rule converges geometrically once the step resolves both the
/// envelope width and the oscillation rate; a coarse/fine doubling check
/// guards the step choice.
template <class LogF>
LogComplex integrate_log(LogF&& lf, double X, double width, double /*tol*/) {
    Complex ref = lf(0.0);
    double rate = 1.0 / width;
    for (double tp : {-0.9 * X, -0.4 * X, 0.3 * X, 0.8 * X}) {
        double d = 1e-3 * width;
        Complex a = lf(tp), b = lf(tp + d);
        if (a.real() - ref.real() < -50.0) continue;  // dead tail
        rate = std::max(rate, std::abs((b.imag() - a.imag()) / d));
    }
    double dt = std::min(width / 32.0, 0.3 / rate);
    int n = static_cast<int>(std::ceil(2.0 * X / dt));
    n += n % 2;
    n = std::min(n, 60000);
    dt = 2.0 * X / n;
    Complex q(0.0, 0.0), q_coarse(0.0, 0.0);
    for (int i = 0; i <= n; ++i) {
        double t = -X + i * dt;
        Complex v = (i == n / 2) ? Complex(0.0, 0.0) : lf(t) - ref;
        if (v.real() < -45.0) continue;
        double wgt = (i == 0 || i == n) ? 0.5 : 1.0;
        Complex term = std::polar(std::exp(v.real()), v.imag());
        q += wgt * term;
        if (i % 2 == 0) q_coarse += (i == 0 || i == n ? 0.5 : 1.0) * term;
    }
    q *= dt;
    q_coarse *= 2.0 * dt;
    if (std::abs(q - q_coarse) > 1e-6 * std::abs(q))
        throw std::runtime_error("integrate_log: trapezoid doubling check failed");
    return LogComplex::from_log(ref.real() + std::log(std::abs(q)),
                                ref.imag() + std::arg(q));
}

}  // namespace detail

/// The hopping line integral w_l^{ss'} = h^2 int e^{-iBlx2/(2h)}
/// Phi^s(l/2,x2) d1 Phi^{s'}(l/2,x2) dx2, via direct oscillatory quadrature
/// on the real axis or through the complex shift to the saddle contour.
inline InteractionCoefficient w_line_integral(const KummerEigenpair& ps,
                                              const KummerEigenpair& psp, double ell,
                                              WMethod method = WMethod::saddle_shifted) {
    const auto& p = ps.params;
    InteractionCoefficient out;
    out.sigma = 0;
    out.sigma_prime = 0;
    out.ell = ell;
    out.method = method;

    const double q = 1.0 - std::pow(2.0 * p.R / ell, 2);
    if (method == WMethod::real_axis) {
        const double decay = std::sqrt(2.0 * p.h / (p.B * q));
        const double X = 12.0 * decay;
        auto lf = [&](double t) -> Complex {
            LogComplex v = detail::w_integrand(ps, psp, ell, Complex(t, 0.0));
            return Complex(v.log_abs, v.phase);
        };
        LogComplex integral = detail::integrate_log(lf, X, decay, 1e-11);
        out.value = integral * LogComplex::from_log(2.0 * std::log(p.h), 0.0);
        // conditioning: compare against the no-cancellation envelope scale
        double env_peak = detail::w_integrand(ps, psp, ell, Complex(0.0, 0.0)).log_abs;
        out.cancellation = std::exp(integral.log_abs - env_peak - std::log(decay));
        out.converged = out.cancellation > 1e-8;
    } else {
        auto sd = saddle(ell, p.R, p.B);
        const double width = std::sqrt(p.h / sd.hess22);
        auto lf = [&](double t) -> Complex {
            // the inner evaluation only needs accuracy relative to the
            // Gaussian envelope at this t
            double drop = 0.5 * sd.hess22 * t * t / p.h;
            double tol = std::clamp(1e-11 * std::exp(std::min(drop, 40.0)), 1e-11, 1e-4);
            LogComplex v = detail::w_integrand(ps, psp, ell, Complex(t, 0.0) + sd.x2_star, tol);
            return Complex(v.log_abs, v.phase);
        };
        // truncation after the Gaussian envelope has died; the actual
        // integrand is re-checked at the edge and X doubled on failure
        double X = std::max(std::min(5.0 * std::pow(p.h, 0.25), 10.0 * width), 7.5 * width);
        double ref0 = lf(0.0).real();
        for (int attempt = 0;; ++attempt) {
            double edge = std::max(lf(X).real(), lf(-X).real()) - ref0;
            if (edge < std::log(1e-9)) break;
            if (attempt >= 3)
                throw std::runtime_error("w_line_integral: truncation tail above tolerance");
            X *= 2.0;
        }
        LogComplex integral = detail::integrate_log(lf, X, width, 1e-11);
        out.value = integral * LogComplex::from_log(2.0 * std::log(p.h), 0.0);
        out.cancellation = 1.0;
    }
    return out;
}

/// Fit of the h-independent constant C_l in
///   w_l^{ss'} = C_l K_l^{(s+s') e0} h e^{-S_h(l)/h} (1 + o(1))
/// along an e0-sequence, with a sqrt(h) nuisance term; the error bar is the
/// residual-based standard error of the constant.
struct CellFit {
    Complex c_ell;
    double err = 0.0;
    std::vector<double> h;
    std::vector<Complex> c_est;
};

inline CellFit extract_C_ell(double B, double R, const SpectralConstants& c, int sigma,
                             int sigma_prime, double ell, double e0,
                             const std::vector<long long>& ns) {
    CellFit fit;
    const double logK = std::log(k_factor(ell, R));
    for (long long n : ns) {
        double h = e0_sequence_h(B, R, c, e0, n);
        ModelParams p{B, R, h};
        auto s = xi_and_e(p, c);
        double m_s = static_cast<double>(sigma > 0 ? s.m_plus : s.m_minus);
        double m_sp = static_cast<double>(sigma_prime > 0 ? s.m_plus : s.m_minus);
        auto pa = make_eigenpair(p, m_s);
        auto pb = (m_s == m_sp) ? pa : make_eigenpair(p, m_sp);
        auto w = w_line_integral(pa, pb, ell, WMethod::saddle_shifted);
        double sh = tunneling_action(p, c.theta0, ell).sh;
        double pow_e0 = (sigma + sigma_prime) * e0;
        double lg = w.value.log_abs + sh / h - std::log(h) - pow_e0 * logK;
        fit.h.push_back(h);
        fit.c_est.push_back(std::polar(std::exp(lg), w.value.phase));
    }
    // least squares C + b sqrt(h) on real and imaginary parts
    const std::size_t k = fit.h.size();
    Eigen::MatrixXd A(k, 2);
    Eigen::VectorXd br(k), bi(k);
    for (std::size_t i = 0; i < k; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = std::sqrt(fit.h[i]);
        br(i) = fit.c_est[i].real();
        bi(i) = fit.c_est[i].imag();
    }
    Eigen::Vector2d sr = A.colPivHouseholderQr().solve(br);
    Eigen::Vector2d si = A.colPivHouseholderQr().solve(bi);
    fit.c_ell = Complex(sr(0), si(0));
    double rss = (A * sr - br).squaredNorm() + (A * si - bi).squaredNorm();
    fit.err = std::sqrt(rss / std::max<std::size_t>(1, 2 * k - 4));
    return fit;
}

/// Centered two-disc overlap <Psi_l^s, Psi_r^{s'}> with radial cutoffs, by
/// iterated oscillatory quadrature over the lens between the discs. Uses
/// the eigenpair log-w tables; pairs must carry tables covering radius
/// ell - R.
inline LogComplex overlap_centered(const KummerEigenpair& ps, const KummerEigenpair& psp,
                                   double ell, const CutoffSpec& cutoff,
                                   double tol = 1e-9) {
    const auto& p = ps.params;
    const double X1 = 0.5 * ell - p.R - 1e-12;
    const double qcurv = 1.0 - std::pow(2.0 * p.R / ell, 2);
    const double X2 = 14.0 * std::sqrt(2.0 * p.h / (p.B * qcurv));
    const Complex iOne(0.0, 1.0);

    auto lf = [&](double x1, double x2) -> Complex {
        Vec2 yl{x1 + 0.5 * ell, x2}, yr{x1 - 0.5 * ell, x2};
        double rl = norm(yl), rr = norm(yr);
        double cl = cutoff(rl), cr = cutoff(rr);
        if (cl <= 0.0 || cr <= 0.0 || rl < p.R || rr < p.R)
            return Complex(-1e300, 0.0);
        double la = std::log(cl) + std::log(cr) + ps.logw_fast(rl) + psp.logw_fast(rr);
        double ph = -0.5 * p.B * ell * x2 / p.h + ps.m * arg(yl) - psp.m * arg(yr);
        return Complex(la, ph);
    };

    Complex ref = lf(0.0, 0.0);
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto inner = [&](double x1) -> Complex {
        auto g = [&](double x2) -> Complex {
            Complex v = lf(x1, x2) - ref;
            if (v.real() < -700.0) return {0.0, 0.0};
            return std::polar(std::exp(v.real()), v.imag());
        };
        return GK::integrate(g, -X2, X2, 12, tol);
    };
    Complex q = GK::integrate(inner, -X1, X1, 12, tol);
    if (q == Complex(0.0, 0.0)) return {};
    return LogComplex::from_log(ref.real() + std::log(std::abs(q)), ref.imag() + std::arg(q));
}

/// Norm deficit of a cut-off quasimode: ||chi Phi||^2 = 1 - deficit, with
/// deficit = 2 pi int (1 - chi^2) e^{2 log w} r dr (radial, exact angular
/// integration).
inline double self_overlap_deficit(const KummerEigenpair& pair, const CutoffSpec& cutoff) {
    const auto& p = pair.params;
    const double a = cutoff.inner();
    auto f_log = [&](double r) {
        double chi = cutoff(r);
        double one_m = (1.0 - chi) * (1.0 + chi);
        if (one_m <= 0.0) return -1e300;
        return std::log(one_m) + std::log(r) + 2.0 * pair.logw(r);
    };
    double fmax = -1e300;
    const double b = cutoff.outer() + 6.0 * p.layer_width();
    for (int i = 0; i <= 40; ++i) fmax = std::max(fmax, f_log(a + (b - a) * i / 40.0));
    if (fmax < -600.0) return 0.0;
    auto f = [&](double r) {
        double v = f_log(r);
        return v < -700.0 + fmax ? 0.0 : std::exp(v - fmax);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double q = GK::integrate(f, a, b, 12, 1e-9);
    // the tail beyond b is dominated by e^{2 log w} decay; extend once
    q += GK::integrate(f, b, b + 12.0 * p.layer_width(), 12, 1e-9);
    return 2.0 * M_PI * std::exp(fmax) * q;
}

/// General overlap <Psi_alpha^s, Psi_beta^{s'}>, reduced to the centered
/// configuration by the exact magnetic-translation and rotation phases.
inline LogComplex overlap(const KummerEigenpair& ps, const KummerEigenpair& psp, Vec2 alpha,
                          Vec2 beta, const CutoffSpec& cutoff, double tol = 1e-9) {
    const auto& p = ps.params;
    if (norm(beta - alpha) < 1e-14) {
        if (ps.m == psp.m) {
            double d = self_overlap_deficit(ps, cutoff);
            return LogComplex::from(Complex(1.0 - d, 0.0));
        }
        // distinct angular momenta at the same centre: exactly orthogonal
        // (radial cutoff preserves the angular decomposition)
        return {};
    }
    const double ell = norm(beta - alpha);
    double theta = arg(beta - alpha);
    LogComplex centered = overlap_centered(ps, psp, ell, cutoff, tol);
    double phase = 0.5 * p.B * wedge(alpha, beta) / p.h + (ps.m - psp.m) * theta;
    return centered * LogComplex::from_log(0.0, phase);
}

/// Phase-dressed interaction entry
///   W_ab^{ss'} = (-1)^{m_s'} e^{iB a^b/(2h)} e^{i(m_s - m_s') arg(b-a)}
///                (w^{ss'} + w^{s's})
/// from the symmetrized line integrals.
inline LogComplex w_entry(LogComplex w_sum, double m_sigma, double m_sigma_prime, Vec2 alpha,
                          Vec2 beta, double B, double h) {
    double phase = 0.5 * B * wedge(alpha, beta) / h +
                   (m_sigma - m_sigma_prime) * arg(beta - alpha) +
                   M_PI * static_cast<double>(std::llround(m_sigma_prime));
    return w_sum * LogComplex::from_log(0.0, phase);
}

/// Finite-patch Gram-orthonormalized effective matrices.
struct PatchOptions {
    double eps = 0.4;       // interaction shell L <= l <= L(1+eps)
    double eta = 0.0;       // cutoff margin; 0 -> default
    bool spinful = false;
    double quad_tol = 1e-9;
};

struct PatchMatrices {
    Eigen::MatrixXcd G;       // overlap (Gram) matrix
    Eigen::MatrixXcd W;       // phase-dressed interaction block
    Eigen::MatrixXcd M_tilde; // <L psi, psi> model
    Eigen::MatrixXcd M;       // G^{-1/2} M_tilde G^{-1/2}
    std::vector<double> mu_diag;
    double gram_dev = 0.0;    // ||G - I||_2
    double residual = 0.0;    // ||M - D - W||_2
};

inline PatchMatrices gram_patch(const ModelParams& p, const SpectralConstants& c,
                                const std::vector<Vec2>& centers, PatchOptions opt = {}) {
    if (centers.size() > 25)
        throw std::invalid_argument("gram_patch: patch larger than 25 centres");
    Geometry geo{centers};
    geo.validate(p.R);
    const double L = centers.size() > 1 ? geo.min_distance() : 4.0 * p.R;
    CutoffSpec cutoff{L, p.R, opt.eta};
    auto budget = error_budget(L, p.R, opt.eps, cutoff.eta_eff(), p.B);
    if (!budget.pass)
        throw std::invalid_argument("gram_patch: error budget margins not positive");

    auto s = xi_and_e(p, c);
    const double shell = L * (1.0 + opt.eps);
    const double table_r = shell + 2.0 * p.R;

    std::vector<KummerEigenpair> pairs;  // per spin channel
    std::vector<double> mus;
    if (opt.spinful) {
        pairs.push_back(make_eigenpair(p, static_cast<double>(s.m_minus), table_r));
        pairs.push_back(make_eigenpair(p, static_cast<double>(s.m_plus), table_r));
    } else {
        pairs.push_back(make_eigenpair(p, static_cast<double>(s.m_nearest), table_r));
    }
    for (auto& pr : pairs) mus.push_back(pr.mu);
    const int ns = static_cast<int>(pairs.size());
    const int n = static_cast<int>(centers.size()) * ns;
    auto idx = [&](int site, int spin) { return site * ns + spin; };

    // cache centred quantities by (distance, spin, spin')
    std::map<std::tuple<long long, int, int>, LogComplex> ov_cache, w_cache;
    auto key_of = [](double ell, int a, int b) {
        return std::make_tuple(static_cast<long long>(std::llround(ell * 1e10)), a, b);
    };
    auto ov_at = [&](double ell, int a, int b) {
        auto key = key_of(ell, a, b);
        auto it = ov_cache.find(key);
        if (it == ov_cache.end())
            it = ov_cache
                     .emplace(key, overlap_centered(pairs[a], pairs[b], ell, cutoff,
                                                    opt.quad_tol))
                     .first;
        return it->second;
    };
    auto w_sum_at = [&](double ell, int a, int b) {
        auto key = key_of(ell, a, b);
        auto it = w_cache.find(key);
        if (it == w_cache.end()) {
            auto wab = w_line_integral(pairs[a], pairs[b], ell);
            auto wba = (a == b) ? wab : w_line_integral(pairs[b], pairs[a], ell);
            LogComplex sum = (a == b) ? wab.value * LogComplex::from(Complex(2.0, 0.0))
                                      : log_add(wab.value, wba.value);
            it = w_cache.emplace(key, sum).first;
        }
        return it->second;
    };

    PatchMatrices out;
    out.mu_diag.resize(n);
    out.G = Eigen::MatrixXcd::Zero(n, n);
    out.W = Eigen::MatrixXcd::Zero(n, n);
    out.M_tilde = Eigen::MatrixXcd::Zero(n, n);

    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (int a = 0; a < ns; ++a) {
            double deficit = self_overlap_deficit(pairs[a], cutoff);
            out.G(idx(i, a), idx(i, a)) = 1.0 - deficit;
            out.mu_diag[idx(i, a)] = mus[a];
            out.M_tilde(idx(i, a), idx(i, a)) = mus[a] * (1.0 - deficit);
        }
    }
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            double ell = norm(centers[j] - centers[i]);
            if (ell > shell) continue;  // beyond the interaction shell the
                                        // entries are below the error order
            for (int a = 0; a < ns; ++a) {
                for (int b = 0; b < ns; ++b) {
                    double theta = arg(centers[j] - centers[i]);
                    double red_phase = 0.5 * p.B * wedge(centers[i], centers[j]) / p.h +
                                       (pairs[a].m - pairs[b].m) * theta;
                    Complex g = (ov_at(ell, a, b) * LogComplex::from_log(0.0, red_phase))
                                    .value();
                    Complex w = w_entry(w_sum_at(ell, a, b), pairs[a].m, pairs[b].m,
                                        centers[i], centers[j], p.B, p.h)
                                    .value();
                    out.G(idx(i, a), idx(j, b)) = g;
                    out.G(idx(j, b), idx(i, a)) = std::conj(g);
                    out.W(idx(i, a), idx(j, b)) = w;
                    out.W(idx(j, b), idx(i, a)) = std::conj(w);
                    Complex mt = w + 0.5 * (mus[a] + mus[b]) * g;
                    out.M_tilde(idx(i, a), idx(j, b)) = mt;
                    out.M_tilde(idx(j, b), idx(i, a)) = std::conj(mt);
                }
            }
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.G);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("gram_patch: Gram matrix not positive definite");
    Eigen::VectorXd inv_sqrt = es.eigenvalues().array().rsqrt();
    Eigen::MatrixXcd gis = es.eigenvectors() * inv_sqrt.asDiagonal() *
                           es.eigenvectors().adjoint();
    out.M = gis * out.M_tilde * gis;
    out.gram_dev = (out.G - Eigen::MatrixXcd::Identity(n, n)).operatorNorm();
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) D(i, i) = out.mu_diag[i];
    out.residual = (out.M - D - out.W).operatorNorm();
    return out;
}

}  // namespace magnl
