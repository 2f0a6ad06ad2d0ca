#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnl {

using Complex = std::complex<double>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double wedge(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double arg(Vec2 a) { return std::atan2(a.y, a.x); }

/// Physical parameters of the magnetic Neumann problem outside discs of
/// radius R: field strength B and semiclassical parameter h, all > 0.
struct ModelParams {
    double B = 1.0;
    double R = 1.0;
    double h = 0.1;

    void validate() const {
        if (!(B > 0.0) || !(R > 0.0) || !(h > 0.0))
            throw std::invalid_argument("ModelParams: B, R, h must be strictly positive");
        if (!std::isfinite(B * R * R / h))
            throw std::invalid_argument("ModelParams: BR^2/h not finite");
    }

    /// Dimensionless flux-like combination BR^2/h.
    double flux() const { return B * R * R / h; }
    /// Boundary-layer width sqrt(h/B).
    double layer_width() const { return std::sqrt(h / B); }
};

/// Universal constants of the single-obstacle expansion. theta0, xi0, k0
/// come from the half-line model; c1, c0 (the e0-offset) and c2 are
/// calibration outputs of the fiber solver. Until calibrate_constants has
/// run, `calibrated` is false and c2 defaults to 0.
struct SpectralConstants {
    double theta0 = 0.0;   // de Gennes constant, in (0,1)
    double xi0 = 0.0;      // minimizer of mu(xi), equals sqrt(theta0)
    double k0 = 0.0;       // normalization constant K0 > 0
    double c1 = 0.0;       // coefficient of h^{3/2} sqrt(B)/R
    double c0_univ = 0.0;  // offset in the h^2 term (e0^2 + c0_univ)
    double c2 = 0.0;       // constant term of xi_h
    bool calibrated = false;

    double delta0() const { return 0.5 * (1.0 - theta0); }
    /// c0 = 3 c1 sqrt(theta0) / R^2, the h^2 gap rate for radius R.
    double c0_rate(double R) const { return 3.0 * c1 * std::sqrt(theta0) / (R * R); }
};

/// Finite set of obstacle centers with minimal pairwise distance L > 2R.
struct Geometry {
    std::vector<Vec2> centers;

    double min_distance() const {
        double L = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers.size(); ++i)
            for (std::size_t j = i + 1; j < centers.size(); ++j)
                L = std::min(L, norm(centers[i] - centers[j]));
        return L;
    }

    void validate(double R) const {
        if (centers.size() >= 2) {
            double L = min_distance();
            if (!(L > 2.0 * R))
                throw std::invalid_argument("Geometry: obstacles overlap (min distance <= 2R)");
        }
    }
};

/// Complex number stored as log-magnitude plus phase, for quantities of
/// order exp(-S/h) that underflow doubles.
struct LogComplex {
    double log_abs = -std::numeric_limits<double>::infinity();
    double phase = 0.0;  // radians

    static LogComplex from(Complex z) {
        if (z == Complex(0.0, 0.0)) return {};
        return {std::log(std::abs(z)), std::arg(z)};
    }
    static LogComplex from_log(double la, double ph) { return {la, ph}; }

    Complex value() const {
        if (log_abs == -std::numeric_limits<double>::infinity()) return {0.0, 0.0};
        return std::polar(std::exp(log_abs), phase);
    }
    /// value() with the magnitude exp(log_abs - log_ref) instead; callers
    /// re-attach the reference scale.
    Complex value_scaled(double log_ref) const {
        return std::polar(std::exp(log_abs - log_ref), phase);
    }

    LogComplex operator*(const LogComplex& o) const {
        return {log_abs + o.log_abs, phase + o.phase};
    }
    LogComplex operator*(Complex z) const { return *this * from(z); }
    LogComplex operator/(const LogComplex& o) const {
        return {log_abs - o.log_abs, phase - o.phase};
    }
};

/// a + b evaluated in log-domain.
inline LogComplex log_add(const LogComplex& a, const LogComplex& b) {
    const LogComplex& big = (a.log_abs >= b.log_abs) ? a : b;
    const LogComplex& small = (a.log_abs >= b.log_abs) ? b : a;
    if (big.log_abs == -std::numeric_limits<double>::infinity()) return {};
    Complex s = Complex(1.0, 0.0) * std::polar(1.0, big.phase) +
                std::polar(std::exp(small.log_abs - big.log_abs), small.phase);
    if (s == Complex(0.0, 0.0)) return {};
    return {big.log_abs + std::log(std::abs(s)), std::arg(s)};
}

}  // namespace magnl
