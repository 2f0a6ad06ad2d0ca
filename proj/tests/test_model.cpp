#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "magnl/model.hpp"

using namespace magnl;
using Catch::Approx;

namespace {
const ModelParams unit{1.0, 1.0, 0.1};
}

TEST_CASE("agmon distance closed form") {
    CHECK(agmon_distance(unit, 1.0) == 0.0);
    // frozen values from an independent high-precision evaluation of
    // (B/4)(r^2-R^2) - (BR^2/2) ln(r/R)
    CHECK(agmon_distance(unit, 2.0) == Approx(0.4034264097200273).epsilon(1e-12));
    CHECK(agmon_distance(unit, 5.0) == Approx(5.195281043782950).epsilon(1e-12));
    CHECK_THROWS_AS(agmon_distance(unit, 0.5), std::invalid_argument);
}

TEST_CASE("agmon distance is C1 flat at R and convex") {
    ModelParams p{2.0, 1.5, 0.05};
    const double R = p.R;
    const double fd = 1e-6;
    double d_prime_R = (agmon_distance(p, R + fd) - agmon_distance(p, R)) / fd;
    CHECK(std::abs(d_prime_R) < 1e-5);
    double prev = 0.0;
    for (double r = R + 0.05; r < R + 4.0; r += 0.05) {
        double d2 = (agmon_distance(p, r + fd) - 2.0 * agmon_distance(p, r) +
                     agmon_distance(p, r - fd)) /
                    (fd * fd);
        CHECK(d2 > 0.0);
        double d = agmon_distance(p, r);
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("tunneling action closed form and integral identity") {
    auto a = tunneling_action(unit, 0.0, 2.0);
    CHECK(a.s0 == Approx(0.0).margin(1e-14));

    auto a6 = tunneling_action(unit, 0.0, 6.0);
    CHECK(a6.s0 == Approx(6.722534200199484).epsilon(1e-12));

    // S0(l) = 2 B R^2 int_1^{l/2R} sqrt(u^2-1) du; Simpson oracle after the
    // substitution u = cosh(w) which removes the endpoint singularity
    auto s0_quad = [&](double ell, double B, double R) {
        auto f = [](double w) { double s = std::sinh(w); return s * s; };
        double lo = 0.0, hi = std::acosh(ell / (2.0 * R));
        int n = 4000;
        double s = 0.0, dw = (hi - lo) / n;
        for (int i = 0; i < n; ++i) {
            double w0 = lo + i * dw, w2 = w0 + dw, w1 = 0.5 * (w0 + w2);
            s += (f(w0) + 4.0 * f(w1) + f(w2)) * dw / 6.0;
        }
        return 2.0 * B * R * R * s;
    };
    for (double ell : {2.5, 4.0, 6.0, 9.0}) {
        auto act = tunneling_action(unit, 0.0, ell);
        CHECK(act.s0 == Approx(s0_quad(ell, 1.0, 1.0)).epsilon(1e-9));
    }

    // sqrt(h) coefficient: S1 = 2 sqrt(Theta0 B R^2) ln K_l, with the
    // h-dependent full action S_h = S0 - sqrt(h) S1
    double theta0 = 0.59;
    ModelParams p{1.0, 1.0, 0.01};
    auto act = tunneling_action(p, theta0, 6.0);
    double lnK = std::log((6.0 + std::sqrt(32.0)) / 2.0);
    CHECK(act.s1 == Approx(2.0 * std::sqrt(theta0) * lnK).epsilon(1e-13));
    CHECK(act.sh == Approx(act.s0 - 0.1 * act.s1).epsilon(1e-13));
    CHECK_THROWS_AS(tunneling_action(unit, 0.59, 1.9), std::invalid_argument);
}

TEST_CASE("k factor") {
    CHECK(k_factor(2.0, 1.0) == Approx(1.0));
    CHECK(k_factor(6.0, 1.0) == Approx(3.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-14));
    // conjugate surd inverse and the log identity
    for (double ell : {2.2, 3.0, 6.0, 11.0}) {
        double K = k_factor(ell, 1.0);
        double Kinv = ell / 2.0 - std::sqrt(ell * ell / 4.0 - 1.0);
        CHECK(K * Kinv == Approx(1.0).epsilon(1e-12));
        CHECK(std::log(K) ==
              Approx(std::log((ell + std::sqrt(ell * ell - 4.0)) / 2.0)).epsilon(1e-13));
        CHECK(K >= 1.0);
    }
    CHECK_THROWS_AS(k_factor(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("wedge phase algebra") {
    CHECK(wedge_phase({0, 0}, {3, 4}, 1.0, 0.1) == Complex(1.0, 0.0));
    // alpha ^ beta = 1 with B/h = 2 pi gives e^{i pi} = -1
    Complex ph = wedge_phase({1, 0}, {0, 1}, 2.0 * M_PI, 1.0);
    CHECK(ph.real() == Approx(-1.0).margin(1e-14));
    CHECK(ph.imag() == Approx(0.0).margin(1e-14));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        Vec2 a{U(rng), U(rng)}, b{U(rng), U(rng)}, c{U(rng), U(rng)};
        double B = 0.5 + std::abs(U(rng)), h = 0.05 + std::abs(U(rng));
        // antisymmetry
        Complex p1 = wedge_phase(a, b, B, h) * wedge_phase(b, a, B, h);
        CHECK(std::abs(p1 - Complex(1.0, 0.0)) < 1e-12);
        // modulus exactly 1
        CHECK(std::abs(std::abs(wedge_phase(a, c, B, h)) - 1.0) < 1e-15);
        // bilinearity of the exponent: phase(a, b+c) = phase(a,b) phase(a,c)
        Complex lhs = wedge_phase(a, b + c, B, h);
        Complex rhs = wedge_phase(a, b, B, h) * wedge_phase(a, c, B, h);
        CHECK(std::abs(lhs - rhs) < 1e-11);
    }
}

TEST_CASE("xi splitting into nearest integers") {
    SpectralConstants c;
    c.theta0 = 0.25;  // sqrt(theta0 * flux) = 0.5*sqrt(flux): easy to steer
    c.calibrated = true;

    auto with_xi = [&](double target) {
        // xi = flux/2 + 0.5 sqrt(flux) = target; solve the quadratic in
        // y = sqrt(flux)
        double y = 0.5 * (-1.0 + std::sqrt(1.0 + 8.0 * target));
        double flux = y * y;
        ModelParams p{1.0, 1.0, 1.0 / flux};
        return xi_and_e(p, c);
    };

    auto s1 = with_xi(10.3);
    CHECK(s1.xi == Approx(10.3).epsilon(1e-12));
    CHECK(s1.e == Approx(0.3).epsilon(1e-9));
    CHECK(s1.m_nearest == 10);
    CHECK(s1.m_minus == 10);
    CHECK(s1.m_plus == 11);
    CHECK_FALSE(s1.tie);

    auto s2 = with_xi(10.5);
    CHECK(s2.e == Approx(0.5).epsilon(1e-9));
    CHECK(s2.tie);
    CHECK(s2.m_nearest == 10);  // tie broken toward the smaller integer
    CHECK(s2.m_minus == 10);
    CHECK(s2.m_plus == 11);

    auto s3 = with_xi(10.7);
    CHECK(s3.e == Approx(0.3).epsilon(1e-9));
    CHECK(s3.m_nearest == 11);
    CHECK(s3.m_minus == 10);  // bracket pair keeps m_plus = m_minus + 1
    CHECK(s3.m_plus == 11);
    CHECK(s3.e0_signed == Approx(-0.3).epsilon(1e-9));
}

TEST_CASE("e(h) stays in [0,1/2] and m_nearest moves by unit steps") {
    SpectralConstants c;
    c.theta0 = 0.5901;
    c.c2 = 0.3;
    c.calibrated = true;
    long long prev = -1;
    for (double h = 0.2; h > 0.02; h *= 0.999) {
        auto s = xi_and_e({1.0, 1.0, h}, c);
        CHECK(s.e >= 0.0);
        CHECK(s.e <= 0.5 + 1e-15);
        if (prev >= 0) CHECK(std::abs(s.m_nearest - prev) <= 1);
        prev = s.m_nearest;
    }
}

TEST_CASE("e0 sequence round trip and monotonicity") {
    SpectralConstants c;
    c.theta0 = 0.5901060;
    c.c2 = -0.17;
    c.calibrated = true;
    for (double e0 : {-0.4, 0.0, 0.25, 0.5}) {
        double prev_h = 1e9;
        for (long long n = 5; n < 40; n += 7) {
            double h = e0_sequence_h(2.0, 0.8, c, e0, n);
            ModelParams p{2.0, 0.8, h};
            double xi = xi_of_h(p, c);
            CHECK(xi == Approx(static_cast<double>(n) + e0).epsilon(1e-12));
            CHECK(h < prev_h);
            prev_h = h;
        }
    }
    // bisection cross-check of the closed-form root at one point
    double h10 = e0_sequence_h(1.0, 1.0, c, 0.5, 10);
    double lo = h10 * 0.9, hi = h10 * 1.1;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double ximid = xi_of_h({1.0, 1.0, mid}, c);
        (ximid > 10.5 ? lo : hi) = mid;
    }
    CHECK(h10 == Approx(0.5 * (lo + hi)).epsilon(1e-9));
    CHECK_THROWS_AS(e0_sequence_h(1.0, 1.0, c, 0.5, -1), std::invalid_argument);
}

TEST_CASE("appendix error budget margins") {
    // L just above 6R: the pair inequality 2 d(L-R) > S0(L) holds
    auto r1 = error_budget(6.0 + 1e-3, 1.0, 0.4, 0.0);
    CHECK(r1.margin_pair > 0.0);

    // frozen closed-form values at (B=1, R=1, L=6, eta=0)
    auto r6 = error_budget(6.0, 1.0, 0.4, 0.0);
    CHECK(r6.two_d == Approx(10.390562087565900).epsilon(1e-12));
    CHECK(r6.s0_L == Approx(6.722534200199484).epsilon(1e-12));

    // lattice-scale hypothesis: L = 25R with eps = 0.4
    auto r25 = error_budget(25.0, 1.0, 0.4, 0.0);
    CHECK(r25.margin_pair > 0.0);
    CHECK(r25.margin_mixed > 0.0);
    CHECK(r25.pass);

    // small eps destroys the mixed margin for moderate L
    auto bad = error_budget(6.0, 1.0, 0.05, 0.0);
    CHECK(bad.margin_mixed < 0.0);
    CHECK_FALSE(bad.pass);
}
