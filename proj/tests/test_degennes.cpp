#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "magnl/degennes.hpp"

using namespace magnl;
using Catch::Approx;

TEST_CASE("half-line ground state at xi = 0 is the harmonic oscillator") {
    // Neumann even extension of -y'' + t^2 y on the line: mu = 1
    CHECK(mu_halfline_shoot({0.0, 12.0, 4000}) == Approx(1.0).epsilon(1e-9));
    CHECK(mu_halfline_fd({0.0, 12.0, 6000}) == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("shooting and finite differences agree") {
    for (double xi : {0.3, 0.7682, 1.2}) {
        double ms = mu_halfline_shoot({xi, 0.0, 4000});
        double mf = mu_halfline_fd({xi, 0.0, 8000});
        CHECK(ms == Approx(mf).epsilon(1e-8));
    }
}

TEST_CASE("mu(xi) dips below 1 for xi > 0 and respects the xi^2 bound") {
    double m = mu_halfline_shoot({0.75, 0.0, 3000});
    CHECK(m < 1.0);
    // potential bound (t - xi)^2 >= xi^2 on t >= 0 for xi < 0
    double mn = mu_halfline_shoot({-0.5, 12.0, 3000});
    CHECK(mn >= 0.25);
}

TEST_CASE("de Gennes constants") {
    const auto& dg = degennes_constants();
    CHECK(dg.theta0 > 0.0);
    CHECK(dg.theta0 < 1.0);
    CHECK(dg.theta0 == Approx(0.5901).margin(5e-5));
    CHECK(std::abs(dg.xi0 * dg.xi0 - dg.theta0) < 1e-7);
    CHECK(dg.k0 > 0.0);
    CHECK(dg.delta0 == Approx(0.5 * (1.0 - dg.theta0)));

    // stability under grid refinement
    auto coarse = solve_degennes(3000);
    CHECK(coarse.theta0 == Approx(dg.theta0).margin(1e-6));

    // the minimum is quadratic: mu''(xi0) > 0 by finite differences
    double dd = 1e-2;
    double m0 = mu_halfline_shoot({dg.xi0, 0.0, 4000});
    double mp = mu_halfline_shoot({dg.xi0 + dd, 0.0, 4000});
    double mm = mu_halfline_shoot({dg.xi0 - dd, 0.0, 4000});
    double curv = (mp - 2.0 * m0 + mm) / (dd * dd);
    CHECK(curv > 0.1);
}

TEST_CASE("boundary profile v(t)") {
    const auto& dg = degennes_constants();
    // positive and decaying
    double prev = 1e300;
    for (double t : {0.0, 0.3, 1.0, 2.0, 4.0, 7.0}) {
        double v = v_profile(t, dg.theta0);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
    // ODE residual -v'' + 2 (t - sqrt(Theta0)) v' + (1 - Theta0) v = 0,
    // second derivative by central differences of the quadrature; the FD
    // step grows with t to balance truncation against quadrature roundoff
    for (double t = 0.1; t <= 5.0; t += 0.7) {
        double fd = 2e-4 * (1.0 + t * t);
        double v = v_profile(t, dg.theta0);
        double vp = v_profile_derivative(t, dg.theta0);
        double vpp = (v_profile(t + fd, dg.theta0) - 2.0 * v + v_profile(t - fd, dg.theta0)) /
                     (fd * fd);
        double resid = -vpp + 2.0 * (t - dg.xi0) * vp + (1.0 - dg.theta0) * v;
        double scale = std::abs(vpp) + std::abs(2.0 * (t - dg.xi0) * vp) +
                       std::abs((1.0 - dg.theta0) * v);
        CHECK(std::abs(resid) < 1e-6 * scale);
    }
    // v' two ways: quadrature of -s * integrand vs finite differences
    for (double t : {0.2, 1.1, 3.0}) {
        double fd = 1e-5;
        double vp_q = v_profile_derivative(t, dg.theta0);
        double vp_fd =
            (v_profile(t + fd, dg.theta0) - v_profile(t - fd, dg.theta0)) / (2.0 * fd);
        CHECK(vp_q == Approx(vp_fd).epsilon(1e-6));
    }
}

TEST_CASE("normalization constant K0") {
    const auto& dg = degennes_constants();
    CHECK(dg.k0 > 0.0);
    // dual-scheme stability: midpoint-rule oracle on a truncated window
    const double s0 = std::sqrt(dg.theta0);
    double acc = 0.0;
    const int n = 6000;
    const double tmax = 12.0;
    const double dt = tmax / n;
    for (int i = 0; i < n; ++i) {
        double t = (i + 0.5) * dt;
        double v = v_profile(t, dg.theta0);
        acc += std::exp(-(t * t - 2.0 * t * s0)) * v * v * dt;
    }
    double k0_mid = 1.0 / std::sqrt(2.0 * M_PI * acc);
    CHECK(dg.k0 == Approx(k0_mid).epsilon(1e-6));
}
