#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "qgraph/potential.hpp"
#include "qgraph/propagator.hpp"

using namespace qgraph;

namespace {

// Fourth-order Runge-Kutta reference for -u'' + q u = lambda u written
// as the first-order system (u, u')' = (u', (q - lambda) u), used as an
// independent oracle for the transfer matrices.
Eigen::Matrix2d rk4_transfer(const EdgePotential& q, double length, double lambda, int steps) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    const double h = length / steps;
    auto rhs = [&](double x, const Eigen::Matrix2d& y) {
        Eigen::Matrix2d d;
        const double w = q.eval(std::min(std::max(x, 0.0), length), length) - lambda;
        d.row(0) = y.row(1);
        d.row(1) = w * y.row(0);
        return d;
    };
    for (int i = 0; i < steps; ++i) {
        const double x = i * h;
        const Eigen::Matrix2d k1 = rhs(x, m);
        const Eigen::Matrix2d k2 = rhs(x + 0.5 * h, m + 0.5 * h * k1);
        const Eigen::Matrix2d k3 = rhs(x + 0.5 * h, m + 0.5 * h * k2);
        const Eigen::Matrix2d k4 = rhs(x + h, m + h * k3);
        m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return m;
}

// Composite Simpson quadrature of f over [a, b].
template <class F>
double simpson(F f, double a, double b, int panels) {
    double acc = f(a) + f(b);
    for (int i = 1; i < 2 * panels; ++i) {
        const double x = a + (b - a) * i / (2.0 * panels);
        acc += (i % 2 == 1 ? 4.0 : 2.0) * f(x);
    }
    return acc * (b - a) / (6.0 * panels);
}

// RK4 with a constant coefficient w = q - lambda, so no stage ever
// samples the potential at a jump.
Eigen::Matrix2d rk4_constant(double w, double width, int steps) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    const double h = width / steps;
    Eigen::Matrix2d a;
    a << 0.0, 1.0, w, 0.0;
    for (int i = 0; i < steps; ++i) {
        const Eigen::Matrix2d k1 = a * m;
        const Eigen::Matrix2d k2 = a * (m + 0.5 * h * k1);
        const Eigen::Matrix2d k3 = a * (m + 0.5 * h * k2);
        const Eigen::Matrix2d k4 = a * (m + h * k3);
        m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return m;
}

// Transfer over [0, upto] for a piecewise-constant potential given by
// its piece ends and values, integrating each smooth piece separately.
Eigen::Matrix2d rk4_piecewise(const std::vector<double>& ends, const std::vector<double>& vals,
                              double upto, double lambda, int steps_per_unit) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    double x0 = 0.0;
    for (size_t i = 0; i < vals.size() && x0 < upto; ++i) {
        const double x1 = std::min(ends[i], upto);
        if (x1 > x0) {
            const int steps =
                std::max(1, static_cast<int>(std::ceil((x1 - x0) * steps_per_unit)));
            m = rk4_constant(vals[i] - lambda, x1 - x0, steps) * m;
        }
        x0 = ends[i];
    }
    return m;
}

}  // namespace

TEST_CASE("fundamental pair against the standard library") {
    double c = 0.0, s = 0.0;
    // oscillatory branch: omega > 0
    trig_cs(4.0, 0.7, c, s);
    CHECK(c == doctest::Approx(std::cos(2.0 * 0.7)).epsilon(1e-14));
    CHECK(s == doctest::Approx(std::sin(2.0 * 0.7) / 2.0).epsilon(1e-14));
    // hyperbolic branch: omega < 0
    trig_cs(-9.0, 0.4, c, s);
    CHECK(c == doctest::Approx(std::cosh(3.0 * 0.4)).epsilon(1e-14));
    CHECK(s == doctest::Approx(std::sinh(3.0 * 0.4) / 3.0).epsilon(1e-14));
    // zero
    trig_cs(0.0, 0.9, c, s);
    CHECK(c == doctest::Approx(1.0));
    CHECK(s == doctest::Approx(0.9));
    // the Taylor branch joins the two sides continuously
    double cp = 0.0, sp = 0.0, cm = 0.0, sm = 0.0;
    trig_cs(1e-13, 0.9, cp, sp);
    trig_cs(-1e-13, 0.9, cm, sm);
    CHECK(cp == doctest::Approx(cm).epsilon(1e-12));
    CHECK(sp == doctest::Approx(sm).epsilon(1e-12));
    // large-argument phase reduction stays on the unit circle
    trig_cs(1e12, 3.1, c, s);
    const double k = std::sqrt(1e12);
    CHECK(c * c + k * k * s * s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant-piece transfer matrix closed form") {
    const double omega = 5.5, h = 0.8, k = std::sqrt(omega);
    const Eigen::Matrix2d m = piece_propagator(omega, h);
    CHECK(m(0, 0) == doctest::Approx(std::cos(k * h)).epsilon(1e-14));
    CHECK(m(0, 1) == doctest::Approx(std::sin(k * h) / k).epsilon(1e-14));
    CHECK(m(1, 0) == doctest::Approx(-k * std::sin(k * h)).epsilon(1e-14));
    CHECK(m(1, 1) == doctest::Approx(std::cos(k * h)).epsilon(1e-14));
    CHECK(wronskian_defect(m) <= 1e-14);
    // the hyperbolic branch cancels exponentially large terms, so its
    // determinant drifts a little further from one
    CHECK(wronskian_defect(piece_propagator(-17.0, 1.3)) <= 1e-10);
}

TEST_CASE("edge propagator on piecewise potentials matches an independent integrator") {
    const std::vector<double> ends = {0.4, 0.7, 1.0};
    const std::vector<double> vals = {1.5, -2.0, 0.5};
    const EdgePotential q = EdgePotential::piecewise({0.4, 0.7}, vals);
    for (double lambda : {-3.0, 0.0, 7.3, 48.0}) {
        const EdgePropagator prop(q, 1.0, lambda);
        const Eigen::Matrix2d ref = rk4_piecewise(ends, vals, 1.0, lambda, 40000);
        CHECK((prop.full() - ref).norm() <= 1e-9 * ref.norm());
        CHECK(wronskian_defect(prop.full()) <= 1e-13);
        // interior evaluation at a non-breakpoint
        const Eigen::Matrix2d mid = prop.at(0.55);
        const Eigen::Matrix2d ref_mid = rk4_piecewise(ends, vals, 0.55, lambda, 40000);
        CHECK((mid - ref_mid).norm() <= 1e-9 * ref_mid.norm());
        // apply_at agrees with the matrix action
        const Eigen::Vector2d u0(0.3, -1.1);
        CHECK((prop.apply_at(0.55, u0) - mid * u0).norm() <= 1e-14);
    }
}

TEST_CASE("sampled-potential scheme has fourth-order steps") {
    // q(x) = 3x is exactly representable by linear interpolation at any
    // node count, so refining the sample grid isolates the integrator
    // error of the fixed-step exponential scheme.
    const double lambda = 7.3;
    auto nodes = [](int n) {
        std::vector<double> v(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = 3.0 * i / (n - 1);
        return v;
    };
    const Eigen::Matrix2d ref =
        rk4_transfer(EdgePotential::sampled(1, nodes(9)), 1.0, lambda, 100000);
    const Eigen::Matrix2d c33 =
        EdgePropagator(EdgePotential::sampled(1, nodes(33)), 1.0, lambda).full();
    const Eigen::Matrix2d c65 =
        EdgePropagator(EdgePotential::sampled(1, nodes(65)), 1.0, lambda).full();
    const double e33 = (c33 - ref).norm();
    const double e65 = (c65 - ref).norm();
    CHECK(e33 <= 1e-6);
    CHECK(e65 < e33);
    CHECK(e33 / e65 >= 8.0);  // fourth order would give 16
    CHECK(wronskian_defect(c33) <= 1e-13);  // steps are exactly unimodular
}

TEST_CASE("solution inner products match dense quadrature") {
    const EdgePotential q = EdgePotential::piecewise({0.4, 0.7}, {1.5, -2.0, 0.5});
    const double lambda = 23.7;
    const EdgePropagator prop(q, 1.0, lambda);
    const Eigen::Vector2d u0(1.0, 0.25), v0(-0.4, 2.0);
    auto u = [&](double x) { return prop.apply_at(x, u0)[0]; };
    auto v = [&](double x) { return prop.apply_at(x, v0)[0]; };

    const double uv = simpson([&](double x) { return u(x) * v(x); }, 0.0, 1.0, 3000);
    CHECK(prop.l2_inner(u0, v0) == doctest::Approx(uv).epsilon(1e-9));

    // quadrature piece by piece so no node sits on a jump of q
    double quv = 0.0;
    double a = 0.0;
    for (const double end : {0.4, 0.7, 1.0}) {
        quv += q.eval(0.5 * (a + end), 1.0) *
               simpson([&](double x) { return u(x) * v(x); }, a, end, 1200);
        a = end;
    }
    CHECK(prop.potential_l2_inner(u0, v0) == doctest::Approx(quv).epsilon(1e-9));

    double sup = 0.0;
    for (int i = 0; i <= 20000; ++i) sup = std::max(sup, std::abs(u(i / 20000.0)));
    CHECK(prop.sup_abs(u0, 20000) == doctest::Approx(sup).epsilon(1e-5));
}

TEST_CASE("constant-piece product integrals in closed form") {
    const double omega = 6.1, h = 0.9, k = std::sqrt(omega);
    double icc = 0.0, ics = 0.0, iss = 0.0;
    piece_l2_moments(omega, h, icc, ics, iss);
    auto c = [&](double t) { return std::cos(k * t); };
    auto s = [&](double t) { return std::sin(k * t) / k; };
    CHECK(icc == doctest::Approx(simpson([&](double t) { return c(t) * c(t); }, 0.0, h, 2000))
                     .epsilon(1e-10));
    CHECK(ics == doctest::Approx(simpson([&](double t) { return c(t) * s(t); }, 0.0, h, 2000))
                     .epsilon(1e-10));
    CHECK(iss == doctest::Approx(simpson([&](double t) { return s(t) * s(t); }, 0.0, h, 2000))
                     .epsilon(1e-10));
}
