#include "qgraph/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgraph {

namespace {

// 2*pi split into high and low parts for compensated phase reduction.
constexpr double kTwoPiHi = 6.283185307179586232e+00;
constexpr double kTwoPiLo = 2.449293598294706414e-16;
constexpr double kInvTwoPi = 0.15915494309189533577;

// theta = k*h reduced modulo 2*pi, keeping the low-order bits of the
// product so the reduced phase is accurate to a few ulps even when
// theta is of order 1e5.
double reduced_phase(double k, double h) {
    double hi = k * h;
    double lo = std::fma(k, h, -hi);
    double n = std::nearbyint(hi * kInvTwoPi);
    double r = std::fma(-n, kTwoPiHi, hi);
    return r + std::fma(-n, kTwoPiLo, lo);
}

}  // namespace

void trig_cs(double omega, double h, double& c, double& s) {
    const double z = omega * h * h;
    if (std::abs(z) < 1e-8) {
        c = 1.0 - z * (0.5 - z / 24.0);
        s = h * (1.0 - z * (1.0 / 6.0 - z / 120.0));
        return;
    }
    if (omega > 0.0) {
        const double k = std::sqrt(omega);
        if (z > 1e8) {
            const double th = reduced_phase(k, h);
            c = std::cos(th);
            s = std::sin(th) / k;
        } else {
            const double th = k * h;
            c = std::cos(th);
            s = std::sin(th) / k;
        }
    } else {
        const double kappa = std::sqrt(-omega);
        const double a = kappa * h;
        if (a > 700.0)
            throw std::domain_error("spectral parameter too far below the spectrum");
        c = std::cosh(a);
        s = std::sinh(a) / kappa;
    }
}

Eigen::Matrix2d piece_propagator(double omega, double h) {
    double c, s;
    trig_cs(omega, h, c, s);
    Eigen::Matrix2d m;
    m << c, s, -omega * s, c;
    return m;
}

double wronskian_defect(const Eigen::Matrix2d& m) {
    return std::abs(m.determinant() - 1.0);
}

void piece_l2_moments(double omega, double h, double& icc, double& ics, double& iss) {
    const double z = omega * h * h;
    if (std::abs(z) < 1e-3) {
        icc = h * (1.0 - z / 3.0 + (2.0 / 15.0) * z * z - (2.0 / 315.0) * z * z * z);
        ics = h * h * (0.5 - z / 6.0 + z * z / 45.0 - z * z * z / 630.0);
        iss = h * h * h * (1.0 / 3.0 - (2.0 / 15.0) * z + (2.0 / 315.0) * z * z);
        return;
    }
    if (omega > 0.0) {
        const double k = std::sqrt(omega);
        const double s2 = std::sin(2.0 * k * h) / (4.0 * k);
        const double sh = std::sin(k * h);
        icc = 0.5 * h + s2;
        iss = (0.5 * h - s2) / omega;
        ics = sh * sh / (2.0 * omega);
    } else {
        const double kappa = std::sqrt(-omega);
        const double s2 = std::sinh(2.0 * kappa * h) / (4.0 * kappa);
        const double sh = std::sinh(kappa * h);
        icc = 0.5 * h + s2;
        iss = (0.5 * h - s2) / omega;
        ics = sh * sh / (2.0 * kappa * kappa);
    }
}

namespace {

// Exponential of the trace-free 2x2 matrix om via
// exp(om) = cosh(mu) I + sinh(mu)/mu om, mu^2 = -det(om).
Eigen::Matrix2d exp_tracefree(const Eigen::Matrix2d& om) {
    const double mu_sq = -(om(0, 0) * om(1, 1) - om(0, 1) * om(1, 0));
    double c, s;
    trig_cs(-mu_sq, 1.0, c, s);
    return c * Eigen::Matrix2d::Identity() + s * om;
}

// One fourth-order Magnus step for u'' = (q - lambda) u over
// [x0, x0 + h], sampling q at the two Gauss-Legendre nodes.
Eigen::Matrix2d magnus_step(const EdgePotential& q, double length, double lambda, double x0,
                            double h) {
    constexpr double kGaussOffset = 0.28867513459481288225;  // sqrt(3)/6
    const double w1 = lambda - q.eval(x0 + h * (0.5 - kGaussOffset), length);
    const double w2 = lambda - q.eval(x0 + h * (0.5 + kGaussOffset), length);
    const double wbar = 0.5 * (w1 + w2);
    const double gamma = std::sqrt(3.0) * h * h * (w2 - w1) / 12.0;
    Eigen::Matrix2d om;
    om << gamma, h, -h * wbar, -gamma;
    return exp_tracefree(om);
}

}  // namespace

EdgePropagator::EdgePropagator(const EdgePotential& q, double length, double lambda)
    : q_(&q), length_(length), lambda_(lambda) {
    if (!(length > 0.0)) throw std::invalid_argument("edge length must be positive");
    Eigen::Matrix2d cum = Eigen::Matrix2d::Identity();
    if (q.exact_pieces()) {
        double x0 = 0.0;
        for (const auto& [end, value] : q.pieces(length)) {
            Step st;
            st.x0 = x0;
            st.h = end - x0;
            st.omega = lambda - value;
            st.exact = true;
            st.mat = piece_propagator(st.omega, st.h);
            cum = st.mat * cum;
            st.cum = cum;
            steps_.push_back(st);
            x0 = end;
        }
    } else {
        // Fixed-step scheme: step bounded by the sample grid and by the
        // local oscillation scale.
        const int cells = std::max(1, q.sample_cells());
        const double grid_h = length / cells;
        const double osc_h = 0.1 / std::sqrt(1.0 + std::abs(lambda));
        const double target = std::min(grid_h, osc_h);
        int n = std::max(cells, static_cast<int>(std::ceil(length / target)));
        // Round up to a multiple of the grid so every step stays inside
        // one cell (q smooth within each step).
        n = cells * ((n + cells - 1) / cells);
        const double h = length / n;
        steps_.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            Step st;
            st.x0 = i * h;
            st.h = h;
            st.omega = lambda - q.eval(st.x0 + 0.5 * h, length);
            st.exact = false;
            st.mat = magnus_step(q, length, lambda, st.x0, h);
            cum = st.mat * cum;
            st.cum = cum;
            steps_.push_back(st);
        }
    }
    full_ = cum;
}

Eigen::Matrix2d EdgePropagator::partial_step(const Step& st, double dx) const {
    if (dx <= 0.0) return Eigen::Matrix2d::Identity();
    if (dx >= st.h) return st.mat;
    if (st.exact) return piece_propagator(st.omega, dx);
    return magnus_step(*q_, length_, lambda_, st.x0, dx);
}

Eigen::Matrix2d EdgePropagator::at(double x) const {
    if (x <= 0.0) return Eigen::Matrix2d::Identity();
    if (x >= length_) return full_;
    // Find the step containing x.
    size_t lo = 0, hi = steps_.size();
    while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (steps_[mid].x0 <= x)
            lo = mid;
        else
            hi = mid;
    }
    const Step& st = steps_[lo];
    Eigen::Matrix2d before = lo == 0 ? Eigen::Matrix2d::Identity() : steps_[lo - 1].cum;
    return partial_step(st, x - st.x0) * before;
}

Eigen::Vector2d EdgePropagator::apply_at(double x, const Eigen::Vector2d& u0) const {
    return at(x) * u0;
}

double EdgePropagator::l2_inner(const Eigen::Vector2d& u0, const Eigen::Vector2d& v0) const {
    double acc = 0.0;
    Eigen::Vector2d u = u0, v = v0;
    for (const Step& st : steps_) {
        if (st.exact) {
            double icc, ics, iss;
            piece_l2_moments(st.omega, st.h, icc, ics, iss);
            acc += u(0) * v(0) * icc + (u(0) * v(1) + u(1) * v(0)) * ics + u(1) * v(1) * iss;
        } else {
            // Gauss-Legendre on the step with sub-propagation.
            constexpr double kNode = 0.77459666924148337704;  // sqrt(3/5)
            constexpr double kW0 = 8.0 / 9.0, kW1 = 5.0 / 9.0;
            const double half = 0.5 * st.h;
            double local = 0.0;
            for (int i = -1; i <= 1; ++i) {
                const double dx = half * (1.0 + i * kNode);
                Eigen::Matrix2d p = partial_step(st, dx);
                local += (i == 0 ? kW0 : kW1) * (p.row(0) * u).value() * (p.row(0) * v).value();
            }
            acc += half * local;
        }
        u = st.mat * u;
        v = st.mat * v;
    }
    return acc;
}

double EdgePropagator::potential_l2_inner(const Eigen::Vector2d& u0,
                                          const Eigen::Vector2d& v0) const {
    double acc = 0.0;
    Eigen::Vector2d u = u0, v = v0;
    for (const Step& st : steps_) {
        if (st.exact) {
            const double qval = lambda_ - st.omega;
            if (qval != 0.0) {
                double icc, ics, iss;
                piece_l2_moments(st.omega, st.h, icc, ics, iss);
                acc += qval *
                       (u(0) * v(0) * icc + (u(0) * v(1) + u(1) * v(0)) * ics + u(1) * v(1) * iss);
            }
        } else {
            constexpr double kNode = 0.77459666924148337704;
            constexpr double kW0 = 8.0 / 9.0, kW1 = 5.0 / 9.0;
            const double half = 0.5 * st.h;
            double local = 0.0;
            for (int i = -1; i <= 1; ++i) {
                const double dx = half * (1.0 + i * kNode);
                Eigen::Matrix2d p = partial_step(st, dx);
                local += (i == 0 ? kW0 : kW1) * q_->eval(st.x0 + dx, length_) *
                         (p.row(0) * u).value() * (p.row(0) * v).value();
            }
            acc += half * local;
        }
        u = st.mat * u;
        v = st.mat * v;
    }
    return acc;
}

double EdgePropagator::sup_abs(const Eigen::Vector2d& u0, int min_samples) const {
    const double k = std::sqrt(std::max(1.0, lambda_));
    const int n = std::max(min_samples,
                           static_cast<int>(std::ceil(64.0 * (1.0 + k * length_ / M_PI))));
    double m = 0.0;
    Eigen::Vector2d u = u0;
    // Walk steps, sampling each proportionally to its width.
    for (const Step& st : steps_) {
        const int ns = std::max(1, static_cast<int>(std::ceil(n * st.h / length_)));
        for (int i = 0; i <= ns; ++i) {
            const double dx = st.h * i / ns;
            Eigen::Matrix2d p = partial_step(st, dx);
            m = std::max(m, std::abs((p.row(0) * u).value()));
        }
        u = st.mat * u;
    }
    return m;
}

}  // namespace qgraph
