#pragma once

#include <Eigen/Dense>

#include "qgraph/potential.hpp"

namespace qgraph {

/// Stable evaluation of the fundamental pair for u'' = -omega * u on a
/// step of width h >= 0:
///   c = value of the solution with u(0)=1, u'(0)=0 at h,
///   s = value of the solution with u(0)=0, u'(0)=1 at h.
/// For omega > 0 these are cos(k h) and sin(k h)/k with k = sqrt(omega);
/// for omega < 0 the hyperbolic counterparts; a Taylor branch covers
/// |omega| h^2 small, and a compensated phase reduction keeps large
/// arguments (omega h^2 > 1e8) accurate to a few ulps.
void trig_cs(double omega, double h, double& c, double& s);

/// Transfer matrix over a constant-coefficient piece:
/// (u, u')(h) = piece_propagator(omega, h) * (u, u')(0); determinant 1.
Eigen::Matrix2d piece_propagator(double omega, double h);

/// |det(m) - 1|; a cheap consistency check since every transfer matrix
/// of u'' = (q - lambda) u has unit Wronskian.
double wronskian_defect(const Eigen::Matrix2d& m);

/// Transfer matrices for one edge with potential q at spectral
/// parameter lambda: solutions of -u'' + q u = lambda u, propagated
/// from x = 0.  Exact piecewise-constant representations use
/// closed-form pieces; linearly interpolated samples use a fixed-step
/// fourth-order commutator-free exponential (Magnus) scheme whose
/// steps are exactly unimodular.
class EdgePropagator {
  public:
    EdgePropagator(const EdgePotential& q, double length, double lambda);

    double length() const { return length_; }
    double lambda() const { return lambda_; }

    /// Transfer matrix over the whole edge.
    const Eigen::Matrix2d& full() const { return full_; }
    /// Transfer matrix from 0 to x in [0, length].
    Eigen::Matrix2d at(double x) const;
    /// (u, u')(x) given (u, u')(0).
    Eigen::Vector2d apply_at(double x, const Eigen::Vector2d& u0) const;

    /// Integral of u*v over the edge for two solutions at this lambda
    /// with initial data u0 and v0.  Closed form on exact pieces.
    double l2_inner(const Eigen::Vector2d& u0, const Eigen::Vector2d& v0) const;
    /// Integral of q*u*v over the edge.
    double potential_l2_inner(const Eigen::Vector2d& u0, const Eigen::Vector2d& v0) const;
    /// Largest |u| over the edge, sampled densely relative to the local
    /// oscillation scale (at least min_samples points).
    double sup_abs(const Eigen::Vector2d& u0, int min_samples = 64) const;

  private:
    struct Step {
        double x0 = 0.0;       // start coordinate
        double h = 0.0;        // width
        double omega = 0.0;    // lambda - q on the step (exact steps)
        bool exact = true;     // closed-form piece vs Magnus step
        Eigen::Matrix2d mat;   // transfer over the step
        Eigen::Matrix2d cum;   // transfer from 0 to x0 + h
    };

    Eigen::Matrix2d partial_step(const Step& st, double dx) const;

    const EdgePotential* q_ = nullptr;
    double length_ = 0.0;
    double lambda_ = 0.0;
    std::vector<Step> steps_;
    Eigen::Matrix2d full_;
};

/// Exact integrals of products of the fundamental solutions over a
/// constant-coefficient piece of width h:
///   icc = int c(t)^2, ics = int c(t) s(t), iss = int s(t)^2.
void piece_l2_moments(double omega, double h, double& icc, double& ics, double& iss);

}  // namespace qgraph
