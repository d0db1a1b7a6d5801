#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/propagator.hpp"
#include "qgraph/secular.hpp"

namespace qgraph {

/// One L2-normalized eigenfunction of the graph operator, represented
/// by its per-edge initial data (u_e(0), u_e'(0)) and reconstructed
/// anywhere on the graph through the edge transfer matrices at its
/// eigenvalue.  Within a multiple eigenvalue the functions handed out
/// by build_eigenfunctions are L2-orthonormal.
class Eigenfunction {
  public:
    Eigenfunction(std::shared_ptr<const SecularSystem> sys, double lambda,
                  Eigen::VectorXd coeffs,
                  std::shared_ptr<const std::vector<EdgePropagator>> props);

    double lambda() const { return lambda_; }
    const MetricGraph& graph() const;
    const SecularSystem& system() const { return *sys_; }
    const Eigen::VectorXd& coefficients() const { return coeffs_; }

    /// Value f(p) and edge-coordinate derivative f'(p).
    double evaluate(GraphPoint p) const;
    double derivative(GraphPoint p) const;

    /// Endpoint traces at vertex v, one entry per incidence of v in the
    /// graph's incidence order: values f_e(v) and inward derivatives
    /// (d/dx at a left endpoint, -d/dx at a right endpoint).
    std::vector<double> vertex_values(int v) const;
    std::vector<double> vertex_derivatives(int v) const;
    /// Sum of the endpoint values at v over its incidences.
    double vertex_sum(int v) const;

    double l2_norm_sq() const;
    /// Integral of q |f|^2 over the graph.
    double potential_energy() const;
    /// Largest |f| over the graph (dense sampling per edge).
    double sup_norm() const;

    /// max over vertices of |A_v F(v) + B_v dF(v)|_inf, normalized by
    /// 1 + |F|_inf + |dF|_inf; small for a genuine eigenfunction.
    double condition_residual() const;

  private:
    Eigen::Vector2d initial_data(int e) const;
    std::pair<double, double> end_trace(const Incidence& inc) const;

    std::shared_ptr<const SecularSystem> sys_;
    double lambda_ = 0.0;
    Eigen::VectorXd coeffs_;
    std::shared_ptr<const std::vector<EdgePropagator>> props_;
};

/// L2-orthonormal eigenfunctions for every eigenvalue of the spectrum,
/// aligned with spectrum.values (multiplicities expanded).  Kernel
/// vectors of the characteristic system are whitened against the L2
/// Gram matrix cluster by cluster; near-degenerate neighboring
/// clusters are orthogonalized against each other through exact
/// boundary-trace inner products; signs are fixed deterministically.
std::vector<Eigenfunction> build_eigenfunctions(std::shared_ptr<const SecularSystem> sys,
                                                const Spectrum& spectrum);

}  // namespace qgraph
