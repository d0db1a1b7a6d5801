#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "qgraph/conditions.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/potential.hpp"

namespace qgraph {

/// Piecewise-linear Galerkin discretization of the quadratic form
///   h[f] = int |f'|^2 + int q |f|^2 + vertex terms
/// on a metric graph.  Vertex conditions enter the way they enter the
/// form: value continuity and Dirichlet traces are eliminated through
/// a sparse transformation, coupling strengths become boundary terms,
/// and the zero-strength derivative-coupling constraint (sum of values
/// vanishing) is eliminated exactly.  The generalized problem
/// K x = lambda M x then bounds every eigenvalue from above.
struct FormDiscretization {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::SparseMatrix<double> mass;
    int dofs = 0;
    double mesh_h = 0.0;  // largest element width
};

FormDiscretization discretize(const MetricGraph& g, const VertexConditionSet& conds,
                              const Potential& q, double target_h);

/// Number of eigenvalues of (stiffness, mass) strictly below lambda,
/// computed from the inertia of stiffness - lambda * mass.  Exact in
/// exact arithmetic; a tiny deterministic shift is applied if the
/// factorization hits a zero pivot.
long count_below(const FormDiscretization& d, double lambda);

/// Inertia counts for several shifts at once, sharing the symbolic
/// factorization across shifts.
std::vector<long> counts_below(const FormDiscretization& d, const std::vector<double>& lambdas);

/// The n lowest generalized eigenvalues by bisection on count_below.
/// lo must lie strictly below the spectrum.
std::vector<double> lowest_eigenvalues(const FormDiscretization& d, int n, double lo);

/// Convenience driver: discretize at width h and h/2 and Richardson-
/// extrapolate the n lowest eigenvalues (error drops from h^2 to h^4).
std::vector<double> lowest_eigenvalues_extrapolated(const MetricGraph& g,
                                                    const VertexConditionSet& conds,
                                                    const Potential& q, int n, double h);

}  // namespace qgraph
