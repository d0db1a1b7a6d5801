#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qgraph/graph.hpp"

namespace qgraph {

/// Family of matching conditions supported at a vertex.
///
/// For a vertex v of degree d write F for the vector of boundary
/// values of the d incident edge ends and dF for the vector of
/// derivatives taken into the edges (so dF = f'(0) at an x = 0 end and
/// dF = -f'(ell) at an x = ell end).  The condition is A F + B dF = 0:
///
///   DeltaPrime (strength beta):  all entries of dF equal a common
///     value s, and sum(F) = beta * s.  beta = 0 gives sum(F) = 0 with
///     dF still constant across the vertex ("anti-Kirchhoff").
///   Delta (strength sigma):  all entries of F equal a common value c,
///     and sum(dF) = sigma * c.  sigma = 0 is the Kirchhoff condition.
///   Dirichlet:  F = 0 with dF unconstrained (decouples the edge ends).
enum class ConditionKind { DeltaPrime, Delta, Dirichlet };

struct VertexCondition {
    ConditionKind kind = ConditionKind::Delta;
    double strength = 0.0;  // beta for DeltaPrime, sigma for Delta; unused for Dirichlet
};

/// Per-vertex assignment of matching conditions.
class VertexConditionSet {
  public:
    explicit VertexConditionSet(std::vector<VertexCondition> conditions);
    static VertexConditionSet uniform(int num_vertices, VertexCondition c);
    static VertexConditionSet delta_prime(int num_vertices, double beta);
    static VertexConditionSet delta_prime(std::vector<double> betas);
    static VertexConditionSet anti_kirchhoff(int num_vertices);
    static VertexConditionSet delta(int num_vertices, double sigma);
    static VertexConditionSet delta(std::vector<double> sigmas);
    static VertexConditionSet kirchhoff(int num_vertices);
    static VertexConditionSet dirichlet(int num_vertices);

    int size() const { return static_cast<int>(conditions_.size()); }
    const VertexCondition& at(int v) const { return conditions_.at(v); }
    VertexConditionSet with(int v, VertexCondition c) const;

  private:
    std::vector<VertexCondition> conditions_;
};

/// Matrix pair (A, B) encoding A F + B dF = 0 at one vertex.  Rows are
/// ordered to match MetricGraph::incidences(v).
struct ABPair {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
};

/// Build the d x d condition pair for vertex v.
ABPair vertex_ab_pair(const MetricGraph& g, const VertexConditionSet& conds, int v);
std::vector<ABPair> to_ab_pairs(const MetricGraph& g, const VertexConditionSet& conds);

/// Self-adjointness test for one vertex pair: [A | B] must have full
/// rank d and A B^T must be symmetric.
bool check_self_adjoint(const ABPair& p, double tol = 1e-9);

/// Orthogonal projections on the d-dimensional boundary-value space
/// that classify the condition families in quadratic-form terms.
enum class VertexProjectionKind {
    MeanValue,       // rank-one averaging projector (all entries 1/d)
    DeltaPrime,      // zero matrix: no constraint on boundary values
    Delta,           // I minus the averaging projector
};
Eigen::MatrixXd vertex_projection(VertexProjectionKind kind, int degree);

/// Limit of the vertex scattering matrix at high energy, Id - 2 P with
/// P the projection matching the condition family.
Eigen::MatrixXd scattering_limit(const MetricGraph& g, const VertexConditionSet& conds, int v);

/// Crude but safe lower bound on the spectrum of -d^2/dx^2 + q with
/// the given vertex conditions, derived from trace inequalities.
/// q_sup is the sup norm of the potential.
double spectral_lower_bound(const MetricGraph& g, const VertexConditionSet& conds, double q_sup);

}  // namespace qgraph
