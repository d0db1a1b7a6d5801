#pragma once

#include <utility>
#include <vector>

#include "qgraph/graph.hpp"

namespace qgraph {

/// Scalar potential on a single edge of length ell, coordinate
/// x in [0, ell].  Four representations:
///   Zero, Constant        -- exact;
///   PiecewiseConstant     -- exact, breakpoints interior to (0, ell);
///   Sampled               -- uniform grid, either cell averages
///                            (order 0) or nodal values with linear
///                            interpolation (order 1).
class EdgePotential {
  public:
    EdgePotential();  // zero
    static EdgePotential zero();
    static EdgePotential constant(double value);
    /// breaks: strictly increasing interior breakpoints; values: one
    /// per subinterval (breaks.size() + 1 entries).
    static EdgePotential piecewise(std::vector<double> breaks, std::vector<double> values);
    /// order 0: values.size() cells of equal width, value constant per cell.
    /// order 1: values are nodal (values.size() - 1 cells), linear in between.
    static EdgePotential sampled(int order, std::vector<double> values);

    double eval(double x, double length) const;
    double sup_norm() const;
    double integral(double length) const;
    EdgePotential scaled(double factor) const;

    /// True when the representation is exactly piecewise constant, so
    /// closed-form transfer matrices apply.
    bool exact_pieces() const;
    /// For exact representations: list of (piece end coordinate, value)
    /// covering (0, length]; monotone piece ends, last one == length.
    std::vector<std::pair<double, double>> pieces(double length) const;
    /// Restriction to [a, b] as a potential on an edge of length b - a.
    /// Exact for exact_pieces(); unavailable otherwise.
    EdgePotential restricted(double a, double b, double length) const;

    bool is_zero() const;
    int sample_order() const { return order_; }
    /// Number of uniform grid cells for Sampled representations; 0 otherwise.
    int sample_cells() const;

  private:
    enum class Rep { Zero, Constant, Piecewise, Sampled } rep_ = Rep::Zero;
    int order_ = 0;                 // Sampled only
    std::vector<double> breaks_;    // Piecewise only
    std::vector<double> values_;    // Constant: 1 entry; Piecewise/Sampled: as documented
};

/// Bounded measurable potential on a metric graph, stored edge by edge
/// together with the edge lengths it was built against.
class Potential {
  public:
    static Potential zero(const MetricGraph& g);
    static Potential constant(const MetricGraph& g, double value);
    Potential(const MetricGraph& g, std::vector<EdgePotential> per_edge);

    int num_edges() const { return static_cast<int>(per_edge_.size()); }
    const EdgePotential& on_edge(int e) const { return per_edge_.at(e); }
    double edge_length(int e) const { return lengths_.at(e); }

    double eval(GraphPoint p) const;
    double sup_norm() const;
    double integral() const;
    Potential scaled(double factor) const;
    bool is_zero() const;
    bool exact_pieces() const;

    /// Constant bracketing pair (q_minus, q_plus) with
    /// q_minus <= q <= q_plus pointwise: q_plus = +sup|q|, q_minus = -sup|q|.
    std::pair<Potential, Potential> bracket(const MetricGraph& g) const;

    /// Potential on g.with_dummy_vertex(p).first matching this one
    /// pointwise.  Requires exact_pieces() on the split edge.
    Potential split_edge(const MetricGraph& g, GraphPoint p) const;

  private:
    Potential() = default;
    std::vector<EdgePotential> per_edge_;
    std::vector<double> lengths_;
};

}  // namespace qgraph
