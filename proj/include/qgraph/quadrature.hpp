#pragma once

#include <functional>
#include <vector>

namespace qgraph {

/// Quadrature rule on a reference interval.
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadRule gauss_legendre(int n);

/// Same rule mapped to [a, b].
QuadRule gauss_legendre_on(int n, double a, double b);

/// Integrate f over [a, b] with `panels` equal subintervals, applying
/// the n-point Gauss-Legendre rule on each.
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int points_per_panel);

/// Composite midpoint rule: `panels` equal subintervals, one point each.
double integrate_midpoint(const std::function<double(double)>& f, double a, double b, int panels);

}  // namespace qgraph
