#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/eigenfunction.hpp"
#include "qgraph/secular.hpp"

namespace qgraph {

/// Thrown when an operation requires a certified spectrum and the
/// completeness certificate did not pass.
struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_certified(const Spectrum& sp, const std::string& what);

/// Predicted limit of the mean eigenvalue distance between the
/// delta-prime operator with strengths beta_a plus potential q and the
/// free delta-prime operator with strengths beta_b:
///   (2/L) sum_v deg(v) (1/beta_a[v] - 1/beta_b[v]) + (1/L) int q.
/// Throws if any strength is zero.
double mean_distance_limit(const MetricGraph& g, const std::vector<double>& beta_a,
                           const std::vector<double>& beta_b, double potential_integral = 0.0);

/// Running Cesaro means C(N) = (1/N) sum_{n<N} (a_n - b_n) for
/// N = 1..n_max, together with the predicted limit and a two-parameter
/// extrapolation C(N) ~ c0 + c1/N fitted over the upper half.
struct MeanDistanceResult {
    std::vector<double> cesaro;
    double predicted = 0.0;
    double extrapolated = 0.0;  // c0
    double slope = 0.0;         // c1
    double fit_rms = 0.0;
};
MeanDistanceResult mean_eigenvalue_distance(const std::vector<double>& a,
                                            const std::vector<double>& b, double predicted,
                                            int n_max);

/// Replace the per-eigenvalue statistic by its average within each
/// multiplicity cluster, making running means basis-independent.
std::vector<double> cluster_averaged(const Spectrum& sp, std::vector<double> stat);
std::vector<double> running_cesaro(const std::vector<double>& stat, int n_max);

struct CesaroSeries {
    std::vector<double> cesaro;
    double predicted = 0.0;
};

/// Pointwise vertex Weyl law at a delta-prime vertex with nonzero
/// strength: Cesaro means of |sum_e f_n,e(v)|^2 tend to 2 deg(v) / L.
CesaroSeries local_weyl_vertex(const Spectrum& sp, const std::vector<Eigenfunction>& efs, int v,
                               int n_max);

/// Pointwise Weyl law at an interior point p: Cesaro means of
/// |f_n(p)|^2 tend to 1/L.  Evaluated twice: directly through the edge
/// propagators and through a dummy degree-2 Kirchhoff-delta vertex
/// inserted at p; the two spectra and statistic series are compared.
struct InteriorWeylResult {
    CesaroSeries direct;
    CesaroSeries dummy;
    double spectrum_dev = 0.0;   // max |lam - lam'| / (1 + |lam|)
    double statistic_dev = 0.0;  // max over N of |direct - dummy|
    Spectrum spectrum;           // spectrum of the original operator
};
InteriorWeylResult local_weyl_interior(const MetricGraph& g, const VertexConditionSet& conds,
                                       const Potential& q, GraphPoint p, int n_eigs,
                                       const SecularOptions& opts = {});

/// Cesaro means of a_n - b_n together with the rung bounds
/// (4 |E| / L)(1/gamma - 1/beta_ref) certifying divergence.
struct DivergenceResult {
    std::vector<double> cesaro;
    std::vector<double> ladder_gamma;
    std::vector<double> ladder_bound;
    bool increasing = false;  // strictly increasing over the recorded range
};
DivergenceResult divergence_series(const std::vector<double>& a, const std::vector<double>& b,
                                   const MetricGraph& g, double beta_ref,
                                   const std::vector<double>& ladder, int n_max);

/// Eigenvalue shift along the linear path from (beta_b, q = 0) to
/// (beta_a, q): strengths beta(tau) = beta_b + tau (beta_a - beta_b),
/// potential tau q.  Checks
///   lam_n(1) - lam_n(0) = int_0^1 [ sum_v (beta_b - beta_a)_v /
///     beta_v(tau)^2 |sum_e f_e(v)|^2 + int q |f|^2 ] dtau
/// with an n-panel composite midpoint rule; the residual decays like
/// 1/panels^2.  Aborts with crossed = true when the first n_eigs
/// eigenvalues fail to stay simple and separated along the path.
struct HadamardResult {
    bool crossed = false;
    std::string message;
    std::vector<double> lhs;
    std::vector<double> rhs;
    double max_residual = 0.0;
};
HadamardResult hadamard_identity(const MetricGraph& g, const std::vector<double>& beta_a,
                                 const std::vector<double>& beta_b, const Potential& q, int n_eigs,
                                 int panels, const SecularOptions& opts = {});

/// Heat-kernel diagonal statistics: rows carry sqrt(4 pi t) times the
/// truncated series plus its predicted small-t limit and a recorded
/// bound on the truncation tail.
struct HeatRow {
    double t = 0.0;
    double value = 0.0;
    double predicted = 0.0;
    double tail_bound = 0.0;
};
struct HeatTraceResult {
    std::vector<HeatRow> rows;
    double worst_rel_dev = 0.0;  // max |value - predicted| / predicted
};
/// sqrt(4 pi t) sum_n e^{-lam t} |f_n(x)|^2 -> 2 / deg(x); pass
/// deg_x = 2 for interior points.  Requires window_hi * min(t) >= 30.
HeatTraceResult heat_trace_point(const Spectrum& sp, const std::vector<Eigenfunction>& efs,
                                 GraphPoint x, int deg_x, const std::vector<double>& times,
                                 int jobs = 0);
/// sqrt(4 pi t) sum_n e^{-lam t} |sum_e f_n,e(v)|^2 -> 2 deg(v).
HeatTraceResult heat_trace_vertex(const Spectrum& sp, const std::vector<Eigenfunction>& efs, int v,
                                  const std::vector<double>& times, int jobs = 0);

/// Pointwise heat-kernel bracketing for value-continuous (delta-type)
/// conditions: with constant brackets q_minus <= q <= q_plus,
///   p^{q_plus}(t,x,y) <= p^{q}(t,x,y) <= p^{q_minus}(t,x,y)
/// up to slack, checked on the grid times x points x points.
struct BracketRow {
    double t = 0.0;
    GraphPoint x, y;
    double lower = 0.0;  // p^{q_plus}
    double mid = 0.0;    // p^{q}
    double upper = 0.0;  // p^{q_minus}
};
struct BracketingResult {
    std::vector<BracketRow> rows;
    double worst_lower = 0.0;  // max(lower - mid)
    double worst_upper = 0.0;  // max(mid - upper)
    bool ok(double slack) const { return worst_lower <= slack && worst_upper <= slack; }
};
BracketingResult heat_bracketing(const Spectrum& sp_mid, const std::vector<Eigenfunction>& efs_mid,
                                 const Spectrum& sp_plus,
                                 const std::vector<Eigenfunction>& efs_plus,
                                 const Spectrum& sp_minus,
                                 const std::vector<Eigenfunction>& efs_minus,
                                 const std::vector<double>& times,
                                 const std::vector<GraphPoint>& points, int jobs = 0);

/// Alignment of two spectra after dropping eigenvalues at or below
/// drop_below from each: max |a_i - b_i| / (1 + |a_i|) over the first
/// n surviving pairs.
struct IsospectralResult {
    std::vector<double> a, b;
    double max_rel_dev = 0.0;
    int compared = 0;
};
IsospectralResult compare_spectra(const Spectrum& sa, const Spectrum& sb, int n,
                                  double drop_below = -std::numeric_limits<double>::infinity());

/// Mean-distance comparison against the shifted free bound: the Cesaro
/// means of mu_q - lam_q_beta must dominate those of
/// ak_free - beta_min_free minus 2 q_sup.
struct CorollaryResult {
    std::vector<double> lhs;
    std::vector<double> bound;
    bool increasing = false;
    bool exceeds = false;
};
CorollaryResult corollary_series(const std::vector<double>& mu_q,
                                 const std::vector<double>& lam_q_beta,
                                 const std::vector<double>& ak_free,
                                 const std::vector<double>& beta_min_free, double q_sup, int n_max);

/// CSV writers, all using 17 significant digits so output is
/// byte-identical across thread counts.
std::string format_g17(double x);
void write_spectrum_csv(const std::string& path, const Spectrum& sp);
void write_compare_csv(const std::string& path, const MeanDistanceResult& r);
void write_weyl_csv(const std::string& path, const CesaroSeries& r);
void write_heat_csv(const std::string& path, const HeatTraceResult& r);

}  // namespace qgraph
