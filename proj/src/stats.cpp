#include "qgraph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#ifdef QGRAPH_HAVE_OPENMP
#include <omp.h>
#endif

namespace qgraph {

namespace {

int stat_threads(int jobs) {
#ifdef QGRAPH_HAVE_OPENMP
    if (jobs > 0) return jobs;
    return omp_get_max_threads();
#else
    (void)jobs;
    return 1;
#endif
}

}  // namespace

void require_certified(const Spectrum& sp, const std::string& what) {
    if (!sp.certificate.ok())
        throw CertificateError(what + ": spectrum is not certified complete (" +
                               sp.certificate.summary() + ")");
}

double mean_distance_limit(const MetricGraph& g, const std::vector<double>& beta_a,
                           const std::vector<double>& beta_b, double potential_integral) {
    if (static_cast<int>(beta_a.size()) != g.num_vertices() ||
        static_cast<int>(beta_b.size()) != g.num_vertices())
        throw std::invalid_argument("one strength per vertex required");
    const double L = g.total_length();
    double s = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (beta_a[v] == 0.0 || beta_b[v] == 0.0)
            throw std::invalid_argument("mean-distance limit needs nonzero strengths");
        s += g.degree(v) * (1.0 / beta_a[v] - 1.0 / beta_b[v]);
    }
    return 2.0 * s / L + potential_integral / L;
}

MeanDistanceResult mean_eigenvalue_distance(const std::vector<double>& a,
                                            const std::vector<double>& b, double predicted,
                                            int n_max) {
    if (n_max < 1) throw std::invalid_argument("need at least one eigenvalue");
    if (static_cast<int>(a.size()) < n_max || static_cast<int>(b.size()) < n_max)
        throw std::invalid_argument("not enough eigenvalues for the requested range");
    MeanDistanceResult r;
    r.predicted = predicted;
    r.cesaro.resize(static_cast<size_t>(n_max));
    double acc = 0.0;
    for (int n = 0; n < n_max; ++n) {
        acc += a[static_cast<size_t>(n)] - b[static_cast<size_t>(n)];
        r.cesaro[static_cast<size_t>(n)] = acc / (n + 1);
    }
    // Fit C(N) = c0 + c1 / N over the upper half by least squares.
    const int lo = n_max / 2;
    const int m = n_max - lo;
    if (m >= 2) {
        double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int n = lo; n < n_max; ++n) {
            const double x = 1.0 / (n + 1);
            const double y = r.cesaro[static_cast<size_t>(n)];
            sw += 1.0;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double det = sw * sxx - sx * sx;
        if (std::abs(det) > 1e-300) {
            r.extrapolated = (sy * sxx - sx * sxy) / det;
            r.slope = (sw * sxy - sx * sy) / det;
            double rss = 0.0;
            for (int n = lo; n < n_max; ++n) {
                const double x = 1.0 / (n + 1);
                const double e = r.cesaro[static_cast<size_t>(n)] - (r.extrapolated + r.slope * x);
                rss += e * e;
            }
            r.fit_rms = std::sqrt(rss / m);
        } else {
            r.extrapolated = r.cesaro.back();
        }
    } else {
        r.extrapolated = r.cesaro.back();
    }
    return r;
}

std::vector<double> cluster_averaged(const Spectrum& sp, std::vector<double> stat) {
    if (stat.size() != sp.values.size())
        throw std::invalid_argument("one statistic per eigenvalue required");
    size_t i = 0;
    while (i < stat.size()) {
        size_t j = i;
        double sum = 0.0;
        while (j < stat.size() && sp.cluster_index[j] == sp.cluster_index[i]) sum += stat[j++];
        const double avg = sum / static_cast<double>(j - i);
        for (size_t k = i; k < j; ++k) stat[k] = avg;
        i = j;
    }
    return stat;
}

std::vector<double> running_cesaro(const std::vector<double>& stat, int n_max) {
    if (n_max < 1 || static_cast<size_t>(n_max) > stat.size())
        throw std::invalid_argument("running mean range out of bounds");
    std::vector<double> out(static_cast<size_t>(n_max));
    double acc = 0.0;
    for (int n = 0; n < n_max; ++n) {
        acc += stat[static_cast<size_t>(n)];
        out[static_cast<size_t>(n)] = acc / (n + 1);
    }
    return out;
}

CesaroSeries local_weyl_vertex(const Spectrum& sp, const std::vector<Eigenfunction>& efs, int v,
                               int n_max) {
    if (efs.size() < static_cast<size_t>(n_max))
        throw std::invalid_argument("not enough eigenfunctions");
    const MetricGraph& g = efs.front().graph();
    const VertexCondition& c = efs.front().system().conditions().at(v);
    if (c.kind != ConditionKind::DeltaPrime || c.strength == 0.0)
        throw std::invalid_argument(
            "vertex Weyl statistic needs a delta-prime vertex with nonzero strength");
    std::vector<double> stat(sp.values.size(), 0.0);
    for (size_t n = 0; n < efs.size() && n < sp.values.size(); ++n) {
        const double s = efs[n].vertex_sum(v);
        stat[n] = s * s;
    }
    CesaroSeries out;
    out.cesaro = running_cesaro(cluster_averaged(sp, std::move(stat)), n_max);
    out.predicted = 2.0 * g.degree(v) / g.total_length();
    return out;
}

InteriorWeylResult local_weyl_interior(const MetricGraph& g, const VertexConditionSet& conds,
                                       const Potential& q, GraphPoint p, int n_eigs,
                                       const SecularOptions& opts) {
    if (!(p.x > 0.0) || !(p.x < g.edge(p.edge).length))
        throw std::invalid_argument("interior point must lie strictly inside its edge");

    auto sys = std::make_shared<SecularSystem>(g, conds, q);
    Spectrum sp = find_spectrum_first_n(*sys, n_eigs, opts);
    require_certified(sp, "local Weyl law");
    std::vector<Eigenfunction> efs = build_eigenfunctions(sys, sp);

    // Same operator with a dummy Kirchhoff-delta vertex at p.
    auto [g2, vnew] = g.with_dummy_vertex(p);
    std::vector<VertexCondition> c2;
    for (int v = 0; v < g.num_vertices(); ++v) c2.push_back(conds.at(v));
    c2.push_back(VertexCondition{ConditionKind::Delta, 0.0});
    auto sys2 = std::make_shared<SecularSystem>(g2, VertexConditionSet(std::move(c2)),
                                                q.split_edge(g, p));
    Spectrum sp2 = find_spectrum_first_n(*sys2, n_eigs, opts);
    require_certified(sp2, "local Weyl law (split graph)");
    std::vector<Eigenfunction> efs2 = build_eigenfunctions(sys2, sp2);

    const size_t n_common =
        std::min({static_cast<size_t>(n_eigs), sp.values.size(), sp2.values.size()});

    InteriorWeylResult out;
    out.spectrum_dev = 0.0;
    for (size_t n = 0; n < n_common; ++n)
        out.spectrum_dev = std::max(out.spectrum_dev, std::abs(sp.values[n] - sp2.values[n]) /
                                                          (1.0 + std::abs(sp.values[n])));

    std::vector<double> stat_direct(sp.values.size(), 0.0);
    for (size_t n = 0; n < efs.size(); ++n) {
        const double f = efs[n].evaluate(p);
        stat_direct[n] = f * f;
    }
    std::vector<double> stat_dummy(sp2.values.size(), 0.0);
    for (size_t n = 0; n < efs2.size(); ++n) {
        const double f = efs2[n].vertex_values(vnew).front();
        stat_dummy[n] = f * f;
    }

    const int n_run = static_cast<int>(n_common);
    out.direct.cesaro = running_cesaro(cluster_averaged(sp, std::move(stat_direct)), n_run);
    out.direct.predicted = 1.0 / g.total_length();
    out.dummy.cesaro = running_cesaro(cluster_averaged(sp2, std::move(stat_dummy)), n_run);
    out.dummy.predicted = out.direct.predicted;

    out.statistic_dev = 0.0;
    for (int n = 0; n < n_run; ++n)
        out.statistic_dev =
            std::max(out.statistic_dev, std::abs(out.direct.cesaro[static_cast<size_t>(n)] -
                                                 out.dummy.cesaro[static_cast<size_t>(n)]));
    out.spectrum = std::move(sp);
    return out;
}

namespace {

/// Strict growth across the octave checkpoints N/8, N/4, N/2, N.  The
/// running means oscillate locally within eigenvalue clusters, so
/// every-step monotonicity is not the meaningful notion for a divergent
/// series; growth over dyadic checkpoints is.
bool growing_at_checkpoints(const std::vector<double>& s) {
    const size_t n = s.size();
    if (n < 2) return true;
    const size_t idx[4] = {n / 8, n / 4, n / 2, n};
    bool ok = true, first = true;
    double prev = 0.0;
    size_t last = 0;
    for (size_t i : idx) {
        if (i == 0 || i == last) continue;
        const double v = s[i - 1];
        if (!first && !(v > prev)) ok = false;
        prev = v;
        first = false;
        last = i;
    }
    return ok;
}

}  // namespace

DivergenceResult divergence_series(const std::vector<double>& a, const std::vector<double>& b,
                                   const MetricGraph& g, double beta_ref,
                                   const std::vector<double>& ladder, int n_max) {
    if (beta_ref == 0.0) throw std::invalid_argument("reference strength must be nonzero");
    DivergenceResult r;
    r.cesaro.resize(static_cast<size_t>(n_max));
    if (static_cast<int>(a.size()) < n_max || static_cast<int>(b.size()) < n_max)
        throw std::invalid_argument("not enough eigenvalues for the requested range");
    double acc = 0.0;
    for (int n = 0; n < n_max; ++n) {
        acc += a[static_cast<size_t>(n)] - b[static_cast<size_t>(n)];
        r.cesaro[static_cast<size_t>(n)] = acc / (n + 1);
    }
    const double L = g.total_length();
    for (double gamma : ladder) {
        if (!(gamma > 0.0)) throw std::invalid_argument("ladder rungs must be positive");
        r.ladder_gamma.push_back(gamma);
        r.ladder_bound.push_back(4.0 * g.num_edges() / L * (1.0 / gamma - 1.0 / beta_ref));
    }
    r.increasing = growing_at_checkpoints(r.cesaro);
    return r;
}

namespace {

/// First n_eigs eigenvalues with a simplicity guarantee: fails (returns
/// false) when a multiple eigenvalue or a too-small gap shows up.
bool simple_prefix(const Spectrum& sp, int n_eigs, std::string& why) {
    if (static_cast<int>(sp.values.size()) < n_eigs) {
        why = "window produced too few eigenvalues";
        return false;
    }
    for (int n = 0; n < n_eigs; ++n) {
        const int ci = sp.cluster_index[static_cast<size_t>(n)];
        if (sp.clusters[static_cast<size_t>(ci)].multiplicity > 1) {
            why = "multiple eigenvalue in the tracked range";
            return false;
        }
        if (n > 0) {
            const double gap = sp.values[static_cast<size_t>(n)] - sp.values[static_cast<size_t>(n - 1)];
            if (gap < 1e-6 * (1.0 + std::abs(sp.values[static_cast<size_t>(n)]))) {
                why = "eigenvalue gap below the tracking tolerance";
                return false;
            }
        }
    }
    return true;
}

}  // namespace

HadamardResult hadamard_identity(const MetricGraph& g, const std::vector<double>& beta_a,
                                 const std::vector<double>& beta_b, const Potential& q, int n_eigs,
                                 int panels, const SecularOptions& opts) {
    if (panels < 1) throw std::invalid_argument("need at least one quadrature panel");
    if (static_cast<int>(beta_a.size()) != g.num_vertices() ||
        static_cast<int>(beta_b.size()) != g.num_vertices())
        throw std::invalid_argument("one strength per vertex required");
    for (int v = 0; v < g.num_vertices(); ++v)
        if (beta_a[v] == 0.0 || beta_b[v] == 0.0)
            throw std::invalid_argument("path endpoints need nonzero strengths");

    HadamardResult r;

    // Endpoint spectra: tau = 0 is (beta_b, no potential), tau = 1 is
    // (beta_a, q).
    SecularSystem sys0(g, VertexConditionSet::delta_prime(beta_b), Potential::zero(g));
    Spectrum sp0 = find_spectrum_first_n(sys0, n_eigs, opts);
    require_certified(sp0, "shift identity (path start)");
    SecularSystem sys1(g, VertexConditionSet::delta_prime(beta_a), q);
    Spectrum sp1 = find_spectrum_first_n(sys1, n_eigs, opts);
    require_certified(sp1, "shift identity (path end)");

    std::string why;
    if (!simple_prefix(sp0, n_eigs, why) || !simple_prefix(sp1, n_eigs, why)) {
        r.crossed = true;
        r.message = "path endpoint: " + why;
        return r;
    }

    r.lhs.resize(static_cast<size_t>(n_eigs));
    for (int n = 0; n < n_eigs; ++n)
        r.lhs[static_cast<size_t>(n)] =
            sp1.values[static_cast<size_t>(n)] - sp0.values[static_cast<size_t>(n)];

    r.rhs.assign(static_cast<size_t>(n_eigs), 0.0);
    const double w = 1.0 / panels;
    for (int j = 0; j < panels; ++j) {
        const double tau = (j + 0.5) / panels;
        std::vector<double> beta_tau(beta_b.size());
        for (size_t v = 0; v < beta_b.size(); ++v)
            beta_tau[v] = beta_b[v] + tau * (beta_a[v] - beta_b[v]);
        for (double bv : beta_tau)
            if (bv == 0.0) {
                r.crossed = true;
                r.message = "strength path passes through zero";
                return r;
            }
        auto sys = std::make_shared<SecularSystem>(g, VertexConditionSet::delta_prime(beta_tau),
                                                   q.scaled(tau));
        Spectrum sp = find_spectrum_first_n(*sys, n_eigs, opts);
        require_certified(sp, "shift identity (path node)");
        if (!simple_prefix(sp, n_eigs, why)) {
            r.crossed = true;
            char buf[64];
            std::snprintf(buf, sizeof buf, "tau = %.6f: ", tau);
            r.message = std::string(buf) + why;
            return r;
        }
        std::vector<Eigenfunction> efs = build_eigenfunctions(sys, sp);
        for (int n = 0; n < n_eigs; ++n) {
            const Eigenfunction& f = efs[static_cast<size_t>(n)];
            double vterm = 0.0;
            for (int v = 0; v < g.num_vertices(); ++v) {
                const double s = f.vertex_sum(v);
                const double bt = beta_tau[static_cast<size_t>(v)];
                vterm += (beta_b[static_cast<size_t>(v)] - beta_a[static_cast<size_t>(v)]) /
                         (bt * bt) * s * s;
            }
            // The node operator carries tau * q, so its potential energy
            // is tau * int q |f|^2.
            const double qterm = q.is_zero() ? 0.0 : f.potential_energy() / tau;
            r.rhs[static_cast<size_t>(n)] += w * (vterm + qterm);
        }
    }

    r.max_residual = 0.0;
    for (int n = 0; n < n_eigs; ++n)
        r.max_residual = std::max(
            r.max_residual,
            std::abs(r.lhs[static_cast<size_t>(n)] - r.rhs[static_cast<size_t>(n)]));
    return r;
}

namespace {

HeatTraceResult heat_trace_impl(const Spectrum& sp, const std::vector<Eigenfunction>& efs,
                                const std::vector<double>& times, double predicted,
                                const std::vector<double>& stat) {
    if (times.empty()) throw std::invalid_argument("need at least one time");
    if (efs.empty()) throw std::invalid_argument("need at least one eigenfunction");
    const double t_min = *std::min_element(times.begin(), times.end());
    if (!(t_min > 0.0)) throw std::invalid_argument("times must be positive");
    // The list is complete up to its last entry (certified window,
    // prefix trim), so the truncation point is values.back().
    const double lambda_top = sp.values.back();
    if (lambda_top * t_min < 30.0)
        throw std::invalid_argument("spectral window too small for the requested times");
    const double L = efs.front().graph().total_length();
    const double sup_stat = stat.empty() ? 0.0 : *std::max_element(stat.begin(), stat.end());

    HeatTraceResult out;
    for (double t : times) {
        double s = 0.0;
        for (size_t n = 0; n < stat.size(); ++n) s += std::exp(-sp.values[n] * t) * stat[n];
        HeatRow row;
        row.t = t;
        row.value = std::sqrt(4.0 * M_PI * t) * s;
        row.predicted = predicted;
        // Tail of the series past the truncation point, bounded by the
        // Weyl density L / (2 pi sqrt(lambda)) times the observed
        // statistic ceiling: the integral gives
        // L / (2 sqrt(pi t)) erfc(sqrt(Lambda t)).
        const double tail_series =
            sup_stat * L / (2.0 * std::sqrt(M_PI * t)) * std::erfc(std::sqrt(lambda_top * t));
        row.tail_bound = std::sqrt(4.0 * M_PI * t) * tail_series;
        out.rows.push_back(row);
        out.worst_rel_dev =
            std::max(out.worst_rel_dev, std::abs(row.value - predicted) / std::abs(predicted));
    }
    return out;
}

}  // namespace

HeatTraceResult heat_trace_point(const Spectrum& sp, const std::vector<Eigenfunction>& efs,
                                 GraphPoint x, int deg_x, const std::vector<double>& times,
                                 int jobs) {
    if (efs.size() != sp.values.size())
        throw std::invalid_argument("one eigenfunction per eigenvalue required");
    const int n = static_cast<int>(efs.size());
    std::vector<double> stat(static_cast<size_t>(n));
    const int threads = stat_threads(jobs);
    const bool parallel = threads > 1;
    (void)parallel;
#ifdef QGRAPH_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) if (parallel)
#endif
    for (int i = 0; i < n; ++i) {
        const double f = efs[static_cast<size_t>(i)].evaluate(x);
        stat[static_cast<size_t>(i)] = f * f;
    }
    return heat_trace_impl(sp, efs, times, 2.0 / deg_x, stat);
}

HeatTraceResult heat_trace_vertex(const Spectrum& sp, const std::vector<Eigenfunction>& efs, int v,
                                  const std::vector<double>& times, int jobs) {
    if (efs.size() != sp.values.size())
        throw std::invalid_argument("one eigenfunction per eigenvalue required");
    const int n = static_cast<int>(efs.size());
    std::vector<double> stat(static_cast<size_t>(n));
    const int threads = stat_threads(jobs);
    const bool parallel = threads > 1;
    (void)parallel;
#ifdef QGRAPH_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) if (parallel)
#endif
    for (int i = 0; i < n; ++i) {
        const double s = efs[static_cast<size_t>(i)].vertex_sum(v);
        stat[static_cast<size_t>(i)] = s * s;
    }
    const double predicted = 2.0 * efs.front().graph().degree(v);
    return heat_trace_impl(sp, efs, times, predicted, stat);
}

namespace {

double heat_kernel_at(const Spectrum& sp, const std::vector<Eigenfunction>& efs, double t,
                      const std::vector<double>& fx, const std::vector<double>& fy) {
    double s = 0.0;
    for (size_t n = 0; n < efs.size(); ++n) s += std::exp(-sp.values[n] * t) * fx[n] * fy[n];
    return s;
}

std::vector<std::vector<double>> point_traces(const std::vector<Eigenfunction>& efs,
                                              const std::vector<GraphPoint>& points, int jobs) {
    const int n = static_cast<int>(efs.size());
    std::vector<std::vector<double>> out(points.size(), std::vector<double>(static_cast<size_t>(n)));
    const int threads = stat_threads(jobs);
    const bool parallel = threads > 1;
    (void)parallel;
#ifdef QGRAPH_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) if (parallel)
#endif
    for (int i = 0; i < n; ++i)
        for (size_t p = 0; p < points.size(); ++p)
            out[p][static_cast<size_t>(i)] = efs[static_cast<size_t>(i)].evaluate(points[p]);
    return out;
}

}  // namespace

BracketingResult heat_bracketing(const Spectrum& sp_mid, const std::vector<Eigenfunction>& efs_mid,
                                 const Spectrum& sp_plus,
                                 const std::vector<Eigenfunction>& efs_plus,
                                 const Spectrum& sp_minus,
                                 const std::vector<Eigenfunction>& efs_minus,
                                 const std::vector<double>& times,
                                 const std::vector<GraphPoint>& points, int jobs) {
    if (times.empty() || points.empty()) throw std::invalid_argument("need times and points");
    const double t_min = *std::min_element(times.begin(), times.end());
    if (!(t_min > 0.0)) throw std::invalid_argument("times must be positive");
    for (const Spectrum* sp : {&sp_mid, &sp_plus, &sp_minus})
        if (sp->values.empty() || sp->values.back() * t_min < 30.0)
            throw std::invalid_argument("spectral window too small for the requested times");

    const auto tr_mid = point_traces(efs_mid, points, jobs);
    const auto tr_plus = point_traces(efs_plus, points, jobs);
    const auto tr_minus = point_traces(efs_minus, points, jobs);

    BracketingResult out;
    for (double t : times) {
        for (size_t ix = 0; ix < points.size(); ++ix) {
            for (size_t iy = 0; iy < points.size(); ++iy) {
                BracketRow row;
                row.t = t;
                row.x = points[ix];
                row.y = points[iy];
                row.lower = heat_kernel_at(sp_plus, efs_plus, t, tr_plus[ix], tr_plus[iy]);
                row.mid = heat_kernel_at(sp_mid, efs_mid, t, tr_mid[ix], tr_mid[iy]);
                row.upper = heat_kernel_at(sp_minus, efs_minus, t, tr_minus[ix], tr_minus[iy]);
                out.rows.push_back(row);
                out.worst_lower = std::max(out.worst_lower, row.lower - row.mid);
                out.worst_upper = std::max(out.worst_upper, row.mid - row.upper);
            }
        }
    }
    return out;
}

IsospectralResult compare_spectra(const Spectrum& sa, const Spectrum& sb, int n,
                                  double drop_below) {
    IsospectralResult r;
    for (double v : sa.values)
        if (v > drop_below && static_cast<int>(r.a.size()) < n) r.a.push_back(v);
    for (double v : sb.values)
        if (v > drop_below && static_cast<int>(r.b.size()) < n) r.b.push_back(v);
    if (static_cast<int>(r.a.size()) < n || static_cast<int>(r.b.size()) < n)
        throw std::invalid_argument("not enough eigenvalues above the threshold to compare");
    r.compared = n;
    for (int i = 0; i < n; ++i)
        r.max_rel_dev =
            std::max(r.max_rel_dev, std::abs(r.a[static_cast<size_t>(i)] - r.b[static_cast<size_t>(i)]) /
                                        (1.0 + std::abs(r.a[static_cast<size_t>(i)])));
    return r;
}

CorollaryResult corollary_series(const std::vector<double>& mu_q,
                                 const std::vector<double>& lam_q_beta,
                                 const std::vector<double>& ak_free,
                                 const std::vector<double>& beta_min_free, double q_sup,
                                 int n_max) {
    for (const std::vector<double>* s : {&mu_q, &lam_q_beta, &ak_free, &beta_min_free})
        if (static_cast<int>(s->size()) < n_max)
            throw std::invalid_argument("not enough eigenvalues for the requested range");
    CorollaryResult r;
    r.lhs.resize(static_cast<size_t>(n_max));
    r.bound.resize(static_cast<size_t>(n_max));
    double acc_lhs = 0.0, acc_bound = 0.0;
    for (int n = 0; n < n_max; ++n) {
        acc_lhs += mu_q[static_cast<size_t>(n)] - lam_q_beta[static_cast<size_t>(n)];
        acc_bound += ak_free[static_cast<size_t>(n)] - beta_min_free[static_cast<size_t>(n)];
        r.lhs[static_cast<size_t>(n)] = acc_lhs / (n + 1);
        r.bound[static_cast<size_t>(n)] = acc_bound / (n + 1) - 2.0 * q_sup;
    }
    r.increasing = growing_at_checkpoints(r.lhs);
    r.exceeds = true;
    for (int n = 0; n < n_max; ++n)
        if (!(r.lhs[static_cast<size_t>(n)] >= r.bound[static_cast<size_t>(n)] - 1e-9))
            r.exceeds = false;
    return r;
}

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

}  // namespace

void write_spectrum_csv(const std::string& path, const Spectrum& sp) {
    std::ofstream out = open_out(path);
    out << "index,eigenvalue,multiplicity\n";
    for (size_t i = 0; i < sp.values.size(); ++i) {
        const int ci = sp.cluster_index[i];
        out << i << ',' << format_g17(sp.values[i]) << ','
            << sp.clusters[static_cast<size_t>(ci)].multiplicity << '\n';
    }
}

void write_compare_csv(const std::string& path, const MeanDistanceResult& r) {
    std::ofstream out = open_out(path);
    out << "N,C(N),predicted,extrapolated\n";
    for (size_t i = 0; i < r.cesaro.size(); ++i)
        out << (i + 1) << ',' << format_g17(r.cesaro[i]) << ',' << format_g17(r.predicted) << ','
            << format_g17(r.extrapolated) << '\n';
}

void write_weyl_csv(const std::string& path, const CesaroSeries& r) {
    std::ofstream out = open_out(path);
    out << "N,cesaro,predicted\n";
    for (size_t i = 0; i < r.cesaro.size(); ++i)
        out << (i + 1) << ',' << format_g17(r.cesaro[i]) << ',' << format_g17(r.predicted) << '\n';
}

void write_heat_csv(const std::string& path, const HeatTraceResult& r) {
    std::ofstream out = open_out(path);
    out << "t,value,predicted\n";
    for (const HeatRow& row : r.rows)
        out << format_g17(row.t) << ',' << format_g17(row.value) << ','
            << format_g17(row.predicted) << '\n';
}

}  // namespace qgraph
