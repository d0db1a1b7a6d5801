#include "qgraph/eigenfunction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qgraph/conditions.hpp"

namespace qgraph {

Eigenfunction::Eigenfunction(std::shared_ptr<const SecularSystem> sys, double lambda,
                             Eigen::VectorXd coeffs,
                             std::shared_ptr<const std::vector<EdgePropagator>> props)
    : sys_(std::move(sys)), lambda_(lambda), coeffs_(std::move(coeffs)), props_(std::move(props)) {
    if (!sys_ || !props_) throw std::invalid_argument("eigenfunction needs its system and propagators");
    if (coeffs_.size() != sys_->dim())
        throw std::invalid_argument("coefficient vector has the wrong dimension");
    if (static_cast<int>(props_->size()) != sys_->graph().num_edges())
        throw std::invalid_argument("one propagator per edge required");
}

const MetricGraph& Eigenfunction::graph() const { return sys_->graph(); }

Eigen::Vector2d Eigenfunction::initial_data(int e) const {
    return Eigen::Vector2d(coeffs_[2 * e], coeffs_[2 * e + 1]);
}

double Eigenfunction::evaluate(GraphPoint p) const {
    const EdgePropagator& pr = props_->at(static_cast<size_t>(p.edge));
    return pr.apply_at(p.x, initial_data(p.edge))[0];
}

double Eigenfunction::derivative(GraphPoint p) const {
    const EdgePropagator& pr = props_->at(static_cast<size_t>(p.edge));
    return pr.apply_at(p.x, initial_data(p.edge))[1];
}

std::pair<double, double> Eigenfunction::end_trace(const Incidence& inc) const {
    const Eigen::Vector2d u0 = initial_data(inc.edge);
    if (inc.end == EdgeEnd::Zero) return {u0[0], u0[1]};
    const Eigen::Vector2d ue = props_->at(static_cast<size_t>(inc.edge)).full() * u0;
    return {ue[0], -ue[1]};
}

std::vector<double> Eigenfunction::vertex_values(int v) const {
    std::vector<double> out;
    for (const Incidence& inc : graph().incidences(v)) out.push_back(end_trace(inc).first);
    return out;
}

std::vector<double> Eigenfunction::vertex_derivatives(int v) const {
    std::vector<double> out;
    for (const Incidence& inc : graph().incidences(v)) out.push_back(end_trace(inc).second);
    return out;
}

double Eigenfunction::vertex_sum(int v) const {
    double s = 0.0;
    for (const Incidence& inc : graph().incidences(v)) s += end_trace(inc).first;
    return s;
}

double Eigenfunction::l2_norm_sq() const {
    double s = 0.0;
    for (int e = 0; e < graph().num_edges(); ++e) {
        const Eigen::Vector2d u0 = initial_data(e);
        s += props_->at(static_cast<size_t>(e)).l2_inner(u0, u0);
    }
    return s;
}

double Eigenfunction::potential_energy() const {
    double s = 0.0;
    for (int e = 0; e < graph().num_edges(); ++e) {
        const Eigen::Vector2d u0 = initial_data(e);
        s += props_->at(static_cast<size_t>(e)).potential_l2_inner(u0, u0);
    }
    return s;
}

double Eigenfunction::sup_norm() const {
    double s = 0.0;
    for (int e = 0; e < graph().num_edges(); ++e)
        s = std::max(s, props_->at(static_cast<size_t>(e)).sup_abs(initial_data(e)));
    return s;
}

double Eigenfunction::condition_residual() const {
    const MetricGraph& g = graph();
    double worst = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        const int d = g.degree(v);
        Eigen::VectorXd vals(d), ders(d);
        int i = 0;
        for (const Incidence& inc : g.incidences(v)) {
            const auto [fv, dv] = end_trace(inc);
            vals[i] = fv;
            ders[i] = dv;
            ++i;
        }
        const ABPair ab = vertex_ab_pair(g, sys_->conditions(), v);
        const double res = (ab.A * vals + ab.B * ders).cwiseAbs().maxCoeff();
        const double scale = 1.0 + vals.cwiseAbs().maxCoeff() + ders.cwiseAbs().maxCoeff();
        worst = std::max(worst, res / scale);
    }
    return worst;
}

namespace {

/// Exact L2 inner product of two solutions of -u'' + q u = lam u taken
/// at different spectral parameters, from the Lagrange identity
///   (lam_u - lam_v) int u v = [v' u - u' v]_0^ell
/// summed over the edges.  Only boundary traces enter, so the value is
/// as accurate as the transfer matrices themselves.
double cross_l2_inner(const MetricGraph& g, const std::vector<EdgePropagator>& props_u,
                      double lam_u, const Eigen::VectorXd& cu,
                      const std::vector<EdgePropagator>& props_v, double lam_v,
                      const Eigen::VectorXd& cv) {
    double s = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Eigen::Vector2d u0(cu[2 * e], cu[2 * e + 1]);
        const Eigen::Vector2d v0(cv[2 * e], cv[2 * e + 1]);
        const Eigen::Vector2d ue = props_u[static_cast<size_t>(e)].full() * u0;
        const Eigen::Vector2d ve = props_v[static_cast<size_t>(e)].full() * v0;
        s += (ve[1] * ue[0] - ue[1] * ve[0]) - (v0[1] * u0[0] - u0[1] * v0[0]);
    }
    return s / (lam_u - lam_v);
}

}  // namespace

std::vector<Eigenfunction> build_eigenfunctions(std::shared_ptr<const SecularSystem> sys,
                                                const Spectrum& spectrum) {
    if (!sys) throw std::invalid_argument("null system");
    std::vector<Eigenfunction> out;
    out.reserve(spectrum.size());
    const MetricGraph& g = sys->graph();
    const Potential& q = sys->potential();
    std::vector<std::shared_ptr<const std::vector<EdgePropagator>>> all_props;
    all_props.reserve(spectrum.size());

    for (const EigenvalueCluster& cl : spectrum.clusters) {
        const int m = cl.multiplicity;
        auto props = std::make_shared<std::vector<EdgePropagator>>();
        props->reserve(static_cast<size_t>(g.num_edges()));
        for (int e = 0; e < g.num_edges(); ++e)
            props->emplace_back(q.on_edge(e), g.edge(e).length, cl.lambda);

        std::vector<Eigen::VectorXd> basis = sys->kernel_basis(cl.lambda, m);

        // A kernel vector computed at a root known only to accuracy
        // eps picks up a component of any eigenspace a gap ~eps away,
        // of order eps / gap.  For near-degenerate neighbors this
        // breaks the mutual L2 orthogonality that spectral sums (heat
        // kernels, local statistics) rely on.  Subtract the neighbor
        // component in coefficient space: the correction direction is
        // the neighbor's initial data propagated at the current
        // eigenvalue, so the result is still an exact solution here,
        // and the cross-lambda Gram entries are available in closed
        // form through cross_l2_inner.
        const double window = 1e-4 * (1.0 + std::abs(cl.lambda));
        for (size_t p = out.size(); p-- > 0;) {
            const double lam_p = out[p].lambda();
            if (cl.lambda - lam_p > window) break;
            if (!(std::abs(cl.lambda - lam_p) > 0.0)) continue;
            const Eigen::VectorXd& d = out[p].coefficients();
            const std::vector<EdgePropagator>& props_p = *all_props[p];
            const double denom =
                cross_l2_inner(g, *props, cl.lambda, d, props_p, lam_p, d);
            if (!(std::abs(denom) > 0.5)) continue;
            for (Eigen::VectorXd& b : basis) {
                const double cross =
                    cross_l2_inner(g, *props, cl.lambda, b, props_p, lam_p, d);
                b -= (cross / denom) * d;
            }
        }

        // L2 Gram of the kernel vectors, edge by edge in closed form.
        Eigen::MatrixXd gram(m, m);
        for (int i = 0; i < m; ++i) {
            for (int j = i; j < m; ++j) {
                double s = 0.0;
                for (int e = 0; e < g.num_edges(); ++e) {
                    const Eigen::Vector2d ui(basis[static_cast<size_t>(i)][2 * e],
                                             basis[static_cast<size_t>(i)][2 * e + 1]);
                    const Eigen::Vector2d vj(basis[static_cast<size_t>(j)][2 * e],
                                             basis[static_cast<size_t>(j)][2 * e + 1]);
                    s += (*props)[static_cast<size_t>(e)].l2_inner(ui, vj);
                }
                gram(i, j) = s;
                gram(j, i) = s;
            }
        }

        // Whiten: columns of B * V * diag(mu^-1/2) are L2-orthonormal.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("Gram eigendecomposition failed");
        const double mu_max = es.eigenvalues().maxCoeff();
        for (int k = 0; k < m; ++k) {
            const double mu = es.eigenvalues()[k];
            if (!(mu > 1e-12 * std::max(1.0, mu_max)))
                throw std::runtime_error("kernel vectors are numerically dependent in L2");
            Eigen::VectorXd c = Eigen::VectorXd::Zero(sys->dim());
            for (int i = 0; i < m; ++i) c += es.eigenvectors()(i, k) * basis[static_cast<size_t>(i)];
            c /= std::sqrt(mu);
            // Deterministic sign: largest-magnitude entry positive,
            // lowest index breaking ties.
            int imax = 0;
            for (int i = 1; i < c.size(); ++i)
                if (std::abs(c[i]) > std::abs(c[imax])) imax = i;
            if (c[imax] < 0.0) c = -c;
            out.emplace_back(sys, cl.lambda, std::move(c), props);
            all_props.push_back(props);
        }
    }
    return out;
}

}  // namespace qgraph
