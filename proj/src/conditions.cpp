#include "qgraph/conditions.hpp"

#include <cmath>
#include <stdexcept>

namespace qgraph {

VertexConditionSet::VertexConditionSet(std::vector<VertexCondition> conditions)
    : conditions_(std::move(conditions)) {
    if (conditions_.empty())
        throw std::invalid_argument("condition set must cover at least one vertex");
    for (const VertexCondition& c : conditions_)
        if (c.kind == ConditionKind::DeltaPrime && !std::isfinite(c.strength))
            throw std::invalid_argument("delta-prime strength must be finite");
}

VertexConditionSet VertexConditionSet::uniform(int num_vertices, VertexCondition c) {
    return VertexConditionSet(std::vector<VertexCondition>(static_cast<size_t>(num_vertices), c));
}

VertexConditionSet VertexConditionSet::delta_prime(int num_vertices, double beta) {
    return uniform(num_vertices, {ConditionKind::DeltaPrime, beta});
}

VertexConditionSet VertexConditionSet::delta_prime(std::vector<double> betas) {
    std::vector<VertexCondition> c;
    for (double b : betas) c.push_back({ConditionKind::DeltaPrime, b});
    return VertexConditionSet(std::move(c));
}

VertexConditionSet VertexConditionSet::anti_kirchhoff(int num_vertices) {
    return delta_prime(num_vertices, 0.0);
}

VertexConditionSet VertexConditionSet::delta(int num_vertices, double sigma) {
    return uniform(num_vertices, {ConditionKind::Delta, sigma});
}

VertexConditionSet VertexConditionSet::delta(std::vector<double> sigmas) {
    std::vector<VertexCondition> c;
    for (double s : sigmas) c.push_back({ConditionKind::Delta, s});
    return VertexConditionSet(std::move(c));
}

VertexConditionSet VertexConditionSet::kirchhoff(int num_vertices) {
    return delta(num_vertices, 0.0);
}

VertexConditionSet VertexConditionSet::dirichlet(int num_vertices) {
    return uniform(num_vertices, {ConditionKind::Dirichlet, 0.0});
}

VertexConditionSet VertexConditionSet::with(int v, VertexCondition c) const {
    std::vector<VertexCondition> copy = conditions_;
    copy.at(v) = c;
    return VertexConditionSet(std::move(copy));
}

ABPair vertex_ab_pair(const MetricGraph& g, const VertexConditionSet& conds, int v) {
    if (conds.size() != g.num_vertices())
        throw std::invalid_argument("condition set size does not match vertex count");
    const int d = g.degree(v);
    ABPair p;
    p.A = Eigen::MatrixXd::Zero(d, d);
    p.B = Eigen::MatrixXd::Zero(d, d);
    const VertexCondition& c = conds.at(v);
    switch (c.kind) {
        case ConditionKind::DeltaPrime:
            // Rows 0..d-2: successive inward derivatives agree.
            for (int i = 0; i + 1 < d; ++i) {
                p.B(i, i) = 1.0;
                p.B(i, i + 1) = -1.0;
            }
            // Last row: sum of values equals beta times the common derivative.
            for (int j = 0; j < d; ++j) p.A(d - 1, j) = 1.0;
            p.B(d - 1, 0) = -c.strength;
            break;
        case ConditionKind::Delta:
            // Rows 0..d-2: successive boundary values agree.
            for (int i = 0; i + 1 < d; ++i) {
                p.A(i, i) = 1.0;
                p.A(i, i + 1) = -1.0;
            }
            // Last row: sum of inward derivatives equals sigma times the value.
            p.A(d - 1, 0) = -c.strength;
            for (int j = 0; j < d; ++j) p.B(d - 1, j) = 1.0;
            break;
        case ConditionKind::Dirichlet:
            p.A = Eigen::MatrixXd::Identity(d, d);
            break;
    }
    return p;
}

std::vector<ABPair> to_ab_pairs(const MetricGraph& g, const VertexConditionSet& conds) {
    std::vector<ABPair> out;
    out.reserve(static_cast<size_t>(g.num_vertices()));
    for (int v = 0; v < g.num_vertices(); ++v) out.push_back(vertex_ab_pair(g, conds, v));
    return out;
}

bool check_self_adjoint(const ABPair& p, double tol) {
    const int d = static_cast<int>(p.A.rows());
    if (p.A.cols() != d || p.B.rows() != d || p.B.cols() != d) return false;
    Eigen::MatrixXd ab(d, 2 * d);
    ab << p.A, p.B;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ab);
    const auto& s = svd.singularValues();
    if (s(d - 1) <= tol * s(0)) return false;  // rank deficient
    Eigen::MatrixXd m = p.A * p.B.transpose();
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

Eigen::MatrixXd vertex_projection(VertexProjectionKind kind, int degree) {
    if (degree < 1) throw std::invalid_argument("projection needs degree >= 1");
    const double d = static_cast<double>(degree);
    switch (kind) {
        case VertexProjectionKind::MeanValue:
            return Eigen::MatrixXd::Constant(degree, degree, 1.0 / d);
        case VertexProjectionKind::DeltaPrime:
            return Eigen::MatrixXd::Zero(degree, degree);
        case VertexProjectionKind::Delta:
            return Eigen::MatrixXd::Identity(degree, degree) -
                   Eigen::MatrixXd::Constant(degree, degree, 1.0 / d);
    }
    throw std::logic_error("unreachable");
}

double spectral_lower_bound(const MetricGraph& g, const VertexConditionSet& conds, double q_sup) {
    // Quadratic form: |f'|^2 + int q |f|^2 + vertex terms.  Negative
    // vertex terms are absorbed with the trace bound
    //   |f(x)|^2 <= eps |f'|^2 + (1/eps + 2/ell) |f|^2
    // choosing eps so all gradient contributions sum below 1.
    const double ell = g.min_edge_length();
    double penalty = 0.0;
    int negative_terms = 0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        const VertexCondition& c = conds.at(v);
        if (c.kind == ConditionKind::Delta && c.strength < 0.0) ++negative_terms;
        if (c.kind == ConditionKind::DeltaPrime && c.strength < 0.0) ++negative_terms;
    }
    if (negative_terms == 0) return -q_sup - 1.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        const VertexCondition& c = conds.at(v);
        const double d = g.degree(v);
        double weight = 0.0;  // coefficient of the negative boundary term
        if (c.kind == ConditionKind::Delta && c.strength < 0.0) weight = -c.strength;
        if (c.kind == ConditionKind::DeltaPrime && c.strength < 0.0)
            weight = d * d / -c.strength;  // |sum f|^2 / beta >= -d sum|f|^2 / |beta|
        if (weight == 0.0) continue;
        // weight * d boundary values, each bounded with eps = 1/(2 * weight * d * n).
        const double eps = 1.0 / (2.0 * weight * d * negative_terms);
        penalty += weight * d * (1.0 / eps + 2.0 / ell);
    }
    return -q_sup - penalty - 1.0;
}

Eigen::MatrixXd scattering_limit(const MetricGraph& g, const VertexConditionSet& conds, int v) {
    const int d = g.degree(v);
    Eigen::MatrixXd p;
    switch (conds.at(v).kind) {
        case ConditionKind::DeltaPrime:
            p = vertex_projection(VertexProjectionKind::DeltaPrime, d);
            break;
        case ConditionKind::Delta:
            p = vertex_projection(VertexProjectionKind::Delta, d);
            break;
        case ConditionKind::Dirichlet:
            p = Eigen::MatrixXd::Identity(d, d);
            break;
    }
    return Eigen::MatrixXd::Identity(d, d) - 2.0 * p;
}

}  // namespace qgraph
