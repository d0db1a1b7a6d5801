#include "qgraph/fem.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgraph {

namespace {

struct Mesh {
    std::vector<int> edge_offset;  // first node of each edge block
    std::vector<int> edge_cells;   // elements per edge
    int total_nodes = 0;
    double max_h = 0.0;
};

Mesh build_mesh(const MetricGraph& g, double target_h) {
    Mesh m;
    m.edge_offset.reserve(static_cast<size_t>(g.num_edges()));
    m.edge_cells.reserve(static_cast<size_t>(g.num_edges()));
    int offset = 0;
    for (const Edge& e : g.edges()) {
        int n = std::max(4, static_cast<int>(std::ceil(e.length / target_h)));
        m.edge_offset.push_back(offset);
        m.edge_cells.push_back(n);
        offset += n + 1;
        m.max_h = std::max(m.max_h, e.length / n);
    }
    m.total_nodes = offset;
    return m;
}

int boundary_node(const Mesh& m, const Incidence& inc) {
    return inc.end == EdgeEnd::Zero
               ? m.edge_offset[static_cast<size_t>(inc.edge)]
               : m.edge_offset[static_cast<size_t>(inc.edge)] +
                     m.edge_cells[static_cast<size_t>(inc.edge)];
}

}  // namespace

FormDiscretization discretize(const MetricGraph& g, const VertexConditionSet& conds,
                              const Potential& q, double target_h) {
    if (!(target_h > 0.0)) throw std::invalid_argument("mesh width must be positive");
    if (target_h > g.min_edge_length() / 4.0)
        throw std::invalid_argument("mesh too coarse: need at least four cells on the shortest edge");
    Mesh mesh = build_mesh(g, target_h);
    const int nfull = mesh.total_nodes;

    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(static_cast<size_t>(nfull) * 4);
    mt.reserve(static_cast<size_t>(nfull) * 4);
    for (int e = 0; e < g.num_edges(); ++e) {
        const double ell = g.edge(e).length;
        const int n = mesh.edge_cells[static_cast<size_t>(e)];
        const double h = ell / n;
        const int base = mesh.edge_offset[static_cast<size_t>(e)];
        const EdgePotential& qe = q.on_edge(e);
        for (int c = 0; c < n; ++c) {
            const int i = base + c, j = base + c + 1;
            const double qmid = qe.eval((c + 0.5) * h, ell);
            const double k_diag = 1.0 / h + qmid * h / 3.0;
            const double k_off = -1.0 / h + qmid * h / 6.0;
            kt.emplace_back(i, i, k_diag);
            kt.emplace_back(j, j, k_diag);
            kt.emplace_back(i, j, k_off);
            kt.emplace_back(j, i, k_off);
            mt.emplace_back(i, i, h / 3.0);
            mt.emplace_back(j, j, h / 3.0);
            mt.emplace_back(i, j, h / 6.0);
            mt.emplace_back(j, i, h / 6.0);
        }
    }

    // Vertex boundary terms in the full (unconstrained) node space.
    for (int v = 0; v < g.num_vertices(); ++v) {
        const VertexCondition& c = conds.at(v);
        const auto& inc = g.incidences(v);
        if (c.kind == ConditionKind::Delta && c.strength != 0.0) {
            // Values get merged below; the term sigma |f(v)|^2 may be
            // attached to any one endpoint node.
            const int node = boundary_node(mesh, inc.front());
            kt.emplace_back(node, node, c.strength);
        } else if (c.kind == ConditionKind::DeltaPrime && c.strength != 0.0) {
            // Penalty (1/beta) |sum of endpoint values|^2.
            const double w = 1.0 / c.strength;
            for (const Incidence& a : inc)
                for (const Incidence& b : inc)
                    kt.emplace_back(boundary_node(mesh, a), boundary_node(mesh, b), w);
        }
    }

    // Constraint handling: build the sparse map T from reduced to full
    // coordinates.  column(T, r) spans the admissible subspace.
    //  - Delta / Kirchhoff: all endpoint nodes at v share one reduced dof.
    //  - Dirichlet: endpoint nodes are dropped (also zero-strength
    //    derivative coupling at degree-one vertices).
    //  - DeltaPrime with beta = 0, degree >= 2: last endpoint node is
    //    minus the sum of the others.
    enum class NodeRole { Free, Master, Slave, Dropped, Eliminated };
    std::vector<NodeRole> role(static_cast<size_t>(nfull), NodeRole::Free);
    std::vector<int> master_of(static_cast<size_t>(nfull), -1);
    std::vector<std::vector<int>> elim_partners(static_cast<size_t>(nfull));
    for (int v = 0; v < g.num_vertices(); ++v) {
        const VertexCondition& c = conds.at(v);
        const auto& inc = g.incidences(v);
        if (c.kind == ConditionKind::Delta) {
            const int master = boundary_node(mesh, inc.front());
            for (size_t i = 1; i < inc.size(); ++i) {
                const int node = boundary_node(mesh, inc[i]);
                role[static_cast<size_t>(node)] = NodeRole::Slave;
                master_of[static_cast<size_t>(node)] = master;
            }
        } else if (c.kind == ConditionKind::Dirichlet) {
            for (const Incidence& a : inc)
                role[static_cast<size_t>(boundary_node(mesh, a))] = NodeRole::Dropped;
        } else if (c.kind == ConditionKind::DeltaPrime && c.strength == 0.0) {
            if (inc.size() == 1) {
                role[static_cast<size_t>(boundary_node(mesh, inc.front()))] = NodeRole::Dropped;
            } else {
                const int last = boundary_node(mesh, inc.back());
                role[static_cast<size_t>(last)] = NodeRole::Eliminated;
                for (size_t i = 0; i + 1 < inc.size(); ++i)
                    elim_partners[static_cast<size_t>(last)].push_back(
                        boundary_node(mesh, inc[i]));
            }
        }
    }

    std::vector<int> reduced_id(static_cast<size_t>(nfull), -1);
    int nred = 0;
    for (int i = 0; i < nfull; ++i)
        if (role[static_cast<size_t>(i)] == NodeRole::Free ||
            role[static_cast<size_t>(i)] == NodeRole::Master)
            reduced_id[static_cast<size_t>(i)] = nred++;
    for (int i = 0; i < nfull; ++i)
        if (role[static_cast<size_t>(i)] == NodeRole::Slave)
            reduced_id[static_cast<size_t>(i)] =
                reduced_id[static_cast<size_t>(master_of[static_cast<size_t>(i)])];

    std::vector<Eigen::Triplet<double>> tt;
    tt.reserve(static_cast<size_t>(nfull) + 8);
    for (int i = 0; i < nfull; ++i) {
        switch (role[static_cast<size_t>(i)]) {
            case NodeRole::Free:
            case NodeRole::Master:
            case NodeRole::Slave:
                tt.emplace_back(i, reduced_id[static_cast<size_t>(i)], 1.0);
                break;
            case NodeRole::Dropped:
                break;
            case NodeRole::Eliminated:
                for (int p : elim_partners[static_cast<size_t>(i)])
                    tt.emplace_back(i, reduced_id[static_cast<size_t>(p)], -1.0);
                break;
        }
    }

    Eigen::SparseMatrix<double> kfull(nfull, nfull), mfull(nfull, nfull), t(nfull, nred);
    kfull.setFromTriplets(kt.begin(), kt.end());
    mfull.setFromTriplets(mt.begin(), mt.end());
    t.setFromTriplets(tt.begin(), tt.end());

    FormDiscretization d;
    d.stiffness = t.transpose() * kfull * t;
    d.mass = t.transpose() * mfull * t;
    d.stiffness.makeCompressed();
    d.mass.makeCompressed();
    d.dofs = nred;
    d.mesh_h = mesh.max_h;
    return d;
}

long count_below(const FormDiscretization& d, double lambda) {
    double shift = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Eigen::SparseMatrix<double> a = d.stiffness - (lambda + shift) * d.mass;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        ldlt.compute(a);
        if (ldlt.info() == Eigen::Success) {
            const auto& diag = ldlt.vectorD();
            long neg = 0;
            bool clean = true;
            for (Eigen::Index i = 0; i < diag.size(); ++i) {
                if (diag(i) < 0.0) ++neg;
                if (diag(i) == 0.0 || !std::isfinite(diag(i))) clean = false;
            }
            if (clean) return neg;
        }
        shift = (shift == 0.0 ? 1e-10 : shift * 32.0) * (1.0 + std::abs(lambda));
    }
    throw std::runtime_error("inertia count failed: repeated zero pivots");
}

std::vector<long> counts_below(const FormDiscretization& d, const std::vector<double>& lambdas) {
    std::vector<long> out(lambdas.size());
    if (lambdas.empty()) return out;
    // The sparsity pattern of stiffness - lambda * mass is independent of
    // lambda, so the symbolic factorization is shared across all shifts.
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    Eigen::SparseMatrix<double> a = d.stiffness - lambdas.front() * d.mass;
    ldlt.analyzePattern(a);
    for (size_t j = 0; j < lambdas.size(); ++j) {
        const double lambda = lambdas[j];
        double shift = 0.0;
        bool done = false;
        for (int attempt = 0; attempt < 6 && !done; ++attempt) {
            a = d.stiffness - (lambda + shift) * d.mass;
            ldlt.factorize(a);
            if (ldlt.info() == Eigen::Success) {
                const auto& diag = ldlt.vectorD();
                long neg = 0;
                bool clean = true;
                for (Eigen::Index i = 0; i < diag.size(); ++i) {
                    if (diag(i) < 0.0) ++neg;
                    if (diag(i) == 0.0 || !std::isfinite(diag(i))) clean = false;
                }
                if (clean) {
                    out[j] = neg;
                    done = true;
                }
            }
            shift = (shift == 0.0 ? 1e-10 : shift * 32.0) * (1.0 + std::abs(lambda));
        }
        if (!done) throw std::runtime_error("inertia count failed: repeated zero pivots");
    }
    return out;
}

std::vector<double> lowest_eigenvalues(const FormDiscretization& d, int n, double lo) {
    if (n < 1) return {};
    if (count_below(d, lo) != 0)
        throw std::invalid_argument("lower bisection bound is not below the spectrum");
    // Grow an upper bound covering n eigenvalues.
    double hi = std::max(1.0, std::abs(lo) * 2.0);
    while (count_below(d, hi) < n) {
        hi *= 2.0;
        if (hi > 1e14) throw std::runtime_error("failed to bracket requested eigenvalues");
    }
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n));
    double left = lo;
    for (int i = 0; i < n; ++i) {
        // Smallest lambda with count_below(lambda) >= i + 1.
        double a = left, b = hi;
        while (b - a > 1e-13 * (1.0 + std::abs(a) + std::abs(b))) {
            const double mid = 0.5 * (a + b);
            if (count_below(d, mid) >= i + 1)
                b = mid;
            else
                a = mid;
        }
        out.push_back(0.5 * (a + b));
        left = a;  // eigenvalue i+1 cannot lie below this
    }
    return out;
}

std::vector<double> lowest_eigenvalues_extrapolated(const MetricGraph& g,
                                                    const VertexConditionSet& conds,
                                                    const Potential& q, int n, double h) {
    const double lo = spectral_lower_bound(g, conds, q.sup_norm()) - 1.0;
    FormDiscretization coarse = discretize(g, conds, q, h);
    FormDiscretization fine = discretize(g, conds, q, h / 2.0);
    std::vector<double> a = lowest_eigenvalues(coarse, n, lo);
    std::vector<double> b = lowest_eigenvalues(fine, n, lo);
    std::vector<double> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = (4.0 * b[i] - a[i]) / 3.0;
    return out;
}

}  // namespace qgraph
