#include <doctest.h>

#include <Eigen/Dense>
#include <stdexcept>

#include "qgraph/conditions.hpp"
#include "qgraph/graph.hpp"

using namespace qgraph;

namespace {

bool pairs_equal(const ABPair& a, const ABPair& b) {
    return a.A.rows() == b.A.rows() && a.A.cols() == b.A.cols() &&
           (a.A - b.A).norm() == 0.0 && (a.B - b.B).norm() == 0.0;
}

}  // namespace

TEST_CASE("builders assign the requested per-vertex conditions") {
    const auto c = VertexConditionSet::delta_prime(4, 1.5);
    CHECK(c.size() == 4);
    for (int v = 0; v < 4; ++v) {
        CHECK(c.at(v).kind == ConditionKind::DeltaPrime);
        CHECK(c.at(v).strength == doctest::Approx(1.5));
    }
    const auto d = VertexConditionSet::delta_prime({1.0, 2.0, 3.0});
    CHECK(d.size() == 3);
    CHECK(d.at(2).strength == doctest::Approx(3.0));

    const auto mixed = d.with(1, {ConditionKind::Dirichlet, 0.0});
    CHECK(mixed.at(1).kind == ConditionKind::Dirichlet);
    CHECK(mixed.at(0).kind == ConditionKind::DeltaPrime);  // original untouched
    CHECK(d.at(1).kind == ConditionKind::DeltaPrime);
}

TEST_CASE("named special cases coincide with zero-strength families") {
    const MetricGraph g = make_star(3, 1.0);
    const auto kirchhoff = to_ab_pairs(g, VertexConditionSet::kirchhoff(4));
    const auto delta0 = to_ab_pairs(g, VertexConditionSet::delta(4, 0.0));
    const auto anti = to_ab_pairs(g, VertexConditionSet::anti_kirchhoff(4));
    const auto dp0 = to_ab_pairs(g, VertexConditionSet::delta_prime(4, 0.0));
    REQUIRE(kirchhoff.size() == 4);
    for (size_t v = 0; v < 4; ++v) {
        CHECK(pairs_equal(kirchhoff[v], delta0[v]));
        CHECK(pairs_equal(anti[v], dp0[v]));
    }
}

TEST_CASE("condition pairs have the vertex degree as dimension") {
    const MetricGraph g = make_lasso(2.0, 1.0);  // degrees 3 and 1
    const auto conds = VertexConditionSet::delta(2, 0.7);
    const ABPair p0 = vertex_ab_pair(g, conds, 0);
    const ABPair p1 = vertex_ab_pair(g, conds, 1);
    CHECK(p0.A.rows() == 3);
    CHECK(p0.A.cols() == 3);
    CHECK(p0.B.rows() == 3);
    CHECK(p1.A.rows() == 1);
}

TEST_CASE("every condition family is self-adjoint at every degree") {
    const MetricGraph g = make_star(5, 1.0);
    for (double s : {-2.0, 0.0, 0.5, 3.0}) {
        for (auto kind : {ConditionKind::DeltaPrime, ConditionKind::Delta}) {
            const auto conds = VertexConditionSet::uniform(6, {kind, s});
            for (int v = 0; v < 6; ++v)
                CHECK(check_self_adjoint(vertex_ab_pair(g, conds, v)));
        }
    }
    const auto dir = VertexConditionSet::dirichlet(6);
    for (int v = 0; v < 6; ++v) CHECK(check_self_adjoint(vertex_ab_pair(g, dir, v)));
}

TEST_CASE("self-adjointness check rejects defective pairs") {
    ABPair p;
    p.A = Eigen::MatrixXd::Zero(2, 2);
    p.B = Eigen::MatrixXd::Zero(2, 2);
    p.A(0, 0) = 1.0;
    p.B(0, 1) = 1.0;
    CHECK_FALSE(check_self_adjoint(p));  // rank deficient

    ABPair q;
    q.A = Eigen::MatrixXd::Identity(2, 2);
    q.B = Eigen::MatrixXd::Zero(2, 2);
    q.B(0, 1) = 1.0;
    CHECK_FALSE(check_self_adjoint(q));  // A B^T not symmetric
}

TEST_CASE("delta conditions enforce continuity and the derivative-sum rule") {
    // Check the *meaning* of the matrices: vectors satisfying the
    // constraints are annihilated, violating ones are not.
    const MetricGraph g = make_star(3, 1.0);
    const double sigma = 0.8;
    const ABPair p = vertex_ab_pair(g, VertexConditionSet::delta(4, sigma), 0);
    const double c = 0.9;
    Eigen::VectorXd F = Eigen::VectorXd::Constant(3, c);
    Eigen::VectorXd dF(3);
    dF << 0.1, 0.3, sigma * c - 0.4;  // sums to sigma * c
    CHECK((p.A * F + p.B * dF).norm() == doctest::Approx(0.0).epsilon(1e-14));
    dF(0) += 1.0;  // break the sum rule
    CHECK((p.A * F + p.B * dF).norm() > 0.1);
    dF(0) -= 1.0;
    F(1) += 1.0;  // break continuity
    CHECK((p.A * F + p.B * dF).norm() > 0.1);
}

TEST_CASE("delta-prime conditions enforce common derivative and value-sum rule") {
    const MetricGraph g = make_star(3, 1.0);
    const double beta = 1.7;
    const ABPair p = vertex_ab_pair(g, VertexConditionSet::delta_prime(4, beta), 0);
    const double s = -0.6;
    Eigen::VectorXd dF = Eigen::VectorXd::Constant(3, s);
    Eigen::VectorXd F(3);
    F << 0.2, -0.5, beta * s + 0.3;  // sums to beta * s
    CHECK((p.A * F + p.B * dF).norm() == doctest::Approx(0.0).epsilon(1e-14));
    F(2) += 1.0;
    CHECK((p.A * F + p.B * dF).norm() > 0.1);
    F(2) -= 1.0;
    dF(1) += 1.0;  // derivatives no longer share a value
    CHECK((p.A * F + p.B * dF).norm() > 0.1);
}

TEST_CASE("dirichlet kills values and frees derivatives") {
    const MetricGraph g = make_star(3, 1.0);
    const ABPair p = vertex_ab_pair(g, VertexConditionSet::dirichlet(4), 0);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd dF(3);
    dF << 1.0, -2.0, 0.5;
    CHECK((p.A * F + p.B * dF).norm() == doctest::Approx(0.0).epsilon(1e-14));
    F(0) = 1e-3;
    CHECK((p.A * F + p.B * dF).norm() > 1e-4);
}

TEST_CASE("vertex projections") {
    const int d = 4;
    const Eigen::MatrixXd mean = vertex_projection(VertexProjectionKind::MeanValue, d);
    CHECK((mean - Eigen::MatrixXd::Constant(d, d, 1.0 / d)).norm() ==
          doctest::Approx(0.0).epsilon(1e-15));
    CHECK((mean * mean - mean).norm() == doctest::Approx(0.0).epsilon(1e-14));
    const Eigen::MatrixXd none = vertex_projection(VertexProjectionKind::DeltaPrime, d);
    CHECK(none.norm() == 0.0);
    const Eigen::MatrixXd delta = vertex_projection(VertexProjectionKind::Delta, d);
    CHECK((delta - (Eigen::MatrixXd::Identity(d, d) - mean)).norm() ==
          doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("high-energy scattering limit is Id minus twice the family projection") {
    const MetricGraph g = make_star(3, 1.0);
    const int d = 3;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    // Delta family: P = I - mean projector, limit = 2 mean - I.
    const Eigen::MatrixXd s_delta =
        scattering_limit(g, VertexConditionSet::delta(4, 0.8), 0);
    const Eigen::MatrixXd mean = vertex_projection(VertexProjectionKind::MeanValue, d);
    CHECK((s_delta - (2.0 * mean - I)).norm() == doctest::Approx(0.0).epsilon(1e-12));
    // Delta-prime family: P = 0, limit = I.
    const Eigen::MatrixXd s_dp =
        scattering_limit(g, VertexConditionSet::delta_prime(4, 1.2), 0);
    CHECK((s_dp - I).norm() == doctest::Approx(0.0).epsilon(1e-12));
    // Scattering limits are orthogonal and involutive.
    CHECK((s_delta * s_delta - I).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("spectral lower bound is finite and actually a lower bound shape") {
    const MetricGraph g = make_star(3, 1.0);
    const double b0 = spectral_lower_bound(g, VertexConditionSet::kirchhoff(4), 0.0);
    CHECK(b0 <= 0.0);  // constants are Kirchhoff eigenfunctions at lambda 0
    const double bq = spectral_lower_bound(g, VertexConditionSet::kirchhoff(4), 2.5);
    CHECK(bq <= b0);  // a potential bounded by 2.5 can push the bottom down
    const double bd = spectral_lower_bound(g, VertexConditionSet::dirichlet(4), 0.0);
    CHECK(bd <= 0.0);
    CHECK(std::isfinite(bd));
}
