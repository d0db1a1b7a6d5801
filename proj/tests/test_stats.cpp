#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qgraph/conditions.hpp"
#include "qgraph/eigenfunction.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/potential.hpp"
#include "qgraph/secular.hpp"
#include "qgraph/stats.hpp"

using namespace qgraph;

namespace {

Spectrum synthetic(const std::vector<std::pair<double, int>>& entries) {
    Spectrum sp;
    for (const auto& [lam, mult] : entries) {
        EigenvalueCluster cl;
        cl.lambda = lam;
        cl.multiplicity = mult;
        const int ci = static_cast<int>(sp.clusters.size());
        sp.clusters.push_back(cl);
        for (int k = 0; k < mult; ++k) {
            sp.values.push_back(lam);
            sp.cluster_index.push_back(ci);
        }
    }
    sp.window_lo = sp.values.front() - 1.0;
    sp.window_hi = sp.values.back() + 1.0;
    return sp;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("predicted mean-distance limit") {
    const MetricGraph g = make_star(3, 1.0);  // degrees 3,1,1,1 and L = 3
    const std::vector<double> ones(4, 1.0), twos(4, 2.0);
    CHECK(mean_distance_limit(g, ones, twos) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(mean_distance_limit(g, ones, twos, 2.1) == doctest::Approx(2.7).epsilon(1e-14));
    CHECK(mean_distance_limit(g, twos, twos) == doctest::Approx(0.0));
    std::vector<double> with_zero = ones;
    with_zero[2] = 0.0;
    CHECK_THROWS_AS(mean_distance_limit(g, with_zero, twos), std::invalid_argument);
    CHECK_THROWS_AS(mean_distance_limit(g, {1.0, 1.0}, twos), std::invalid_argument);
}

TEST_CASE("cluster averaging and running means") {
    const Spectrum sp = synthetic({{1.0, 1}, {2.0, 2}});
    const std::vector<double> avg = cluster_averaged(sp, {10.0, 4.0, 6.0});
    REQUIRE(avg.size() == 3);
    CHECK(avg[0] == doctest::Approx(10.0));
    CHECK(avg[1] == doctest::Approx(5.0));
    CHECK(avg[2] == doctest::Approx(5.0));
    CHECK_THROWS_AS(cluster_averaged(sp, {1.0, 2.0}), std::invalid_argument);

    const std::vector<double> cm = running_cesaro({2.0, 4.0, 6.0}, 3);
    REQUIRE(cm.size() == 3);
    CHECK(cm[0] == doctest::Approx(2.0));
    CHECK(cm[1] == doctest::Approx(3.0));
    CHECK(cm[2] == doctest::Approx(4.0));
    CHECK_THROWS_AS(running_cesaro({1.0}, 2), std::invalid_argument);
}

TEST_CASE("tail fit recovers an exact 1/N series") {
    // differences engineered so C(N) = 5 + 7/N exactly
    const int n = 60;
    std::vector<double> a(static_cast<size_t>(n), 5.0), b(static_cast<size_t>(n), 0.0);
    a[0] = 12.0;
    const MeanDistanceResult r = mean_eigenvalue_distance(a, b, 5.0, n);
    REQUIRE(static_cast<int>(r.cesaro.size()) == n);
    for (int k = 1; k <= n; ++k)
        CHECK(r.cesaro[static_cast<size_t>(k - 1)] == doctest::Approx(5.0 + 7.0 / k).epsilon(1e-13));
    CHECK(r.predicted == doctest::Approx(5.0));
    CHECK(r.extrapolated == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(r.slope == doctest::Approx(7.0).epsilon(1e-8));
    CHECK(r.fit_rms <= 1e-10);
    CHECK_THROWS_AS(mean_eigenvalue_distance(a, b, 5.0, n + 1), std::invalid_argument);
    CHECK_THROWS_AS(mean_eigenvalue_distance(a, b, 5.0, 0), std::invalid_argument);
}

TEST_CASE("spectra are aligned and compared after a threshold") {
    const Spectrum sa = synthetic({{-5.0, 1}, {1.0, 1}, {2.0, 1}, {3.0, 1}});
    const Spectrum sb = synthetic({{-4.9, 1}, {1.0, 1}, {2.0, 1}, {3.0 + 6e-9, 1}});
    const IsospectralResult all = compare_spectra(sa, sb, 4);
    CHECK(all.compared == 4);
    CHECK(all.max_rel_dev == doctest::Approx(0.1 / 6.0).epsilon(1e-9));
    const IsospectralResult trimmed = compare_spectra(sa, sb, 3, 0.0);
    CHECK(trimmed.compared == 3);
    CHECK(trimmed.max_rel_dev == doctest::Approx(6e-9 / 4.0).epsilon(1e-6));
    CHECK_THROWS_AS(compare_spectra(sa, sb, 4, 0.0), std::invalid_argument);
}

TEST_CASE("shift-identity residual decays quadratically in the panel count") {
    const MetricGraph g = make_interval(1.0);
    const std::vector<double> beta_a(2, 2.0), beta_b(2, 1.0);
    const Potential q = Potential::constant(g, 0.3);
    const HadamardResult r8 = hadamard_identity(g, beta_a, beta_b, q, 2, 8);
    const HadamardResult r16 = hadamard_identity(g, beta_a, beta_b, q, 2, 16);
    REQUIRE(!r8.crossed);
    REQUIRE(!r16.crossed);
    REQUIRE(r8.lhs.size() == 2);
    CHECK(r8.max_residual > 0.0);
    const double ratio = r8.max_residual / r16.max_residual;
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.5);
    CHECK_THROWS_AS(hadamard_identity(g, beta_a, beta_b, q, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(hadamard_identity(g, {2.0, 0.0}, beta_b, q, 2, 8), std::invalid_argument);
}

TEST_CASE("heat statistics refuse an insufficient spectral window") {
    const MetricGraph g = make_interval(1.0);
    auto sys = std::make_shared<SecularSystem>(g, VertexConditionSet::kirchhoff(2),
                                               Potential::zero(g));
    const Spectrum sp = find_spectrum_first_n(*sys, 5);
    const std::vector<Eigenfunction> efs = build_eigenfunctions(sys, sp);
    CHECK_THROWS_WITH_AS(heat_trace_point(sp, efs, GraphPoint{0, 0.5}, 2, {1e-3}),
                         "spectral window too small for the requested times",
                         std::invalid_argument);
    CHECK_THROWS_AS(heat_trace_point(sp, efs, GraphPoint{0, 0.5}, 2, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(heat_trace_point(sp, efs, GraphPoint{0, 0.5}, 2, {-1.0}),
                    std::invalid_argument);
}

TEST_CASE("seventeen significant digits round-trip exactly") {
    for (double x : {3.14159265358979323846, 1.0 / 3.0, 1e-300, -2.5e17, 0.0,
                     6.02214076e23, -0.1}) {
        const std::string s = format_g17(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("csv writers emit stable headers and data") {
    const MetricGraph g = make_interval(1.0);
    const SecularSystem sys(g, VertexConditionSet::dirichlet(2), Potential::zero(g));
    const Spectrum sp = find_spectrum_first_n(sys, 3);
    const std::filesystem::path dir = std::filesystem::temp_directory_path();
    const std::filesystem::path p1 = dir / "qgraph_test_spectrum.csv";
    write_spectrum_csv(p1.string(), sp);
    const std::string first = slurp(p1);
    CHECK(first.rfind("index,eigenvalue,multiplicity\n", 0) == 0);
    // rewrite must be byte-identical
    write_spectrum_csv(p1.string(), sp);
    CHECK(slurp(p1) == first);
    std::filesystem::remove(p1);
    CHECK_THROWS_AS(write_spectrum_csv((dir / "no_such_dir" / "x.csv").string(), sp),
                    std::runtime_error);
}
