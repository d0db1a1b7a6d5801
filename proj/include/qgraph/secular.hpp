#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qgraph/conditions.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/potential.hpp"
#include "qgraph/propagator.hpp"

namespace qgraph {

/// Tuning knobs for the spectral scan.
struct SecularOptions {
    double scan_step_factor = 0.25;   // grid step in k units of pi / total length
    double bisect_rel_tol = 1e-11;    // root width: |interval| <= tol * (1 + |lambda|)
    double cluster_rel_tol = 3e-8;    // merge roots closer than tol * (1 + |lambda|)
    double dip_accept_ratio = 0.02;   // refined sigma must undercut flanks by this factor
    double mult_sigma_ratio = 1e-6;   // relative sigma below this counts toward multiplicity
    double kernel_sigma_ratio = 1e-9; // relative sigma of a genuine kernel direction
    int jobs = 0;                     // OpenMP threads; 0 = library default
    bool certify = true;              // run the independent count check
    int max_rescans = 2;              // grid refinements if certification miscounts
    double certificate_dof_cap = 3e6; // refuse meshes beyond this many nodes
};

/// Result of the independent completeness check of a computed window.
struct CompletenessCertificate {
    bool attempted = false;
    bool count_ok = false;   // Galerkin counts match the scan (two meshes)
    bool weyl_ok = false;    // total count consistent with the counting law
    bool mesh_ok = false;    // certification mesh satisfied its resolution targets
    long scan_count = 0;     // eigenvalues the scan found in (lo_cert, hi_cert)
    long galerkin_count = 0;
    long galerkin_count_fine = 0;
    long total_count = 0;     // eigenvalues at or below hi_cert (from the scan)
    long weyl_expected = 0;
    long weyl_slack = 0;
    double lo_cert = 0.0;
    double hi_cert = 0.0;
    double mesh_h = 0.0;
    bool ok() const { return attempted && count_ok && weyl_ok && mesh_ok; }
    std::string summary() const;
};

/// One eigenvalue with its multiplicity.
struct EigenvalueCluster {
    double lambda = 0.0;
    int multiplicity = 1;
    double rel_sigma = 0.0;  // smallest relative singular value at the root
};

/// Sorted spectrum of a window, with multiplicities expanded.
struct Spectrum {
    std::vector<EigenvalueCluster> clusters;
    std::vector<double> values;      // clusters expanded by multiplicity
    std::vector<int> cluster_index;  // values[i] belongs to clusters[cluster_index[i]]
    double window_lo = 0.0;
    double window_hi = 0.0;
    CompletenessCertificate certificate;
    size_t size() const { return values.size(); }
};

/// The 2|E| x 2|E| characteristic system H(lambda) whose kernel at an
/// eigenvalue consists of the per-edge coefficient vectors
/// (u_e(0), u_e'(0)) of eigenfunctions.  Rows are grouped by vertex in
/// incidence order; the matrix handed out is row-equilibrated so both
/// the sign of its determinant and its smallest singular value are
/// meaningful across the window.
class SecularSystem {
  public:
    SecularSystem(MetricGraph g, VertexConditionSet conds, Potential q);

    const MetricGraph& graph() const { return graph_; }
    const VertexConditionSet& conditions() const { return conds_; }
    const Potential& potential() const { return potential_; }
    int dim() const { return 2 * graph_.num_edges(); }

    /// Row-equilibrated H(lambda).
    Eigen::MatrixXd assemble(double lambda) const;
    /// Sign of det H (+1/-1) and the smallest relative singular value.
    void secular_values(double lambda, double& det_sign, double& rel_sigma) const;
    double det_sign(double lambda) const;
    double rel_sigma(double lambda) const;
    /// Basis of the numerical kernel at an eigenvalue of multiplicity m:
    /// the m right singular vectors with smallest singular values.
    std::vector<Eigen::VectorXd> kernel_basis(double lambda, int m) const;

    /// Safe scan floor strictly below the whole spectrum.
    double lambda_floor() const { return floor_; }
    bool self_adjoint() const;

  private:
    MetricGraph graph_;
    VertexConditionSet conds_;
    Potential potential_;
    std::vector<ABPair> pairs_;
    double floor_ = 0.0;
};

/// All eigenvalues in [lo, hi] (OpenMP-parallel scan).
Spectrum find_spectrum(const SecularSystem& sys, double lo, double hi,
                       const SecularOptions& opts = {});
/// Serial reference implementation with identical output.
Spectrum find_spectrum_serial(const SecularSystem& sys, double lo, double hi,
                              const SecularOptions& opts = {});
/// The lowest n eigenvalues (window grows automatically).  The result
/// may carry slightly more than n values if a multiple eigenvalue
/// straddles the cut; it never carries fewer.
Spectrum find_spectrum_first_n(const SecularSystem& sys, int n, const SecularOptions& opts = {});
Spectrum find_spectrum_first_n_serial(const SecularSystem& sys, int n,
                                      const SecularOptions& opts = {});

}  // namespace qgraph
