#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinnet/network.hpp"

namespace spinnet {

// Eigenstructure of the drift matrix A on the accessible part of the
// single-excitation space, plus the decoupled vertex-1 state. Entry 0 is
// always |1> (lambda = 0, alpha = 0); the remaining entries are the bright
// directions, one per distinct A eigenvalue with nonzero overlap on |2>,
// sorted by ascending eigenvalue. Phases are fixed so alpha_n > 0.
struct SpectralData {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // columns, over the full 1-excitation basis
    Eigen::VectorXd overlaps;      // alpha_n = <2|lambda_n>
    std::vector<int> paired_with;  // ASO partner index, -1 when unpaired

    int levels() const { return static_cast<int>(eigenvalues.size()); }
};

SpectralData spectral(const SpinNetwork& net);

// One dark direction: an A eigenvector orthogonal to |2> (and to |1>).
struct DarkComponent {
    double eigenvalue = 0.0;
    Eigen::VectorXcd vector;  // full 1-excitation basis
    double weight = 0.0;      // |<vector|target>|^2
};

struct FidelityBound {
    double value = 0.0;
    std::vector<DarkComponent> dark_components;          // weight > 0 only
    bool phase_attainable = false;
    std::optional<double> global_phase;                  // when attainable
    Eigen::VectorXcd target_decomposition;               // beta_n per spectral level
};

// Largest achievable |<target|U|1>|^2 over all admissible controlled
// evolutions: 1 minus the target's weight on dark directions.
FidelityBound max_fidelity(const SpinNetwork& net, const Eigen::VectorXcd& target);

// For a bipartite drift graph, a target is reachable from |1> only if some
// global phase makes its amplitudes real on vertex 1's side of the partition
// and purely imaginary on the other. Non-bipartite drift imposes no such
// constraint and reports attainable with phase 0.
struct PhaseReachability {
    bool attainable = false;
    double phase = 0.0;  // the global phase that realises the pattern
};
PhaseReachability phase_reachability(const SpinNetwork& net, const Eigen::VectorXcd& target);

enum class DarkClass { TrulyDark, CatalyticallyAccessible };

struct DarkClassification {
    DarkClass kind = DarkClass::TrulyDark;
    std::string blocker;  // names the obstruction for TrulyDark, empty otherwise
};

// Decides whether a dark single-excitation vector can be reached with a
// catalytic second excitation: permutation (anti)symmetry blocks first, then
// two-excitation connectivity, then the exact invariant-subspace membership
// test in the two-excitation sector.
DarkClassification classify_dark(const SpinNetwork& net, const Eigen::VectorXcd& dark_vector);

}  // namespace spinnet
