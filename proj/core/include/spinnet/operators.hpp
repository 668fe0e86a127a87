#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spinnet/network.hpp"

namespace spinnet {

// Ordered basis of excitation-number eigenstates. Each state is the strictly
// ascending tuple of excited spin positions; states are grouped by excitation
// count in the order of `ks` and lexicographic within a count. The usual case
// is a single k.
struct ExcitationBasis {
    int n = 0;
    std::vector<int> ks;
    std::vector<std::vector<int>> states;

    int dim() const { return static_cast<int>(states.size()); }
    // -1 when the tuple is not in the basis
    int index_of(const std::vector<int>& state) const;
    std::string label(int index) const;  // e.g. "3" or "1,4"; "-" for the vacuum
};

ExcitationBasis excitation_basis(int n, int k);
ExcitationBasis sector_basis(int n, const std::vector<int>& ks);

enum class Ham { drift, control };

// Dense Hermitian matrix together with the basis it is written in.
struct OperatorMatrix {
    ExcitationBasis basis;
    Eigen::MatrixXcd entries;
};

// Hamiltonian of the chosen edge set restricted to the k-excitation sector:
// element (S,T) equals the edge weight w_ij when T = S with one excitation
// moved across edge (i,j), else 0. For k=1 this is the weighted adjacency
// matrix.
OperatorMatrix restrict_sector(const SpinNetwork& net, Ham which, int k);

// Block-diagonal (drift, control) pair over the concatenation of the given
// sectors, block order following ks.
std::pair<OperatorMatrix, OperatorMatrix> direct_sum_sector(const SpinNetwork& net,
                                                            const std::vector<int>& ks);

// Matrix exports: JSON as nested arrays of [re, im] pairs; CSV as
// "row,col,value" triplets of the nonzero entries of a real matrix
// (1-based indices).
std::string matrix_to_json(const Eigen::MatrixXcd& m);
std::string matrix_to_csv(const Eigen::MatrixXd& m);

}  // namespace spinnet
