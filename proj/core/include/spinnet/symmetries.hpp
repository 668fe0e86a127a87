#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinnet {

enum class SymKind { CSO, ASO };

// Hermitian operator commuting (CSO) or anticommuting (ASO) with every
// Hamiltonian it was derived from. Normalized so the largest-magnitude entry
// has unit magnitude and positive real part (positive imaginary part when the
// real part vanishes).
struct SymmetryOperator {
    SymKind kind = SymKind::CSO;
    Eigen::MatrixXcd matrix;
};

// Hermitian basis of {J : [H_m, J] = 0 for all m} with the identity direction
// removed, via the SVD null space of the stacked commutator maps. An empty
// result means the commutant is trivial.
std::vector<SymmetryOperator> find_csos(const std::vector<Eigen::MatrixXcd>& hams);

// Hermitian basis of {J : {H~_m, J} = 0 for all m} where H~ is the traceless
// part of H. The search runs separately on each indecomposable invariant
// block; blocks on which every H~ vanishes are skipped (anticommutation
// constrains nothing there). Returned operators live on the full space,
// supported on their block.
std::vector<SymmetryOperator> find_asos(const std::vector<Eigen::MatrixXcd>& hams);

struct Decomposition {
    struct Block {
        Eigen::MatrixXcd basis;      // orthonormal columns, full-space coordinates
        Eigen::MatrixXcd projector;  // basis * basis^dagger
        std::string provenance;      // how the split chain reached this block
    };
    std::vector<Block> blocks;
    int accessible_index = -1;  // set when a seed vector was supplied

    int dim(int b) const { return static_cast<int>(blocks[b].basis.cols()); }
};

// Finest canonical simultaneous block diagonalization of the given
// Hamiltonians: recursively splits along eigenspaces of a generic element of
// the center of the commutant. Blocks whose restricted dynamics are scalar
// stay whole (any further split would be arbitrary).
Decomposition decompose(const std::vector<Eigen::MatrixXcd>& hams);

// Same, and marks the block carrying the largest weight of `seed` as the
// accessible one.
Decomposition decompose(const std::vector<Eigen::MatrixXcd>& hams,
                        const Eigen::VectorXcd& seed);

// Dimension of the real Lie algebra generated by the skew-Hermitian
// generators i*H_m under commutation. Stops at max_dim and returns it when
// the closure is at least that large.
int lie_closure_dimension(const std::vector<Eigen::MatrixXcd>& hams, int max_dim);

}  // namespace spinnet
