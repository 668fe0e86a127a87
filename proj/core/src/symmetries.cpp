#include "spinnet/symmetries.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace spinnet {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

constexpr double kNullCutoff = 1e-10;  // relative to the largest singular value

MatrixXcd unvec(const VectorXcd& v, int n) {
    return Eigen::Map<const MatrixXcd>(v.data(), n, n);
}

// Null space (columns) of the stacked linear maps J -> H_m J -+ J H_m over
// all supplied Hamiltonians, via one SVD. sign = -1 gives commutators,
// sign = +1 anticommutators. Uses vec(AXB) = (B^T kron A) vec(X).
MatrixXcd stacked_null_space(const std::vector<MatrixXcd>& hams, double sign) {
    const int n = static_cast<int>(hams.front().rows());
    const int n2 = n * n;
    MatrixXcd stacked(static_cast<Eigen::Index>(hams.size()) * n2, n2);
    for (size_t m = 0; m < hams.size(); ++m) {
        const MatrixXcd& h = hams[m];
        MatrixXcd block = MatrixXcd::Zero(n2, n2);
        // I kron H  +  sign * H^T kron I
        for (int c = 0; c < n; ++c) block.block(c * n, c * n, n, n) = h;
        for (int bc = 0; bc < n; ++bc)
            for (int br = 0; br < n; ++br)
                for (int d = 0; d < n; ++d)
                    block(br * n + d, bc * n + d) += sign * h(bc, br);  // (H^T)(br,bc)
        stacked.middleRows(static_cast<Eigen::Index>(m) * n2, n2) = block;
    }
    Eigen::BDCSVD<MatrixXcd> svd(stacked, Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    if (smax < 1e-300) return MatrixXcd::Identity(n2, n2);  // all maps vanish
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > kNullCutoff * smax) ++rank;
    return svd.matrixV().rightCols(n2 - rank);
}

double frob_inner(const MatrixXcd& a, const MatrixXcd& b) {
    return (a.adjoint() * b).trace().real();
}

// Modified Gram-Schmidt over the real vector space of Hermitian matrices.
// Drops near-zero residuals; run twice for stability.
std::vector<MatrixXcd> orthonormalize(std::vector<MatrixXcd> ops) {
    std::vector<MatrixXcd> basis;
    for (MatrixXcd& m : ops) {
        for (int pass = 0; pass < 2; ++pass)
            for (const MatrixXcd& b : basis) m -= frob_inner(b, m) * b;
        double norm = std::sqrt(frob_inner(m, m));
        if (norm > 1e-8) basis.push_back(m / norm);
    }
    return basis;
}

// Hermitian basis of the commutant of `hams`, identity included.
std::vector<MatrixXcd> commutant_basis(const std::vector<MatrixXcd>& hams) {
    const int n = static_cast<int>(hams.front().rows());
    MatrixXcd null_cols = stacked_null_space(hams, -1.0);
    std::vector<MatrixXcd> herm;
    for (Eigen::Index c = 0; c < null_cols.cols(); ++c) {
        MatrixXcd x = unvec(null_cols.col(c), n);
        herm.push_back((x + x.adjoint()) / 2.0);
        herm.push_back((x - x.adjoint()) / (2.0 * cplx(0, 1)));
    }
    return orthonormalize(std::move(herm));
}

void normalize_convention(MatrixXcd& m) {
    double max_abs = 0.0;
    Eigen::Index mr = 0, mc = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (std::abs(m(r, c)) > max_abs * (1.0 + 1e-12)) {
                max_abs = std::abs(m(r, c));
                mr = r;
                mc = c;
            }
    if (max_abs < 1e-300) return;
    m /= max_abs;
    cplx z = m(mr, mc);
    if (z.real() < -1e-9 || (std::abs(z.real()) <= 1e-9 && z.imag() < 0)) m = -m;
}

std::vector<double> split_coefficients(size_t count) {
    // square roots of primes: deterministic and rationally independent, so a
    // combination of commuting operators has no accidental eigenvalue
    // collisions across distinct joint eigenspaces
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
    std::vector<double> c(count);
    for (size_t i = 0; i < count; ++i)
        c[i] = std::sqrt(static_cast<double>(primes[i % std::size(primes)])) *
               (1.0 + static_cast<double>(i / std::size(primes)));
    return c;
}

// Basis of the center of the algebra spanned by the (Hermitian, orthonormal)
// commutant basis: real combinations commuting with every basis element.
std::vector<MatrixXcd> center_of(const std::vector<MatrixXcd>& comm) {
    const int c = static_cast<int>(comm.size());
    const int n = static_cast<int>(comm.front().rows());
    MatrixXd sys(2 * n * n * c, c);
    for (int k = 0; k < c; ++k)
        for (int i = 0; i < c; ++i) {
            MatrixXcd bracket = comm[i] * comm[k] - comm[k] * comm[i];
            for (int col = 0; col < n; ++col)
                for (int row = 0; row < n; ++row) {
                    Eigen::Index base = (static_cast<Eigen::Index>(k) * n * n + col * n + row) * 2;
                    sys(base, i) = bracket(row, col).real();
                    sys(base + 1, i) = bracket(row, col).imag();
                }
        }
    Eigen::BDCSVD<MatrixXd> svd(sys, Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    // Structure constants of an orthonormal basis are O(1) when nonzero; an
    // absolute floor keeps round-off junk from masquerading as rank (the
    // whole system is numerically zero for an abelian commutant).
    double cut = std::max(kNullCutoff * smax, 1e-9);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    MatrixXd null_cols = svd.matrixV().rightCols(c - rank);
    std::vector<MatrixXcd> center;
    for (Eigen::Index col = 0; col < null_cols.cols(); ++col) {
        MatrixXcd z = MatrixXcd::Zero(n, n);
        for (int i = 0; i < c; ++i) z += null_cols(i, col) * comm[i];
        center.push_back(std::move(z));
    }
    return orthonormalize(std::move(center));
}

bool all_scalar(const std::vector<MatrixXcd>& hams, double scale) {
    for (const MatrixXcd& h : hams) {
        const int d = static_cast<int>(h.rows());
        cplx mean = h.trace() / static_cast<double>(d);
        if ((h - mean * MatrixXcd::Identity(d, d)).norm() > 1e-10 * std::max(1.0, scale))
            return false;
    }
    return true;
}

void split_block(const std::vector<MatrixXcd>& hams, const MatrixXcd& basis,
                 const std::string& provenance, double scale,
                 std::vector<Decomposition::Block>& out) {
    const int d = static_cast<int>(basis.cols());
    std::vector<MatrixXcd> restricted;
    restricted.reserve(hams.size());
    for (const MatrixXcd& h : hams) restricted.push_back(basis.adjoint() * h * basis);

    auto finalize = [&] {
        out.push_back({basis, basis * basis.adjoint(), provenance});
    };
    if (d == 1 || all_scalar(restricted, scale)) {
        finalize();
        return;
    }
    std::vector<MatrixXcd> comm = commutant_basis(restricted);
    if (comm.size() <= 1) {  // only the identity: irreducible
        finalize();
        return;
    }
    std::vector<MatrixXcd> center = center_of(comm);
    if (center.size() <= 1) {  // single isotypic component
        finalize();
        return;
    }
    std::vector<double> coeff = split_coefficients(center.size());
    MatrixXcd generic = MatrixXcd::Zero(d, d);
    for (size_t i = 0; i < center.size(); ++i) generic += coeff[i] * center[i];
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(generic);
    const VectorXd& ev = es.eigenvalues();
    double radius = std::max(std::abs(ev(0)), std::abs(ev(d - 1)));
    double tol = 1e-8 * std::max(radius, 1e-30);

    int start = 0, piece = 0;
    for (int i = 1; i <= d; ++i) {
        if (i == d || ev(i) - ev(i - 1) > tol) {
            MatrixXcd sub = basis * es.eigenvectors().middleCols(start, i - start);
            std::string prov = provenance.empty() ? "center split " + std::to_string(piece)
                                                  : provenance + "." + std::to_string(piece);
            if (i - start == d) {  // no actual split; numerical safety stop
                finalize();
                return;
            }
            split_block(hams, sub, prov, scale, out);
            start = i;
            ++piece;
        }
    }
}

void check_same_shape(const std::vector<MatrixXcd>& hams) {
    if (hams.empty()) throw std::invalid_argument("at least one Hamiltonian required");
    const Eigen::Index n = hams.front().rows();
    for (const MatrixXcd& h : hams)
        if (h.rows() != n || h.cols() != n)
            throw std::invalid_argument("Hamiltonians must be square and share one basis");
}

}  // namespace

std::vector<SymmetryOperator> find_csos(const std::vector<MatrixXcd>& hams) {
    check_same_shape(hams);
    const int n = static_cast<int>(hams.front().rows());
    std::vector<MatrixXcd> basis = commutant_basis(hams);
    // remove the identity direction, which commutes with everything
    MatrixXcd id = MatrixXcd::Identity(n, n) / std::sqrt(static_cast<double>(n));
    for (MatrixXcd& b : basis) b -= frob_inner(id, b) * id;
    basis = orthonormalize(std::move(basis));
    std::vector<SymmetryOperator> out;
    for (MatrixXcd& b : basis) {
        normalize_convention(b);
        out.push_back({SymKind::CSO, std::move(b)});
    }
    return out;
}

std::vector<SymmetryOperator> find_asos(const std::vector<MatrixXcd>& hams) {
    check_same_shape(hams);
    const int n = static_cast<int>(hams.front().rows());
    double scale = 0.0;
    std::vector<MatrixXcd> traceless;
    traceless.reserve(hams.size());
    for (const MatrixXcd& h : hams) {
        traceless.push_back(h - (h.trace() / static_cast<double>(n)) * MatrixXcd::Identity(n, n));
        scale = std::max(scale, traceless.back().norm());
    }

    Decomposition dec = decompose(hams);
    std::vector<SymmetryOperator> out;
    for (const Decomposition::Block& block : dec.blocks) {
        const int d = static_cast<int>(block.basis.cols());
        std::vector<MatrixXcd> restricted;
        bool vacuous = true;
        for (const MatrixXcd& h : traceless) {
            restricted.push_back(block.basis.adjoint() * h * block.basis);
            if (restricted.back().norm() > 1e-12 * std::max(1.0, scale)) vacuous = false;
        }
        // on a block where every traceless Hamiltonian vanishes,
        // anticommutation constrains nothing and "symmetry" is meaningless
        if (vacuous) continue;
        MatrixXcd null_cols = stacked_null_space(restricted, +1.0);
        std::vector<MatrixXcd> herm;
        for (Eigen::Index c = 0; c < null_cols.cols(); ++c) {
            MatrixXcd x = unvec(null_cols.col(c), d);
            herm.push_back((x + x.adjoint()) / 2.0);
            herm.push_back((x - x.adjoint()) / (2.0 * cplx(0, 1)));
        }
        for (MatrixXcd& j : orthonormalize(std::move(herm))) {
            MatrixXcd embedded = block.basis * j * block.basis.adjoint();
            normalize_convention(embedded);
            out.push_back({SymKind::ASO, std::move(embedded)});
        }
    }
    return out;
}

Decomposition decompose(const std::vector<MatrixXcd>& hams) {
    check_same_shape(hams);
    const int n = static_cast<int>(hams.front().rows());
    double scale = 0.0;
    for (const MatrixXcd& h : hams) scale = std::max(scale, h.norm());
    Decomposition dec;
    split_block(hams, MatrixXcd::Identity(n, n), "", scale, dec.blocks);
    return dec;
}

Decomposition decompose(const std::vector<MatrixXcd>& hams, const VectorXcd& seed) {
    Decomposition dec = decompose(hams);
    double best = -1.0;
    for (size_t b = 0; b < dec.blocks.size(); ++b) {
        double w = (dec.blocks[b].basis.adjoint() * seed).squaredNorm();
        if (w > best + 1e-12) {
            best = w;
            dec.accessible_index = static_cast<int>(b);
        }
    }
    return dec;
}

int lie_closure_dimension(const std::vector<MatrixXcd>& hams, int max_dim) {
    check_same_shape(hams);
    const int n = static_cast<int>(hams.front().rows());
    const cplx I(0, 1);

    // real vectorization of skew-Hermitian matrices
    auto to_vec = [n](const MatrixXcd& m) {
        VectorXd v(2 * n * n);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < n; ++r) {
                v(2 * (c * n + r)) = m(r, c).real();
                v(2 * (c * n + r) + 1) = m(r, c).imag();
            }
        return v;
    };

    std::vector<MatrixXcd> basis;     // orthonormal skew-Hermitian elements
    std::vector<VectorXd> basis_vec;  // their vectorizations
    auto try_add = [&](MatrixXcd m) {
        VectorXd v = to_vec(m);
        for (int pass = 0; pass < 2; ++pass)
            for (const VectorXd& b : basis_vec) v -= b.dot(v) * b;
        double norm = v.norm();
        if (norm < 1e-10) return false;
        v /= norm;
        // rebuild the matrix from the orthonormalized vector to keep the
        // basis and its vectorization consistent
        MatrixXcd mm(n, n);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < n; ++r) mm(r, c) = cplx(v(2 * (c * n + r)), v(2 * (c * n + r) + 1));
        basis.push_back(std::move(mm));
        basis_vec.push_back(std::move(v));
        return true;
    };

    for (const MatrixXcd& h : hams) try_add(I * h);

    size_t frontier_start = 0;
    while (static_cast<int>(basis.size()) < max_dim) {
        size_t old_size = basis.size();
        bool grew = false;
        for (size_t i = 0; i < old_size && static_cast<int>(basis.size()) < max_dim; ++i) {
            size_t j_begin = std::max(i + 1, frontier_start);
            for (size_t j = j_begin; j < old_size && static_cast<int>(basis.size()) < max_dim; ++j) {
                MatrixXcd comm = basis[i] * basis[j] - basis[j] * basis[i];
                if (try_add(std::move(comm))) grew = true;
            }
        }
        if (!grew) break;
        frontier_start = old_size;
    }
    return static_cast<int>(basis.size());
}

}  // namespace spinnet
