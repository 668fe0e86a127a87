#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "spinnet/bounds.hpp"
#include "spinnet/fixtures.hpp"
#include "spinnet/operators.hpp"
#include "spinnet/symmetries.hpp"

using namespace spinnet;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

std::vector<MatrixXcd> sector_pair(const std::string& name) {
    SpinNetwork net = fixture_network(name);
    return {restrict_sector(net, Ham::drift, 1).entries,
            restrict_sector(net, Ham::control, 1).entries};
}

double commutator_residual(const MatrixXcd& h, const MatrixXcd& j) {
    return (h * j - j * h).norm();
}

double anticommutator_residual(const MatrixXcd& h, const MatrixXcd& j) {
    MatrixXcd ht = h - (h.trace() / static_cast<double>(h.rows())) *
                           MatrixXcd::Identity(h.rows(), h.cols());
    return (ht * j + j * ht).norm();
}

// Distance from `target` to span{identity, ops...}, relative to its norm.
double span_distance(const MatrixXcd& target, const std::vector<MatrixXcd>& ops) {
    int n = static_cast<int>(target.rows());
    MatrixXcd basis(n * n, ops.size() + 1);
    basis.col(0) = MatrixXcd::Identity(n, n).reshaped();
    for (std::size_t k = 0; k < ops.size(); ++k) basis.col(k + 1) = ops[k].reshaped();
    VectorXcd t = target.reshaped();
    VectorXcd c = basis.colPivHouseholderQr().solve(t);
    return (basis * c - t).norm() / t.norm();
}

}  // namespace

TEST_SUITE("symmetries") {

TEST_CASE("fig1 commutant is the fork-swap reflection") {
    auto hams = sector_pair("fig1");
    auto csos = find_csos(hams);
    REQUIRE(csos.size() == 1);
    const MatrixXcd& j = csos.front().matrix;
    CHECK(csos.front().kind == SymKind::CSO);
    CHECK((j - j.adjoint()).norm() < 1e-12);
    for (const auto& h : hams) CHECK(commutator_residual(h, j) < 1e-9 * j.norm() * h.norm());

    // the reflection fixing everything but the fork, written out
    MatrixXcd j67 = MatrixXcd::Identity(7, 7);
    VectorXcd d = VectorXcd::Zero(7);
    d(5) = 1.0 / std::sqrt(2.0);
    d(6) = -1.0 / std::sqrt(2.0);
    j67 -= 2.0 * d * d.adjoint();
    CHECK(span_distance(j67, {j}) < 1e-9);
}

TEST_CASE("diagonal pairs have a diagonal commutant") {
    MatrixXcd d1 = Eigen::Vector3cd(1.0, 2.0, 3.0).asDiagonal();
    MatrixXcd d2 = Eigen::Vector3cd(0.5, -1.0, 2.0).asDiagonal();
    auto csos = find_csos({d1, d2});
    REQUIRE(csos.size() == 2);  // all diagonals, minus the identity direction
    for (const auto& c : csos) {
        CHECK(c.matrix.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((c.matrix - MatrixXcd(c.matrix.diagonal().asDiagonal())).norm() < 1e-9);
    }
}

TEST_CASE("three-level fixture: no commuting symmetry, one anticommuting") {
    auto [h0, h1] = example1_hamiltonians();
    CHECK(find_csos({h0, h1}).empty());

    auto asos = find_asos({h0, h1});
    REQUIRE(asos.size() == 1);
    const MatrixXcd& m = asos.front().matrix;
    CHECK(asos.front().kind == SymKind::ASO);
    for (const auto& h : {h0, h1}) CHECK(anticommutator_residual(h, m) < 1e-9);

    MatrixXcd expect = MatrixXcd::Zero(3, 3);
    expect(0, 2) = expect(2, 0) = 1.0;
    expect(1, 1) = -1.0;
    std::complex<double> c = (m.adjoint() * expect).trace() / (m.adjoint() * m).trace();
    CHECK((expect - c * m).norm() < 1e-9);
    // squares to the identity after that rescaling
    CHECK((expect * expect - MatrixXcd::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("fig2 alternating-sign operator is recovered") {
    auto hams = sector_pair("fig2");
    auto asos = find_asos(hams);
    REQUIRE(asos.size() == 1);
    const MatrixXcd& m = asos.front().matrix;
    for (const auto& h : hams) CHECK(anticommutator_residual(h, m) < 1e-9 * m.norm());

    // the sign pattern from the bipartition, projected onto the block the
    // returned operator lives on
    MatrixXcd sign = MatrixXcd::Identity(7, 7);
    sign(1, 1) = sign(4, 4) = -1.0;
    // compare within the accessible block: the returned operator lives there
    Decomposition dec = decompose(hams);
    int acc = -1;
    for (std::size_t b = 0; b < dec.blocks.size(); ++b)
        if (dec.dim(static_cast<int>(b)) == 5) acc = static_cast<int>(b);
    REQUIRE(acc >= 0);
    const MatrixXcd& pb = dec.blocks[acc].projector;
    MatrixXcd restricted = pb * sign * pb;
    std::complex<double> c = (m.adjoint() * restricted).trace() / (m.adjoint() * m).trace();
    CHECK((restricted - c * m).norm() < 1e-9);
}

TEST_CASE("odd drift cycles admit no anticommuting symmetry") {
    CHECK(find_asos(sector_pair("triangle")).empty());
}

TEST_CASE("anticommuting symmetry flips the sign of every paired level") {
    for (const auto& name : {"fig1", "fig2"}) {
        SpinNetwork net = fixture_network(name);
        auto hams = sector_pair(name);
        auto asos = find_asos(hams);
        REQUIRE(asos.size() == 1);
        const MatrixXcd& m = asos.front().matrix;
        SpectralData spec = spectral(net);
        const MatrixXcd& a = hams[0];
        for (int k = 1; k < spec.levels(); ++k) {
            if (std::abs(spec.eigenvalues(k)) < 1e-12) continue;
            VectorXcd v = spec.eigenvectors.col(k);
            VectorXcd mv = m * v;
            CAPTURE(name);
            CAPTURE(k);
            REQUIRE(mv.norm() > 1e-9);
            CHECK((a * mv + spec.eigenvalues(k) * mv).norm() < 1e-9);
        }
    }
}

TEST_CASE("decompose splits fig1 into the accessible space and the dark line") {
    auto hams = sector_pair("fig1");
    VectorXcd seed = VectorXcd::Zero(7);
    seed(0) = 1.0;
    Decomposition dec = decompose(hams, seed);
    REQUIRE(dec.blocks.size() == 2);
    REQUIRE(dec.accessible_index >= 0);
    CHECK(dec.dim(dec.accessible_index) == 6);

    int dark = 1 - dec.accessible_index;
    REQUIRE(dec.dim(dark) == 1);
    VectorXcd d = VectorXcd::Zero(7);
    d(5) = 1.0 / std::sqrt(2.0);
    d(6) = -1.0 / std::sqrt(2.0);
    CHECK((dec.blocks[dark].projector - d * d.adjoint()).norm() < 1e-9);
    CHECK_FALSE(dec.blocks[dark].provenance.empty());
}

TEST_CASE("decomposition projectors resolve the identity and the dynamics") {
    for (const auto& name : {"fig1", "fig2", "triangle"}) {
        auto hams = sector_pair(name);
        Decomposition dec = decompose(hams);
        Eigen::Index n = hams[0].rows();
        MatrixXcd sum = MatrixXcd::Zero(n, n);
        for (const auto& b : dec.blocks) {
            CHECK((b.projector - b.projector.adjoint()).norm() < 1e-10);
            CHECK((b.projector * b.projector - b.projector).norm() < 1e-10);
            CHECK((b.projector - b.basis * b.basis.adjoint()).norm() < 1e-10);
            sum += b.projector;
        }
        CAPTURE(name);
        CHECK((sum - MatrixXcd::Identity(n, n)).norm() < 1e-10);
        for (const auto& h : hams) {
            MatrixXcd rebuilt = MatrixXcd::Zero(n, n);
            for (const auto& b : dec.blocks) rebuilt += b.projector * h * b.projector;
            CHECK((h - rebuilt).norm() < 1e-9);
        }
    }
}

TEST_CASE("fig2 decomposes into a 5-dimensional accessible block and a dark plane") {
    auto hams = sector_pair("fig2");
    VectorXcd seed = VectorXcd::Zero(7);
    seed(0) = 1.0;
    Decomposition dec = decompose(hams, seed);
    REQUIRE(dec.blocks.size() == 2);
    CHECK(dec.dim(dec.accessible_index) == 5);
    CHECK(dec.dim(1 - dec.accessible_index) == 2);
    // the dark plane carries no drift energy at all
    const auto& p = dec.blocks[1 - dec.accessible_index].projector;
    CHECK((hams[0] * p).norm() < 1e-9);
}

TEST_CASE("an asymmetric chain leaves nothing to split") {
    SpinNetwork net;
    net.n = 4;
    net.drift_edges = {{2, 3, 0.8}, {3, 4, 1.3}};
    net.control_edges = {{1, 2, 1.0}};
    auto hams = std::vector<MatrixXcd>{restrict_sector(net, Ham::drift, 1).entries,
                                       restrict_sector(net, Ham::control, 1).entries};
    CHECK(find_csos(hams).empty());
    Decomposition dec = decompose(hams);
    REQUIRE(dec.blocks.size() == 1);
    CHECK(dec.dim(0) == 4);
}

TEST_CASE("closure dimensions of the reference generators") {
    auto [h0, h1] = example1_hamiltonians();
    CHECK(lie_closure_dimension({h0, h1}, 10) == 3);
    CHECK(lie_closure_dimension({h0}, 10) == 1);
}

TEST_CASE("closure saturates the cap when asked to stop early") {
    auto hams = sector_pair("fig1");
    CHECK(lie_closure_dimension(hams, 4) >= 4);
}

}  // TEST_SUITE
