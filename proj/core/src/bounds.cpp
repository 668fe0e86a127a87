#include "spinnet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spinnet/operators.hpp"

namespace spinnet {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

constexpr double kDarkThreshold = 1e-9;  // |alpha| below this counts as exactly dark

// Eigenvalue groups of an ascending list, degeneracy tolerance 1e-8 x spectral radius.
std::vector<std::pair<int, int>> eigen_groups(const VectorXd& ev) {
    double radius = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) radius = std::max(radius, std::abs(ev(i)));
    double tol = 1e-8 * std::max(radius, 1e-30);
    std::vector<std::pair<int, int>> groups;
    int start = 0;
    for (int i = 1; i <= ev.size(); ++i)
        if (i == ev.size() || ev(i) - ev(i - 1) > tol) {
            groups.emplace_back(start, i - start);
            start = i;
        }
    return groups;
}

std::string cycle_notation(const std::vector<int>& perm) {
    int n = static_cast<int>(perm.size());
    std::vector<bool> seen(n + 1, false);
    std::ostringstream out;
    for (int v = 1; v <= n; ++v) {
        if (seen[v] || perm[v - 1] == v) continue;
        out << '(' << v;
        seen[v] = true;
        for (int w = perm[v - 1]; w != v; w = perm[w - 1]) {
            out << ' ' << w;
            seen[w] = true;
        }
        out << ')';
    }
    return out.str();
}

struct NetworkEigen {
    VectorXd values;   // ascending, size n-1
    MatrixXd vectors;  // columns, coordinates over vertices 2..n
};

NetworkEigen network_eigen(const SpinNetwork& net) {
    MatrixXd a = restrict_sector(net, Ham::drift, 1).entries.real();
    int m = net.n - 1;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(a.bottomRightCorner(m, m));
    return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

SpectralData spectral(const SpinNetwork& net) {
    require_pendant_control(net);
    NetworkEigen eig = network_eigen(net);
    int m = net.n - 1;
    auto groups = eigen_groups(eig.values);

    std::vector<double> lambdas;
    std::vector<VectorXd> brights;  // network coordinates
    std::vector<double> alphas;
    for (auto [start, len] : groups) {
        // Bright direction: normalized projection of vertex 2 onto the eigenspace.
        VectorXd b = VectorXd::Zero(m);
        for (int c = start; c < start + len; ++c)
            b += eig.vectors.col(c) * eig.vectors(0, c);
        double alpha = b.norm();
        if (alpha <= kDarkThreshold) continue;
        b /= alpha;  // coordinate at vertex 2 equals +alpha by construction
        double lambda = 0.0;
        for (int c = start; c < start + len; ++c) lambda += eig.values(c);
        lambdas.push_back(lambda / len);
        brights.push_back(b);
        alphas.push_back(alpha);
    }

    int levels = static_cast<int>(lambdas.size()) + 1;
    SpectralData out;
    out.eigenvalues = VectorXd::Zero(levels);
    out.overlaps = VectorXd::Zero(levels);
    out.eigenvectors = MatrixXd::Zero(net.n, levels);
    out.eigenvectors(0, 0) = 1.0;  // control spin excited, level 0
    out.paired_with.assign(levels, -1);
    for (int k = 0; k < levels - 1; ++k) {
        out.eigenvalues(k + 1) = lambdas[k];
        out.overlaps(k + 1) = alphas[k];
        out.eigenvectors.col(k + 1).tail(m) = brights[k];
    }

    // Mirror pairs lambda <-> -lambda exist whenever the drift component of
    // vertex 2 is bipartite (the sign-flip involution on one part).
    auto comp = drift_component(net, 2);
    if (bipartition(net, comp).has_value()) {
        double radius = std::max(std::abs(out.eigenvalues(1)),
                                 std::abs(out.eigenvalues(levels - 1)));
        double tol = 1e-8 * std::max(radius, 1e-30);
        for (int k = 1; k < levels; ++k) {
            if (out.paired_with[k] >= 0) continue;
            if (std::abs(out.eigenvalues(k)) <= tol) {
                out.paired_with[k] = k;
                continue;
            }
            for (int j = k + 1; j < levels; ++j)
                if (std::abs(out.eigenvalues(k) + out.eigenvalues(j)) <= tol) {
                    out.paired_with[k] = j;
                    out.paired_with[j] = k;
                    break;
                }
        }
    }
    return out;
}

PhaseReachability phase_reachability(const SpinNetwork& net, const VectorXcd& target) {
    require_pendant_control(net);
    if (target.size() != net.n)
        throw validation_error("target", "amplitude vector must have one entry per spin");
    auto comp = drift_component(net, 2);
    auto bp = bipartition(net, comp);
    if (!bp.has_value()) return {true, 0.0};

    // Evolution from vertex 1 deposits a factor -i per hop, so amplitudes sit
    // on a fixed real/imaginary checkerboard up to one global phase: real on
    // the side of vertex 1, imaginary on the side of vertex 2.
    std::set<int> side2(bp->part_a.begin(), bp->part_a.end());
    bool two_in_a = side2.count(2) > 0;
    VectorXcd zeta = VectorXcd::Zero(net.n);
    zeta(0) = target(0);
    for (int v : comp) {
        bool on_side2 = two_in_a ? side2.count(v) > 0 : side2.count(v) == 0;
        zeta(v - 1) = on_side2 ? cplx(0, -1) * target(v - 1) : target(v - 1);
    }

    int arg = 0;
    for (int i = 1; i < zeta.size(); ++i)
        if (std::abs(zeta(i)) > std::abs(zeta(arg))) arg = i;
    if (std::abs(zeta(arg)) < 1e-12) return {true, 0.0};
    double phi = -std::arg(zeta(arg));
    cplx rot = std::polar(1.0, phi);
    for (int i = 0; i < zeta.size(); ++i)
        if (std::abs(std::imag(rot * zeta(i))) > 1e-9) return {false, 0.0};
    return {true, phi};
}

FidelityBound max_fidelity(const SpinNetwork& net, const VectorXcd& target) {
    require_pendant_control(net);
    if (target.size() != net.n)
        throw validation_error("target", "amplitude vector must have one entry per spin");
    double norm = target.norm();
    if (std::abs(norm - 1.0) > 1e-6)
        throw validation_error("target", "amplitude vector must be normalized");
    if (std::abs(target(0)) > 1e-9)
        throw validation_error("target", "control spin must carry no target amplitude");
    VectorXcd t = target / norm;

    SpectralData spec = spectral(net);
    int levels = spec.levels();
    FidelityBound out;
    out.target_decomposition = VectorXcd::Zero(levels);
    out.value = 0.0;
    for (int k = 1; k < levels; ++k) {
        cplx beta = spec.eigenvectors.col(k).cast<cplx>().dot(t);
        out.target_decomposition(k) = beta;
        out.value += std::norm(beta);
    }

    // One dark component per eigenspace: the normalized dark-subspace
    // projection of the target, which carries all of that space's weight.
    NetworkEigen eig = network_eigen(net);
    int m = net.n - 1;
    VectorXcd tn = t.tail(m);
    for (auto [start, len] : eigen_groups(eig.values)) {
        VectorXd b = VectorXd::Zero(m);
        for (int c = start; c < start + len; ++c)
            b += eig.vectors.col(c) * eig.vectors(0, c);
        double alpha = b.norm();
        VectorXcd proj = VectorXcd::Zero(m);
        for (int c = start; c < start + len; ++c) {
            VectorXd v = eig.vectors.col(c);
            proj += v.cast<cplx>() * v.cast<cplx>().dot(tn);
        }
        if (alpha > kDarkThreshold) {
            b /= alpha;
            proj -= b.cast<cplx>() * b.cast<cplx>().dot(tn);
        }
        double weight = proj.squaredNorm();
        if (weight < 1e-15) continue;
        DarkComponent dc;
        double lambda = 0.0;
        for (int c = start; c < start + len; ++c) lambda += eig.values(c);
        dc.eigenvalue = lambda / len;
        dc.weight = weight;
        dc.vector = VectorXcd::Zero(net.n);
        dc.vector.tail(m) = proj / std::sqrt(weight);
        int big = 0;
        for (int i = 1; i < net.n; ++i)
            if (std::abs(dc.vector(i)) > std::abs(dc.vector(big)) * (1.0 + 1e-12)) big = i;
        if (std::abs(dc.vector(big)) > 0)
            dc.vector *= std::polar(1.0, -std::arg(dc.vector(big)));
        out.dark_components.push_back(dc);
    }
    std::sort(out.dark_components.begin(), out.dark_components.end(),
              [](const DarkComponent& a, const DarkComponent& b) {
                  return a.weight > b.weight;
              });

    PhaseReachability pr = phase_reachability(net, t);
    out.phase_attainable = pr.attainable;
    if (pr.attainable) out.global_phase = pr.phase;
    return out;
}

DarkClassification classify_dark(const SpinNetwork& net, const VectorXcd& dark_vector) {
    require_pendant_control(net);
    if (dark_vector.size() != net.n)
        throw validation_error("dark_vector", "amplitude vector must have one entry per spin");
    VectorXcd v = dark_vector;
    double norm = v.norm();
    if (std::abs(norm - 1.0) > 1e-6)
        throw validation_error("dark_vector", "amplitude vector must be normalized");
    v /= norm;
    SpectralData spec = spectral(net);
    if (std::abs(v(0)) > 1e-6)
        throw validation_error("dark_vector", "vector is not dark: control spin amplitude");
    for (int k = 1; k < spec.levels(); ++k)
        if (std::abs(spec.eigenvectors.col(k).cast<cplx>().dot(v)) > 1e-6)
            throw validation_error("dark_vector", "vector is not dark: bright overlap");

    // A symmetry of the drift that fixes both control spins commutes with
    // every reachable operation, so only the group-symmetric part of the
    // vector can ever be touched. Any antisymmetric remainder is locked.
    auto autos = automorphisms(net, {1, 2});
    if (!autos.empty()) {
        VectorXcd avg = v;
        for (const auto& perm : autos) {
            VectorXcd pv(net.n);
            for (int i = 1; i <= net.n; ++i) pv(perm[i - 1] - 1) = v(i - 1);
            avg += pv;
        }
        avg /= static_cast<double>(autos.size() + 1);
        if ((v - avg).norm() > 1e-9) {
            double best = 0.0;
            std::size_t which = 0;
            for (std::size_t a = 0; a < autos.size(); ++a) {
                VectorXcd pv(net.n);
                for (int i = 1; i <= net.n; ++i) pv(autos[a][i - 1] - 1) = v(i - 1);
                double d = (pv - v).norm();
                if (d > best) {
                    best = d;
                    which = a;
                }
            }
            return {DarkClass::TrulyDark,
                    "antisymmetric under drift permutation " + cycle_notation(autos[which])};
        }
    }

    // Connectivity screen in the two-excitation sector: every occupied pair
    // state must sit in the same hop component as the doubly excited control.
    ExcitationBasis basis2 = excitation_basis(net.n, 2);
    MatrixXd a2d = restrict_sector(net, Ham::drift, 2).entries.real();
    MatrixXd c2 = restrict_sector(net, Ham::control, 2).entries.real();
    MatrixXd a2 = a2d + c2;
    int d2 = basis2.dim();
    std::vector<int> comp(d2, -1);
    std::queue<int> bfs;
    int root = basis2.index_of({1, 2});
    comp[root] = 0;
    bfs.push(root);
    while (!bfs.empty()) {
        int s = bfs.front();
        bfs.pop();
        for (int u = 0; u < d2; ++u)
            if (comp[u] < 0 && std::abs(a2(s, u)) > 1e-12) {
                comp[u] = 0;
                bfs.push(u);
            }
    }
    for (int site = 2; site <= net.n; ++site) {
        if (std::abs(v(site - 1)) <= 1e-9) continue;
        if (comp[basis2.index_of({1, site})] != 0)
            return {DarkClass::TrulyDark,
                    "two-excitation sector disconnect at spin " + std::to_string(site)};
    }

    // Exact criterion: the pair state |1> x v must lie in the invariant
    // subspace generated from injected bright population.
    std::vector<VectorXd> basis;
    auto add_vec = [&](VectorXd cand) -> bool {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) cand -= q * q.dot(cand);
        if (cand.norm() < 1e-9) return false;
        basis.push_back(cand.normalized());
        return true;
    };
    auto pair_with_one = [&](const VectorXcd& w) {
        VectorXcd out = VectorXcd::Zero(d2);
        for (int site = 2; site <= net.n; ++site)
            out(basis2.index_of({1, site})) += w(site - 1);
        return out;
    };
    // Seeds are real: bright vectors of a real symmetric drift. Closure under
    // the real hop matrices stays real, so a real orthonormal basis suffices.
    for (int k = 1; k < spec.levels(); ++k)
        add_vec(pair_with_one(spec.eigenvectors.col(k).cast<cplx>()).real());
    for (std::size_t head = 0; head < basis.size() && basis.size() < static_cast<std::size_t>(d2);
         ++head) {
        VectorXd q = basis[head];
        add_vec(a2d * q);
        add_vec(c2 * q);
    }
    VectorXcd w = pair_with_one(v);
    VectorXcd res = w;
    for (const auto& q : basis) res -= q.cast<cplx>() * q.cast<cplx>().dot(w);
    if (res.norm() < 1e-9) return {DarkClass::CatalyticallyAccessible, ""};
    return {DarkClass::TrulyDark, "outside the invariant two-excitation subspace"};
}

}  // namespace spinnet
