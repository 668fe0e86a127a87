#include "spinnet/operators.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "spinnet/numfmt.hpp"

namespace spinnet {

int ExcitationBasis::index_of(const std::vector<int>& state) const {
    // bases are tiny (<= a few hundred states); linear scan is fine
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i] == state) return static_cast<int>(i);
    return -1;
}

std::string ExcitationBasis::label(int index) const {
    const std::vector<int>& s = states.at(index);
    if (s.empty()) return "-";
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(s[i]);
    }
    return out;
}

ExcitationBasis excitation_basis(int n, int k) {
    if (n < 1) throw validation_error("n", "n must be positive");
    if (k < 0 || k > n)
        throw validation_error("k", "excitation count must satisfy 0 <= k <= n");
    ExcitationBasis basis;
    basis.n = n;
    basis.ks = {k};
    // lexicographic ascending k-tuples from {1..n}
    std::vector<int> cur(k);
    auto rec = [&](auto&& self, int pos, int next) -> void {
        if (pos == k) {
            basis.states.push_back(cur);
            return;
        }
        for (int v = next; v <= n - (k - pos - 1); ++v) {
            cur[pos] = v;
            self(self, pos + 1, v + 1);
        }
    };
    rec(rec, 0, 1);
    return basis;
}

ExcitationBasis sector_basis(int n, const std::vector<int>& ks) {
    if (ks.empty()) throw validation_error("ks", "sector list is empty");
    std::vector<int> sorted = ks;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw validation_error("ks", "sector list has duplicates");
    ExcitationBasis basis;
    basis.n = n;
    basis.ks = ks;
    for (int k : ks) {
        ExcitationBasis b = excitation_basis(n, k);
        basis.states.insert(basis.states.end(), b.states.begin(), b.states.end());
    }
    return basis;
}

namespace {

Eigen::MatrixXcd hop_matrix(const std::vector<Edge>& edges, const ExcitationBasis& basis) {
    const int d = basis.dim();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    // map tuple -> index for the move lookups
    std::map<std::vector<int>, int> index;
    for (int i = 0; i < d; ++i) index[basis.states[i]] = i;

    for (int s = 0; s < d; ++s) {
        const std::vector<int>& occ = basis.states[s];
        for (const Edge& e : edges) {
            bool has_i = std::binary_search(occ.begin(), occ.end(), e.i);
            bool has_j = std::binary_search(occ.begin(), occ.end(), e.j);
            if (has_i == has_j) continue;  // both occupied or both empty: no move
            int from = has_i ? e.i : e.j;
            int to = has_i ? e.j : e.i;
            std::vector<int> moved;
            moved.reserve(occ.size());
            for (int v : occ)
                if (v != from) moved.push_back(v);
            moved.push_back(to);
            std::sort(moved.begin(), moved.end());
            auto it = index.find(moved);
            if (it != index.end()) m(it->second, s) += e.w;
        }
    }
    return m;
}

}  // namespace

OperatorMatrix restrict_sector(const SpinNetwork& net, Ham which, int k) {
    validate(net);
    if (k < 1) throw validation_error("k", "restriction needs k >= 1");
    OperatorMatrix op;
    op.basis = excitation_basis(net.n, k);
    op.entries = hop_matrix(which == Ham::drift ? net.drift_edges : net.control_edges,
                            op.basis);
    return op;
}

std::pair<OperatorMatrix, OperatorMatrix> direct_sum_sector(const SpinNetwork& net,
                                                            const std::vector<int>& ks) {
    validate(net);
    ExcitationBasis basis = sector_basis(net.n, ks);
    OperatorMatrix drift{basis, hop_matrix(net.drift_edges, basis)};
    OperatorMatrix control{basis, hop_matrix(net.control_edges, basis)};
    // states in different sectors never differ by a single move, so the hop
    // rule over the concatenated basis is automatically block diagonal
    return {std::move(drift), std::move(control)};
}

std::string matrix_to_json(const Eigen::MatrixXcd& m) {
    std::string out = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r) out += ',';
        out += '[';
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += '[';
            out += format_double(m(r, c).real());
            out += ',';
            out += format_double(m(r, c).imag());
            out += ']';
        }
        out += ']';
    }
    out += ']';
    return out;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::string out = "row,col,value\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (m(r, c) != 0.0) {
                out += std::to_string(r + 1);
                out += ',';
                out += std::to_string(c + 1);
                out += ',';
                out += format_double(m(r, c));
                out += '\n';
            }
    return out;
}

}  // namespace spinnet
