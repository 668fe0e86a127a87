#include "spinnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace spinnet {

namespace {

constexpr double kWeightTol = 1e-12;

void check_edge_list(const SpinNetwork& net, const std::vector<Edge>& edges,
                     const char* field, std::set<std::pair<int, int>>& seen) {
    for (const Edge& e : edges) {
        if (e.i < 1 || e.i > net.n || e.j < 1 || e.j > net.n)
            throw validation_error(field, std::string(field) + ": vertex index out of range [1," +
                                              std::to_string(net.n) + "]");
        if (e.i == e.j)
            throw validation_error(field, std::string(field) + ": self-loop at vertex " +
                                              std::to_string(e.i));
        auto key = std::minmax(e.i, e.j);
        if (!seen.insert(key).second)
            throw validation_error(field, std::string(field) + ": duplicate edge (" +
                                              std::to_string(key.first) + "," +
                                              std::to_string(key.second) + ")");
    }
}

}  // namespace

void validate(const SpinNetwork& net) {
    if (net.n < 1)
        throw validation_error("n", "n must be a positive integer");
    std::set<std::pair<int, int>> seen;
    check_edge_list(net, net.drift_edges, "drift_edges", seen);
    // the same set also rejects a pair appearing in both lists
    check_edge_list(net, net.control_edges, "control_edges", seen);
}

bool is_pendant_control(const SpinNetwork& net) {
    if (net.n < 2) return false;
    if (net.control_edges.size() != 1) return false;
    const Edge& c = net.control_edges.front();
    if (std::min(c.i, c.j) != 1 || std::max(c.i, c.j) != 2) return false;
    if (std::abs(c.w - 1.0) > kWeightTol) return false;
    for (const Edge& e : net.drift_edges)
        if (e.i == 1 || e.j == 1) return false;
    return true;
}

void require_pendant_control(const SpinNetwork& net) {
    validate(net);
    if (!is_pendant_control(net))
        throw validation_error("control_edges",
                               "network is not in pendant-control form: vertex 1 must carry no "
                               "drift edges and the only control edge must be (1,2) with weight 1");
}

SpinNetwork parse_network(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("document", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw validation_error("document", "top level must be a JSON object");
    if (!j.contains("n") || !j["n"].is_number_integer())
        throw validation_error("n", "missing or non-integer field \"n\"");

    SpinNetwork net;
    net.n = j["n"].get<int>();

    auto read_edges = [&](const char* field) {
        std::vector<Edge> out;
        if (!j.contains(field)) throw validation_error(field, std::string("missing field \"") + field + "\"");
        if (!j[field].is_array()) throw validation_error(field, std::string(field) + " must be an array");
        for (const auto& item : j[field]) {
            if (!item.is_array() || item.size() != 3 || !item[0].is_number_integer() ||
                !item[1].is_number_integer() || !item[2].is_number())
                throw validation_error(field, std::string(field) + ": each edge must be [i, j, weight]");
            out.push_back({item[0].get<int>(), item[1].get<int>(), item[2].get<double>()});
        }
        return out;
    };
    net.drift_edges = read_edges("drift_edges");
    net.control_edges = read_edges("control_edges");
    validate(net);
    return net;
}

std::string serialize_network(const SpinNetwork& net) {
    nlohmann::json j;
    j["n"] = net.n;
    auto dump_edges = [](const std::vector<Edge>& edges) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Edge& e : edges) arr.push_back({e.i, e.j, e.w});
        return arr;
    };
    j["drift_edges"] = dump_edges(net.drift_edges);
    j["control_edges"] = dump_edges(net.control_edges);
    return j.dump();
}

std::vector<int> drift_component(const SpinNetwork& net, int start) {
    std::vector<std::vector<int>> adj(net.n + 1);
    for (const Edge& e : net.drift_edges) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<bool> seen(net.n + 1, false);
    std::queue<int> q;
    q.push(start);
    seen[start] = true;
    std::vector<int> out;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        out.push_back(v);
        for (int u : adj[v])
            if (!seen[u]) {
                seen[u] = true;
                q.push(u);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<Bipartition> bipartition(const SpinNetwork& net,
                                       const std::vector<int>& component) {
    if (component.empty()) throw validation_error("component", "component is empty");
    std::set<int> in_comp(component.begin(), component.end());
    std::vector<std::vector<int>> adj(net.n + 1);
    for (const Edge& e : net.drift_edges) {
        if (in_comp.count(e.i) && in_comp.count(e.j)) {
            adj[e.i].push_back(e.j);
            adj[e.j].push_back(e.i);
        }
    }
    int root = *std::min_element(component.begin(), component.end());
    std::map<int, int> color;
    std::queue<int> q;
    q.push(root);
    color[root] = 0;  // canonical: lowest-indexed vertex lands in part_a
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : adj[v]) {
            auto it = color.find(u);
            if (it == color.end()) {
                color[u] = 1 - color[v];
                q.push(u);
            } else if (it->second == color[v]) {
                return std::nullopt;  // odd cycle
            }
        }
    }
    if (color.size() != component.size())
        throw validation_error("component", "component is not connected under drift edges");
    Bipartition bp;
    for (int v : component) (color[v] == 0 ? bp.part_a : bp.part_b).push_back(v);
    return bp;
}

namespace {

// Sorted multiset of (incident weight, other-end degree), the cheap signature
// two vertices must share to be swappable.
std::vector<std::pair<double, int>> degree_signature(
    const std::vector<std::vector<std::pair<int, double>>>& adj, int v) {
    std::vector<std::pair<double, int>> sig;
    for (auto [u, w] : adj[v]) sig.emplace_back(w, static_cast<int>(adj[u].size()));
    std::sort(sig.begin(), sig.end());
    return sig;
}

bool signatures_match(const std::vector<std::pair<double, int>>& a,
                      const std::vector<std::pair<double, int>>& b) {
    if (a.size() != b.size()) return false;
    for (size_t k = 0; k < a.size(); ++k)
        if (std::abs(a[k].first - b[k].first) > kWeightTol || a[k].second != b[k].second)
            return false;
    return true;
}

}  // namespace

std::vector<std::vector<int>> automorphisms(const SpinNetwork& net,
                                            const std::vector<int>& fixed) {
    validate(net);
    if (net.n > 12)
        throw validation_error("n", "automorphism search budget is n <= 12");

    std::vector<std::vector<std::pair<int, double>>> adj(net.n + 1);
    std::map<std::pair<int, int>, double> weight;
    for (const Edge& e : net.drift_edges) {
        adj[e.i].emplace_back(e.j, e.w);
        adj[e.j].emplace_back(e.i, e.w);
        weight[std::minmax(e.i, e.j)] = e.w;
    }

    std::vector<bool> is_fixed(net.n + 1, false);
    for (int v : fixed) is_fixed[v] = true;

    std::vector<int> free_verts;
    for (int v = 1; v <= net.n; ++v)
        if (!is_fixed[v]) free_verts.push_back(v);

    std::vector<std::vector<std::pair<double, int>>> sig(net.n + 1);
    for (int v = 1; v <= net.n; ++v) sig[v] = degree_signature(adj, v);

    // image[v] = 0 while unassigned
    std::vector<int> image(net.n + 1, 0);
    std::vector<bool> used(net.n + 1, false);
    for (int v = 1; v <= net.n; ++v)
        if (is_fixed[v]) {
            image[v] = v;
            used[v] = true;
        }

    std::vector<std::vector<int>> result;

    auto consistent = [&](int v, int cand) {
        // every already-mapped neighbour must map to a neighbour with the
        // same weight, and non-edges must stay non-edges
        for (int u = 1; u <= net.n; ++u) {
            if (image[u] == 0 || u == v) continue;
            auto ev = weight.find(std::minmax(v, u));
            auto ei = weight.find(std::minmax(cand, image[u]));
            bool has_v = ev != weight.end();
            bool has_i = ei != weight.end();
            if (has_v != has_i) return false;
            if (has_v && std::abs(ev->second - ei->second) > kWeightTol) return false;
        }
        return true;
    };

    auto rec = [&](auto&& self, size_t idx) -> void {
        if (idx == free_verts.size()) {
            std::vector<int> perm(net.n);
            bool identity = true;
            for (int v = 1; v <= net.n; ++v) {
                perm[v - 1] = image[v];
                if (image[v] != v) identity = false;
            }
            if (!identity) result.push_back(std::move(perm));
            return;
        }
        int v = free_verts[idx];
        for (int cand : free_verts) {
            if (used[cand] || !signatures_match(sig[v], sig[cand])) continue;
            if (!consistent(v, cand)) continue;
            image[v] = cand;
            used[cand] = true;
            self(self, idx + 1);
            image[v] = 0;
            used[cand] = false;
        }
    };
    rec(rec, 0);
    return result;
}

}  // namespace spinnet
