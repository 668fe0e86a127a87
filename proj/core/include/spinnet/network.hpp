#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinnet {

// Thrown for anything a user could have typed wrong: bad JSON, bad edges,
// unnormalized targets. Carries the name of the offending field so the CLI
// can report it.
class validation_error : public std::runtime_error {
public:
    validation_error(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct Edge {
    int i = 0;
    int j = 0;
    double w = 0.0;
};

// Weighted coupling graph. Spin indices are 1-based on every interface.
// drift_edges carry the always-on couplings, control_edges the switchable
// ones; in pendant-control form the only control edge is (1,2) with weight 1
// and vertex 1 has no drift edges.
struct SpinNetwork {
    int n = 0;
    std::vector<Edge> drift_edges;
    std::vector<Edge> control_edges;
};

// Checks all structural invariants (self-loops, duplicates, index ranges).
// Throws validation_error naming the offending field.
void validate(const SpinNetwork& net);

bool is_pendant_control(const SpinNetwork& net);
void require_pendant_control(const SpinNetwork& net);

SpinNetwork parse_network(const std::string& text);
std::string serialize_network(const SpinNetwork& net);

struct Bipartition {
    std::vector<int> part_a;  // sorted; contains the lowest-indexed vertex
    std::vector<int> part_b;  // sorted
};

// Vertices drift-connected to `start`, sorted ascending (includes `start`).
std::vector<int> drift_component(const SpinNetwork& net, int start);

// 2-coloring of `component` under drift edges, or nullopt if an odd cycle
// exists. `component` must be connected under drift edges.
std::optional<Bipartition> bipartition(const SpinNetwork& net,
                                       const std::vector<int>& component);

// All weight-preserving drift-edge automorphisms that fix every vertex in
// `fixed` pointwise, excluding the identity. A permutation p is returned as a
// vector of length n with p[v-1] = image of vertex v (1-based). Exhaustive
// search pruned by degree signature; n is capped at 12.
std::vector<std::vector<int>> automorphisms(const SpinNetwork& net,
                                            const std::vector<int>& fixed);

}  // namespace spinnet
