#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spinnet/network.hpp"

namespace spinnet {

// Bundled example systems used across tests and the CLI.
//   fig1          chain 2-3-4-5 forking into 6 and 7, pendant control at 1
//   fig2          fork at 2 into {3,4}, chain 4-5 forking into {6,7}
//   triangle      odd cycle 2-3-4 (non-bipartite), pendant control at 1
//   triangle_tail triangle 2-3-4 plus edge 4-5 (non-bipartite, asymmetric)
//   example1      not a network: a raw 3-level Hamiltonian pair
std::vector<std::string> fixture_names();

// Network fixtures by name; throws validation_error for "example1" or
// unknown names.
SpinNetwork fixture_network(const std::string& name);

// The 3-level pair (H0, H1): H0 = diag(-1,0,1)/2, H1 a uniform nearest-level
// coupling. Used by the symmetry-finder tests.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> example1_hamiltonians();

// JSON file contents for a fixture, as written by the CLI `fixtures` command.
std::string fixture_file(const std::string& name);

}  // namespace spinnet
