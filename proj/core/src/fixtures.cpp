#include "spinnet/fixtures.hpp"

#include <sstream>

#include "spinnet/numfmt.hpp"

namespace spinnet {

std::vector<std::string> fixture_names() {
    return {"fig1", "fig2", "triangle", "triangle_tail", "example1"};
}

SpinNetwork fixture_network(const std::string& name) {
    SpinNetwork net;
    if (name == "fig1") {
        net.n = 7;
        net.drift_edges = {{2, 3, 1}, {3, 4, 1}, {4, 5, 1}, {5, 6, 1}, {5, 7, 1}};
    } else if (name == "fig2") {
        net.n = 7;
        net.drift_edges = {{2, 3, 1}, {2, 4, 1}, {4, 5, 1}, {5, 6, 1}, {5, 7, 1}};
    } else if (name == "triangle") {
        net.n = 4;
        net.drift_edges = {{2, 3, 1}, {3, 4, 1}, {2, 4, 1}};
    } else if (name == "triangle_tail") {
        net.n = 5;
        net.drift_edges = {{2, 3, 1}, {3, 4, 1}, {2, 4, 1}, {4, 5, 1}};
    } else {
        throw validation_error("fixture", "unknown network fixture: " + name);
    }
    net.control_edges = {{1, 2, 1}};
    validate(net);
    return net;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> example1_hamiltonians() {
    Eigen::MatrixXcd h0 = Eigen::MatrixXcd::Zero(3, 3);
    h0(0, 0) = -0.5;
    h0(2, 2) = 0.5;
    Eigen::MatrixXcd h1 = Eigen::MatrixXcd::Zero(3, 3);
    h1(0, 1) = h1(1, 0) = h1(1, 2) = h1(2, 1) = 0.5;
    return {h0, h1};
}

std::string fixture_file(const std::string& name) {
    if (name == "example1") {
        auto [h0, h1] = example1_hamiltonians();
        std::ostringstream out;
        out << "{\"hamiltonians\": [";
        for (int m = 0; m < 2; ++m) {
            const Eigen::MatrixXcd& h = m == 0 ? h0 : h1;
            if (m) out << ", ";
            out << "[";
            for (int i = 0; i < h.rows(); ++i) {
                if (i) out << ", ";
                out << "[";
                for (int j = 0; j < h.cols(); ++j) {
                    if (j) out << ", ";
                    out << format_double(h(i, j).real());
                }
                out << "]";
            }
            out << "]";
        }
        out << "]}\n";
        return out.str();
    }
    return serialize_network(fixture_network(name)) + "\n";
}

}  // namespace spinnet
