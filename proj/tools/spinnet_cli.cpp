// Command line front end: analyze | bound | simulate | catalyze | identify |
// fixtures. Reports are JSON with all floating-point values printed via the
// fixed 12-significant-digit formatter, so identical invocations produce
// byte-identical output.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinnet/bounds.hpp"
#include "spinnet/fixtures.hpp"
#include "spinnet/network.hpp"
#include "spinnet/numfmt.hpp"
#include "spinnet/operators.hpp"
#include "spinnet/pulses.hpp"
#include "spinnet/symmetries.hpp"
#include "spinnet/sysid.hpp"

namespace {

using spinnet::format_double;
namespace fs = std::filesystem;

constexpr const char* kSchema = "spinnet-report-v1";

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}

std::string jstr(const std::string& s) { return "\"" + json_escape(s) + "\""; }

std::string jcomplex(std::complex<double> z) {
    return "[" + format_double(z.real()) + ", " + format_double(z.imag()) + "]";
}

std::string network_digest(const spinnet::SpinNetwork& net) {
    auto comp = spinnet::drift_component(net, 2);
    bool bip = spinnet::bipartition(net, comp).has_value();
    std::ostringstream o;
    o << "{\"n\": " << net.n << ", \"drift_edges\": " << net.drift_edges.size()
      << ", \"control_edges\": " << net.control_edges.size()
      << ", \"bipartite\": " << (bip ? "true" : "false") << "}";
    return o.str();
}

void emit_report(const std::string& command, const spinnet::SpinNetwork* net,
                 const std::string& results, const std::string& out_path) {
    std::ostringstream o;
    o << "{\n  \"schema\": " << jstr(kSchema) << ",\n  \"command\": " << jstr(command);
    if (net) o << ",\n  \"network\": " << network_digest(*net);
    o << ",\n  \"results\": " << results << "\n}\n";
    if (out_path.empty()) {
        std::cout << o.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw spinnet::validation_error("out", "cannot write " + out_path);
        f << o.str();
    }
}

std::string sibling_csv(const std::string& out_path, const std::string& suffix) {
    if (out_path.empty()) return suffix + ".csv";
    fs::path p(out_path);
    p.replace_extension("");
    return p.string() + "." + suffix + ".csv";
}

spinnet::SpinNetwork load_network(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw spinnet::validation_error("net", "cannot read " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return spinnet::parse_network(buf.str());
}

// A target is either a single-vertex basis label ("3") or an inline JSON map
// of labels to [re, im] amplitudes. The CLI normalizes map targets.
Eigen::VectorXcd parse_target(const std::string& spec, int n) {
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(n);
    std::string s = spec;
    s.erase(0, s.find_first_not_of(" \t"));
    if (!s.empty() && s.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(s);
        } catch (const nlohmann::json::parse_error& e) {
            throw spinnet::validation_error("target", std::string("bad JSON: ") + e.what());
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            int v;
            try {
                v = std::stoi(it.key());
            } catch (...) {
                throw spinnet::validation_error("target", "bad vertex label " + it.key());
            }
            if (v < 1 || v > n)
                throw spinnet::validation_error("target", "vertex out of range: " + it.key());
            if (!it.value().is_array() || it.value().size() != 2)
                throw spinnet::validation_error("target",
                                                "amplitude must be a [re, im] pair");
            t(v - 1) = std::complex<double>(it.value()[0].get<double>(),
                                            it.value()[1].get<double>());
        }
        double norm = t.norm();
        if (norm < 1e-12)
            throw spinnet::validation_error("target", "all amplitudes are zero");
        t /= norm;
        return t;
    }
    if (s.find(',') != std::string::npos)
        throw spinnet::validation_error("target", "multi-excitation labels are not valid "
                                                  "here; give a single vertex or a map");
    int v;
    try {
        v = std::stoi(s);
    } catch (...) {
        throw spinnet::validation_error("target", "bad vertex label " + s);
    }
    if (v < 1 || v > n)
        throw spinnet::validation_error("target", "vertex out of range: " + s);
    t(v - 1) = 1.0;
    return t;
}

std::string segment_kind_name(spinnet::SegmentKind k) {
    switch (k) {
        case spinnet::SegmentKind::rabi: return "rabi";
        case spinnet::SegmentKind::raman: return "raman";
        case spinnet::SegmentKind::free_evolution: return "free";
        case spinnet::SegmentKind::inject_catalyst: return "inject_catalyst";
        default: return "extract_catalyst";
    }
}

std::string schedule_json(const spinnet::PulseSchedule& sched) {
    std::ostringstream o;
    o << "{\"sectors\": [";
    for (std::size_t i = 0; i < sched.sectors.size(); ++i)
        o << (i ? ", " : "") << sched.sectors[i];
    o << "], \"predicted_leakage\": " << format_double(sched.predicted_leakage)
      << ", \"total_duration\": " << format_double(sched.total_duration())
      << ", \"segments\": [";
    for (std::size_t i = 0; i < sched.segments.size(); ++i) {
        const auto& s = sched.segments[i];
        o << (i ? ", " : "") << "{\"kind\": " << jstr(segment_kind_name(s.kind))
          << ", \"duration\": " << format_double(s.duration)
          << ", \"carrier\": " << format_double(s.carrier)
          << ", \"amplitude\": " << format_double(s.amplitude)
          << ", \"phase\": " << format_double(s.phase);
        if (s.kind == spinnet::SegmentKind::raman)
            o << ", \"carrier2\": " << format_double(s.carrier2)
              << ", \"amplitude2\": " << format_double(s.amplitude2)
              << ", \"phase2\": " << format_double(s.phase2);
        o << "}";
    }
    o << "]}";
    return o.str();
}

std::string bound_json(const spinnet::FidelityBound& b) {
    std::ostringstream o;
    o << "{\"value\": " << format_double(b.value)
      << ", \"phase_attainable\": " << (b.phase_attainable ? "true" : "false");
    if (b.global_phase) o << ", \"global_phase\": " << format_double(*b.global_phase);
    o << ", \"target_decomposition\": [";
    for (int i = 0; i < b.target_decomposition.size(); ++i)
        o << (i ? ", " : "") << jcomplex(b.target_decomposition(i));
    o << "], \"dark_components\": [";
    for (std::size_t i = 0; i < b.dark_components.size(); ++i) {
        const auto& d = b.dark_components[i];
        o << (i ? ", " : "") << "{\"eigenvalue\": " << format_double(d.eigenvalue)
          << ", \"weight\": " << format_double(d.weight) << ", \"vector\": [";
        for (int k = 0; k < d.vector.size(); ++k) o << (k ? ", " : "") << jcomplex(d.vector(k));
        o << "]}";
    }
    o << "]}";
    return o.str();
}

void write_trajectory_csv(const std::string& path, const spinnet::SpinNetwork& net,
                          const spinnet::PulseSchedule& sched,
                          const std::vector<spinnet::TrajectorySample>& traj) {
    std::vector<int> sectors = sched.sectors;
    std::sort(sectors.begin(), sectors.end());
    sectors.erase(std::unique(sectors.begin(), sectors.end()), sectors.end());
    spinnet::ExcitationBasis basis = spinnet::sector_basis(net.n, sectors);
    std::ofstream f(path);
    if (!f) throw spinnet::validation_error("out", "cannot write " + path);
    f << "time";
    for (int i = 0; i < basis.dim(); ++i) f << "," << basis.label(i);
    f << "\n";
    for (const auto& s : traj) {
        f << format_double(s.time);
        for (int i = 0; i < s.populations.size(); ++i)
            f << "," << format_double(s.populations(i));
        f << "\n";
    }
}

std::string simulation_json(const spinnet::SimulationResult& res,
                            const spinnet::PulseSchedule& sched) {
    std::ostringstream o;
    o << "{\"fidelity\": " << format_double(res.fidelity);
    if (res.bound) o << ", \"bound\": " << bound_json(*res.bound);
    o << ", \"phase_corrected\": " << (res.phase_corrected ? "true" : "false");
    if (res.phase_corrected)
        o << ", \"correction_phase\": " << format_double(res.correction_phase);
    o << ", \"schedule\": " << schedule_json(sched) << "}";
    return o.str();
}

int run(int argc, char** argv) {
    CLI::App app{"spin network symmetry, bound, pulse and identification toolkit"};
    app.require_subcommand(1);

    std::string net_path, target_spec, out_path;
    double quality = 0.02, epsilon = 0.01, t_max = 5000.0, dt = 0.1;
    int shots = 0;
    std::uint64_t seed = 0;
    bool refine = false;

    auto* analyze = app.add_subcommand("analyze", "symmetries, blocks and Lie closure");
    analyze->add_option("--net", net_path, "network JSON file")->required();
    analyze->add_option("--out", out_path, "report path (default stdout)");

    auto* bound = app.add_subcommand("bound", "maximum transfer fidelity and dark states");
    bound->add_option("--net", net_path)->required();
    bound->add_option("--target", target_spec, "vertex label or JSON amplitude map")
        ->required();
    bound->add_option("--out", out_path);

    auto* simulate = app.add_subcommand("simulate", "synthesize a transfer and run it");
    simulate->add_option("--net", net_path)->required();
    simulate->add_option("--target", target_spec)->required();
    simulate->add_option("--quality", quality, "leakage budget in (0,1)");
    simulate->add_option("--dt", dt, "integrator step bound");
    simulate->add_option("--out", out_path);

    auto* catalyze = app.add_subcommand("catalyze", "plan and run a catalytic transfer");
    catalyze->add_option("--net", net_path)->required();
    catalyze->add_option("--target", target_spec)->required();
    catalyze->add_option("--quality", quality);
    catalyze->add_option("--dt", dt);
    catalyze->add_option("--out", out_path);

    auto* identify = app.add_subcommand("identify", "recover the spectrum from a record");
    identify->add_option("--net", net_path)->required();
    identify->add_option("--epsilon", epsilon, "probe amplitude");
    identify->add_option("--T", t_max, "record duration");
    identify->add_option("--dt", dt, "sample step");
    identify->add_option("--shots", shots, "shots per sample (0 = exact)");
    auto* seed_opt = identify->add_option("--seed", seed, "rng seed (required with --shots)");
    identify->add_flag("--refine", refine, "run sign-resolving phase scans");
    identify->add_option("--out", out_path);

    auto* fixtures = app.add_subcommand("fixtures", "write the bundled fixtures");
    fixtures->add_option("--out", out_path, "target directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) {
        spinnet::SpinNetwork net = load_network(net_path);
        spinnet::require_pendant_control(net);
        auto a = spinnet::restrict_sector(net, spinnet::Ham::drift, 1);
        auto c = spinnet::restrict_sector(net, spinnet::Ham::control, 1);
        std::vector<Eigen::MatrixXcd> hams{a.entries, c.entries};
        auto csos = spinnet::find_csos(hams);
        auto asos = spinnet::find_asos(hams);
        Eigen::VectorXcd seed_vec = Eigen::VectorXcd::Zero(net.n);
        seed_vec(1) = 1.0;
        auto dec = spinnet::decompose(hams, seed_vec);
        int acc = dec.accessible_index;
        std::vector<Eigen::MatrixXcd> restricted;
        const auto& bb = dec.blocks[acc].basis;
        for (const auto& h : hams)
            restricted.push_back(bb.adjoint() * h * bb);
        int acc_dim = dec.dim(acc);
        int lie = spinnet::lie_closure_dimension(restricted, acc_dim * acc_dim + 1);

        std::ostringstream r;
        r << "{\"cso_count\": " << csos.size() << ", \"aso_count\": " << asos.size()
          << ", \"blocks\": [";
        for (std::size_t b = 0; b < dec.blocks.size(); ++b) {
            r << (b ? ", " : "") << "{\"dimension\": " << dec.dim(static_cast<int>(b))
              << ", \"accessible\": "
              << (static_cast<int>(b) == acc ? "true" : "false") << "}";
        }
        r << "], \"accessible_dimension\": " << acc_dim << ", \"lie_dimension\": " << lie;
        r << ", \"csos\": [";
        for (std::size_t i = 0; i < csos.size(); ++i)
            r << (i ? ", " : "") << spinnet::matrix_to_json(csos[i].matrix);
        r << "], \"asos\": [";
        for (std::size_t i = 0; i < asos.size(); ++i)
            r << (i ? ", " : "") << spinnet::matrix_to_json(asos[i].matrix);
        r << "]}";
        emit_report("analyze", &net, r.str(), out_path);
        return 0;
    }
    if (bound->parsed()) {
        spinnet::SpinNetwork net = load_network(net_path);
        Eigen::VectorXcd t = parse_target(target_spec, net.n);
        spinnet::FidelityBound b = spinnet::max_fidelity(net, t);
        emit_report("bound", &net, bound_json(b), out_path);
        return 0;
    }
    if (simulate->parsed()) {
        spinnet::SpinNetwork net = load_network(net_path);
        Eigen::VectorXcd t = parse_target(target_spec, net.n);
        spinnet::SpectralData spec = spinnet::spectral(net);
        spinnet::PulseSchedule sched = spinnet::synthesize_transfer(spec, t, quality);
        Eigen::VectorXcd initial = Eigen::VectorXcd::Zero(net.n);
        initial(0) = 1.0;
        spinnet::SimulationResult res = spinnet::simulate(net, sched, initial, dt, t);
        emit_report("simulate", &net, simulation_json(res, sched), out_path);
        write_trajectory_csv(sibling_csv(out_path, "trajectory"), net, sched, res.trajectory);
        return 0;
    }
    if (catalyze->parsed()) {
        spinnet::SpinNetwork net = load_network(net_path);
        Eigen::VectorXcd t = parse_target(target_spec, net.n);
        spinnet::CatalysisPlan plan = spinnet::plan_catalysis(net, t, quality);
        std::ostringstream r;
        if (!plan.feasible) {
            r << "{\"feasible\": false, \"blocker\": " << jstr(plan.blocker)
              << ", \"catalytic_bound\": " << format_double(plan.catalytic_bound)
              << ", \"in_sector\": " << bound_json(plan.in_sector) << "}";
            emit_report("catalyze", &net, r.str(), out_path);
            return 3;
        }
        Eigen::VectorXcd initial = Eigen::VectorXcd::Zero(net.n);
        initial(0) = 1.0;
        spinnet::SimulationResult res =
            spinnet::simulate(net, plan.schedule, initial, dt, t, plan.in_sector);
        r << "{\"feasible\": true, \"fidelity\": " << format_double(res.fidelity)
          << ", \"catalytic_bound\": " << format_double(plan.catalytic_bound)
          << ", \"in_sector\": " << bound_json(plan.in_sector)
          << ", \"phase_corrected\": " << (res.phase_corrected ? "true" : "false");
        if (res.phase_corrected)
            r << ", \"correction_phase\": " << format_double(res.correction_phase);
        r << ", \"schedule\": " << schedule_json(plan.schedule) << "}";
        emit_report("catalyze", &net, r.str(), out_path);
        write_trajectory_csv(sibling_csv(out_path, "trajectory"), net, plan.schedule,
                             res.trajectory);
        return 0;
    }
    if (identify->parsed()) {
        if (shots > 0 && seed_opt->count() == 0)
            throw spinnet::validation_error("seed", "--seed is required with --shots");
        spinnet::SpinNetwork net = load_network(net_path);
        spinnet::SurvivalRecord rec =
            spinnet::survival_record(net, epsilon, t_max, dt, shots, seed);
        spinnet::IdentificationResult est = spinnet::estimate_spectrum(rec);
        if (refine) est = spinnet::resolve_signs(net, est, epsilon);
        std::ostringstream r;
        r << "{\"resolution\": " << format_double(est.resolution)
          << ", \"aso_symmetric\": " << (est.aso_symmetric ? "true" : "false")
          << ", \"estimates\": [";
        for (std::size_t i = 0; i < est.estimates.size(); ++i) {
            const auto& e = est.estimates[i];
            r << (i ? ", " : "") << "{\"lambda_hat\": " << format_double(e.lambda_hat)
              << ", \"alpha_hat\": " << format_double(e.alpha_hat)
              << ", \"multiplicity\": " << e.multiplicity
              << ", \"sign_resolved\": " << (e.sign_resolved ? "true" : "false") << "}";
        }
        r << "]}";
        emit_report("identify", &net, r.str(), out_path);
        std::string csv = sibling_csv(out_path, "record");
        std::ofstream f(csv);
        if (!f) throw spinnet::validation_error("out", "cannot write " + csv);
        f << "time,p\n";
        for (std::size_t i = 0; i < rec.times.size(); ++i)
            f << format_double(rec.times[i]) << "," << format_double(rec.values[i]) << "\n";
        return 0;
    }
    if (fixtures->parsed()) {
        fs::create_directories(out_path);
        std::ostringstream r;
        r << "{\"written\": [";
        bool first = true;
        for (const auto& name : spinnet::fixture_names()) {
            fs::path p = fs::path(out_path) / (name + ".json");
            std::ofstream f(p);
            if (!f) throw spinnet::validation_error("out", "cannot write " + p.string());
            f << spinnet::fixture_file(name);
            r << (first ? "" : ", ") << jstr(p.string());
            first = false;
        }
        r << "]}";
        emit_report("fixtures", nullptr, r.str(), "");
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const spinnet::validation_error& e) {
        std::cerr << "error in " << e.field() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
