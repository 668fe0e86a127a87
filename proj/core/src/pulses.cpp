#include "spinnet/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
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
constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

double wrap_angle(double x) { return std::remainder(x, 2.0 * kPi); }

// ---------------------------------------------------------------------------
// Loading synthesis. Levels are driven one group at a time (mirror pair,
// zero-frequency level, or lone level); in the interaction picture each
// resonant segment is a clean two-level rotation between the control level
// and the group's bright combination, so amplitudes loaded earlier are only
// touched through off-resonant leakage, which the amplitude budget caps.
// ---------------------------------------------------------------------------

enum class GroupKind { pair, dc, single };

struct LoadGroup {
    GroupKind kind;
    int a = -1, b = -1;    // level indices; pair uses both, a has lambda > 0
    double omega = 0.0;    // tone frequency
    double weight = 0.0;   // |gamma|^2 summed over the group
    double coupling = 0.0; // alpha entering the Rabi rate
    double delta = 0.0;    // nearest off-group detuning
    double eps = 0.0;
    double theta = 0.0;
    double tau = 0.0;
};

struct LoadingPlan {
    std::vector<LoadGroup> groups;  // in loading order
    VectorXcd gamma;
    double duration = 0.0;
    double leakage = 0.0;
    std::vector<double> chi_constraints;  // each: chi == value (mod pi)
};

double off_group_detuning(const SpectralData& spec, const std::set<int>& members, double omega) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k < spec.levels(); ++k) {
        if (members.count(k)) continue;
        double lam = spec.eigenvalues(k);
        best = std::min({best, std::abs(lam - omega), std::abs(lam + omega)});
    }
    if (!std::isfinite(best)) best = std::max(1.0, std::abs(omega));
    return best;
}

double leakage_estimate(const SpectralData& spec, const std::set<int>& members, double omega,
                        double eps) {
    double total = 0.0;
    for (int k = 1; k < spec.levels(); ++k) {
        if (members.count(k)) continue;
        double lam = spec.eigenvalues(k);
        double d = std::min(std::abs(lam - omega), std::abs(lam + omega));
        if (d < 1e-12) continue;
        double r = 2.0 * eps * spec.overlaps(k) / d;
        total += r * r;
    }
    return total;
}

LoadingPlan plan_loading(const SpectralData& spec, const VectorXcd& gamma, double quality) {
    int levels = spec.levels();
    if (gamma.size() != levels)
        throw validation_error("target", "expected one coefficient per spectral level");
    if (std::abs(gamma(0)) > 1e-9)
        throw validation_error("target", "control level coefficient must be zero");
    double total = gamma.squaredNorm();
    if (total > 1.0 + 1e-6)
        throw validation_error("target", "coefficient norm exceeds one");

    double radius = 0.0;
    for (int k = 1; k < levels; ++k) radius = std::max(radius, std::abs(spec.eigenvalues(k)));
    double zero_tol = 1e-8 * std::max(radius, 1e-30);

    LoadingPlan plan;
    plan.gamma = gamma;
    std::vector<bool> used(levels, false);
    for (int k = 1; k < levels; ++k) {
        if (used[k]) continue;
        double lam = spec.eigenvalues(k);
        int partner = spec.paired_with[k];
        LoadGroup g;
        if (std::abs(lam) <= zero_tol) {
            g.kind = GroupKind::dc;
            g.a = k;
            g.omega = 0.0;
            g.weight = std::norm(gamma(k));
            g.coupling = spec.overlaps(k);
            used[k] = true;
        } else if (partner >= 0 && partner != k && !used[partner]) {
            g.kind = GroupKind::pair;
            g.a = lam > 0 ? k : partner;
            g.b = lam > 0 ? partner : k;
            g.omega = std::abs(lam);
            double wa = std::abs(gamma(g.a)), wb = std::abs(gamma(g.b));
            if (std::abs(wa - wb) > 1e-6)
                throw validation_error(
                    "target",
                    "unequal mirror-pair magnitudes require a Raman transition, which is not "
                    "synthesizable for this coupling");
            g.weight = wa * wa + wb * wb;
            g.coupling = 0.5 * (spec.overlaps(g.a) + spec.overlaps(g.b));
            used[k] = used[partner] = true;
        } else {
            g.kind = GroupKind::single;
            g.a = k;
            g.omega = std::abs(lam);
            g.weight = std::norm(gamma(k));
            g.coupling = spec.overlaps(k);
            used[k] = true;
        }
        if (g.weight < 1e-14) continue;
        plan.groups.push_back(g);
    }
    std::sort(plan.groups.begin(), plan.groups.end(),
              [](const LoadGroup& x, const LoadGroup& y) { return x.weight > y.weight; });

    // Amplitudes from the quality budget: start below the rotating-wave cap,
    // then shrink until the summed first-order leakage prediction fits.
    int nseg = static_cast<int>(plan.groups.size());
    if (nseg == 0) {
        plan.duration = 0.0;
        return plan;
    }
    for (auto& g : plan.groups) {
        std::set<int> members{g.a};
        if (g.b >= 0) members.insert(g.b);
        g.delta = off_group_detuning(spec, members, g.omega);
        g.eps = std::min(0.05 * g.delta, g.delta * std::sqrt(quality / nseg) / 3.0);
    }
    double predicted = 0.0;
    for (auto& g : plan.groups) {
        std::set<int> members{g.a};
        if (g.b >= 0) members.insert(g.b);
        predicted += leakage_estimate(spec, members, g.omega, g.eps);
    }
    if (predicted > quality && predicted > 0) {
        double s = std::sqrt(quality / predicted);
        for (auto& g : plan.groups) g.eps *= s;
        predicted = quality;
    }
    plan.leakage = predicted;

    // Durations: pulse areas arcsin(sqrt(w)/remaining), largest weight first.
    double remaining_sq = 1.0;
    for (auto& g : plan.groups) {
        double r = std::sqrt(std::max(remaining_sq, 0.0));
        double ratio = r > 1e-12 ? std::sqrt(g.weight) / r : 1.0;
        g.theta = std::asin(std::clamp(ratio, 0.0, 1.0));
        double omega_rabi;
        switch (g.kind) {
            case GroupKind::pair: omega_rabi = std::sqrt(2.0) * g.eps * g.coupling; break;
            case GroupKind::dc: omega_rabi = 2.0 * g.eps * g.coupling; break;
            default: omega_rabi = g.eps * g.coupling; break;
        }
        if (omega_rabi < 1e-14)
            throw validation_error("target", "level with vanishing overlap cannot be loaded");
        g.tau = g.theta / omega_rabi;
        plan.duration += g.tau;
        remaining_sq = std::max(0.0, remaining_sq - g.weight);
    }

    // Phase consistency: mirror pairs and zero-frequency levels each pin the
    // free global phase modulo pi; all pins must agree for a loadable target.
    for (const auto& g : plan.groups) {
        if (g.kind == GroupKind::pair)
            plan.chi_constraints.push_back(
                wrap_angle(-kPi / 2 - 0.5 * std::arg(gamma(g.a) * gamma(g.b))));
        else if (g.kind == GroupKind::dc)
            plan.chi_constraints.push_back(wrap_angle(-kPi / 2 - std::arg(gamma(g.a))));
    }
    return plan;
}

double resolve_chi(const LoadingPlan& plan) {
    if (plan.chi_constraints.empty()) return 0.0;
    double chi = plan.chi_constraints.front();
    for (double c : plan.chi_constraints) {
        double d = std::remainder(chi - c, kPi);
        if (std::abs(d) > 1e-6)
            throw validation_error("target", "relative phases are not reachable by the pendant "
                                             "control (mirror-pair phase pattern violated)");
    }
    return chi;
}

// Emit the rabi segments. `t_end` is the full schedule duration (the target
// interaction-picture coefficient of level k is e^{i chi} gamma_k e^{i lambda_k t_end}).
std::vector<PulseSegment> emit_loading(const SpectralData& spec, const LoadingPlan& plan,
                                       double chi, double t_end) {
    std::vector<PulseSegment> out;
    double remaining_sq = 1.0;
    for (const auto& g : plan.groups) {
        double r = std::sqrt(std::max(remaining_sq, 0.0));
        double loaded = std::sin(g.theta) * r;  // equals sqrt(weight)
        remaining_sq = std::max(0.0, remaining_sq - g.weight);
        PulseSegment seg;
        seg.kind = SegmentKind::rabi;
        seg.carrier = g.omega;
        seg.amplitude = g.eps;
        seg.duration = g.tau;
        cplx chi_f = std::polar(1.0, chi);
        if (g.kind == GroupKind::single) {
            cplx cstar = chi_f * plan.gamma(g.a) *
                         std::polar(1.0, spec.eigenvalues(g.a) * t_end);
            double sgn = spec.eigenvalues(g.a) >= 0 ? 1.0 : -1.0;
            seg.phase = wrap_angle(-sgn * (std::arg(cstar) + kPi / 2));
        } else if (g.kind == GroupKind::pair) {
            cplx up = chi_f * plan.gamma(g.a) * std::polar(1.0, spec.eigenvalues(g.a) * t_end);
            cplx um = chi_f * plan.gamma(g.b) * std::polar(1.0, spec.eigenvalues(g.b) * t_end);
            double phi = 0.5 * std::arg(um / up);
            cplx zeta = (std::polar(1.0, phi) * up + std::polar(1.0, -phi) * um) / std::sqrt(2.0);
            cplx rho = zeta / (-kI * loaded);
            if (rho.real() < 0) {
                phi += kPi;
                rho = -rho;
            }
            if (std::abs(rho - 1.0) > 1e-6)
                throw validation_error("target", "mirror-pair phases are not reachable");
            seg.phase = wrap_angle(phi);
        } else {  // dc
            cplx cstar = chi_f * plan.gamma(g.a);
            cplx rho = cstar / (-kI * loaded);
            seg.phase = 0.0;
            if (rho.real() < 0) {
                seg.phase = kPi;
                rho = -rho;
            }
            if (std::abs(rho - 1.0) > 1e-6)
                throw validation_error("target", "zero-frequency level phase is not reachable");
        }
        out.push_back(seg);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simulation.
// ---------------------------------------------------------------------------

double drive_value(const PulseSegment& seg, double t) {
    switch (seg.kind) {
        case SegmentKind::rabi:
            return 2.0 * seg.amplitude * std::cos(seg.carrier * t + seg.phase);
        case SegmentKind::raman:
            return 2.0 * seg.amplitude * std::cos(seg.carrier * t + seg.phase) +
                   2.0 * seg.amplitude2 * std::cos(seg.carrier2 * t + seg.phase2);
        default:
            return 0.0;
    }
}

struct Propagator {
    const ExcitationBasis* basis;
    MatrixXd h0, hc;
    Eigen::SelfAdjointEigenSolver<MatrixXd> free_eig, ctrl_eig;
    double h0_norm;

    // Rotate into an eigenbasis, advance phases, rotate back. The basis
    // matrices are real, so the complex state is moved in two real halves.
    static void phase_advance(const Eigen::SelfAdjointEigenSolver<MatrixXd>& eig,
                              VectorXcd& psi, double duration) {
        const MatrixXd& v = eig.eigenvectors();
        VectorXcd w(psi.size());
        w.real() = v.transpose() * psi.real();
        w.imag() = v.transpose() * psi.imag();
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w(i) *= std::polar(1.0, -eig.eigenvalues()(i) * duration);
        psi.real() = v * w.real();
        psi.imag() = v * w.imag();
    }

    void free_step(VectorXcd& psi, double duration) const {
        phase_advance(free_eig, psi, duration);
    }

    // Strang split exp(-i h0 h/2) exp(-i f hc h) exp(-i h0 h/2): second order
    // like the midpoint-frozen exponential, but with no per-step eigensolve.
    void driven_step(VectorXcd& psi, double f_mid, double h) const {
        phase_advance(free_eig, psi, 0.5 * h);
        phase_advance(ctrl_eig, psi, f_mid * h);
        phase_advance(free_eig, psi, 0.5 * h);
    }
};

std::vector<int> toggle_permutation(const ExcitationBasis& basis) {
    std::vector<int> perm(basis.dim(), -1);
    for (int i = 0; i < basis.dim(); ++i) {
        std::vector<int> s = basis.states[i];
        auto it = std::find(s.begin(), s.end(), 1);
        if (it == s.end())
            s.insert(s.begin(), 1);
        else
            s.erase(it);
        // States whose image falls outside the scheduled sectors keep -1; the
        // caller checks that no meaningful amplitude sits on them.
        perm[i] = basis.index_of(s);
    }
    return perm;
}

VectorXcd embed_state(const ExcitationBasis& basis, const SpinNetwork& net,
                      const VectorXcd& v, const char* field) {
    if (v.size() == basis.dim()) return v;
    if (v.size() == net.n) {
        VectorXcd out = VectorXcd::Zero(basis.dim());
        for (int m = 1; m <= net.n; ++m) {
            int idx = basis.index_of({m});
            if (idx < 0)
                throw validation_error(field, "single-excitation state given but sector 1 is "
                                              "not part of the schedule");
            out(idx) = v(m - 1);
        }
        return out;
    }
    throw validation_error(field, "state dimension matches neither the spin count nor the "
                                  "direct-sum basis");
}

}  // namespace

double PulseSchedule::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
}

PulseSchedule synthesize_loading(const SpectralData& spec, const VectorXcd& coefficients,
                                 double quality) {
    if (quality <= 0 || quality >= 1)
        throw validation_error("quality", "expected a leakage tolerance in (0, 1)");
    LoadingPlan plan = plan_loading(spec, coefficients, quality);
    double chi = resolve_chi(plan);
    PulseSchedule out;
    out.segments = emit_loading(spec, plan, chi, plan.duration);
    out.sectors = {1};
    out.predicted_leakage = plan.leakage;
    return out;
}

PulseSchedule synthesize_transfer(const SpectralData& spec, const VectorXcd& target,
                                  double quality) {
    if (target.size() != spec.eigenvectors.rows())
        throw validation_error("target", "amplitude vector must have one entry per spin");
    double norm = target.norm();
    if (std::abs(norm - 1.0) > 1e-6)
        throw validation_error("target", "amplitude vector must be normalized");
    if (std::abs(target(0)) > 1e-9)
        throw validation_error("target", "control spin must carry no target amplitude");
    VectorXcd t = target / norm;
    int levels = spec.levels();
    VectorXcd gamma = VectorXcd::Zero(levels);
    double f = 0.0;
    for (int k = 1; k < levels; ++k) {
        gamma(k) = spec.eigenvectors.col(k).cast<cplx>().dot(t);
        f += std::norm(gamma(k));
    }
    if (f < 1e-12)
        throw validation_error("target", "target is fully dark; nothing is reachable in this "
                                         "sector");
    gamma /= std::sqrt(f);
    return synthesize_loading(spec, gamma, quality);
}

SimulationResult simulate(const SpinNetwork& net, const PulseSchedule& schedule,
                          const VectorXcd& initial, double dt,
                          const std::optional<VectorXcd>& target,
                          const std::optional<FidelityBound>& bound) {
    require_pendant_control(net);
    if (dt <= 0) throw validation_error("dt", "step must be positive");
    std::vector<int> sectors = schedule.sectors;
    std::sort(sectors.begin(), sectors.end());
    sectors.erase(std::unique(sectors.begin(), sectors.end()), sectors.end());
    auto [h0_op, hc_op] = direct_sum_sector(net, sectors);

    Propagator prop;
    prop.basis = &h0_op.basis;
    prop.h0 = h0_op.entries.real();
    prop.hc = hc_op.entries.real();
    prop.free_eig.compute(prop.h0);
    prop.ctrl_eig.compute(prop.hc);
    prop.h0_norm = std::max(std::abs(prop.free_eig.eigenvalues()(0)),
                            std::abs(prop.free_eig.eigenvalues()(prop.h0.rows() - 1)));

    VectorXcd psi = embed_state(h0_op.basis, net, initial, "initial");
    double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-6)
        throw validation_error("initial", "state must be normalized");
    psi /= norm;

    std::vector<int> toggle;  // built lazily for inject/extract
    double total = schedule.total_duration();
    double stride = std::max(total / 2000.0, dt);

    SimulationResult res;
    auto sample = [&](double t) {
        res.trajectory.push_back({t, psi.cwiseAbs2()});
    };
    sample(0.0);
    double t = 0.0;
    double last_sample = 0.0;

    for (std::size_t si = 0; si < schedule.segments.size(); ++si) {
        const PulseSegment& seg = schedule.segments[si];
        if (seg.kind == SegmentKind::inject_catalyst ||
            seg.kind == SegmentKind::extract_catalyst) {
            if (seg.duration != 0.0 || seg.amplitude != 0.0)
                throw validation_error("schedule", "catalyst markers must have zero duration "
                                                   "and zero amplitude");
            auto quiet = [&](std::size_t j) {
                return schedule.segments[j].amplitude == 0.0 &&
                       schedule.segments[j].amplitude2 == 0.0;
            };
            if ((si > 0 && !quiet(si - 1)) ||
                (si + 1 < schedule.segments.size() && !quiet(si + 1)))
                throw validation_error("schedule", "catalyst markers need zero control "
                                                   "amplitude on both sides");
            if (toggle.empty()) toggle = toggle_permutation(h0_op.basis);
            VectorXcd next = VectorXcd::Zero(psi.size());
            double lost = 0.0;
            for (int i = 0; i < psi.size(); ++i) {
                if (toggle[i] >= 0)
                    next(toggle[i]) = psi(i);
                else
                    lost += std::norm(psi(i));
            }
            if (lost > 1e-9)
                throw validation_error("schedule",
                                       "catalyst transfer moved weight outside the scheduled "
                                       "excitation sectors");
            psi = std::move(next);
            sample(t);
            continue;
        }
        if (seg.duration < 0) throw validation_error("schedule", "segment durations must be "
                                                                 "nonnegative");
        if (seg.duration == 0) continue;
        double fmax = 2.0 * (std::abs(seg.amplitude) + std::abs(seg.amplitude2));
        if (fmax == 0.0) {
            // Drift only: one exact exponential per sample stride.
            double left = seg.duration;
            while (left > 1e-15) {
                double h = std::min(left, stride);
                prop.free_step(psi, h);
                t += h;
                left -= h;
                if (t - last_sample >= stride - 1e-12) {
                    sample(t);
                    last_sample = t;
                }
            }
        } else {
            double fastest = std::max({std::abs(seg.carrier), std::abs(seg.carrier2), 1e-9});
            double cap = std::min({dt, 0.01 / (prop.h0_norm + fmax),
                                   2.0 * kPi / fastest / 40.0});
            int nsub = std::max(1, static_cast<int>(std::ceil(seg.duration / cap)));
            double h = seg.duration / nsub;
            for (int i = 0; i < nsub; ++i) {
                double tmid = t + 0.5 * h;
                prop.driven_step(psi, drive_value(seg, tmid), h);
                t += h;
                if (t - last_sample >= stride - 1e-12) {
                    sample(t);
                    last_sample = t;
                }
            }
        }
        if (std::abs(psi.norm() - 1.0) > 1e-6)
            throw validation_error("dt", "normalization drifted; the step is too large");
    }
    if (res.trajectory.back().time < t - 1e-12) sample(t);

    res.final_state = psi;
    if (target.has_value()) {
        VectorXcd tv = embed_state(h0_op.basis, net, *target, "target");
        double tn = tv.norm();
        if (tn < 1e-12) throw validation_error("target", "target vector is zero");
        tv /= tn;
        // Split the overlap at the vacuum: a catalytic run may leave the
        // leftover control population in |0>, whose phase relative to the
        // excited part is deemed correctable by a local gate.
        int vac = h0_op.basis.index_of({});
        cplx z_vac = 0.0, z_rest = 0.0;
        for (int i = 0; i < psi.size(); ++i) {
            cplx c = std::conj(tv(i)) * psi(i);
            (i == vac ? z_vac : z_rest) += c;
        }
        if (std::abs(z_vac) > 1e-12 && std::abs(z_rest) > 1e-12) {
            res.phase_corrected = true;
            res.correction_phase = wrap_angle(std::arg(z_rest) - std::arg(z_vac));
            double s = std::abs(z_vac) + std::abs(z_rest);
            res.fidelity = s * s;
        } else {
            res.fidelity = std::norm(z_vac + z_rest);
        }
    }
    if (bound.has_value()) {
        res.bound = bound;
    } else if (target.has_value() && target->size() == net.n) {
        bool catalytic = false;
        for (const auto& s : schedule.segments)
            if (s.kind == SegmentKind::inject_catalyst) catalytic = true;
        if (!catalytic) {
            try {
                res.bound = max_fidelity(net, *target);
            } catch (const validation_error&) {
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Catalysis.
// ---------------------------------------------------------------------------

namespace {

// In the interaction picture, a tone at |E_a - E_b| with phase phi rotates
// the (a, b) amplitudes as
//   c_a' = cos(theta) c_a - i e^{-i s phi} u sin(theta) c_b
//   c_b' = -i e^{+i s phi} conj(u) sin(theta) c_a + cos(theta) c_b
// with s = sign(E_a - E_b) and u = g/|g| the coupling phase. Several states
// b_k resonant with the same tone act as one lever arm: the combination
// B = sum_k e^{-i s_k phi} g_k c_k / G with G = sqrt(sum |g_k|^2) rotates
// against c_a at rate eps*G while the orthogonal combinations stand still.

// One drive-coupled transition between a spin-1 mode and a pair mode.
// "Intended" lines are the ones a tone drives on purpose; they are exempt
// from that tone's detuning bookkeeping (their counter-rotating partners are
// not).
struct DriveLine {
    double freq = 0.0;
    double g = 0.0;
    bool intended1 = false;
    bool intended3 = false;
};

struct BridgeCandidate {
    VectorXd b_plus, b_minus;  // unit coupling directions, two-excitation coords
    double energy = 0.0;       // positive-side eigenvalue
    double g1 = 0.0;           // donor->bridge rate, equal on both sides
    cplx g3p{0.0, 0.0}, g3m{0.0, 0.0};
    double g3 = 0.0;           // Lambda gather rate
    double omega1 = 0.0, omega3 = 0.0;
    double delta1 = 1e9, delta3 = 1e9;
    double score = 0.0;
    std::vector<DriveLine> lines;
};

}  // namespace

CatalysisPlan plan_catalysis(const SpinNetwork& net, const VectorXcd& target, double quality) {
    CatalysisPlan plan;
    plan.in_sector = max_fidelity(net, target);
    SpectralData spec = spectral(net);
    VectorXcd t = target / target.norm();
    int levels = spec.levels();

    std::vector<const DarkComponent*> accessible;
    double truly_dark_weight = 0.0;
    for (const auto& dc : plan.in_sector.dark_components) {
        if (dc.weight < 1e-9) continue;
        DarkClassification cls = classify_dark(net, dc.vector);
        if (cls.kind == DarkClass::TrulyDark) {
            truly_dark_weight += dc.weight;
            std::ostringstream msg;
            msg << "target component at eigenvalue " << dc.eigenvalue
                << " (weight " << dc.weight << ") is truly dark: " << cls.blocker;
            plan.blocker = msg.str();
        } else {
            accessible.push_back(&dc);
        }
    }
    plan.catalytic_bound = 1.0 - truly_dark_weight;
    if (truly_dark_weight > 1e-9) {
        plan.feasible = false;
        return plan;
    }
    if (accessible.empty()) {
        plan.feasible = true;
        plan.schedule = synthesize_transfer(spec, t, quality);
        return plan;
    }
    if (accessible.size() > 1)
        throw validation_error("target", "targets spreading over several catalytically "
                                         "accessible dark components are not supported");

    const DarkComponent& dc = *accessible.front();
    double w = dc.weight;
    cplx beta_dark = dc.vector.dot(t);
    double lambda_dark = dc.eigenvalue;

    // Bright decomposition and donor choice. A mirror pair is preferred; its
    // two members share the surplus, keeping magnitudes equal for loading.
    VectorXcd beta = VectorXcd::Zero(levels);
    for (int k = 1; k < levels; ++k) beta(k) = spec.eigenvectors.col(k).cast<cplx>().dot(t);
    int donor_a = -1, donor_b = -1;
    double best = -1.0;
    for (int k = 1; k < levels; ++k) {
        int p = spec.paired_with[k];
        if (p > k) {
            double score = std::abs(beta(k)) + spec.overlaps(k);
            if (score > best) {
                best = score;
                donor_a = spec.eigenvalues(k) > 0 ? k : p;
                donor_b = spec.eigenvalues(k) > 0 ? p : k;
            }
        }
    }
    if (donor_a < 0) {  // no mirror pairs: lone donor level
        for (int k = 1; k < levels; ++k) {
            double score = std::abs(beta(k)) + spec.overlaps(k);
            if (std::abs(spec.eigenvalues(k)) < 1e-9) continue;
            if (score > best) {
                best = score;
                donor_a = k;
            }
        }
    }
    if (donor_a < 0) {
        plan.feasible = false;
        plan.blocker = "no donor level available for the catalytic detour";
        return plan;
    }
    bool pair_donor = donor_b >= 0;
    if (pair_donor && std::abs(std::abs(beta(donor_a)) - std::abs(beta(donor_b))) > 1e-6)
        throw validation_error("target", "mirror-pair magnitudes are unbalanced; the target "
                                         "is not phase-reachable");

    // Amplitude budget: the donor is overloaded so the surplus routed through
    // the bridge equals the dark weight exactly. A mirror pair shares the
    // surplus, and one shedding tone rotates both members at once (the
    // anticommuting symmetry replicates the resonance at the mirrored bridge
    // with the same rate). Shedding scales donor amplitudes by cos(theta1)
    // without turning them, so their loaded phases are already final.
    double rho_star = std::abs(beta(donor_a));
    double boost = pair_donor ? w / 2.0 : w;
    double x_mag = std::sqrt(rho_star * rho_star + boost);
    double theta1 = std::acos(std::clamp(rho_star / x_mag, 0.0, 1.0));
    double sin_t1 = std::sin(theta1);
    bool free_phase = rho_star < 1e-12;
    double arg_a = free_phase ? 0.0 : std::arg(beta(donor_a));
    double arg_b = (pair_donor && !free_phase) ? std::arg(beta(donor_b)) : 0.0;
    double lam_d = spec.eigenvalues(donor_a);
    double lam_m = pair_donor ? spec.eigenvalues(donor_b) : 0.0;
    double d0 = std::abs(beta_dark) > 0 ? std::arg(beta_dark) : 0.0;

    double radius1 = spec.eigenvalues.cwiseAbs().maxCoeff();
    if (pair_donor && std::abs(lambda_dark) > 1e-9 * std::max(radius1, 1.0)) {
        plan.feasible = false;
        plan.blocker = "the anticommuting symmetry pairs the dark level with a mirror "
                       "level at the opposite energy; a catalytic detour deposits equal "
                       "weight on both and cannot load this target";
        return plan;
    }

    // Two-excitation machinery.
    ExcitationBasis basis2 = excitation_basis(net.n, 2);
    MatrixXd a2 = restrict_sector(net, Ham::drift, 2).entries.real();
    MatrixXd c2 = restrict_sector(net, Ham::control, 2).entries.real();
    int d2 = basis2.dim();
    int nn = net.n - 1;  // network vertices 2..n

    auto wedge = [&](const VectorXd& v) {
        VectorXd f = VectorXd::Zero(d2);
        for (int m = 2; m <= net.n; ++m) f(basis2.index_of({1, m})) = v(m - 2);
        return f;
    };
    auto wedgec = [&](const VectorXcd& v) {
        VectorXcd f = VectorXcd::Zero(d2);
        for (int m = 2; m <= net.n; ++m) f(basis2.index_of({1, m})) = v(m - 2);
        return f;
    };
    auto apply_c2 = [&](const VectorXcd& v) {
        VectorXcd out(d2);
        out.real() = c2 * v.real();
        out.imag() = c2 * v.imag();
        return out;
    };
    auto dotrc = [](const VectorXd& r, const VectorXcd& c) {
        return cplx(r.dot(c.real()), r.dot(c.imag()));
    };

    VectorXd da = spec.eigenvectors.col(donor_a).segment(1, nn);
    VectorXd db = pair_donor ? VectorXd(spec.eigenvectors.col(donor_b).segment(1, nn))
                             : VectorXd();
    VectorXcd dk = dc.vector.segment(1, nn);
    VectorXd c2f_a = c2 * wedge(da);
    VectorXd c2f_b = pair_donor ? VectorXd(c2 * wedge(db)) : VectorXd();
    VectorXcd c2f_dark = apply_c2(wedgec(dk));

    // Complete eigenbasis of the spin-1 family block, with the donor and dark
    // directions kept as explicit members of their degenerate groups so that
    // intended lines can be told apart from parasites sharing an energy.
    struct WithMode {
        VectorXcd cw;  // control image of |1 ^ v>, two-excitation coords
        double energy = 0.0;
        int tag = 0;  // 1 donor, 2 mirror donor, 3 dark target, 0 bystander
    };
    std::vector<WithMode> with_modes;
    {
        MatrixXd a1 = restrict_sector(net, Ham::drift, 1).entries.real();
        MatrixXd an = a1.block(1, 1, nn, nn);
        Eigen::SelfAdjointEigenSolver<MatrixXd> net_eig(an);
        double gtol1 = 1e-8 * std::max(radius1, 1.0);
        int i = 0;
        while (i < nn) {
            int j = i;
            while (j + 1 < nn &&
                   net_eig.eigenvalues()(j + 1) - net_eig.eigenvalues()(i) < gtol1)
                ++j;
            double e = net_eig.eigenvalues().segment(i, j - i + 1).mean();
            MatrixXcd cols = net_eig.eigenvectors().middleCols(i, j - i + 1).cast<cplx>();
            int specials = 0;
            auto take = [&](const VectorXcd& s, int tag) {
                with_modes.push_back({apply_c2(wedgec(s)), e, tag});
                cols -= s * (s.adjoint() * cols);
                ++specials;
            };
            if (std::abs(e - lam_d) < gtol1) take(da.cast<cplx>(), 1);
            if (pair_donor && std::abs(e - lam_m) < gtol1) take(db.cast<cplx>(), 2);
            if (std::abs(e - lambda_dark) < gtol1) take(dk, 3);
            if (specials == 0) {
                for (int c = 0; c < cols.cols(); ++c)
                    with_modes.push_back({apply_c2(VectorXcd(wedgec(cols.col(c)))), e, 0});
            } else if (cols.cols() > 0) {
                Eigen::JacobiSVD<MatrixXcd> svd(cols, Eigen::ComputeThinU);
                for (int k = 0; k < svd.singularValues().size(); ++k)
                    if (svd.singularValues()(k) > 1e-9)
                        with_modes.push_back(
                            {apply_c2(VectorXcd(wedgec(svd.matrixU().col(k)))), e, 0});
            }
            i = j + 1;
        }
    }

    // Pair-block spectrum (states not touching spin 1), grouped by energy.
    std::vector<int> pair_rows;
    for (int i = 0; i < d2; ++i)
        if (basis2.states[i][0] != 1) pair_rows.push_back(i);
    int np = static_cast<int>(pair_rows.size());
    if (np == 0) {
        plan.feasible = false;
        plan.blocker = "no bridge eigenvector with usable couplings and clean resonances";
        return plan;
    }
    MatrixXd app(np, np);
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) app(i, j) = a2(pair_rows[i], pair_rows[j]);
    Eigen::SelfAdjointEigenSolver<MatrixXd> pair_eig(app);
    double radius2 = std::max(std::abs(pair_eig.eigenvalues()(0)),
                              std::abs(pair_eig.eigenvalues()(np - 1)));
    double sep_min = 0.02 * std::max(radius2, 1e-12);
    double clash_min = 1e-3 * std::max(radius2, 1.0);
    double gtol2 = 1e-8 * std::max(radius2, 1.0);

    struct PairGroup {
        double energy = 0.0;
        MatrixXd cols;  // embedded two-excitation coords
    };
    std::vector<PairGroup> pair_groups;
    {
        int i = 0;
        while (i < np) {
            int j = i;
            while (j + 1 < np &&
                   pair_eig.eigenvalues()(j + 1) - pair_eig.eigenvalues()(i) < gtol2)
                ++j;
            PairGroup g;
            g.energy = pair_eig.eigenvalues().segment(i, j - i + 1).mean();
            g.cols = MatrixXd::Zero(d2, j - i + 1);
            for (int c = i; c <= j; ++c)
                for (int r = 0; r < np; ++r)
                    g.cols(pair_rows[r], c - i) = pair_eig.eigenvectors()(r, c);
            pair_groups.push_back(std::move(g));
            i = j + 1;
        }
    }
    auto project = [](const MatrixXd& cols, const VectorXcd& y) {
        VectorXcd out(y.size());
        out.real() = cols * (cols.transpose() * y.real());
        out.imag() = cols * (cols.transpose() * y.imag());
        return out;
    };
    auto append_complement = [](const MatrixXd& cols, const VectorXd& b,
                                std::vector<std::pair<VectorXd, int>>& out) {
        if (cols.cols() <= 1) return;
        MatrixXd m = cols - b * (b.transpose() * cols);
        Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU);
        for (int k = 0; k < svd.singularValues().size(); ++k)
            if (svd.singularValues()(k) > 1e-9) out.emplace_back(svd.matrixU().col(k), 0);
    };

    BridgeCandidate chosen;
    for (std::size_t gi = 0; gi < pair_groups.size(); ++gi) {
        const PairGroup& gp = pair_groups[gi];
        double e = gp.energy;
        int hi = -1;
        if (pair_donor) {
            // Work from the positive side; the mirror group comes along.
            if (e <= sep_min) continue;
            for (std::size_t h = 0; h < pair_groups.size(); ++h)
                if (std::abs(pair_groups[h].energy + e) < std::max(gtol2, 1e-9))
                    hi = static_cast<int>(h);
            if (hi < 0) continue;
        }
        BridgeCandidate cand;
        cand.energy = e;
        // The coupling itself singles out the bridge direction; degenerate
        // partners orthogonal to it never hear the shedding tone.
        VectorXd va = gp.cols * (gp.cols.transpose() * c2f_a);
        cand.g1 = va.norm();
        if (cand.g1 < 1e-4) continue;
        cand.b_plus = va / cand.g1;
        if (pair_donor) {
            VectorXd vb = pair_groups[hi].cols * (pair_groups[hi].cols.transpose() * c2f_b);
            double g1m = vb.norm();
            if (std::abs(g1m - cand.g1) > 1e-6 * std::max(cand.g1, g1m)) continue;
            cand.b_minus = vb / g1m;
        }
        // The gather tone must see the group's whole dark coupling along the
        // same direction, or an orthogonal partner would drain the dark level
        // at zero detuning.
        auto aligned = [&](const MatrixXd& cols, const VectorXd& b, cplx& gout) {
            VectorXcd vk = project(cols, c2f_dark);
            gout = dotrc(b, vk);
            return (vk - b.cast<cplx>() * gout).norm() <= 1e-6 * std::max(1.0, vk.norm());
        };
        if (!aligned(gp.cols, cand.b_plus, cand.g3p)) continue;
        if (pair_donor && !aligned(pair_groups[hi].cols, cand.b_minus, cand.g3m)) continue;
        cand.g3 = std::sqrt(std::norm(cand.g3p) + std::norm(cand.g3m));
        if (cand.g3 < 1e-4) continue;
        if (pair_donor &&
            std::abs(std::abs(cand.g3p) - std::abs(cand.g3m)) > 1e-6 * cand.g3)
            continue;
        cand.omega1 = std::abs(lam_d - e);
        cand.omega3 = std::abs(lambda_dark - e);
        if (cand.omega1 < sep_min || cand.omega3 < sep_min ||
            std::abs(cand.omega1 - cand.omega3) < sep_min)
            continue;
        if (pair_donor && !free_phase) {
            // One tone phase must satisfy both mirror gather conditions. The
            // mismatch is schedule-independent, so it can be checked here.
            cplx m1p0 = -kI * std::polar(sin_t1 * x_mag, arg_a);
            cplx m1m0 = -kI * std::polar(sin_t1 * x_mag, arg_b);
            cplx rho0 = std::polar(std::sqrt(w), d0) / (-kI * cand.g3);
            double s3p = lambda_dark > e ? 1.0 : -1.0;
            double s3m = lambda_dark > -e ? 1.0 : -1.0;
            double php = s3p * std::arg(m1p0 / (rho0 * std::conj(cand.g3p)));
            double phm = s3m * std::arg(m1m0 / (rho0 * std::conj(cand.g3m)));
            if (std::abs(wrap_angle(php - phm)) > 1e-6) continue;
        }
        // Every coupled line, with the intended directions explicit in their
        // groups. Unintended lines resonant with either tone kill the
        // candidate; the rest set detunings and leakage.
        bool clean = true;
        cand.delta1 = cand.delta3 = 1e9;
        cand.lines.clear();
        for (std::size_t qi = 0; qi < pair_groups.size() && clean; ++qi) {
            std::vector<std::pair<VectorXd, int>> nvecs;
            if (qi == gi) {
                nvecs.emplace_back(cand.b_plus, 1);
                append_complement(pair_groups[qi].cols, cand.b_plus, nvecs);
            } else if (pair_donor && static_cast<int>(qi) == hi) {
                nvecs.emplace_back(cand.b_minus, 2);
                append_complement(pair_groups[qi].cols, cand.b_minus, nvecs);
            } else {
                for (int c = 0; c < pair_groups[qi].cols.cols(); ++c)
                    nvecs.emplace_back(pair_groups[qi].cols.col(c), 0);
            }
            bool bridge_group = qi == gi || (pair_donor && static_cast<int>(qi) == hi);
            for (const auto& [nv, sp] : nvecs) {
                for (const auto& wm : with_modes) {
                    double g = std::abs(dotrc(nv, wm.cw));
                    if (g < 1e-8) continue;
                    DriveLine line;
                    line.freq = std::abs(wm.energy - pair_groups[qi].energy);
                    line.g = g;
                    line.intended1 = (wm.tag == 1 && sp == 1) || (wm.tag == 2 && sp == 2);
                    line.intended3 = wm.tag == 3 && bridge_group;
                    if (!line.intended1) {
                        double d1 = std::abs(line.freq - cand.omega1);
                        if (d1 < clash_min) {
                            clean = false;
                            break;
                        }
                        cand.delta1 = std::min(cand.delta1, d1);
                    }
                    if (!line.intended3) {
                        double d3 = std::abs(line.freq - cand.omega3);
                        if (d3 < clash_min) {
                            clean = false;
                            break;
                        }
                        cand.delta3 = std::min(cand.delta3, d3);
                    }
                    cand.delta1 = std::min(cand.delta1, line.freq + cand.omega1);
                    cand.delta3 = std::min(cand.delta3, line.freq + cand.omega3);
                    cand.lines.push_back(line);
                }
                if (!clean) break;
            }
        }
        if (!clean) continue;
        cand.score = std::min({cand.g1, cand.g3, cand.delta1, cand.delta3});
        if (cand.score > chosen.score) chosen = cand;
    }
    if (chosen.score <= 0) {
        plan.feasible = false;
        plan.blocker = "no bridge eigenvector with usable couplings and clean resonances";
        return plan;
    }

    if (pair_donor && free_phase) {
        // An unloaded donor pair leaves both loading phases free. Pin the
        // positive side at zero and slide the mirror phase until one gather
        // tone serves both sides. The mismatch below is the same for any
        // schedule length, so it can be solved once here.
        cplx m1p0 = -kI * std::polar(sin_t1 * x_mag, arg_a);
        cplx m1m0 = -kI * std::polar(sin_t1 * x_mag, arg_b);
        cplx rho0 = std::polar(std::sqrt(w), d0) / (-kI * chosen.g3);
        double s3p = lambda_dark > chosen.energy ? 1.0 : -1.0;
        double s3m = lambda_dark > -chosen.energy ? 1.0 : -1.0;
        double php = s3p * std::arg(m1p0 / (rho0 * std::conj(chosen.g3p)));
        double phm = s3m * std::arg(m1m0 / (rho0 * std::conj(chosen.g3m)));
        arg_b = wrap_angle(arg_b + s3m * wrap_angle(php - phm));
    }

    VectorXcd gamma2 = beta;
    gamma2(donor_a) = std::polar(x_mag, arg_a);
    if (pair_donor) gamma2(donor_b) = std::polar(x_mag, arg_b);

    LoadingPlan loading = plan_loading(spec, gamma2, quality / 2);
    double chi = resolve_chi(loading);

    // Detour durations first, so every tone phase can reference the full
    // schedule length.
    double q2 = quality / 2;
    auto tone_eps = [&](double delta) {
        return std::min(0.05 * delta, delta * std::sqrt(q2 / 2.0) / 3.0);
    };
    double eps1 = tone_eps(chosen.delta1);
    double eps3 = tone_eps(chosen.delta3);
    double leak2 = 0.0;
    for (const auto& line : chosen.lines) {
        if (!line.intended1) {
            double r = 2.0 * eps1 * line.g / std::abs(line.freq - chosen.omega1);
            leak2 += r * r;
        }
        double rc1 = 2.0 * eps1 * line.g / (line.freq + chosen.omega1);
        leak2 += rc1 * rc1;
        if (!line.intended3) {
            double r = 2.0 * eps3 * line.g / std::abs(line.freq - chosen.omega3);
            leak2 += r * r;
        }
        double rc3 = 2.0 * eps3 * line.g / (line.freq + chosen.omega3);
        leak2 += rc3 * rc3;
    }
    if (leak2 > q2 && leak2 > 0) {
        double s = std::sqrt(q2 / leak2);
        eps1 *= s;
        eps3 *= s;
        leak2 = q2;
    }
    double tau1 = theta1 / (eps1 * chosen.g1);
    double tau3 = (kPi / 2) / (eps3 * chosen.g3);

    const double flank = 1e-3;
    double t_end = loading.duration + 4 * flank + tau1 + tau3;

    PulseSchedule sched;
    sched.sectors = {0, 1, 2, 3};
    sched.predicted_leakage = loading.leakage + leak2;
    sched.segments = emit_loading(spec, loading, chi, t_end);
    auto free_seg = [&]() {
        PulseSegment s;
        s.kind = SegmentKind::free_evolution;
        s.duration = flank;
        return s;
    };
    sched.segments.push_back(free_seg());
    {
        PulseSegment s;
        s.kind = SegmentKind::inject_catalyst;
        sched.segments.push_back(s);
    }
    sched.segments.push_back(free_seg());

    // Shedding tone: one partial rotation at the donor-bridge splitting. The
    // bridge couplings are positive real by construction, so with tone phase
    // zero each bridge picks up -i sin(theta1) times its donor amplitude.
    cplx chi_f = std::polar(1.0, chi);
    cplx x_a = std::polar(x_mag, arg_a + chi + lam_d * t_end);
    cplx m1p = -kI * sin_t1 * x_a;
    {
        PulseSegment s;
        s.kind = SegmentKind::rabi;
        s.carrier = chosen.omega1;
        s.amplitude = eps1;
        s.phase = 0.0;
        s.duration = tau1;
        sched.segments.push_back(s);
    }

    // Gather tone: the bridge population rotates into the dark family state
    // as one collective lever arm, emptying exactly at a quarter period. The
    // tone phase puts the arriving amplitude on its target value.
    cplx cstar_dark = chi_f * beta_dark * std::polar(1.0, lambda_dark * t_end);
    cplx rho_req = cstar_dark / (-kI * chosen.g3);
    double s3p = lambda_dark > chosen.energy ? 1.0 : -1.0;
    double phi3 = s3p * std::arg(m1p / (rho_req * std::conj(chosen.g3p)));
    if (pair_donor) {
        cplx x_b = std::polar(x_mag, arg_b + chi + lam_m * t_end);
        cplx m1m = -kI * sin_t1 * x_b;
        double s3m = lambda_dark > -chosen.energy ? 1.0 : -1.0;
        cplx want = rho_req * std::polar(1.0, s3m * phi3) * std::conj(chosen.g3m);
        if (std::abs(m1m - want) > 1e-6 * std::max(std::sqrt(w), 1e-9))
            throw std::logic_error("catalysis gather phases diverged after candidate checks");
    }
    {
        PulseSegment s;
        s.kind = SegmentKind::rabi;
        s.carrier = chosen.omega3;
        s.amplitude = eps3;
        s.phase = wrap_angle(phi3);
        s.duration = tau3;
        sched.segments.push_back(s);
    }
    sched.segments.push_back(free_seg());
    {
        PulseSegment s;
        s.kind = SegmentKind::extract_catalyst;
        sched.segments.push_back(s);
    }
    sched.segments.push_back(free_seg());

    plan.feasible = true;
    plan.schedule = sched;
    return plan;
}

}  // namespace spinnet
