#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinnet/bounds.hpp"
#include "spinnet/network.hpp"

namespace spinnet {

enum class SegmentKind { rabi, raman, free_evolution, inject_catalyst, extract_catalyst };

// One piecewise element of a control waveform. Rabi segments drive
// f(t) = 2*amplitude*cos(carrier*t + phase); raman segments add a second tone.
// Phases are referenced to the global schedule clock t = 0, which keeps the
// interaction-picture rotation of each segment independent of its start time.
struct PulseSegment {
    SegmentKind kind = SegmentKind::free_evolution;
    double duration = 0.0;
    double amplitude = 0.0;
    double carrier = 0.0;
    double phase = 0.0;
    double amplitude2 = 0.0;
    double carrier2 = 0.0;
    double phase2 = 0.0;
};

struct PulseSchedule {
    std::vector<PulseSegment> segments;
    std::vector<int> sectors{1};  // excitation sectors the evolution spans
    double predicted_leakage = 0.0;
    double total_duration() const;
};

struct TrajectorySample {
    double time = 0.0;
    Eigen::VectorXd populations;
};

struct SimulationResult {
    Eigen::VectorXcd final_state;
    double fidelity = 0.0;
    std::vector<TrajectorySample> trajectory;
    std::optional<FidelityBound> bound;
    // Cross-sector targets (vacuum plus excited components) are scored after
    // aligning one relative phase; the applied angle is reported, not baked in.
    bool phase_corrected = false;
    double correction_phase = 0.0;
};

struct CatalysisPlan {
    bool feasible = false;
    PulseSchedule schedule;
    std::string blocker;
    double catalytic_bound = 0.0;
    FidelityBound in_sector;
};

// Sequential resonant Rabi segments loading the optimal coefficients
// gamma_n = beta_n / sqrt(F) of the fidelity-bound construction. The target is
// a single-excitation amplitude vector; leakage is held near `quality`.
PulseSchedule synthesize_transfer(const SpectralData& spec, const Eigen::VectorXcd& target,
                                  double quality);

// Same synthesis, but the caller supplies interaction-picture level
// coefficients directly (entry 0 is the control level and must be zero).
// Norm below one leaves the remainder parked on the control spin.
PulseSchedule synthesize_loading(const SpectralData& spec, const Eigen::VectorXcd& coefficients,
                                 double quality);

// Propagate i d/dt psi = (H0 + f(t) Hc) psi across the schedule with exact
// exponentials of the midpoint-frozen Hamiltonian on capped sub-steps.
// `initial` and `target` are either full direct-sum vectors over
// schedule.sectors or single-excitation n-vectors.
SimulationResult simulate(const SpinNetwork& net, const PulseSchedule& schedule,
                          const Eigen::VectorXcd& initial, double dt,
                          const std::optional<Eigen::VectorXcd>& target = std::nullopt,
                          const std::optional<FidelityBound>& bound = std::nullopt);

// Three-phase catalytic protocol: load an intermediate bright-only state,
// inject a second excitation on spin 1, steer the surplus through a
// two-excitation bridge eigenvector into the weakly dark direction, extract.
CatalysisPlan plan_catalysis(const SpinNetwork& net, const Eigen::VectorXcd& target,
                             double quality);

}  // namespace spinnet
