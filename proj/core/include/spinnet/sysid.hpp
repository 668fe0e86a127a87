#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spinnet/network.hpp"

namespace spinnet {

// Survival probability p(t) = |<1| e^{-iHt} |1>|^2 of the control spin under
// H = A + eps*C, sampled on a uniform grid.
struct SurvivalRecord {
    double epsilon = 0.0;
    double t_max = 0.0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> values;
};

// One recovered level. lambda_hat is reported unsigned (>= 0) until a sign
// scan resolves it; multiplicity 2 marks a line attributed to a mirror pair
// +-lambda, whose members cannot be told apart from the record alone.
struct SpectralEstimate {
    double lambda_hat = 0.0;
    double alpha_hat = 0.0;
    int multiplicity = 1;
    bool sign_resolved = false;
};

struct IdentificationResult {
    std::vector<SpectralEstimate> estimates;
    double resolution = 0.0;  // 2*pi / T
    bool aso_symmetric = false;
};

// Exact record via eigendecomposition; shots > 0 replaces each sample by a
// binomial frequency with that many draws.
SurvivalRecord survival_record(const SpinNetwork& net, double epsilon, double t_max, double dt,
                               int shots = 0, std::uint64_t seed = 0);

// Same, for a caller-supplied single-excitation Hamiltonian whose first
// coordinate is the control spin. The probe coupling must already be in h.
SurvivalRecord survival_record(const Eigen::MatrixXd& h, double epsilon, double t_max,
                               double dt, int shots = 0, std::uint64_t seed = 0);

// Fourier peak analysis of the record: recovers unsigned eigenvalues of the
// network part and their control overlaps.
IdentificationResult estimate_spectrum(const SurvivalRecord& record);

// Phase-scan interferometry against the black-box network: resolves the sign
// of each estimated level where possible. A mirror-symmetric spectrum leaves
// every scan flat; that outcome is reported via aso_symmetric instead of
// signs. Scans double as a multiplicity check and adjust alpha_hat when a
// line turns out to be a lone level or an unresolved pair.
IdentificationResult resolve_signs(const SpinNetwork& net, const IdentificationResult& estimates,
                                   double epsilon);

}  // namespace spinnet
