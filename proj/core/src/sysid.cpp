#include "spinnet/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "spinnet/bounds.hpp"
#include "spinnet/operators.hpp"
#include "spinnet/pulses.hpp"

namespace spinnet {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXcd;
using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Peak lines with overlap below this are treated as unidentifiable noise.
constexpr double kAlphaFloor = 0.02;

SurvivalRecord record_from(const MatrixXd& h, double epsilon, double t_max, double dt,
                           int shots, std::uint64_t seed) {
    if (dt <= 0 || t_max <= 0)
        throw validation_error("dt", "duration and step must be positive");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    double radius = std::max(std::abs(es.eigenvalues()(0)),
                             std::abs(es.eigenvalues()(h.rows() - 1)));
    // The record oscillates at eigenvalue differences, up to twice the
    // spectral radius; the sampling rate must stay above twice that.
    if (kPi / dt <= 2.0 * radius)
        throw validation_error("dt", "step violates the sampling limit for this spectrum");

    VectorXd w = es.eigenvectors().row(0).transpose().cwiseAbs2();
    SurvivalRecord rec;
    rec.epsilon = epsilon;
    rec.t_max = t_max;
    rec.dt = dt;
    int n_samples = static_cast<int>(std::floor(t_max / dt + 1e-9)) + 1;
    rec.times.resize(n_samples);
    rec.values.resize(n_samples);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_samples; ++i) {
        double t = i * dt;
        cplx amp = 0.0;
        for (int k = 0; k < w.size(); ++k)
            amp += w(k) * std::polar(1.0, -es.eigenvalues()(k) * t);
        double p = std::min(1.0, std::norm(amp));
        if (shots > 0) {
            std::binomial_distribution<int> draw(shots, p);
            p = static_cast<double>(draw(rng)) / shots;
        }
        rec.times[i] = t;
        rec.values[i] = p;
    }
    return rec;
}

struct Peak {
    double omega = 0.0;
    double a = 0.0, b = 0.0;  // cosine and sine quadratures of the fitted line
    double d = 0.0;           // constant absorbed by the fit
};

double amp_of(const Peak& p) { return std::hypot(p.a, p.b); }

}  // namespace

SurvivalRecord survival_record(const SpinNetwork& net, double epsilon, double t_max, double dt,
                               int shots, std::uint64_t seed) {
    require_pendant_control(net);
    OperatorMatrix a = restrict_sector(net, Ham::drift, 1);
    OperatorMatrix c = restrict_sector(net, Ham::control, 1);
    MatrixXd h = a.entries.real() + epsilon * c.entries.real();
    return record_from(h, epsilon, t_max, dt, shots, seed);
}

SurvivalRecord survival_record(const Eigen::MatrixXd& h, double epsilon, double t_max,
                               double dt, int shots, std::uint64_t seed) {
    if (h.rows() != h.cols() || h.rows() < 2)
        throw validation_error("hamiltonian", "expected a square matrix of size >= 2");
    return record_from(h, epsilon, t_max, dt, shots, seed);
}

IdentificationResult estimate_spectrum(const SurvivalRecord& record) {
    int n = static_cast<int>(record.values.size());
    if (n < 16) throw validation_error("record", "too few samples");
    double eps = record.epsilon;
    if (eps <= 0) throw validation_error("record", "no resolvable peaks: probe amplitude is "
                                                   "zero, the control spin never moves");

    // One cosine is extracted at a time: locate the strongest line in a
    // Hann-windowed spectrum, fit its quadratures on the raw series by least
    // squares, subtract in the time domain and look again. Subtracting the
    // line removes its window sidelobes with it; those of the control-level
    // line would otherwise bury every eigenvalue line, which sits four to
    // five orders of magnitude lower.
    double mean = 0.0;
    for (double v : record.values) mean += v;
    mean /= n;
    std::vector<double> resid(record.values);
    for (double& v : resid) v -= mean;
    std::vector<double> window(n);
    for (int i = 0; i < n; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (n - 1)));
    int nfft = 1;
    while (nfft < 4 * n) nfft *= 2;
    int half = nfft / 2;
    double bin = 2.0 * kPi / (nfft * record.dt);

    Eigen::FFT<double> fft;
    std::vector<double> buf(nfft);
    std::vector<cplx> sp;
    std::vector<double> mag(half);
    double wsum = 0.0;
    for (double w : window) wsum += w;
    std::vector<double> scratch;
    std::vector<char> blocked(half, 0);
    int block_guard = std::max(2, 2 * nfft / n);
    std::vector<Peak> peaks;

    // The fit carries a free constant: every subtracted cosine has a nonzero
    // record mean, and the leftover offset would otherwise leak through the
    // window skirt into the low bins and drown weak lines. Interpolation
    // also leaves a frequency error around a bin percent; on a strong line
    // the mismatch ramp dwarfs the weak lines, so the frequency is polished
    // against the raw series before subtracting.
    auto fit_line = [&](double omega0) {
        Peak p;
        p.omega = omega0;
        auto solve_quadratures = [&]() {
            double sc = 0, ssn = 0, cc = 0, cs = 0, ss = 0, r0 = 0, rc = 0, rs = 0;
            for (int i = 0; i < n; ++i) {
                double t = record.times[i];
                double c = std::cos(p.omega * t), s = std::sin(p.omega * t);
                sc += c;
                ssn += s;
                cc += c * c;
                cs += c * s;
                ss += s * s;
                r0 += resid[i];
                rc += resid[i] * c;
                rs += resid[i] * s;
            }
            Eigen::Matrix3d gram;
            Eigen::Vector3d rhs;
            gram << double(n), sc, ssn, sc, cc, cs, ssn, cs, ss;
            rhs << r0, rc, rs;
            Eigen::Vector3d sol = gram.ldlt().solve(rhs);
            p.d = sol(0);
            p.a = sol(1);
            p.b = sol(2);
        };
        solve_quadratures();
        for (int gn = 0; gn < 2; ++gn) {
            double jj = 0, rj = 0;
            for (int i = 0; i < n; ++i) {
                double t = record.times[i];
                double c = std::cos(p.omega * t), s = std::sin(p.omega * t);
                double j = t * (p.b * c - p.a * s);
                jj += j * j;
                rj += (resid[i] - (p.d + p.a * c + p.b * s)) * j;
            }
            if (jj <= 0) break;
            double step = rj / jj;
            if (p.omega + step <= 0) break;
            p.omega += step;
            solve_quadratures();
        }
        return p;
    };
    auto subtract = [&](const Peak& p, double sign) {
        for (int i = 0; i < n; ++i) {
            double t = record.times[i];
            resid[i] -= sign * (p.d + p.a * std::cos(p.omega * t) + p.b * std::sin(p.omega * t));
        }
    };
    // Lines below a quarter of the smallest reportable overlap are culled at
    // the end anyway; chasing them just burns rounds on noise.
    auto amp_floor = [&](double om) {
        double base = kAlphaFloor * eps / std::max(om, 2.5 * eps);
        return 0.5 * base * base;
    };
    // A one-line fit is biased by every other line through rectangular-window
    // crosstalk, around a percent between the two straddle lines of one
    // eigenvalue. Left in place the bias shows up as a comb of phantom lines
    // at a few percent of the real ones, so each extraction is followed by a
    // cyclic refit of all lines against the residual with the line itself
    // restored, which prunes the bias geometrically. A line whose refit falls
    // under the floor was a scrap of a neighbour; it goes back to the residual.
    auto refine_all = [&](int cycles) {
        for (int cycle = 0; cycle < cycles; ++cycle)
            for (std::size_t k = 0; k < peaks.size();) {
                subtract(peaks[k], -1.0);
                Peak r = fit_line(peaks[k].omega);
                if (std::hypot(r.a, r.b) < amp_floor(r.omega)) {
                    peaks.erase(peaks.begin() + k);
                    continue;
                }
                subtract(r, 1.0);
                peaks[k] = r;
                ++k;
            }
    };

    for (int round = 0; round < 96; ++round) {
        if (peaks.size() >= 64) break;
        std::fill(buf.begin(), buf.end(), 0.0);
        for (int i = 0; i < n; ++i) buf[i] = resid[i] * window[i];
        fft.fwd(sp, buf);
        for (int i = 0; i < half; ++i) mag[i] = std::abs(sp[i]);
        int imax = -1;
        for (int i = 2; i + 1 < half; ++i)
            if (!blocked[i] && (imax < 0 || mag[i] > mag[imax])) imax = i;
        if (imax < 0) break;
        scratch.assign(mag.begin() + 1, mag.end());
        std::nth_element(scratch.begin(), scratch.begin() + scratch.size() / 2, scratch.end());
        double noise = scratch[scratch.size() / 2];
        if (mag[imax] <= 5.0 * noise) break;
        if (mag[imax] <= 0.5 * wsum * amp_floor(kPi / record.dt)) break;
        double denom = mag[imax - 1] - 2.0 * mag[imax] + mag[imax + 1];
        double delta = denom != 0.0 ? 0.5 * (mag[imax - 1] - mag[imax + 1]) / denom : 0.0;
        delta = std::clamp(delta, -0.5, 0.5);
        Peak p = fit_line((imax + delta) * bin);
        // A feature the fit cannot explain is not a line, and one under the
        // reporting floor is not worth a refit cycle; skip them for good.
        if (std::hypot(p.a, p.b) * 0.5 * wsum < 0.1 * mag[imax] ||
            std::hypot(p.a, p.b) < amp_floor(p.omega)) {
            for (int i = std::max(0, imax - block_guard);
                 i < std::min(half, imax + block_guard + 1); ++i)
                blocked[i] = 1;
            continue;
        }
        subtract(p, 1.0);
        peaks.push_back(p);
        refine_all(1);
    }
    refine_all(2);
    if (peaks.empty())
        throw validation_error("record", "no resolvable peaks: lengthen the record or raise "
                                         "the probe amplitude");
    // Refits of an imperfectly subtracted line land within a resolution cell
    // of it; their quadratures add coherently.
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& l, const Peak& r) { return l.omega < r.omega; });
    double merge_tol = 2.0 * kPi / record.times.back();
    std::vector<Peak> merged;
    for (const auto& p : peaks) {
        if (!merged.empty() && p.omega - merged.back().omega < merge_tol) {
            Peak& q = merged.back();
            double wq = amp_of(q), wp = amp_of(p);
            if (wq + wp > 0) q.omega = (q.omega * wq + p.omega * wp) / (wq + wp);
            q.a += p.a;
            q.b += p.b;
        } else {
            merged.push_back(p);
        }
    }

    IdentificationResult out;
    out.resolution = 2.0 * kPi / record.times.back();

    // A dominant line well below any plausible eigenvalue is the carrier: the
    // control level split +-eps*alpha0 by a zero-eigenvalue bright state.
    // Every other level then shows up twice, straddling its eigenvalue at
    // +-carrier/2.
    double carrier = 0.0;
    std::size_t carrier_idx = merged.size();
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (merged[i].omega >= 2.5 * eps) continue;
        if (carrier_idx == merged.size() || amp_of(merged[i]) > amp_of(merged[carrier_idx]))
            carrier_idx = i;
    }
    std::vector<bool> used(merged.size(), false);
    if (carrier_idx < merged.size()) {
        carrier = merged[carrier_idx].omega;
        used[carrier_idx] = true;
        SpectralEstimate zero;
        zero.lambda_hat = 0.0;
        zero.alpha_hat = carrier / (2.0 * eps);
        zero.multiplicity = 1;
        zero.sign_resolved = true;  // a zero has no sign
        out.estimates.push_back(zero);
    }
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (used[i]) continue;
        if (carrier > 0) {
            // The straddle twins sit exactly one carrier apart; take the best
            // match, a leftover scrap can sit closer to the front of the list.
            std::size_t partner = merged.size();
            double miss = 2 * merge_tol;
            for (std::size_t j = i + 1; j < merged.size(); ++j) {
                if (used[j]) continue;
                double m = std::abs(merged[j].omega - merged[i].omega - carrier);
                if (m < miss) {
                    miss = m;
                    partner = j;
                }
            }
            if (partner < merged.size()) {
                used[i] = used[partner] = true;
                double lam = 0.5 * (merged[i].omega + merged[partner].omega);
                double amp = 0.5 * (amp_of(merged[i]) + amp_of(merged[partner]));
                SpectralEstimate est;
                est.lambda_hat = lam;
                // Each straddle line carries w = (eps*alpha/lambda)^2 from one
                // mirror member through each carrier branch, 2w in total.
                est.alpha_hat = lam / eps * std::sqrt(amp / 2.0);
                est.multiplicity = 2;
                if (est.alpha_hat < kAlphaFloor) continue;
                out.estimates.push_back(est);
                continue;
            }
        }
        used[i] = true;
        SpectralEstimate est;
        est.lambda_hat = merged[i].omega;
        // Lone line against an unsplit control level: amplitude 2w.
        est.alpha_hat = merged[i].omega / eps * std::sqrt(amp_of(merged[i]) / 2.0);
        est.multiplicity = 1;
        if (est.alpha_hat < kAlphaFloor) continue;
        out.estimates.push_back(est);
    }
    if (out.estimates.empty())
        throw validation_error("record", "no resolvable peaks above the overlap floor");
    return out;
}

IdentificationResult resolve_signs(const SpinNetwork& net, const IdentificationResult& estimates,
                                   double epsilon) {
    IdentificationResult out = estimates;
    require_pendant_control(net);
    int nb = net.n;

    // Probe amplitude for the scans: clear of every inter-line spacing.
    double dmin = std::numeric_limits<double>::infinity();
    const auto& es = out.estimates;
    for (std::size_t i = 0; i < es.size(); ++i) {
        double li = std::abs(es[i].lambda_hat);
        if (li > 1e-9) dmin = std::min(dmin, li);
        for (std::size_t j = i + 1; j < es.size(); ++j)
            dmin = std::min(dmin, std::abs(li - std::abs(es[j].lambda_hat)));
    }
    if (!std::isfinite(dmin) || dmin < 1e-9)
        return out;  // nothing scannable
    double eps_scan = std::min(epsilon > 0 ? epsilon : 0.05 * dmin, 0.05 * dmin);

    ExcitationBasis basis = sector_basis(nb, {0, 1});
    int vac = basis.index_of({});
    int one = basis.index_of({1});

    int unresolved_pairs = 0;
    int resolved_count = 0;
    for (auto& est : out.estimates) {
        if (std::abs(est.lambda_hat) < 1e-9) {
            est.sign_resolved = true;
            continue;
        }
        double lam = std::abs(est.lambda_hat);
        double alpha = std::max(est.alpha_hat, 1e-3);
        double tau = (kPi / 2.0) / (eps_scan * alpha);
        // Return pulse start such that the dwell phase sits at a quarter turn.
        double k = std::ceil((tau * lam - kPi / 2.0) / (2.0 * kPi));
        double t2 = (kPi / 2.0 + 2.0 * kPi * std::max(0.0, k)) / lam;
        if (t2 < tau) t2 += 2.0 * kPi / lam;

        const double phis[5] = {-0.2, -0.1, 0.0, 0.1, 0.2};
        double sum_xy = 0.0, sum_xx = 0.0;
        for (double phi : phis) {
            PulseSchedule sched;
            sched.sectors = {0, 1};
            PulseSegment go;
            go.kind = SegmentKind::rabi;
            go.carrier = lam;
            go.amplitude = eps_scan;
            go.phase = 0.0;
            go.duration = tau;
            PulseSegment wait;
            wait.kind = SegmentKind::free_evolution;
            wait.duration = t2 - tau;
            PulseSegment back = go;
            back.phase = -lam * t2;  // segment-local zero phase at its start
            sched.segments = {go, wait, back};

            VectorXcd psi0 = VectorXcd::Zero(basis.dim());
            psi0(vac) = 1.0 / std::sqrt(2.0);
            psi0(one) = std::polar(1.0 / std::sqrt(2.0), phi);
            SimulationResult r = simulate(net, sched, psi0, 0.05);
            cplx overlap = (r.final_state(vac) + r.final_state(one)) / std::sqrt(2.0);
            double p = std::norm(overlap);
            sum_xy += phi * p;
            sum_xx += phi * phi;
        }
        double slope = sum_xy / sum_xx;
        if (std::abs(slope) > 0.1) {
            // A level above the control level advances the superposition
            // phase; the echo then gains from a negative preparation phase.
            double sign = slope > 0 ? -1.0 : 1.0;
            est.lambda_hat = sign * lam;
            est.sign_resolved = true;
            ++resolved_count;
            if (est.multiplicity == 2) {
                // The scan only shifts when a lone level hides behind the
                // line; restore the single-level overlap reading.
                est.multiplicity = 1;
                est.alpha_hat *= std::sqrt(2.0);
            }
        } else {
            est.sign_resolved = false;
            if (est.multiplicity == 1) {
                // Flat scan: the line is really a mirror pair sharing it.
                est.multiplicity = 2;
                est.alpha_hat /= std::sqrt(2.0);
            }
            ++unresolved_pairs;
        }
    }
    out.aso_symmetric = unresolved_pairs > 0 && resolved_count == 0;
    return out;
}

}  // namespace spinnet
