#include <benchmark/benchmark.h>

#include <complex>

#include <Eigen/Dense>

#include "spinnet/bounds.hpp"
#include "spinnet/fixtures.hpp"
#include "spinnet/operators.hpp"
#include "spinnet/pulses.hpp"
#include "spinnet/symmetries.hpp"
#include "spinnet/sysid.hpp"

using namespace spinnet;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

std::vector<MatrixXcd> sector_pair(const SpinNetwork& net) {
    return {restrict_sector(net, Ham::drift, 1).entries,
            restrict_sector(net, Ham::control, 1).entries};
}

void bm_restrict_two_excitations(benchmark::State& state) {
    SpinNetwork net = fixture_network("fig2");
    for (auto _ : state)
        benchmark::DoNotOptimize(restrict_sector(net, Ham::drift, 2));
}
BENCHMARK(bm_restrict_two_excitations);

void bm_find_csos(benchmark::State& state) {
    auto hams = sector_pair(fixture_network("fig1"));
    for (auto _ : state) benchmark::DoNotOptimize(find_csos(hams));
}
BENCHMARK(bm_find_csos);

void bm_max_fidelity(benchmark::State& state) {
    SpinNetwork net = fixture_network("fig2");
    VectorXcd target = VectorXcd::Zero(7);
    target(2) = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(max_fidelity(net, target));
}
BENCHMARK(bm_max_fidelity);

void bm_simulate_short_drive(benchmark::State& state) {
    SpinNetwork net = fixture_network("fig1");
    PulseSchedule sched;
    sched.sectors = {1};
    PulseSegment seg;
    seg.kind = SegmentKind::rabi;
    seg.carrier = 1.1756;
    seg.amplitude = 0.02;
    seg.duration = 50.0;
    sched.segments = {seg};
    VectorXcd init = VectorXcd::Unit(7, 0);
    for (auto _ : state) benchmark::DoNotOptimize(simulate(net, sched, init, 0.05));
}
BENCHMARK(bm_simulate_short_drive);

void bm_estimate_spectrum(benchmark::State& state) {
    SurvivalRecord rec = survival_record(fixture_network("triangle"), 0.01, 500.0, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_spectrum(rec));
}
BENCHMARK(bm_estimate_spectrum);

}  // namespace

BENCHMARK_MAIN();
