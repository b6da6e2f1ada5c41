#include <chrono>
#include <cstdio>

#include <omp.h>

#include "qkdvault/experiments.hpp"

// Times the serial reference engine against the OpenMP engine on the same
// experiment grids and checks that both produce identical tables.

namespace {

using namespace qkdvault;

double run_ms(const ExperimentSpec& spec, bool parallel, SweepTable& out) {
    auto start = std::chrono::steady_clock::now();
    out = run_experiment(spec, parallel);
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

void bench(const char* label, const ExperimentSpec& spec) {
    SweepTable serial_table, parallel_table;
    double serial_ms = run_ms(spec, false, serial_table);
    double parallel_ms = run_ms(spec, true, parallel_table);
    bool identical = serial_table.to_csv() == parallel_table.to_csv();
    std::printf("%-12s %6zu trials  serial %9.1f ms  openmp %9.1f ms  speedup %5.2fx  %s\n",
                label, spec.trials, serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "identical" : "MISMATCH");
}

} // namespace

int main() {
    std::printf("threads available: %d\n", omp_get_max_threads());

    ExperimentSpec detection;
    detection.kind = ExperimentSpec::Kind::DetectionSweep;
    detection.trials = 2000;
    detection.seed = 11;
    detection.photon_count = 512;
    detection.sample_sizes = {19};
    detection.fractions = {0.5, 1.0};
    bench("detection", detection);

    ExperimentSpec qber;
    qber.kind = ExperimentSpec::Kind::QberSweep;
    qber.trials = 400;
    qber.seed = 12;
    qber.photon_count = 4096;
    qber.fractions = {0.0, 0.5, 1.0};
    qber.flips = {0.0, 0.02};
    bench("qber", qber);

    ExperimentSpec yield;
    yield.kind = ExperimentSpec::Kind::SiftingYield;
    yield.trials = 200;
    yield.seed = 13;
    yield.photon_counts = {10000, 20000};
    bench("sifting", yield);

    return 0;
}
