#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qkdvault/adversary.hpp"
#include "qkdvault/bb84.hpp"

namespace qkdvault {

// Deterministic experiment harness. Every trial derives its own generator
// from (seed, grid point, trial index), so the OpenMP engine and the serial
// reference produce byte-identical tables (scalability wall-clock columns
// excepted) and the parallel schedule never shows in the output.
struct ExperimentSpec {
    enum class Kind { DetectionSweep, QberSweep, SiftingYield, Scalability, SessionDemo };

    Kind kind = Kind::DetectionSweep;
    size_t trials = 1;
    uint64_t seed = 0;
    size_t photon_count = 2048; // per-session N where the grid does not vary it

    std::vector<size_t> sample_sizes;  // detection grid
    std::vector<double> fractions;     // detection + qber grids
    std::vector<double> flips;         // qber grid
    std::vector<size_t> photon_counts; // sifting yield grid
    std::vector<size_t> user_counts;   // scalability grid

    // Detection experiments abort on any sampled error: the sampled-error
    // detection law 1-(1-q)^k presumes it. Strictly-positive threshold below
    // the smallest observable positive estimate.
    double detection_threshold = 0.01;

    void validate() const;
};

ExperimentSpec::Kind kind_from_name(const std::string& name);
const char* kind_name(ExperimentSpec::Kind kind);

struct SweepTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const;
};

SweepTable run_experiment(const ExperimentSpec& spec, bool parallel);

void write_csv_file(const std::filesystem::path& path, const SweepTable& table);

// 95% confidence half-widths.
double ci_mean(const std::vector<double>& samples);
double ci_rate(double rate, size_t trials);

} // namespace qkdvault
