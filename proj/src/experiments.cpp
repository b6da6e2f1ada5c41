#include "qkdvault/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <omp.h>

#include "qkdvault/errors.hpp"

namespace qkdvault {

namespace {

std::string fmt(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

uint64_t trial_seed(uint64_t base, size_t point, size_t trial) {
    return Rng::derive(Rng::derive(base, point + 1), trial + 1);
}

// Runs `body(trial)` for every trial either sequentially or under OpenMP.
// Exceptions are captured and rethrown after the loop; trial bodies write
// only to their own slots.
template <typename Body>
void for_each_trial(size_t trials, bool parallel, Body&& body) {
    std::exception_ptr failure = nullptr;
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long t = 0; t < static_cast<long>(trials); ++t) {
            try {
                body(static_cast<size_t>(t));
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
    } else {
        for (size_t t = 0; t < trials; ++t) {
            try {
                body(t);
            } catch (...) {
                if (!failure) failure = std::current_exception();
                break;
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
}

SweepTable detection_sweep(const ExperimentSpec& spec, bool parallel) {
    SweepTable table;
    table.columns = {"sample_size", "fraction", "detect_rate", "ci"};
    size_t point = 0;
    for (size_t sample : spec.sample_sizes) {
        for (double fraction : spec.fractions) {
            std::vector<uint8_t> aborted(spec.trials, 0);
            for_each_trial(spec.trials, parallel, [&](size_t t) {
                SessionParams params;
                params.photon_count = spec.photon_count;
                params.sample_size = sample;
                params.qber_threshold = spec.detection_threshold;
                params.seed = trial_seed(spec.seed, point, t);
                ChannelConfig channel(0.0, 0.0, 0);
                auto result =
                    run_session(params, channel, AdversaryStrategy::intercept_resend(fraction));
                aborted[t] = result.status != SessionStatus::Established ? 1 : 0;
            });
            double rate = spec.trials == 0
                              ? 0.0
                              : std::accumulate(aborted.begin(), aborted.end(), 0.0) /
                                    static_cast<double>(spec.trials);
            table.rows.push_back({std::to_string(sample), fmt(fraction), fmt(rate),
                                  fmt(ci_rate(rate, spec.trials))});
            ++point;
        }
    }
    return table;
}

SweepTable qber_sweep(const ExperimentSpec& spec, bool parallel) {
    SweepTable table;
    table.columns = {"fraction", "flip", "mean_qber", "ci"};
    size_t point = 0;
    for (double fraction : spec.fractions) {
        for (double flip : spec.flips) {
            std::vector<double> qbers(spec.trials, 0.0);
            for_each_trial(spec.trials, parallel, [&](size_t t) {
                SessionParams params;
                params.photon_count = spec.photon_count;
                params.seed = trial_seed(spec.seed, point, t);
                ChannelConfig channel(flip, 0.0, 0);
                auto raw =
                    generate_raw(params, channel, AdversaryStrategy::intercept_resend(fraction));
                auto sifted = sift(raw.alice, raw.bob, raw.record);
                size_t n = sifted.alice_sifted.size();
                // True QBER over the full sifted strings, not a sample.
                qbers[t] = n == 0 ? 0.0
                                  : static_cast<double>(
                                        sifted.alice_sifted.hamming_distance(sifted.bob_sifted)) /
                                        static_cast<double>(n);
            });
            double mean = qbers.empty()
                              ? 0.0
                              : std::accumulate(qbers.begin(), qbers.end(), 0.0) /
                                    static_cast<double>(qbers.size());
            table.rows.push_back(
                {fmt(fraction), fmt(flip), fmt(mean), fmt(ci_mean(qbers))});
            ++point;
        }
    }
    return table;
}

SweepTable sifting_yield(const ExperimentSpec& spec, bool parallel) {
    SweepTable table;
    table.columns = {"n", "yield", "ci"};
    size_t point = 0;
    for (size_t n : spec.photon_counts) {
        std::vector<double> yields(spec.trials, 0.0);
        for_each_trial(spec.trials, parallel, [&](size_t t) {
            SessionParams params;
            params.photon_count = n;
            params.seed = trial_seed(spec.seed, point, t);
            ChannelConfig channel(0.0, 0.0, 0);
            auto raw = generate_raw(params, channel, AdversaryStrategy::none());
            auto sifted = sift(raw.alice, raw.bob, raw.record);
            yields[t] = static_cast<double>(sifted.alice_sifted.size()) / static_cast<double>(n);
        });
        double mean = yields.empty() ? 0.0
                                     : std::accumulate(yields.begin(), yields.end(), 0.0) /
                                           static_cast<double>(yields.size());
        table.rows.push_back({std::to_string(n), fmt(mean), fmt(ci_mean(yields))});
        ++point;
    }
    return table;
}

SweepTable scalability(const ExperimentSpec& spec, bool parallel) {
    SweepTable table;
    table.columns = {"concurrent_users", "mean_session_wall_time", "ci"};
    size_t point = 0;
    for (size_t users : spec.user_counts) {
        std::vector<double> wall_ms;
        wall_ms.reserve(users * spec.trials);
        for (size_t batch = 0; batch < spec.trials; ++batch) {
            std::vector<double> batch_ms(users, 0.0);
            auto start = std::chrono::steady_clock::now();
            // Each simulated user's time runs from batch start to the end of
            // their own session, queue wait included, which is what a user
            // sees when many sessions contend for the same hardware.
            for_each_trial(users, parallel, [&](size_t u) {
                SessionParams params;
                params.photon_count = spec.photon_count;
                params.seed = trial_seed(spec.seed, point * 1315423911u + batch, u);
                ChannelConfig channel(0.0, 0.0, 0);
                auto result = run_session(params, channel, AdversaryStrategy::none());
                (void)result;
                batch_ms[u] = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
            });
            wall_ms.insert(wall_ms.end(), batch_ms.begin(), batch_ms.end());
        }
        double mean = wall_ms.empty() ? 0.0
                                      : std::accumulate(wall_ms.begin(), wall_ms.end(), 0.0) /
                                            static_cast<double>(wall_ms.size());
        table.rows.push_back({std::to_string(users), fmt(mean), fmt(ci_mean(wall_ms))});
        ++point;
    }
    return table;
}

SweepTable session_demo(const ExperimentSpec& spec, bool parallel) {
    SweepTable table;
    table.columns = {"trial", "seed", "status", "sifted_len", "qber", "final_len"};
    std::vector<QkdSessionResult> results(spec.trials);
    std::vector<uint64_t> seeds(spec.trials, 0);
    for_each_trial(spec.trials, parallel, [&](size_t t) {
        SessionParams params;
        params.photon_count = spec.photon_count;
        params.seed = trial_seed(spec.seed, 0, t);
        seeds[t] = params.seed;
        ChannelConfig channel(0.0, 0.0, 0);
        results[t] = run_session(params, channel, AdversaryStrategy::none());
    });
    for (size_t t = 0; t < spec.trials; ++t) {
        const auto& r = results[t];
        table.rows.push_back({std::to_string(t), std::to_string(seeds[t]),
                              status_name(r.status), std::to_string(r.sifted_length),
                              fmt(r.estimated_qber),
                              std::to_string(r.final_key ? r.final_key->size() : 0)});
    }
    return table;
}

} // namespace

void ExperimentSpec::validate() const {
    if (trials < 1) raise(Errc::InvalidArgument, "trials must be at least 1");
    switch (kind) {
        case Kind::DetectionSweep:
            if (sample_sizes.empty() || fractions.empty()) {
                raise(Errc::InvalidArgument, "detection sweep needs sample_sizes and fractions");
            }
            break;
        case Kind::QberSweep:
            if (fractions.empty() || flips.empty()) {
                raise(Errc::InvalidArgument, "qber sweep needs fractions and flips");
            }
            break;
        case Kind::SiftingYield:
            if (photon_counts.empty()) {
                raise(Errc::InvalidArgument, "sifting yield needs photon counts");
            }
            break;
        case Kind::Scalability:
            if (user_counts.empty()) {
                raise(Errc::InvalidArgument, "scalability needs user counts");
            }
            break;
        case Kind::SessionDemo:
            break;
    }
}

ExperimentSpec::Kind kind_from_name(const std::string& name) {
    if (name == "detection") return ExperimentSpec::Kind::DetectionSweep;
    if (name == "qber") return ExperimentSpec::Kind::QberSweep;
    if (name == "sifting") return ExperimentSpec::Kind::SiftingYield;
    if (name == "scalability") return ExperimentSpec::Kind::Scalability;
    if (name == "session-demo") return ExperimentSpec::Kind::SessionDemo;
    raise(Errc::InvalidArgument, "unknown experiment kind: " + name);
}

const char* kind_name(ExperimentSpec::Kind kind) {
    switch (kind) {
        case ExperimentSpec::Kind::DetectionSweep: return "detection";
        case ExperimentSpec::Kind::QberSweep: return "qber";
        case ExperimentSpec::Kind::SiftingYield: return "sifting";
        case ExperimentSpec::Kind::Scalability: return "scalability";
        case ExperimentSpec::Kind::SessionDemo: return "session-demo";
    }
    return "unknown";
}

std::string SweepTable::to_csv() const {
    std::string out;
    for (size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += row[c];
        }
        out += '\n';
    }
    return out;
}

SweepTable run_experiment(const ExperimentSpec& spec, bool parallel) {
    spec.validate();
    switch (spec.kind) {
        case ExperimentSpec::Kind::DetectionSweep: return detection_sweep(spec, parallel);
        case ExperimentSpec::Kind::QberSweep: return qber_sweep(spec, parallel);
        case ExperimentSpec::Kind::SiftingYield: return sifting_yield(spec, parallel);
        case ExperimentSpec::Kind::Scalability: return scalability(spec, parallel);
        case ExperimentSpec::Kind::SessionDemo: return session_demo(spec, parallel);
    }
    raise(Errc::InvalidArgument, "unhandled experiment kind");
}

void write_csv_file(const std::filesystem::path& path, const SweepTable& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(Errc::Io, "cannot open CSV output path");
    out << table.to_csv();
    if (!out) raise(Errc::Io, "short write to CSV output");
}

double ci_mean(const std::vector<double>& samples) {
    if (samples.size() < 2) return 0.0;
    double mean =
        std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size() - 1);
    return 1.96 * std::sqrt(var / static_cast<double>(samples.size()));
}

double ci_rate(double rate, size_t trials) {
    if (trials == 0) return 0.0;
    return 1.96 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

} // namespace qkdvault
