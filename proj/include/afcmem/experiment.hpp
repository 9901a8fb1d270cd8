#pragma once

#include "afcmem/analysis.hpp"
#include "afcmem/config.hpp"
#include "afcmem/montecarlo.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace afc {

/// One simulated data run: a stored basis state or one analyzer phase.
struct JobResult {
    std::string name;
    std::optional<double> analyzer_phase; // empty for single-comb storage
    double echo_efficiency = 0.0;         // emission probability in the first echo window
    EventLog log;
    TdcHistogram singles;
    TdcHistogram conditional;
    WindowCounts singles_windows;
    WindowCounts conditional_windows;
};

struct ExperimentResult {
    std::string digest;
    std::uint64_t seed = 0;
    std::vector<JobResult> jobs; // early, late, then one per analyzer phase
    FidelityReport singles;
    FidelityReport conditional;

    double storage_efficiency() const { return jobs.at(0).echo_efficiency; }
};

/// Seed of job `index` derived from the run seed; jobs never share a stream.
std::uint64_t job_seed(std::uint64_t run_seed, std::size_t index);

/// Full protocol: store |e> and |l>, sweep the analyzer phases on the
/// superposition state, then analyze. Throws ValidationError when the config
/// has diagnostics. `parallel` jobs run concurrently.
ExperimentResult run_protocol(const ExperimentConfig& config, unsigned parallel = 1);

/// Single-comb echo efficiency of the configured memory (no counting).
double memory_efficiency(const ExperimentConfig& config);

/// Runs the protocol and writes every artifact under `dir`. A file named
/// INCOMPLETE stays in the directory unless the run finishes.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir,
                                unsigned parallel = 1);

void write_report(std::ostream& os, const ExperimentResult& r);
void write_report_tsv(std::ostream& os, const ExperimentResult& r);
void write_fringe(std::ostream& os, const ExperimentResult& r);

struct SweepRow {
    double value = 0.0;
    double efficiency = 0.0;
    double snr_singles = 0.0;
    double snr_conditional = 0.0;
    double f_bar_singles = 0.0;
    double f_bar_conditional = 0.0;
};

/// One protocol run per value and seed; rows hold medians over seeds.
/// With `efficiency_only` the counting stage is skipped and SNR and
/// fidelity columns are NaN.
std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::string& path,
                            const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
                            unsigned parallel = 1, bool efficiency_only = false);

void write_sweep(std::ostream& os, const std::string& path, const std::vector<SweepRow>& rows);

} // namespace afc
