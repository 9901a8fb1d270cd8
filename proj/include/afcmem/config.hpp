#pragma once

#include "afcmem/montecarlo.hpp"
#include "afcmem/qubit.hpp"
#include "afcmem/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace afc {

/// Everything a run needs. Internally SI units; the file format carries the
/// unit in every key name.
struct ExperimentConfig {
    CombSpec comb;
    SpectralGrid grid{40e9, std::size_t{1} << 18};
    double pulse_fwhm = 5e9;
    double bin_separation = 1.4e-9;

    ProjectionSetting projection; // analyzer_phase is overridden per phase
    std::vector<double> analyzer_phases;
    double superposition_phase = 0.0;

    MonteCarloConfig mc;

    double storage_run_duration = 0.0;    // s per basis state
    double projection_run_duration = 0.0; // s per analyzer phase
    std::uint64_t seed = 1;
    std::string output_dir = "afcmem-run";

    double histogram_bin = 100e-12;
    double window_width = 1e-9;
    std::vector<double> background_centers; // s, pump frame

    MemoryModel memory() const;
    /// Early and late echo windows for single-comb storage.
    std::vector<TimeWindow> storage_windows() const;
    /// Windows at t1, t2 and t2 + tau for the double comb.
    std::vector<TimeWindow> projection_windows() const;
    std::vector<TimeWindow> background_windows() const;
};

/// Calibrated defaults: 2% single-comb efficiency, SNRs near 5 and 22.
ExperimentConfig default_config();

/// Parses the JSON config text. Keys absent from the file keep their default
/// values. Throws ConfigError with line or field information.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::string to_json(const ExperimentConfig& config);

struct Diagnostic {
    std::string path;
    std::string message;
};

/// Every violated invariant with its field path; empty when valid.
std::vector<Diagnostic> validate(const ExperimentConfig& config);

/// Hex FNV-1a digest of the canonical JSON form.
std::string config_digest(const ExperimentConfig& config);

/// Returns a copy with the numeric field at `path` (dotted keys, as in the
/// file) set to `value`. "comb.finesse" sets the tooth width from the
/// spacing. Throws ConfigError for an unknown or non-numeric path.
ExperimentConfig with_parameter(const ExperimentConfig& config, const std::string& path, double value);

/// Throws ConfigError unless `path` names a numeric field.
void check_parameter_path(const std::string& path);

} // namespace afc
