#include "afcmem/config.hpp"

#include "afcmem/analysis.hpp"
#include "afcmem/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace afc {

using nlohmann::json;

namespace {

constexpr double GHz = 1e9, MHz = 1e6, ns = 1e-9, us = 1e-6, ms = 1e-3, ps = 1e-12;

/// One numeric key of the file format. `scale` converts file units to SI.
struct Field {
    const char* path;
    double scale;
    std::function<double(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, double)> set;
};

#define AFC_FIELD(key, unit, member)                                                        \
    Field                                                                                   \
    {                                                                                       \
        key, unit, [](const ExperimentConfig& c) { return c.member; },                      \
            [](ExperimentConfig& c, double v) { c.member = v; }                             \
    }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        AFC_FIELD("comb.center_offset_mhz", MHz, comb.center_offset),
        AFC_FIELD("comb.bandwidth_ghz", GHz, comb.bandwidth),
        AFC_FIELD("comb.tooth_spacing_mhz", MHz, comb.tooth_spacing),
        AFC_FIELD("comb.tooth_width_mhz", MHz, comb.tooth_width),
        AFC_FIELD("comb.peak_optical_depth", 1.0, comb.peak_optical_depth),
        AFC_FIELD("comb.background_optical_depth", 1.0, comb.background_optical_depth),
        Field{"grid.span_ghz", GHz, [](const ExperimentConfig& c) { return c.grid.span(); },
              [](ExperimentConfig& c, double v) { c.grid = SpectralGrid(v, c.grid.size()); }},
        Field{"grid.points", 1.0, [](const ExperimentConfig& c) { return static_cast<double>(c.grid.size()); },
              [](ExperimentConfig& c, double v) {
                  if (!(v >= 2.0 && v <= 1e9 && v == std::floor(v)))
                      throw ValidationError("grid point count must be a whole number >= 2");
                  c.grid = SpectralGrid(c.grid.span(), static_cast<std::size_t>(v));
              }},
        AFC_FIELD("photon.spectral_fwhm_ghz", GHz, pulse_fwhm),
        AFC_FIELD("photon.bin_separation_ns", ns, bin_separation),
        AFC_FIELD("photon.superposition_phase_rad", 1.0, superposition_phase),
        AFC_FIELD("double_afc.recall_time_1_ns", ns, projection.recall_time_1),
        AFC_FIELD("double_afc.recall_time_2_ns", ns, projection.recall_time_2),
        AFC_FIELD("double_afc.amplitude_balance", 1.0, projection.amplitude_balance),
        AFC_FIELD("source.rep_rate_mhz", MHz, mc.source.rep_rate),
        AFC_FIELD("source.mean_photon_number", 1.0, mc.source.mean_photon),
        AFC_FIELD("source.pair_correlation", 1.0, mc.source.pair_correlation),
        AFC_FIELD("detectors.si.efficiency", 1.0, mc.si.efficiency),
        AFC_FIELD("detectors.si.dark_count_rate_hz", 1.0, mc.si.dark_count_rate),
        AFC_FIELD("detectors.si.dead_time_ns", ns, mc.si.dead_time),
        AFC_FIELD("detectors.si.jitter_fwhm_ns", ns, mc.si.jitter_fwhm),
        AFC_FIELD("detectors.ingaas.efficiency", 1.0, mc.ingaas.efficiency),
        Field{"detectors.ingaas.dark_probability_per_gate", 1.0,
              [](const ExperimentConfig& c) { return c.mc.ingaas.dark_probability_per_gate(); },
              [](ExperimentConfig& c, double p) {
                  if (!(p >= 0.0 && p < 1.0))
                      throw ValidationError("dark probability per gate must lie in [0, 1)");
                  if (!(c.mc.ingaas.gate_width > 0.0))
                      throw ValidationError("gate width must be set before the dark probability");
                  c.mc.ingaas.dark_count_rate = -std::log1p(-p) / c.mc.ingaas.gate_width;
              }},
        AFC_FIELD("detectors.ingaas.dead_time_us", us, mc.ingaas.dead_time),
        AFC_FIELD("detectors.ingaas.jitter_fwhm_ns", ns, mc.ingaas.jitter_fwhm),
        // Keeps the dark probability per gate fixed when the gate changes.
        Field{"detectors.ingaas.gate_width_ns", ns, [](const ExperimentConfig& c) { return c.mc.ingaas.gate_width; },
              [](ExperimentConfig& c, double v) {
                  const double p = c.mc.ingaas.dark_probability_per_gate();
                  c.mc.ingaas.gate_width = v;
                  if (v > 0.0)
                      c.mc.ingaas.dark_count_rate = -std::log1p(-p) / v;
              }},
        AFC_FIELD("channel.signal_loss_db", 1.0, mc.channel.signal_loss_db),
        AFC_FIELD("channel.idler_loss_db", 1.0, mc.channel.idler_loss_db),
        AFC_FIELD("channel.idler_delay_ns", ns, mc.channel.idler_delay),
        AFC_FIELD("timing.prep_ms", ms, mc.timing.prep),
        AFC_FIELD("timing.wait_ms", ms, mc.timing.wait),
        AFC_FIELD("timing.storage_ms", ms, mc.timing.storage),
        AFC_FIELD("timing.frame_offset_ns", ns, mc.frame_offset),
        AFC_FIELD("run.storage_duration_s", 1.0, storage_run_duration),
        AFC_FIELD("run.projection_duration_s", 1.0, projection_run_duration),
        AFC_FIELD("analysis.histogram_bin_ps", ps, histogram_bin),
        AFC_FIELD("analysis.window_width_ns", ns, window_width),
    };
    return table;
}

#undef AFC_FIELD

const Field* find_field(const std::string& path)
{
    for (const auto& f : fields())
        if (path == f.path)
            return &f;
    return nullptr;
}

json::json_pointer pointer_of(const std::string& dotted)
{
    std::string p = "/" + dotted;
    for (auto& ch : p)
        if (ch == '.')
            ch = '/';
    return json::json_pointer(p);
}

// Unit conversion leaves ulp noise (10.000000000000002); 15 digits drop it.
double in_file_units(double si, double scale)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", si / scale);
    return std::strtod(buf, nullptr);
}

std::vector<double> scaled_list(const std::vector<double>& v, double scale)
{
    std::vector<double> out;
    for (double x : v)
        out.push_back(in_file_units(x, scale));
    return out;
}

void collect_leaves(const json& node, const std::string& prefix, std::vector<std::pair<std::string, const json*>>& out)
{
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            collect_leaves(*it, path, out);
        else
            out.emplace_back(path, &*it);
    }
}

} // namespace

MemoryModel ExperimentConfig::memory() const
{
    MemoryModel m;
    m.comb = comb;
    m.grid = grid;
    m.pulse_fwhm = pulse_fwhm;
    m.window = window_width;
    return m;
}

std::vector<TimeWindow> ExperimentConfig::storage_windows() const
{
    const double t1 = projection.recall_time_1;
    return {{t1, window_width}, {t1 + bin_separation, window_width}};
}

std::vector<TimeWindow> ExperimentConfig::projection_windows() const
{
    const double t1 = projection.recall_time_1, t2 = projection.recall_time_2;
    return {{t1, window_width}, {t2, window_width}, {t2 + bin_separation, window_width}};
}

std::vector<TimeWindow> ExperimentConfig::background_windows() const
{
    std::vector<TimeWindow> w;
    const double width = window_width / static_cast<double>(std::max<std::size_t>(background_centers.size(), 1));
    for (double c : background_centers)
        w.push_back({c, width});
    return w;
}

ExperimentConfig default_config()
{
    ExperimentConfig c;
    c.comb.peak_optical_depth = 0.9297;
    c.analyzer_phases = {0.0, 0.5 * std::numbers::pi, std::numbers::pi, 1.5 * std::numbers::pi};
    c.mc.si.dark_count_rate = 24e3;
    c.mc.ingaas.dark_count_rate = -std::log1p(-0.025) / c.mc.ingaas.gate_width;
    // 9 and 4 timing cycles: the 180 min : 80 min split of the experiment.
    c.storage_run_duration = 9 * c.mc.timing.cycle();
    c.projection_run_duration = 4 * c.mc.timing.cycle();
    c.background_centers = {4.0e-9};
    return c;
}

std::string to_json(const ExperimentConfig& c)
{
    json j;
    for (const auto& f : fields())
        j[pointer_of(f.path)] = in_file_units(f.get(c), f.scale);
    j["comb"]["tooth_shape"] = std::string(to_string(c.comb.tooth_shape));
    j["grid"]["points"] = c.grid.size();
    j["source"]["statistics"] = std::string(to_string(c.mc.source.statistics));
    j["double_afc"]["analyzer_phases_rad"] = c.analyzer_phases;
    j["analysis"]["background_centers_ns"] = scaled_list(c.background_centers, ns);
    j["run"]["seed"] = c.seed;
    j["run"]["output_dir"] = c.output_dir;
    return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports "at line L, column C".
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config root must be a JSON object");

    ExperimentConfig c = default_config();
    std::vector<std::pair<std::string, const json*>> leaves;
    collect_leaves(j, "", leaves);

    std::ostringstream errors;
    int n_errors = 0;
    auto fail = [&](const std::string& path, const std::string& msg) {
        errors << "\n  " << path << ": " << msg;
        ++n_errors;
    };
    auto number_list = [&](const std::string& path, const json& v, double scale, std::vector<double>& out) {
        if (!v.is_array()) {
            fail(path, "expected a list of numbers");
            return;
        }
        out.clear();
        for (const auto& x : v) {
            if (!x.is_number()) {
                fail(path, "expected a list of numbers");
                return;
            }
            out.push_back(x.get<double>() * scale);
        }
    };

    // Gate width first so the dark probability converts with the file's gate.
    std::stable_partition(leaves.begin(), leaves.end(),
                          [](const auto& l) { return l.first == "detectors.ingaas.gate_width_ns"; });

    for (const auto& [path, value] : leaves) {
        const json& v = *value;
        try {
            if (path == "comb.tooth_shape") {
                if (!v.is_string())
                    fail(path, "expected a string");
                else
                    c.comb.tooth_shape = parse_tooth_shape(v.get<std::string>());
            } else if (path == "source.statistics") {
                if (!v.is_string())
                    fail(path, "expected a string");
                else
                    c.mc.source.statistics = parse_pair_statistics(v.get<std::string>());
            } else if (path == "double_afc.analyzer_phases_rad") {
                number_list(path, v, 1.0, c.analyzer_phases);
            } else if (path == "analysis.background_centers_ns") {
                number_list(path, v, ns, c.background_centers);
            } else if (path == "run.seed") {
                if (!v.is_number_unsigned())
                    fail(path, "expected a non-negative integer");
                else
                    c.seed = v.get<std::uint64_t>();
            } else if (path == "run.output_dir") {
                if (!v.is_string())
                    fail(path, "expected a string");
                else
                    c.output_dir = v.get<std::string>();
            } else if (const Field* f = find_field(path)) {
                if (!v.is_number())
                    fail(path, "expected a number");
                else
                    f->set(c, v.get<double>() * f->scale);
            } else {
                fail(path, "unknown key");
            }
        } catch (const ValidationError& e) {
            fail(path, e.what());
        }
    }
    if (n_errors > 0)
        throw ConfigError("config has " + std::to_string(n_errors) + " error(s):" + errors.str());
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::vector<Diagnostic> validate(const ExperimentConfig& c)
{
    std::vector<Diagnostic> d;
    auto require = [&](bool ok, const char* path, const std::string& msg) {
        if (!ok)
            d.push_back({path, msg});
    };
    auto section = [&](const char* path, auto&& check) {
        try {
            check();
        } catch (const ValidationError& e) {
            d.push_back({path, e.what()});
        }
    };

    const auto& comb = c.comb;
    require(comb.tooth_spacing > 0.0, "comb.tooth_spacing_mhz", "must be positive");
    require(comb.tooth_width > 0.0, "comb.tooth_width_mhz", "must be positive");
    require(comb.tooth_width < comb.tooth_spacing, "comb.tooth_width_mhz",
            "finesse constraint violated: tooth width must be below the tooth spacing (finesse > 1)");
    require(comb.bandwidth >= 2.0 * comb.tooth_spacing, "comb.bandwidth_ghz",
            "must cover at least two tooth spacings");
    require(comb.peak_optical_depth >= 0.0 && std::isfinite(comb.peak_optical_depth),
            "comb.peak_optical_depth", "must be finite and non-negative");
    require(comb.background_optical_depth >= 0.0 && std::isfinite(comb.background_optical_depth),
            "comb.background_optical_depth", "must be finite and non-negative");
    require(std::isfinite(comb.center_offset), "comb.center_offset_mhz", "must be finite");
    if (d.empty())
        section("grid", [&] { c.grid.check_resolves(comb); });

    require(c.pulse_fwhm > 0.0, "photon.spectral_fwhm_ghz", "must be positive");
    require(c.bin_separation > 0.0, "photon.bin_separation_ns", "must be positive");
    require(std::isfinite(c.superposition_phase), "photon.superposition_phase_rad", "must be finite");

    const auto& p = c.projection;
    require(p.recall_time_1 > 0.0, "double_afc.recall_time_1_ns", "must be positive");
    require(p.amplitude_balance >= 0.0 && p.amplitude_balance <= 1.0, "double_afc.amplitude_balance",
            "must lie in [0, 1]");
    require(std::abs((p.recall_time_2 - p.recall_time_1) - c.bin_separation) <= 1e-12,
            "double_afc.recall_time_2_ns",
            "consistency rule violated: recall_time_2 - recall_time_1 must equal the bin separation");
    if (comb.tooth_spacing > 0.0)
        require(std::abs(p.recall_time_1 - 1.0 / comb.tooth_spacing) <= 0.1e-9, "double_afc.recall_time_1_ns",
                "consistency rule violated: must match the storage time 1/tooth_spacing within 0.1 ns");
    section("double_afc.analyzer_phases_rad", [&] {
        std::vector<double> dummy(c.analyzer_phases.size(), 1.0);
        // Coverage rules only; a flat fringe is fine here.
        for (std::size_t i = 0; i < dummy.size(); ++i)
            dummy[i] = 2.0 + std::cos(c.analyzer_phases[i]);
        visibility_fit(c.analyzer_phases, dummy);
    });

    section("source", [&] { c.mc.source.validate(); });
    section("detectors.si", [&] { c.mc.si.validate(); });
    section("detectors.ingaas", [&] { c.mc.ingaas.validate(); });
    require(c.mc.ingaas.gated, "detectors.ingaas", "must be gated");
    section("channel", [&] { c.mc.channel.validate(); });
    section("timing", [&] { c.mc.timing.validate(); });
    if (c.mc.source.rep_rate > 0.0) {
        const double period = 1.0 / c.mc.source.rep_rate;
        require(c.mc.frame_offset >= 0.0 && c.mc.frame_offset < period, "timing.frame_offset_ns",
                "must lie within one pump period");
        require(c.mc.ingaas.gate_width < period, "detectors.ingaas.gate_width_ns",
                "must be shorter than the pump period");
        require(c.mc.timing.storage >= period, "timing.storage_ms", "must hold at least one pump pulse");
    }

    const double cycle = c.mc.timing.cycle();
    require(c.storage_run_duration >= cycle, "run.storage_duration_s", "must cover at least one timing cycle");
    require(c.projection_run_duration >= cycle, "run.projection_duration_s",
            "must cover at least one timing cycle");
    require(!c.output_dir.empty(), "run.output_dir", "must not be empty");

    require(c.histogram_bin >= 1e-12, "analysis.histogram_bin_ps", "must be at least 1 ps");
    require(c.window_width > 0.0, "analysis.window_width_ns", "must be positive");
    require(c.window_width <= c.bin_separation, "analysis.window_width_ns",
            "must not exceed the bin separation (windows would overlap)");
    require(!c.background_centers.empty(), "analysis.background_centers_ns", "needs at least one window");
    if (c.mc.source.rep_rate > 0.0 && c.window_width > 0.0) {
        const double lo = -c.mc.frame_offset, hi = 1.0 / c.mc.source.rep_rate - c.mc.frame_offset;
        auto inside = [&](const std::vector<TimeWindow>& ws) {
            for (const auto& w : ws)
                if (w.center - 0.5 * w.width < lo || w.center + 0.5 * w.width > hi)
                    return false;
            return true;
        };
        require(inside(c.projection_windows()) && inside(c.storage_windows()), "double_afc",
                "detection windows must fit inside one pump period frame");
        require(inside(c.background_windows()), "analysis.background_centers_ns",
                "background windows must fit inside one pump period frame");
        section("analysis.background_centers_ns", [&] {
            TdcHistogram empty{0, 1, {}};
            window_counts(empty, c.projection_windows(), c.background_windows());
        });
    }
    return d;
}

std::string config_digest(const ExperimentConfig& config)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_json(config)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void check_parameter_path(const std::string& path)
{
    if (path != "comb.finesse" && path != "run.seed" && !find_field(path))
        throw ConfigError("unknown or non-numeric parameter path '" + path + "'");
}

ExperimentConfig with_parameter(const ExperimentConfig& config, const std::string& path, double value)
{
    ExperimentConfig c = config;
    try {
        if (path == "comb.finesse") {
            if (!(value > 0.0))
                throw ValidationError("finesse must be positive");
            c.comb.tooth_width = c.comb.tooth_spacing / value;
        } else if (path == "run.seed") {
            if (!(value >= 0.0 && value == std::floor(value)))
                throw ValidationError("seed must be a non-negative integer");
            c.seed = static_cast<std::uint64_t>(value);
        } else if (const Field* f = find_field(path)) {
            f->set(c, value * f->scale);
        } else {
            throw ConfigError("unknown or non-numeric parameter path '" + path + "'");
        }
    } catch (const ValidationError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

} // namespace afc
