#include "afcmem/experiment.hpp"

#include "afcmem/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace afc {

namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

void check_config(const ExperimentConfig& config)
{
    const auto diags = validate(config);
    if (diags.empty())
        return;
    std::string msg = "invalid config:";
    for (const auto& d : diags)
        msg += "\n  " + d.path + ": " + d.message;
    throw ValidationError(msg);
}

template <typename F>
void run_parallel(std::size_t n, unsigned parallel, F&& task)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    parallel = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (parallel == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < parallel; ++i)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
}

std::string digest_of(const ExperimentConfig& config)
{
    ExperimentConfig c = config;
    c.output_dir.clear();
    return config_digest(c);
}

double median(std::vector<double> v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::int64_t to_ps(double s) { return std::llround(s * 1e12); }

Snr storage_snr(const JobResult& early, const JobResult& late, bool conditional)
{
    const auto& we = conditional ? early.conditional_windows : early.singles_windows;
    const auto& wl = conditional ? late.conditional_windows : late.singles_windows;
    return snr(static_cast<double>(we.counts[0] + wl.counts[1]), we.background + wl.background);
}

FidelityReport analyze(const ExperimentResult& r, bool conditional)
{
    auto windows = [&](const JobResult& j) -> const WindowCounts& {
        return conditional ? j.conditional_windows : j.singles_windows;
    };
    const auto& e = windows(r.jobs[0]);
    const auto& l = windows(r.jobs[1]);
    FidelityInputs in;
    in.c_ee = static_cast<double>(e.counts[0]);
    in.c_le = static_cast<double>(e.counts[1]);
    in.c_ll = static_cast<double>(l.counts[1]);
    in.c_el = static_cast<double>(l.counts[0]);
    for (std::size_t i = 2; i < r.jobs.size(); ++i) {
        in.phases.push_back(*r.jobs[i].analyzer_phase);
        in.fringe.push_back(static_cast<double>(windows(r.jobs[i]).counts[1]));
    }
    in.snr = storage_snr(r.jobs[0], r.jobs[1], conditional);
    return make_report(in);
}

} // namespace

std::uint64_t job_seed(std::uint64_t run_seed, std::size_t index)
{
    return splitmix64(splitmix64(run_seed) ^ (0x632be59bd9b4e019ull * (index + 1)));
}

double memory_efficiency(const ExperimentConfig& config)
{
    const auto qubit = TimeBinQubit::early_state(config.bin_separation);
    const auto emission = emission_for(config.memory(), qubit, std::nullopt, config.mc.frame_offset);
    const auto w = config.storage_windows()[0];
    return emission.mass(to_ps(w.center - 0.5 * w.width), to_ps(w.center + 0.5 * w.width));
}

ExperimentResult run_protocol(const ExperimentConfig& config, unsigned parallel)
{
    check_config(config);

    ExperimentResult result;
    result.digest = digest_of(config);
    result.seed = config.seed;

    const double tau = config.bin_separation;
    struct Job {
        std::string name;
        TimeBinQubit qubit;
        std::optional<ProjectionSetting> setting;
        double duration;
    };
    std::vector<Job> jobs;
    jobs.push_back({"early", TimeBinQubit::early_state(tau), std::nullopt, config.storage_run_duration});
    jobs.push_back({"late", TimeBinQubit::late_state(tau), std::nullopt, config.storage_run_duration});
    for (std::size_t k = 0; k < config.analyzer_phases.size(); ++k) {
        ProjectionSetting s = config.projection;
        s.analyzer_phase = config.analyzer_phases[k];
        jobs.push_back({"phase" + std::to_string(k), TimeBinQubit::superposition(config.superposition_phase, tau), s,
                        config.projection_run_duration});
    }

    const auto memory = config.memory();
    const auto background = config.background_windows();
    result.jobs.resize(jobs.size());
    run_parallel(jobs.size(), parallel, [&](std::size_t i) {
        const Job& job = jobs[i];
        JobResult& out = result.jobs[i];
        out.name = job.name;
        if (job.setting)
            out.analyzer_phase = job.setting->analyzer_phase;
        const auto emission = emission_for(memory, job.qubit, job.setting, config.mc.frame_offset);
        const auto windows = job.setting ? config.projection_windows() : config.storage_windows();
        const auto& w = windows[0];
        out.echo_efficiency = emission.mass(to_ps(w.center - 0.5 * w.width), to_ps(w.center + 0.5 * w.width));
        out.log = simulate_run(config.mc, emission, job.duration, job_seed(config.seed, i), 1, result.digest);
        check_log(out.log, config.mc);
        out.singles = tdc_histogram(out.log, config.histogram_bin, HistogramMode::singles);
        out.conditional = tdc_histogram(out.log, config.histogram_bin, HistogramMode::conditional);
        out.singles_windows = window_counts(out.singles, windows, background);
        out.conditional_windows = window_counts(out.conditional, windows, background);
    });

    result.singles = analyze(result, false);
    result.conditional = analyze(result, true);
    return result;
}

void write_report(std::ostream& os, const ExperimentResult& r)
{
    os.precision(10);
    os << "status: complete\n"
       << "config_digest: " << r.digest << '\n'
       << "seed: " << r.seed << '\n'
       << "memory.storage_efficiency: " << r.storage_efficiency() << '\n';
    for (const auto& j : r.jobs) {
        os << "run." << j.name << ".pump_pulses: " << j.log.meta.pump_pulses << '\n';
        os << "run." << j.name << ".events: " << j.log.events.size() << '\n';
        os << "run." << j.name << ".echo_efficiency: " << j.echo_efficiency << '\n';
        for (int mode = 0; mode < 2; ++mode) {
            const auto& w = mode ? j.conditional_windows : j.singles_windows;
            const char* m = mode ? "conditional" : "singles";
            for (std::size_t k = 0; k < w.counts.size(); ++k)
                os << "run." << j.name << '.' << m << ".window" << k << ": " << w.counts[k] << '\n';
            os << "run." << j.name << '.' << m << ".background: " << w.background << '\n';
        }
    }
    write_key_values(os, r.singles, "singles");
    write_key_values(os, r.conditional, "conditional");
}

void write_report_tsv(std::ostream& os, const ExperimentResult& r)
{
    os.precision(10);
    write_tsv_header(os);
    write_tsv_row(os, r.singles, "singles");
    write_tsv_row(os, r.conditional, "conditional");
}

void write_fringe(std::ostream& os, const ExperimentResult& r)
{
    os.precision(10);
    os << "# analyzer_phase_rad\tsingles_t1\tsingles_t2\tsingles_t2_plus_tau\t"
          "conditional_t1\tconditional_t2\tconditional_t2_plus_tau\n";
    for (const auto& j : r.jobs) {
        if (!j.analyzer_phase)
            continue;
        os << *j.analyzer_phase;
        for (auto c : j.singles_windows.counts)
            os << '\t' << c;
        for (auto c : j.conditional_windows.counts)
            os << '\t' << c;
        os << '\n';
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config, const fs::path& dir, unsigned parallel)
{
    check_config(config);
    fs::create_directories(dir);
    const fs::path marker = dir / "INCOMPLETE";
    {
        std::ofstream m(marker);
        m << "run started but did not finish; artifacts in this directory may be partial\n";
    }
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name);
        if (!f)
            throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("config.json");
        f << to_json(config);
    }

    auto result = run_protocol(config, parallel);
    for (const auto& j : result.jobs) {
        {
            auto f = open("events_" + j.name + ".txt");
            write_event_log(f, j.log);
        }
        {
            auto f = open("hist_" + j.name + "_singles.txt");
            write_histogram(f, j.singles);
        }
        {
            auto f = open("hist_" + j.name + "_conditional.txt");
            write_histogram(f, j.conditional);
        }
    }
    {
        auto f = open("fringe.txt");
        write_fringe(f, result);
    }
    {
        auto f = open("report.tsv");
        write_report_tsv(f, result);
    }
    {
        auto f = open("report.txt");
        write_report(f, result);
    }
    fs::remove(marker);
    return result;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::string& path,
                            const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
                            unsigned parallel, bool efficiency_only)
{
    if (seeds.empty() && !efficiency_only)
        throw ValidationError("sweep needs at least one seed");
    // Resolve the path up front so an empty value list still rejects typos.
    check_parameter_path(path);
    std::vector<SweepRow> rows;
    for (double v : values) {
        const ExperimentConfig base = with_parameter(config, path, v);
        check_config(base);
        SweepRow row;
        row.value = v;
        row.efficiency = memory_efficiency(base);
        if (efficiency_only) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.snr_singles = row.snr_conditional = row.f_bar_singles = row.f_bar_conditional = nan;
        } else {
            std::vector<double> ss, sc, fs_, fc;
            for (auto seed : seeds) {
                ExperimentConfig c = base;
                c.seed = seed;
                const auto r = run_protocol(c, parallel);
                ss.push_back(r.singles.snr.value);
                sc.push_back(r.conditional.snr.value);
                fs_.push_back(r.singles.f_bar.value);
                fc.push_back(r.conditional.f_bar.value);
            }
            row.snr_singles = median(ss);
            row.snr_conditional = median(sc);
            row.f_bar_singles = median(fs_);
            row.f_bar_conditional = median(fc);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_sweep(std::ostream& os, const std::string& path, const std::vector<SweepRow>& rows)
{
    os.precision(10);
    os << path << "\tefficiency\tsnr_singles\tsnr_conditional\tF_bar_singles\tF_bar_conditional\n";
    for (const auto& r : rows)
        os << r.value << '\t' << r.efficiency << '\t' << r.snr_singles << '\t' << r.snr_conditional << '\t'
           << r.f_bar_singles << '\t' << r.f_bar_conditional << '\n';
}

} // namespace afc
