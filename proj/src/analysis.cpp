#include "afcmem/analysis.hpp"

#include "afcmem/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace afc {

Estimate count_fidelity(double a, double b)
{
    if (!(a >= 0.0 && b >= 0.0))
        throw ValidationError("counts must be non-negative");
    const double n = a + b;
    if (!(n > 0.0))
        throw ValidationError("fidelity undefined: zero counts in both windows");
    return {a / n, std::sqrt(a * b / (n * n * n))};
}

BasisFidelities fidelity_el(double c_ee, double c_le, double c_ll, double c_el)
{
    BasisFidelities r;
    r.early = count_fidelity(c_ee, c_le);
    r.late = count_fidelity(c_ll, c_el);
    r.mean = {0.5 * (r.early.value + r.late.value),
              0.5 * std::hypot(r.early.sigma, r.late.sigma)};
    return r;
}

namespace {

void check_phase_coverage(const std::vector<double>& phases)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> p;
    for (double x : phases) {
        if (!std::isfinite(x))
            throw ValidationError("phases must be finite");
        double r = std::fmod(x, two_pi);
        if (r < 0.0)
            r += two_pi;
        p.push_back(r);
    }
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end(), [](double a, double b) { return b - a < 1e-9; }), p.end());
    if (p.size() > 1 && p.back() - p.front() > two_pi - 1e-9)
        p.pop_back();
    if (p.size() < 3)
        throw ValidationError("visibility fit needs at least 3 distinct phases");
    double gap = p.front() + two_pi - p.back();
    for (std::size_t i = 1; i < p.size(); ++i)
        gap = std::max(gap, p[i] - p[i - 1]);
    if (two_pi - gap < std::numbers::pi - 1e-9)
        throw ValidationError("visibility fit phases must span at least pi");
}

} // namespace

VisibilityFit visibility_fit(const std::vector<double>& phases, const std::vector<double>& counts)
{
    if (phases.size() != counts.size())
        throw ValidationError("phases and counts differ in length");
    for (double c : counts)
        if (!(c >= 0.0))
            throw ValidationError("fringe counts must be non-negative");
    check_phase_coverage(phases);

    const auto n = static_cast<Eigen::Index>(phases.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(phases[static_cast<std::size_t>(i)]);
        x(i, 2) = std::sin(phases[static_cast<std::size_t>(i)]);
        y(i) = counts[static_cast<std::size_t>(i)];
    }

    // Poisson variance: start from the data, then refine with the fitted curve.
    Eigen::VectorXd w = y.cwiseMax(1.0).cwiseInverse();
    Eigen::Vector3d beta;
    Eigen::Matrix3d normal;
    for (int iter = 0; iter < 20; ++iter) {
        normal = x.transpose() * w.asDiagonal() * x;
        Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
        if (lu.rank() < 3)
            throw ValidationError("degenerate design matrix in visibility fit");
        const Eigen::Vector3d next = lu.solve(x.transpose() * w.asDiagonal() * y);
        const bool converged = iter > 0 && (next - beta).norm() <= 1e-12 * std::max(1.0, next.norm());
        beta = next;
        w = (x * beta).cwiseMax(1.0).cwiseInverse();
        if (converged)
            break;
    }
    normal = x.transpose() * w.asDiagonal() * x;
    const Eigen::Matrix3d cov = normal.inverse();

    const double a = beta(0), b = beta(1), c = beta(2);
    if (!(a > 0.0))
        throw ValidationError("visibility fit: non-positive mean count");
    const double r = std::hypot(b, c);

    VisibilityFit fit;
    fit.amplitude = a;
    fit.raw_visibility = r / a;
    fit.visibility = std::clamp(fit.raw_visibility, 0.0, 1.0);
    fit.theta0 = std::atan2(c, b);
    fit.sigma_amplitude = std::sqrt(cov(0, 0));
    if (r > 0.0) {
        const Eigen::Vector3d gv(-r / (a * a), b / (a * r), c / (a * r));
        const Eigen::Vector3d gt(0.0, -c / (r * r), b / (r * r));
        fit.sigma_visibility = std::sqrt(gv.dot(cov * gv));
        fit.sigma_theta0 = std::sqrt(gt.dot(cov * gt));
    } else {
        fit.sigma_visibility = std::sqrt(cov(1, 1) + cov(2, 2)) / a;
        fit.sigma_theta0 = std::numbers::pi;
    }
    fit.unreliable = fit.sigma_visibility > 1.0;
    return fit;
}

Estimate fidelity_from_visibility(double visibility, double sigma_visibility)
{
    if (!(visibility >= -1.0 && visibility <= 1.0))
        throw ValidationError("visibility must lie in [-1, 1]");
    return {0.5 * (1.0 + visibility), 0.5 * sigma_visibility};
}

Estimate average_fidelity(const Estimate& f_el, const Estimate& f_phi)
{
    return {(f_el.value + 2.0 * f_phi.value) / 3.0,
            std::sqrt(f_el.sigma * f_el.sigma + 4.0 * f_phi.sigma * f_phi.sigma) / 3.0};
}

std::array<BoundVerdict, 2> bound_verdict(double fidelity, double sigma)
{
    if (!(sigma > 0.0))
        throw ValidationError("bound verdict needs a positive uncertainty");
    std::array<BoundVerdict, 2> out;
    const double bounds[2] = {classical_bound, cloner_bound};
    for (int i = 0; i < 2; ++i) {
        out[i].bound = bounds[i];
        out[i].sigmas = (fidelity - bounds[i]) / sigma;
        out[i].exceeded = out[i].sigmas > 0.0;
    }
    return out;
}

Snr snr(double signal, double background)
{
    if (!(signal >= 0.0 && background >= 0.0))
        throw ValidationError("SNR counts must be non-negative");
    if (background == 0.0)
        return {signal, true};
    return {signal / background, false};
}

void FidelityReport::check() const
{
    for (const Estimate* e : {&f_e, &f_l, &f_el, &f_phi, &f_bar})
        if (!(e->value >= 0.0 && e->value <= 1.0))
            throw ValidationError("fidelity outside [0, 1]");
    if (std::abs(f_el.value - 0.5 * (f_e.value + f_l.value)) > 1e-12 ||
        std::abs(f_phi.value - 0.5 * (1.0 + fit.visibility)) > 1e-12 ||
        std::abs(f_bar.value - (f_el.value + 2.0 * f_phi.value) / 3.0) > 1e-12)
        throw ValidationError("fidelity report identities violated");
}

FidelityReport make_report(const FidelityInputs& in)
{
    FidelityReport r;
    const auto el = fidelity_el(in.c_ee, in.c_le, in.c_ll, in.c_el);
    r.f_e = el.early;
    r.f_l = el.late;
    r.f_el = el.mean;
    r.fit = visibility_fit(in.phases, in.fringe);
    r.f_phi = fidelity_from_visibility(r.fit.visibility, r.fit.sigma_visibility);
    r.f_bar = average_fidelity(r.f_el, r.f_phi);
    r.snr = in.snr;
    // A noiseless run has zero spread; verdicts then rest on the sign alone.
    r.verdicts = bound_verdict(r.f_bar.value, r.f_bar.sigma > 0.0 ? r.f_bar.sigma : 1e-300);
    r.check();
    return r;
}

void write_key_values(std::ostream& os, const FidelityReport& r, std::string_view prefix)
{
    const std::string p(prefix);
    auto kv = [&](const char* key, double v) { os << p << '.' << key << ": " << v << '\n'; };
    auto est = [&](const char* key, const Estimate& e) {
        kv(key, e.value);
        os << p << '.' << key << "_sigma: " << e.sigma << '\n';
    };
    est("F_e", r.f_e);
    est("F_l", r.f_l);
    est("F_el", r.f_el);
    est("V", {r.fit.visibility, r.fit.sigma_visibility});
    kv("V_raw", r.fit.raw_visibility);
    est("theta0_rad", {r.fit.theta0, r.fit.sigma_theta0});
    os << p << ".V_unreliable: " << (r.fit.unreliable ? "true" : "false") << '\n';
    est("F_phi", r.f_phi);
    est("F_bar", r.f_bar);
    kv("snr", r.snr.value);
    os << p << ".snr_lower_bound: " << (r.snr.lower_bound ? "true" : "false") << '\n';
    const char* names[2] = {"classical", "cloner"};
    for (int i = 0; i < 2; ++i) {
        os << p << ".bound_" << names[i] << ": " << r.verdicts[i].bound << '\n';
        os << p << ".bound_" << names[i] << "_sigmas: " << r.verdicts[i].sigmas << '\n';
        os << p << ".bound_" << names[i] << "_exceeded: " << (r.verdicts[i].exceeded ? "true" : "false")
           << '\n';
    }
}

void write_tsv_header(std::ostream& os)
{
    os << "mode\tF_e\tF_e_sigma\tF_l\tF_l_sigma\tF_el\tF_el_sigma\tV\tV_sigma\ttheta0_rad\t"
          "F_phi\tF_phi_sigma\tF_bar\tF_bar_sigma\tsnr\tsnr_lower_bound\t"
          "classical_sigmas\tcloner_sigmas\n";
}

void write_tsv_row(std::ostream& os, const FidelityReport& r, std::string_view label)
{
    os << label << '\t' << r.f_e.value << '\t' << r.f_e.sigma << '\t' << r.f_l.value << '\t' << r.f_l.sigma
       << '\t' << r.f_el.value << '\t' << r.f_el.sigma << '\t' << r.fit.visibility << '\t'
       << r.fit.sigma_visibility << '\t' << r.fit.theta0 << '\t' << r.f_phi.value << '\t' << r.f_phi.sigma
       << '\t' << r.f_bar.value << '\t' << r.f_bar.sigma << '\t' << r.snr.value << '\t'
       << (r.snr.lower_bound ? 1 : 0) << '\t' << r.verdicts[0].sigmas << '\t' << r.verdicts[1].sigmas << '\n';
}

} // namespace afc
