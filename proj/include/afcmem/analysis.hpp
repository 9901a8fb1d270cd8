#pragma once

#include <array>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace afc {

struct Estimate {
    double value = 0.0;
    double sigma = 0.0;
};

/// Fidelity a/(a+b) with Poisson error ab/(a+b)^3. Throws ValidationError
/// when a + b is not positive.
Estimate count_fidelity(double a, double b);

struct BasisFidelities {
    Estimate early;  // C_ee / (C_ee + C_le)
    Estimate late;   // C_ll / (C_ll + C_el)
    Estimate mean;
};

/// C_xy: counts in window x for input state y.
BasisFidelities fidelity_el(double c_ee, double c_le, double c_ll, double c_el);

struct VisibilityFit {
    double visibility = 0.0;     // clipped to [0, 1]
    double raw_visibility = 0.0; // before clipping
    double theta0 = 0.0;         // rad, in (-pi, pi]
    double amplitude = 0.0;
    double sigma_visibility = 0.0;
    double sigma_theta0 = 0.0;
    double sigma_amplitude = 0.0;
    /// Set when the visibility uncertainty exceeds 1.
    bool unreliable = false;
};

/// Weighted fit of C(theta) = A (1 + V cos(theta - theta0)) through the
/// linear form a + b cos + c sin, with Poisson weights from the fitted
/// curve. Needs at least 3 distinct phases covering at least pi.
VisibilityFit visibility_fit(const std::vector<double>& phases, const std::vector<double>& counts);

/// F = (1 + V)/2, sigma = sigma_V/2.
Estimate fidelity_from_visibility(double visibility, double sigma_visibility);

/// (F_el + 2 F_phi)/3 with sigma^2 = (s_el^2 + 4 s_phi^2)/9.
Estimate average_fidelity(const Estimate& f_el, const Estimate& f_phi);

struct BoundVerdict {
    double bound = 0.0;
    double sigmas = 0.0; // (F - bound)/sigma
    bool exceeded = false;
};

inline constexpr double classical_bound = 2.0 / 3.0;
inline constexpr double cloner_bound = 5.0 / 6.0;

/// Verdicts against the classical (2/3) and cloner (5/6) bounds.
std::array<BoundVerdict, 2> bound_verdict(double fidelity, double sigma);

struct Snr {
    double value = 0.0;
    /// Background was zero; value is signal / 1 and bounds the ratio from below.
    bool lower_bound = false;
};

Snr snr(double signal, double background);

struct FidelityInputs {
    double c_ee = 0, c_le = 0, c_ll = 0, c_el = 0;
    std::vector<double> phases;
    std::vector<double> fringe;
    Snr snr;
};

struct FidelityReport {
    Estimate f_e, f_l, f_el;
    VisibilityFit fit;
    Estimate f_phi, f_bar;
    Snr snr;
    std::array<BoundVerdict, 2> verdicts{};

    /// Throws ValidationError if a fidelity leaves [0,1] or a composite
    /// identity is broken.
    void check() const;
};

FidelityReport make_report(const FidelityInputs& in);

/// "prefix.key: value" lines.
void write_key_values(std::ostream& os, const FidelityReport& r, std::string_view prefix);
/// Column names and one row, tab separated.
void write_tsv_header(std::ostream& os);
void write_tsv_row(std::ostream& os, const FidelityReport& r, std::string_view label);

} // namespace afc
