// model.hpp: Physical parameters, driven two-mode Jaynes-Cummings
// Hamiltonian and Lindblad collapse operators.

#pragma once

#include <numbers>
#include <vector>

#include "upb/hilbert.hpp"

namespace upb {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double ghz_to_rad_per_ns(double f_ghz) { return kTwoPi * f_ghz; }
inline constexpr double rad_per_ns_to_ghz(double w) { return w / kTwoPi; }
inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// All frequencies and rates in rad/ns, measured in a common rotating frame.
// Times elsewhere in the library are in ns.
struct SystemParams {
    double omega_L = 0.0;
    double omega_c_H = 0.0;
    double omega_c_V = 0.0;
    double omega_QD = 0.0;
    double g = 0.0;
    double phi = 0.0;        // dipole angle from the V axis, rad
    double eta_H = 0.0;
    double eta_V = 0.0;
    double drive_phase = 0.0; // phase of the V drive relative to H, rad
    double kappa_H = 1.0;
    double kappa_V = 1.0;
    double gamma_par = 0.0;
    double gamma_star = 0.0;
    double purcell_F_p = 11.2; // metadata only

    // Throws ConfigError naming the offending field.
    void validate() const;

    double mean_kappa() const noexcept { return 0.5 * (kappa_H + kappa_V); }
    double eta_total() const noexcept;
    // ((eta_H + eta_V) / kappa)^2 with kappa the mean cavity decay rate.
    double mean_input_photons() const noexcept;
    bool weak_coupling() const noexcept;
    double cavity_splitting() const noexcept { return omega_c_H - omega_c_V; }
    double min_nonzero_rate() const noexcept;
};

// The simulation preset used throughout: g/2pi = 12 GHz, kappa/2pi = 40 GHz
// per mode, gamma_par/2pi = gamma*/2pi = 1 GHz, phi = 94 deg, laser and QD at
// the mean cavity frequency, theta_in = 45 deg. The total drive amplitude is
// fixed by <n_in> = 0.06 at theta_in = 45 deg and is held constant (constant
// laser power) when other code paths change the input polarization.
SystemParams reference_defaults(double cavity_splitting_ghz = 10.0);

inline constexpr double kReferenceInputPhotons = 0.06;
double reference_eta_total(double mean_kappa);

// Splits the cavity modes symmetrically about their current mean frequency.
SystemParams with_cavity_splitting(SystemParams p, double splitting_ghz);

// b = cos(phi) a_V + sin(phi) a_H
Operator qd_mode_operator(double phi, const SpaceLayout& layout);

Operator build_hamiltonian(const SystemParams& p, const SpaceLayout& layout);

// [sqrt(kH) a_H, sqrt(kV) a_V, sqrt(gamma_par) sigma, sqrt(2 gamma*) sigma^dag sigma],
// zero-rate channels omitted.
std::vector<Operator> collapse_operators(const SystemParams& p, const SpaceLayout& layout);

// a_H^dag a_H + a_V^dag a_V + sigma^dag sigma
Operator excitation_number(const SpaceLayout& layout);

} // namespace upb
