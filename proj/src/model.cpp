#include "upb/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "upb/errors.hpp"

namespace upb {

namespace {

void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
}

void require_non_negative(double v, const char* field) {
    require_finite(v, field);
    if (v < 0.0) throw ConfigError(field, "must be >= 0");
}

} // namespace

void SystemParams::validate() const {
    for (auto [v, name] : {std::pair{omega_L, "omega_L"}, {omega_c_H, "omega_c_H"},
                           {omega_c_V, "omega_c_V"}, {omega_QD, "omega_QD"}, {phi, "phi"},
                           {drive_phase, "drive_phase"}}) {
        require_finite(v, name);
    }
    require_non_negative(g, "g");
    require_non_negative(eta_H, "eta_H");
    require_non_negative(eta_V, "eta_V");
    require_non_negative(gamma_par, "gamma_par");
    require_non_negative(gamma_star, "gamma_star");
    require_finite(kappa_H, "kappa_H");
    require_finite(kappa_V, "kappa_V");
    if (kappa_H <= 0.0) throw ConfigError("kappa_H", "must be > 0");
    if (kappa_V <= 0.0) throw ConfigError("kappa_V", "must be > 0");
}

double SystemParams::eta_total() const noexcept { return std::hypot(eta_H, eta_V); }

double SystemParams::mean_input_photons() const noexcept {
    const double r = (eta_H + eta_V) / mean_kappa();
    return r * r;
}

bool SystemParams::weak_coupling() const noexcept { return g < std::min(kappa_H, kappa_V); }

double SystemParams::min_nonzero_rate() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (double r : {kappa_H, kappa_V, gamma_par, gamma_star}) {
        if (r > 0.0) m = std::min(m, r);
    }
    return m;
}

double reference_eta_total(double mean_kappa) {
    // At 45 deg eta_H + eta_V = sqrt(2) * eta_total.
    return mean_kappa * std::sqrt(kReferenceInputPhotons) / std::sqrt(2.0);
}

SystemParams reference_defaults(double cavity_splitting_ghz) {
    SystemParams p;
    p.g = ghz_to_rad_per_ns(12.0);
    p.kappa_H = ghz_to_rad_per_ns(40.0);
    p.kappa_V = ghz_to_rad_per_ns(40.0);
    p.gamma_par = ghz_to_rad_per_ns(1.0);
    p.gamma_star = ghz_to_rad_per_ns(1.0);
    p.phi = deg_to_rad(94.0);
    p.omega_L = 0.0;
    p.omega_QD = 0.0;
    p = with_cavity_splitting(p, cavity_splitting_ghz);
    const double eta = reference_eta_total(p.mean_kappa());
    p.eta_H = eta / std::sqrt(2.0);
    p.eta_V = eta / std::sqrt(2.0);
    p.drive_phase = 0.0;
    return p;
}

SystemParams with_cavity_splitting(SystemParams p, double splitting_ghz) {
    const double center = 0.5 * (p.omega_c_H + p.omega_c_V);
    const double half = 0.5 * ghz_to_rad_per_ns(splitting_ghz);
    p.omega_c_H = center + half;
    p.omega_c_V = center - half;
    return p;
}

Operator qd_mode_operator(double phi, const SpaceLayout& layout) {
    const ModeOperators m(layout);
    return m.a_v * std::cos(phi) + m.a_h * std::sin(phi);
}

Operator build_hamiltonian(const SystemParams& p, const SpaceLayout& layout) {
    const ModeOperators m(layout);
    const Operator b = qd_mode_operator(p.phi, layout);
    const Operator ah_d = m.a_h.adjoint();
    const Operator av_d = m.a_v.adjoint();
    const Operator s_d = m.sigma.adjoint();
    const cplx eps_v = std::polar(p.eta_V, p.drive_phase);

    Operator h = av_d * m.a_v * (p.omega_L - p.omega_c_V) + ah_d * m.a_h * (p.omega_L - p.omega_c_H) +
                 s_d * m.sigma * (p.omega_L - p.omega_QD) +
                 (m.sigma * b.adjoint() + s_d * b) * p.g + (m.a_h + ah_d) * p.eta_H +
                 av_d * eps_v + m.a_v * std::conj(eps_v);
    // Kill rounding asymmetry so the result is Hermitian to machine zero.
    const Eigen::MatrixXcd sym = 0.5 * (h.matrix() + h.matrix().adjoint());
    return Operator(layout, sym);
}

std::vector<Operator> collapse_operators(const SystemParams& p, const SpaceLayout& layout) {
    const ModeOperators m(layout);
    std::vector<Operator> out;
    if (p.kappa_H > 0.0) out.push_back(m.a_h * std::sqrt(p.kappa_H));
    if (p.kappa_V > 0.0) out.push_back(m.a_v * std::sqrt(p.kappa_V));
    if (p.gamma_par > 0.0) out.push_back(m.sigma * std::sqrt(p.gamma_par));
    if (p.gamma_star > 0.0) out.push_back(m.sigma.adjoint() * m.sigma * std::sqrt(2.0 * p.gamma_star));
    return out;
}

Operator excitation_number(const SpaceLayout& layout) {
    const ModeOperators m(layout);
    return m.a_h.adjoint() * m.a_h + m.a_v.adjoint() * m.a_v + m.sigma.adjoint() * m.sigma;
}

} // namespace upb
