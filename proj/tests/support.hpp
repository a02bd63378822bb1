#pragma once

#include <random>

#include <Eigen/Dense>

#include "upb/liouvillian.hpp"
#include "upb/model.hpp"

namespace upb::test {

inline Superoperator liouvillian_for(const SystemParams& p, const SpaceLayout& layout) {
    return build_liouvillian(build_hamiltonian(p, layout), collapse_operators(p, layout));
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Random valid parameters in the weak-coupling regime, rad/ns.
inline SystemParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SystemParams p;
    p.omega_L = ghz_to_rad_per_ns(5.0 * u(rng));
    p.omega_c_H = ghz_to_rad_per_ns(10.0 * u(rng));
    p.omega_c_V = ghz_to_rad_per_ns(10.0 * u(rng));
    p.omega_QD = ghz_to_rad_per_ns(5.0 * u(rng));
    p.g = ghz_to_rad_per_ns(10.0 + 5.0 * u(rng));
    p.phi = 3.0 * u(rng);
    p.eta_H = ghz_to_rad_per_ns(8.0 + 4.0 * u(rng));
    p.eta_V = ghz_to_rad_per_ns(8.0 + 4.0 * u(rng));
    p.drive_phase = 3.0 * u(rng);
    p.kappa_H = ghz_to_rad_per_ns(40.0 + 10.0 * u(rng));
    p.kappa_V = ghz_to_rad_per_ns(40.0 + 10.0 * u(rng));
    p.gamma_par = ghz_to_rad_per_ns(1.0 + 0.5 * u(rng));
    p.gamma_star = ghz_to_rad_per_ns(1.0 + 0.5 * u(rng));
    return p;
}

inline Eigen::MatrixXcd random_density(Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Eigen::MatrixXcd a(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) a(i, j) = cplx(n(rng), n(rng));
    Eigen::MatrixXcd rho = a * a.adjoint();
    return rho / rho.trace().real();
}

} // namespace upb::test
