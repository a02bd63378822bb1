#include "selftest.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "upb/config.hpp"
#include "upb/dynamics.hpp"
#include "upb/liouvillian.hpp"
#include "upb/model.hpp"
#include "upb/observables.hpp"
#include "upb/polarization.hpp"

namespace upb::tools {

namespace {

struct Check {
    std::string name;
    std::function<std::string()> run; // empty string on success
};

std::string coherent_state() {
    SystemParams p = reference_defaults(10.0);
    p.g = 0.0;
    const SpaceLayout layout(6);
    const Superoperator l = build_liouvillian(build_hamiltonian(p, layout), collapse_operators(p, layout));
    const DensityMatrix rho = steady_state(l);
    const ModeOperators m(layout);
    const cplx alpha = cplx(0.0, -p.eta_H) / (cplx(0.0, p.omega_L - p.omega_c_H) + 0.5 * p.kappa_H);
    const double err = std::abs(rho.expect(m.a_h) - alpha);
    if (err > 1e-8) return "<a_H> off by " + std::to_string(err);
    const G2Value g = g2_zero(rho, linear_output(0.3));
    if (std::abs(g.value - 1.0) > 1e-6) return "g2 = " + std::to_string(g.value);
    return {};
}

std::string trace_preservation() {
    const SpaceLayout layout(3);
    const SystemParams p = reference_defaults();
    const Superoperator l = build_liouvillian(build_hamiltonian(p, layout), collapse_operators(p, layout));
    const double d = trace_preservation_defect(l);
    return d < 1e-9 ? std::string{} : "defect " + std::to_string(d);
}

std::string jones() {
    const JonesMatrix h = hwp(0.0), q = qwp(0.0);
    const double e = std::abs(h(0, 0) - 1.0) + std::abs(h(1, 1) + 1.0) + std::abs(q(1, 1) - cplx(0.0, 1.0));
    return e < 1e-14 ? std::string{} : "waveplate matrices differ by " + std::to_string(e);
}

std::string squeezing() {
    const double db = squeezing_db(0.004);
    return std::round(db * 1e4) / 1e4 == -0.0347 ? std::string{} : "squeezing_db(0.004) = " + std::to_string(db);
}

std::string two_photon() {
    const SqueezeSpec s{0.1, 0.0, 0.005, 0.0};
    const double exact = displaced_squeezed_fock_probs(s, 20).p[2];
    const double rel = std::abs(two_photon_amplitude_approx(s) - exact) / exact;
    return rel < 0.05 ? std::string{} : "relative error " + std::to_string(rel);
}

std::string regression() {
    const SpaceLayout layout(1);
    SystemParams p = reference_defaults();
    p.eta_H *= 3.0;
    const Superoperator l = build_liouvillian(build_hamiltonian(p, layout), collapse_operators(p, layout));
    const DensityMatrix rho = steady_state(l);
    const OutputProjection c = linear_output(0.7);
    std::vector<double> tau;
    for (int k = 0; k < 8; ++k) tau.push_back(0.02 * k);
    const CorrelationCurve curve = g2_tau(l, rho, c, tau);
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(l.matrix);
    const Eigen::MatrixXcd cm = c.mode(layout).matrix();
    const Eigen::MatrixXcd x0m = cm * rho.matrix() * cm.adjoint();
    const Eigen::VectorXcd x0 = Eigen::Map<const Eigen::VectorXcd>(x0m.data(), x0m.size());
    const double n = curve.mean_n;
    double worst = 0.0;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        const Eigen::VectorXcd x = (dense * tau[k]).exp() * x0;
        const Eigen::MatrixXcd xm = Eigen::Map<const Eigen::MatrixXcd>(x.data(), layout.dim(), layout.dim());
        const double ref = (cm.adjoint() * cm * xm).trace().real() / (n * n);
        worst = std::max(worst, std::abs(ref - curve.values[tau.size() - 1 + k]));
    }
    return worst < 1e-8 ? std::string{} : "max deviation " + std::to_string(worst);
}

std::string config_round_trip() {
    const RunConfig c;
    return config_from_json(config_to_json(c)) == c ? std::string{} : "load(dump(default)) differs";
}

} // namespace

bool run_selftest(std::ostream& out) {
    const std::vector<Check> checks = {
        {"coherent steady state", coherent_state},   {"trace preservation", trace_preservation},
        {"jones convention", jones},                 {"squeezing dB", squeezing},
        {"two-photon approximation", two_photon},           {"quantum regression", regression},
        {"config round trip", config_round_trip},
    };
    bool all = true;
    for (const Check& c : checks) {
        std::string msg;
        try {
            msg = c.run();
        } catch (const std::exception& e) {
            msg = std::string("exception: ") + e.what();
        }
        all = all && msg.empty();
        out << (msg.empty() ? "PASS " : "FAIL ") << c.name << (msg.empty() ? "" : ": " + msg) << '\n';
    }
    out << (all ? "selftest passed" : "selftest FAILED") << '\n';
    return all;
}

} // namespace upb::tools
