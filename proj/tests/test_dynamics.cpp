#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "support.hpp"
#include "upb/dynamics.hpp"
#include "upb/errors.hpp"

using namespace upb;

namespace {

DensityMatrix basis_state(const SpaceLayout& layout, int nh, int nv, int qd) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(layout.dim());
    psi(layout.index(nh, nv, qd)) = 1.0;
    return DensityMatrix::pure(layout, psi);
}

std::vector<double> uniform(double dt, int n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) t[std::size_t(k)] = dt * k;
    return t;
}

} // namespace

TEST_CASE("evolve") {
    const SpaceLayout layout(1);
    SystemParams p;
    p.kappa_H = 3.0;
    p.kappa_V = 0.0;
    const Superoperator l = test::liouvillian_for(p, layout);
    const DensityMatrix one = basis_state(layout, 1, 0, 0);
    CHECK(evolve(l, one, 0.0).matrix() == one.matrix());
    const Operator n = ModeOperators(layout).a_h.adjoint() * ModeOperators(layout).a_h;
    for (double kt : {0.5, 1.0, 2.0}) {
        CHECK(std::abs(evolve(l, one, kt / p.kappa_H).expect(n).real() - std::exp(-kt)) < 1e-6);
    }
    CHECK_THROWS_AS(evolve(l, one, -1.0), InvalidArgument);
}

TEST_CASE("pure dephasing keeps populations and damps coherences at gamma*") {
    const SpaceLayout layout(1);
    SystemParams p;
    p.kappa_H = p.kappa_V = 0.0;
    p.gamma_star = 0.7;
    const std::vector<Operator> c = collapse_operators(p, layout);
    REQUIRE(c.size() == 1);
    const Superoperator l = build_liouvillian(Operator(layout, Eigen::MatrixXcd::Zero(8, 8)), c);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
    psi(layout.index(0, 0, 0)) = std::sqrt(0.3);
    psi(layout.index(0, 0, 1)) = std::sqrt(0.7);
    const DensityMatrix rho0 = DensityMatrix::pure(layout, psi);
    for (double t : {0.2, 1.0, 3.0}) {
        const Eigen::MatrixXcd r = evolve(l, rho0, t).matrix();
        CHECK(r(0, 0).real() == doctest::Approx(0.3).epsilon(1e-9));
        CHECK(r(1, 1).real() == doctest::Approx(0.7).epsilon(1e-9));
        CHECK(std::abs(r(1, 0)) == doctest::Approx(std::sqrt(0.21) * std::exp(-p.gamma_star * t)).epsilon(1e-7));
    }
}

TEST_CASE("g2(0) of reference states") {
    SUBCASE("coherent steady state") {
        SystemParams p = reference_defaults();
        p.g = 0.0;
        const SpaceLayout layout(6);
        const DensityMatrix rho = steady_state(test::liouvillian_for(p, layout));
        for (double t : {0.0, 0.4, 1.3}) CHECK(std::abs(g2_zero(rho, linear_output(t)).value - 1.0) < 1e-6);
    }
    SUBCASE("single photon") {
        const G2Value g = g2_zero(basis_state(SpaceLayout(2), 0, 1, 0), linear_output(0.5 * std::numbers::pi));
        CHECK(g.status == Status::ok);
        CHECK(std::abs(g.value) < 1e-15);
    }
    SUBCASE("thermal") {
        const SpaceLayout layout(15);
        const double nbar = 0.2;
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(layout.dim(), layout.dim());
        for (int n = 0; n <= 15; ++n) rho(layout.index(n, 0, 0), layout.index(n, 0, 0)) = std::pow(nbar, n) / std::pow(1.0 + nbar, n + 1);
        rho /= rho.trace().real();
        CHECK(std::abs(g2_zero(DensityMatrix(layout, rho), linear_output(0.0)).value - 2.0) < 1e-6);
    }
    SUBCASE("vacuum is below the photon floor") {
        const G2Value g = g2_zero(basis_state(SpaceLayout(1), 0, 0, 0), linear_output(0.0));
        CHECK(g.status == Status::low_intensity);
        CHECK(std::isnan(g.value));
    }
}

TEST_CASE("regression theorem against the full propagator") {
    const SpaceLayout layout(1);
    SystemParams p = reference_defaults();
    p.eta_H *= 3.0;
    const Superoperator l = test::liouvillian_for(p, layout);
    const DensityMatrix rho = steady_state(l);
    const OutputProjection c = projection_from_angles(0.7, 0.9);
    const std::vector<double> tau = uniform(0.004, 64);
    const CorrelationCurve curve = g2_tau(l, rho, c, tau);
    REQUIRE(curve.values.size() == 2 * tau.size() - 1);

    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(l.matrix);
    const Eigen::MatrixXcd cm = c.mode(layout).matrix();
    const Eigen::MatrixXcd x0m = cm * rho.matrix() * cm.adjoint();
    const Eigen::VectorXcd x0 = Eigen::Map<const Eigen::VectorXcd>(x0m.data(), x0m.size());
    const double n = curve.mean_n;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        const Eigen::MatrixXcd prop = (dense * tau[k]).exp();
        const Eigen::VectorXcd x = prop * x0;
        const Eigen::MatrixXcd xm = Eigen::Map<const Eigen::MatrixXcd>(x.data(), layout.dim(), layout.dim());
        const double ref = (cm.adjoint() * cm * xm).trace().real() / (n * n);
        CHECK(std::abs(ref - curve.values[tau.size() - 1 + k]) < 1e-8);
        CHECK(curve.values[tau.size() - 1 + k] == curve.values[tau.size() - 1 - k]);
    }
}

TEST_CASE("correlation curves on the default grid") {
    const SpaceLayout layout(2);
    const SystemParams p = reference_defaults();
    const Superoperator l = test::liouvillian_for(p, layout);
    const DensityMatrix rho = steady_state(l);
    const OutputProjection c = linear_output(0.5 * std::numbers::pi);
    const std::vector<double> tau = default_tau_grid(p, 512);
    CHECK(tau.back() == doctest::Approx(10.0 / p.min_nonzero_rate()));
    const CorrelationCurve curve = g2_tau(l, rho, c, tau);
    CHECK(std::abs(curve.at_zero() - g2_zero(rho, c).value) < 1e-9);
    CHECK(std::abs(curve.values.back() - 1.0) < 5e-3);

    const CorrelationBasis basis(l, rho, tau);
    for (const OutputProjection& q : {c, projection_from_angles(1.1, 2.0), linear_output(0.2)}) {
        const CorrelationCurve a = g2_tau(l, rho, q, tau);
        const CorrelationCurve b = basis.g2_curve(q);
        CHECK(basis.mean_n(q) == doctest::Approx(a.mean_n).epsilon(1e-10));
        double worst = 0.0;
        for (std::size_t k = 0; k < a.values.size(); ++k) worst = std::max(worst, std::abs(a.values[k] - b.values[k]));
        CHECK(worst < 1e-7);
    }
}

TEST_CASE("passive decay of the perturbed state") {
    SystemParams p = reference_defaults();
    const SpaceLayout layout(2);
    const DensityMatrix rho = steady_state(test::liouvillian_for(p, layout));
    p.eta_H = p.eta_V = 0.0;
    const Superoperator l0 = test::liouvillian_for(p, layout);
    const Operator c = linear_output(0.3).mode(layout);
    const DensityMatrix x0(layout, c.matrix() * rho.matrix() * c.matrix().adjoint());
    CHECK(x0.trace() == doctest::Approx(rho.expect(c.adjoint() * c).real()).epsilon(1e-12));
    double prev = x0.trace();
    for (double t = 0.01; t < 0.2; t += 0.01) {
        const double tr = evolve(l0, x0, t).trace();
        CHECK(tr <= prev + 1e-12);
        prev = tr;
    }
}

TEST_CASE("detector kernel") {
    const std::vector<double> tau = uniform(0.01, 200);
    std::vector<double> half(tau.size());
    for (std::size_t k = 0; k < half.size(); ++k) half[k] = 1.0 - 0.9 * std::exp(-tau[k] / 0.05) * std::cos(tau[k] * 30.0);
    const CorrelationCurve bare = reflect(tau, half, 0.01, Status::ok);

    SUBCASE("delta limit") {
        const CorrelationCurve out = convolve_detector(bare, 0.01 / 100.0);
        for (std::size_t k = 0; k < out.values.size(); ++k) CHECK(std::abs(out.values[k] - bare.values[k]) < 1e-9);
    }
    SUBCASE("constant curve unchanged") {
        const CorrelationCurve flat = reflect(tau, std::vector<double>(tau.size(), 1.0), 0.01, Status::ok);
        for (KernelShape s : {KernelShape::Gaussian, KernelShape::TwoSidedExponential}) {
            const CorrelationCurve out = convolve_detector(flat, 0.53, s);
            for (double v : out.values) CHECK(std::abs(v - 1.0) < 1e-12);
        }
    }
    SUBCASE("extremes never widen") {
        for (KernelShape s : {KernelShape::Gaussian, KernelShape::TwoSidedExponential}) {
            for (double fwhm : {0.15, 0.53, 1.5}) {
                const CorrelationCurve out = convolve_detector(bare, fwhm, s);
                CHECK(out.min_value() >= bare.min_value() - 1e-9);
                CHECK(out.max_value() <= bare.max_value() + 1e-9);
                const DetectorKernel k(0.01, fwhm, s);
                CHECK(k.at_zero(half) == doctest::Approx(out.at_zero()).epsilon(1e-12));
            }
        }
    }
    SUBCASE("kernel weights") {
        const DetectorKernel k(0.01, 0.53);
        double sum = 0.0;
        for (int o = -k.half_width(); o <= k.half_width(); ++o) sum += k.weight(o);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(k.weight(0) > k.weight(10));
        CHECK(k.weight(5) == k.weight(-5));
    }
    SUBCASE("under-resolved kernel is rejected") {
        CHECK_THROWS_AS(convolve_detector(bare, 0.05), ResolutionError);
        CHECK_THROWS_AS(DetectorKernel(0.01, 0.05), ResolutionError);
    }
    SUBCASE("resolution-limited floor of a deep dip") {
        // A 0.005-deep dip with a 250 ps correlation time lands in the 0.3 to 0.5 band.
        const std::vector<double> t = uniform(0.005, 1200);
        std::vector<double> dip(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) dip[k] = 1.0 - 0.995 * std::exp(-t[k] / 0.25);
        const double floor = convolve_detector(reflect(t, dip, 0.01, Status::ok), kDetectorFwhmNs).at_zero();
        CHECK(floor > 0.3);
        CHECK(floor < 0.5);
    }
}
