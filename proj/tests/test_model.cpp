#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "upb/errors.hpp"
#include "upb/model.hpp"

using namespace upb;

TEST_CASE("QD mode operator") {
    const SpaceLayout layout(2);
    const ModeOperators m(layout);
    CHECK(test::max_abs(qd_mode_operator(0.0, layout).matrix() - m.a_v.matrix()) < 1e-15);
    CHECK(test::max_abs(qd_mode_operator(0.5 * std::numbers::pi, layout).matrix() - m.a_h.matrix()) < 1e-15);
    const Operator b = qd_mode_operator(deg_to_rad(94.0), layout);
    const Index i0 = layout.index(0, 0, 0);
    CHECK(b.matrix()(i0, layout.index(1, 0, 0)).real() == doctest::Approx(0.99756).epsilon(1e-5));
    CHECK(b.matrix()(i0, layout.index(0, 1, 0)).real() == doctest::Approx(-0.06976).epsilon(1e-4));
}

TEST_CASE("hamiltonian") {
    SUBCASE("all zero") {
        SystemParams p;
        CHECK(test::max_abs(build_hamiltonian(p, SpaceLayout(2)).matrix()) == 0.0);
    }
    SUBCASE("coupling matrix element") {
        SystemParams p;
        p.g = 3.7;
        p.phi = 0.4;
        const SpaceLayout layout(1);
        const cplx h = build_hamiltonian(p, layout).matrix()(layout.index(1, 0, 0), layout.index(0, 0, 1));
        CHECK(std::abs(h - p.g * std::sin(p.phi)) < 1e-14);
    }
    SUBCASE("hermitian and excitation-conserving for random parameters") {
        std::mt19937_64 rng(7);
        const SpaceLayout layout(3);
        const Operator n = excitation_number(layout);
        for (int k = 0; k < 20; ++k) {
            SystemParams p = test::random_params(rng);
            const Operator h = build_hamiltonian(p, layout);
            CHECK(test::max_abs(h.matrix() - h.matrix().adjoint()) < 1e-14);
            p.eta_H = p.eta_V = 0.0;
            // Relative to the largest matrix element, since entries are O(100) in rad/ns.
            const Operator h0 = build_hamiltonian(p, layout);
            CHECK(test::max_abs(commutator(h0, n).matrix()) < 1e-13 * test::max_abs(h0.matrix()));
        }
    }
}

TEST_CASE("collapse operators") {
    const SpaceLayout layout(2);
    SystemParams p;
    p.kappa_H = 2.5;
    p.kappa_V = 0.0;
    const auto only_h = collapse_operators(p, layout);
    REQUIRE(only_h.size() == 1);
    CHECK(test::max_abs(only_h[0].matrix() - std::sqrt(2.5) * ModeOperators(layout).a_h.matrix()) < 1e-15);

    p = reference_defaults();
    CHECK(collapse_operators(p, layout).size() == 4);
    p.gamma_star = 0.0;
    CHECK(collapse_operators(p, layout).size() == 3);
    for (const Operator& c : collapse_operators(reference_defaults(), layout)) {
        CHECK(c.matrix().real().minCoeff() >= 0.0);
    }
}

TEST_CASE("reference preset") {
    const SystemParams p = reference_defaults();
    CHECK(p.weak_coupling());
    CHECK(p.mean_input_photons() == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(rad_per_ns_to_ghz(p.cavity_splitting()) == doctest::Approx(10.0));
    CHECK(p.omega_L == doctest::Approx(0.5 * (p.omega_c_H + p.omega_c_V)));
    CHECK(p.omega_QD == doctest::Approx(p.omega_L));
    CHECK(rad_per_ns_to_ghz(p.g) == doctest::Approx(12.0));
    CHECK(rad_per_ns_to_ghz(p.kappa_H) == doctest::Approx(40.0));
    CHECK(rad_to_deg(p.phi) == doctest::Approx(94.0));
}

TEST_CASE("invalid parameters name the field") {
    SystemParams p = reference_defaults();
    p.kappa_V = -1.0;
    try {
        p.validate();
        FAIL("validate accepted a negative rate");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "kappa_V");
    }
}
