// ode.hpp: Adaptive Dormand-Prince 5(4) integrator with continuous
// (dense) output for autonomous linear systems y' = f(y).
//
// The state is a column block so several vectors can share one step-size
// sequence. Stiffness is detected with the Hairer-Wanner h*lambda test and
// reported in the diagnostics; it does not abort the integration.

#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace upb {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-12;
    double h_initial = 0.0; // 0 selects a starting step automatically
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 0.0;
    long max_steps = 10'000'000;
};

struct OdeDiagnostics {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
    bool stiffness_detected = false;
    double final_step = 0.0;

    std::string summary() const;
};

using OdeRhs = std::function<void(const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy)>;
using OdeObserver = std::function<void(std::size_t index, const Eigen::MatrixXcd& y)>;

// Integrates from t = 0 and reports y at each entry of `times` (ascending,
// non-negative). Throws IntegrationFailure when the step size underflows or
// the step budget runs out.
OdeDiagnostics integrate_dopri5(const OdeRhs& rhs, Eigen::MatrixXcd y0, std::span<const double> times,
                                const OdeObserver& observe, const OdeOptions& opts = {});

} // namespace upb
