// polarization.hpp: Jones calculus for the input polarization and the
// output waveplate + polarizer projection.
//
// Phase convention: a retarder with fast axis at angle theta and retardance
// Gamma is R(theta) diag(1, e^{i Gamma}) R(-theta), so HWP(0) = diag(1, -1)
// and QWP(0) = diag(1, i). Angles are measured from the H axis.

#pragma once

#include <Eigen/Dense>

#include "upb/hilbert.hpp"
#include "upb/model.hpp"

namespace upb {

using JonesMatrix = Eigen::Matrix2cd;

enum class PolarizerAxis { H, V };

// Order of the two plates along the beam, cavity side first.
enum class PlateOrder { HwpThenQwp, QwpThenHwp };

JonesMatrix retarder(double fast_axis, double retardance);
JonesMatrix hwp(double theta);
JonesMatrix qwp(double theta);
JonesMatrix linear_polarizer(PolarizerAxis axis);

// Detected mode c = u a_H + v a_V.
struct OutputProjection {
    cplx u{1.0, 0.0};
    cplx v{0.0, 0.0};

    double norm_sq() const noexcept { return std::norm(u) + std::norm(v); }
    Operator mode(const SpaceLayout& layout) const;
};

// Unit-norm projection from relative-amplitude angle and relative phase:
// u = cos(a), v = sin(a) e^{i p}.
OutputProjection projection_from_angles(double amplitude_angle, double phase);

// c = cos(theta_out) a_H + sin(theta_out) a_V
OutputProjection linear_output(double theta_out);

OutputProjection output_mode(double hwp_angle, double qwp_angle, PolarizerAxis axis,
                             PlateOrder order = PlateOrder::HwpThenQwp);

struct InputDrive {
    double eta_h = 0.0;
    double eta_v = 0.0;
    double relative_phase = 0.0; // applied to the V drive term
};

// Linear input polarization at theta_in from H. Amplitudes stay non-negative;
// a sign difference between the components becomes relative_phase = pi.
InputDrive input_drive(double theta_in, double eta_total);

// Replaces the drive of p by input_drive(theta_in, p.eta_total()).
SystemParams with_input_polarization(SystemParams p, double theta_in);

// Drive angle in [0, pi) recovered from eta_H, eta_V and drive_phase.
double input_angle(const SystemParams& p);

} // namespace upb
