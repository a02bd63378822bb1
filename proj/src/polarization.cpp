#include "upb/polarization.hpp"

#include <cmath>
#include <numbers>

#include "upb/errors.hpp"

namespace upb {

namespace {

Eigen::Matrix2d rotation(double theta) {
    Eigen::Matrix2d r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

} // namespace

JonesMatrix retarder(double fast_axis, double retardance) {
    JonesMatrix d = JonesMatrix::Zero();
    d(0, 0) = 1.0;
    d(1, 1) = std::polar(1.0, retardance);
    const JonesMatrix r = rotation(fast_axis).cast<cplx>();
    const JonesMatrix r_inv = rotation(-fast_axis).cast<cplx>();
    return r * d * r_inv;
}

JonesMatrix hwp(double theta) { return retarder(theta, std::numbers::pi); }

JonesMatrix qwp(double theta) { return retarder(theta, 0.5 * std::numbers::pi); }

JonesMatrix linear_polarizer(PolarizerAxis axis) {
    JonesMatrix p = JonesMatrix::Zero();
    if (axis == PolarizerAxis::H) {
        p(0, 0) = 1.0;
    } else {
        p(1, 1) = 1.0;
    }
    return p;
}

Operator OutputProjection::mode(const SpaceLayout& layout) const {
    const ModeOperators m(layout);
    return m.a_h * u + m.a_v * v;
}

OutputProjection projection_from_angles(double amplitude_angle, double phase) {
    return {cplx(std::cos(amplitude_angle), 0.0), std::polar(std::sin(amplitude_angle), phase)};
}

OutputProjection linear_output(double theta_out) {
    return {cplx(std::cos(theta_out), 0.0), cplx(std::sin(theta_out), 0.0)};
}

OutputProjection output_mode(double hwp_angle, double qwp_angle, PolarizerAxis axis, PlateOrder order) {
    const JonesMatrix plates = order == PlateOrder::HwpThenQwp ? JonesMatrix(qwp(qwp_angle) * hwp(hwp_angle))
                                                               : JonesMatrix(hwp(hwp_angle) * qwp(qwp_angle));
    const JonesMatrix total = linear_polarizer(axis) * plates;
    // The polarizer keeps one row; the detected field is that row applied to (a_H, a_V).
    const int row = axis == PolarizerAxis::H ? 0 : 1;
    OutputProjection c{total(row, 0), total(row, 1)};
    const double n = std::sqrt(c.norm_sq());
    c.u /= n;
    c.v /= n;
    return c;
}

InputDrive input_drive(double theta_in, double eta_total) {
    if (!(eta_total >= 0.0)) throw InvalidArgument("eta_total must be >= 0");
    // A global sign of the field is irrelevant, so fold theta into [0, pi).
    double t = std::fmod(theta_in, std::numbers::pi);
    if (t < 0.0) t += std::numbers::pi;
    InputDrive d;
    d.eta_h = eta_total * std::abs(std::cos(t));
    d.eta_v = eta_total * std::sin(t);
    d.relative_phase = t > 0.5 * std::numbers::pi ? std::numbers::pi : 0.0;
    return d;
}

SystemParams with_input_polarization(SystemParams p, double theta_in) {
    const InputDrive d = input_drive(theta_in, p.eta_total());
    p.eta_H = d.eta_h;
    p.eta_V = d.eta_v;
    p.drive_phase = d.relative_phase;
    return p;
}

double input_angle(const SystemParams& p) {
    const double t = std::atan2(p.eta_V, p.eta_H);
    return std::cos(p.drive_phase) < 0.0 && t > 0.0 ? std::numbers::pi - t : t;
}

} // namespace upb
