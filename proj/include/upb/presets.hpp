// presets.hpp: named operating points (arrows A to D).
//
// A: H drive, V detection. B: 45 deg drive, best linear analyzer.
// D: antibunching minimum of the waveplate map, refined in plate angles.
// C: bunching maximum of the same map within a plate-angle radius of D.
// C and D are recomputed for every parameter set.

#pragma once

#include <limits>
#include <optional>
#include <string>

#include "upb/sweep.hpp"

namespace upb {

struct OperatingPoint {
    std::string name;
    SystemParams params;          // drive already set for theta_in
    OutputProjection projection;
    double theta_in = 0.0;        // rad
    double hwp = std::numeric_limits<double>::quiet_NaN(); // rad, plate-defined points only
    double qwp = std::numeric_limits<double>::quiet_NaN();
    double theta_out = std::numeric_limits<double>::quiet_NaN(); // rad, linear-analyzer points only
    double g2_bare = 0.0;
    double mean_n = 0.0;
};

inline constexpr double kNeighbourhoodDeg = 30.0;

// Plate-angle distance with 180 deg periodicity on each axis, in rad.
double plate_distance(double h1, double q1, double h2, double q2);

// `base` carries everything but the drive polarization; eta_total is kept.
OperatingPoint arrow_a(const SystemParams& base, const SweepOptions& opts);
OperatingPoint arrow_b(const SystemParams& base, const std::vector<double>& theta_out, const SweepOptions& opts);

struct BunchingPair {
    OperatingPoint c;
    OperatingPoint d;
    SweepGrid map;
};

// `p` is used as given (theta_in and splitting already applied).
BunchingPair arrows_cd(const SystemParams& p, const std::vector<double>& hwp_angles,
                       const std::vector<double>& qwp_angles, const SweepOptions& opts,
                       double neighbourhood = deg_to_rad(kNeighbourhoodDeg));

// Resolves "arrow-A" .. "arrow-D"; throws ConfigError otherwise.
OperatingPoint resolve_preset(const std::string& name, const SystemParams& base, double theta_in_default,
                              const std::vector<double>& hwp_angles, const std::vector<double>& qwp_angles,
                              const std::vector<double>& theta_out, const SweepOptions& opts);

} // namespace upb
