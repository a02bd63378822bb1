#include "upb/presets.hpp"

#include <cmath>
#include <numbers>

#include "upb/errors.hpp"

namespace upb {

namespace {

constexpr double kPi = std::numbers::pi;

double wrapped_diff(double a, double b) {
    double d = std::fmod(a - b, kPi);
    if (d > 0.5 * kPi) d -= kPi;
    if (d < -0.5 * kPi) d += kPi;
    return d;
}

SweepOptions bare_options(const SweepOptions& opts) {
    SweepOptions o = opts;
    o.detector_fwhm = 0.0;
    return o;
}

OperatingPoint plate_point(std::string name, const SystemParams& p, double h, double q, const SweepOptions& opts,
                           const ProjectionEvaluator& ev) {
    OperatingPoint op;
    op.name = std::move(name);
    op.params = p;
    op.theta_in = input_angle(p);
    op.hwp = h;
    op.qwp = q;
    op.projection = output_mode(h, q, opts.polarizer, opts.plate_order);
    op.g2_bare = ev.g2_bare(op.projection);
    op.mean_n = ev.mean_n(op.projection);
    return op;
}

} // namespace

double plate_distance(double h1, double q1, double h2, double q2) {
    return std::hypot(wrapped_diff(h1, h2), wrapped_diff(q1, q2));
}

OperatingPoint arrow_a(const SystemParams& base, const SweepOptions& opts) {
    OperatingPoint op;
    op.name = "arrow-A";
    op.params = with_input_polarization(base, 0.0);
    op.theta_in = 0.0;
    op.theta_out = 0.5 * kPi;
    op.projection = linear_output(op.theta_out);
    const ProjectionEvaluator ev(op.params, bare_options(opts));
    op.g2_bare = ev.g2_bare(op.projection);
    op.mean_n = ev.mean_n(op.projection);
    return op;
}

OperatingPoint arrow_b(const SystemParams& base, const std::vector<double>& theta_out, const SweepOptions& opts) {
    if (theta_out.empty()) throw InvalidArgument("theta_out grid must be non-empty");
    OperatingPoint op;
    op.name = "arrow-B";
    op.theta_in = 0.25 * kPi;
    op.params = with_input_polarization(base, op.theta_in);
    const ProjectionEvaluator ev(op.params, bare_options(opts));
    double best = std::numeric_limits<double>::infinity();
    for (double t : theta_out) {
        const double g = ev.g2_bare(linear_output(t));
        if (g < best) {
            best = g;
            op.theta_out = t;
        }
    }
    if (!std::isfinite(best)) throw NoFeasibleOutput("no linear analyzer angle reaches the photon floor");
    op.projection = linear_output(op.theta_out);
    op.g2_bare = best;
    op.mean_n = ev.mean_n(op.projection);
    return op;
}

BunchingPair arrows_cd(const SystemParams& p, const std::vector<double>& hwp_angles,
                       const std::vector<double>& qwp_angles, const SweepOptions& opts, double neighbourhood) {
    BunchingPair out;
    out.map = sweep_waveplates(p, hwp_angles, qwp_angles, opts);
    const ProjectionEvaluator ev(p, bare_options(opts));

    std::size_t best = out.map.records.size();
    for (std::size_t k = 0; k < out.map.records.size(); ++k) {
        const PointRecord& r = out.map.records[k];
        if (r.status != Status::ok) continue;
        if (best == out.map.records.size() || r.g2_bare < out.map.records[best].g2_bare) best = k;
    }
    if (best == out.map.records.size()) throw NoFeasibleOutput("waveplate map has no valid point");
    const std::size_t nq = qwp_angles.size();
    double h = hwp_angles[best / nq], q = qwp_angles[best % nq];

    const auto f = [&](const std::array<double, 2>& x) {
        const double g = ev.g2_bare(output_mode(x[0], x[1], opts.polarizer, opts.plate_order));
        return std::isnan(g) ? std::numeric_limits<double>::infinity() : g;
    };
    const double step = deg_to_rad(1.0);
    const SimplexResult s = nelder_mead(f, {{{h, q}, {h + step, q}, {h, q + step}}});
    if (s.value < out.map.records[best].g2_bare) {
        h = std::fmod(s.x[0], kPi);
        q = std::fmod(s.x[1], kPi);
        if (h < 0.0) h += kPi;
        if (q < 0.0) q += kPi;
    }
    out.d = plate_point("arrow-D", p, h, q, opts, ev);

    std::size_t bunch = out.map.records.size();
    for (std::size_t k = 0; k < out.map.records.size(); ++k) {
        const PointRecord& r = out.map.records[k];
        if (r.status != Status::ok) continue;
        if (plate_distance(hwp_angles[k / nq], qwp_angles[k % nq], h, q) > neighbourhood) continue;
        if (bunch == out.map.records.size() || r.g2_bare > out.map.records[bunch].g2_bare) bunch = k;
    }
    if (bunch == out.map.records.size()) throw NoFeasibleOutput("no valid map point near the antibunching minimum");
    out.c = plate_point("arrow-C", p, hwp_angles[bunch / nq], qwp_angles[bunch % nq], opts, ev);
    return out;
}

OperatingPoint resolve_preset(const std::string& name, const SystemParams& base, double theta_in_default,
                              const std::vector<double>& hwp_angles, const std::vector<double>& qwp_angles,
                              const std::vector<double>& theta_out, const SweepOptions& opts) {
    if (name == "arrow-A") return arrow_a(base, opts);
    if (name == "arrow-B") return arrow_b(base, theta_out, opts);
    if (name == "arrow-C" || name == "arrow-D") {
        const SystemParams p = with_input_polarization(base, theta_in_default);
        BunchingPair cd = arrows_cd(p, hwp_angles, qwp_angles, opts);
        return name == "arrow-C" ? cd.c : cd.d;
    }
    throw ConfigError("preset", "unknown preset \"" + name + "\" (expected arrow-A, arrow-B, arrow-C or arrow-D)");
}

} // namespace upb
