#include "upb/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "upb/csv.hpp"
#include "upb/errors.hpp"

namespace upb {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> to_degrees(const std::vector<double>& rad) {
    std::vector<double> out(rad.size());
    std::transform(rad.begin(), rad.end(), out.begin(), rad_to_deg);
    return out;
}

PointRecord failed_record() { return {}; }

double wrap(double x, double period) {
    double w = std::fmod(x, period);
    if (w < 0.0) w += period;
    return w;
}

struct CoarseBest {
    double a = 0.0;
    double p = 0.0;
    double value = std::numeric_limits<double>::infinity();
    int feasible = 0;
};

double objective(const ProjectionEvaluator& ev, double a, double p) {
    const double g = ev.g2_bare(projection_from_angles(a, p));
    return std::isnan(g) ? std::numeric_limits<double>::infinity() : g;
}

CoarseBest coarse_scan(const ProjectionEvaluator& ev, const OptimizerOptions& o) {
    if (o.grid < 2) throw InvalidArgument("optimizer grid needs at least 2 points per angle");
    CoarseBest best;
    for (int jp = 0; jp < o.grid; ++jp) {
        const double p = 2.0 * kPi * jp / o.grid;
        for (int ia = 0; ia < o.grid; ++ia) {
            const double a = kPi * ia / o.grid;
            const double g = ev.g2_bare(projection_from_angles(a, p));
            if (std::isnan(g)) continue;
            ++best.feasible;
            if (g < best.value - o.tie_tol) best = {a, p, g, best.feasible};
        }
    }
    if (best.feasible == 0) throw NoFeasibleOutput("every output projection is below the photon floor");
    return best;
}

OptimizeResult make_result(const ProjectionEvaluator& ev, double a, double p, double value,
                           const CoarseBest& coarse) {
    OptimizeResult r;
    // a and a - pi give the same projection up to a global sign.
    r.amplitude_angle = wrap(a, kPi);
    r.phase = wrap(p, 2.0 * kPi);
    r.projection = projection_from_angles(r.amplitude_angle, r.phase);
    r.g2 = value;
    r.mean_n = ev.mean_n(r.projection);
    r.coarse_g2 = coarse.value;
    r.coarse_feasible = coarse.feasible;
    return r;
}

} // namespace

void SweepGrid::write_csv(const std::filesystem::path& path) const {
    std::vector<std::string> header;
    for (const Axis& a : axes) header.push_back(a.name);
    for (const char* h : {"mean_n_out", "g2_bare", "g2_convolved", "status"}) header.emplace_back(h);
    CsvWriter w(path, header);
    const std::size_t nj = axes.at(1).samples.size();
    for (std::size_t k = 0; k < records.size(); ++k) {
        const PointRecord& r = records[k];
        w.cell(axes[0].samples[k / nj]).cell(axes[1].samples[k % nj]);
        w.cell(r.mean_n_out).cell(r.g2_bare).cell(r.g2_convolved).cell(to_string(r.status));
        w.end_row();
    }
}

void SweepGrid::write_map_csv(const std::filesystem::path& path, const std::string& column,
                              double PointRecord::*field) const {
    CsvWriter w(path, std::vector<std::string>{axes.at(0).name, axes.at(1).name, column, "status"});
    const std::size_t nj = axes[1].samples.size();
    for (std::size_t k = 0; k < records.size(); ++k) {
        w.cell(axes[0].samples[k / nj]).cell(axes[1].samples[k % nj]);
        w.cell(records[k].*field).cell(to_string(records[k].status));
        w.end_row();
    }
}

ProjectionEvaluator::ProjectionEvaluator(const SystemParams& p, const SweepOptions& opts) {
    p.validate();
    const SpaceLayout layout(opts.n_max);
    const Operator h = build_hamiltonian(p, layout);
    const std::vector<Operator> c = collapse_operators(p, layout);
    l_.emplace(build_liouvillian(h, c));
    rho_.emplace(steady_state(*l_));
    moments_ = ModeMoments::of(*rho_);
    if (opts.detector_fwhm > 0.0) {
        const std::vector<double> grid = default_tau_grid(p, opts.tau_points);
        kernel_.emplace(grid[1] - grid[0], opts.detector_fwhm, opts.kernel);
        std::vector<double> half(grid.begin(), grid.begin() + kernel_->half_width() + 1);
        basis_.emplace(*l_, *rho_, std::move(half), opts.ode);
    }
}

double ProjectionEvaluator::g2_bare(const OutputProjection& c) const {
    const double n = moments_.mean_n(c);
    if (!(n >= kPhotonFloor)) return std::numeric_limits<double>::quiet_NaN();
    return moments_.pair_correlation(c) / (n * n);
}

PointRecord ProjectionEvaluator::evaluate(const OutputProjection& c) const {
    PointRecord r;
    r.mean_n_out = moments_.mean_n(c);
    if (!(r.mean_n_out >= kPhotonFloor)) {
        r.status = Status::low_intensity;
        return r;
    }
    r.status = Status::ok;
    r.g2_bare = moments_.pair_correlation(c) / (r.mean_n_out * r.mean_n_out);
    r.g2_convolved = kernel_ ? kernel_->at_zero(basis_->g2_half(c)) : r.g2_bare;
    return r;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(std::size_t(std::max(workers, 1)), count);
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

SweepGrid sweep_linear(const SystemParams& p, const std::vector<double>& theta_in,
                       const std::vector<double>& theta_out, const SweepOptions& opts) {
    if (theta_in.empty() || theta_out.empty()) throw InvalidArgument("sweep grids must be non-empty");
    SweepGrid g;
    g.axes = {{"theta_in_deg", "deg", to_degrees(theta_in)}, {"theta_out_deg", "deg", to_degrees(theta_out)}};
    g.records.assign(theta_in.size() * theta_out.size(), failed_record());
    parallel_for(theta_in.size(), opts.workers, [&](std::size_t i) {
        try {
            const ProjectionEvaluator ev(with_input_polarization(p, theta_in[i]), opts);
            for (std::size_t j = 0; j < theta_out.size(); ++j) {
                g.records[g.index(i, j)] = ev.evaluate(linear_output(theta_out[j]));
            }
        } catch (const Error&) {
            // The row keeps its solver_failed records.
        }
    });
    return g;
}

SweepGrid sweep_waveplates(const SystemParams& p, const std::vector<double>& hwp_angles,
                           const std::vector<double>& qwp_angles, const SweepOptions& opts) {
    if (hwp_angles.empty() || qwp_angles.empty()) throw InvalidArgument("sweep grids must be non-empty");
    SweepGrid g;
    g.axes = {{"hwp_deg", "deg", to_degrees(hwp_angles)}, {"qwp_deg", "deg", to_degrees(qwp_angles)}};
    g.records.assign(hwp_angles.size() * qwp_angles.size(), failed_record());
    std::optional<ProjectionEvaluator> ev;
    try {
        ev.emplace(p, opts);
    } catch (const Error&) {
        return g;
    }
    parallel_for(hwp_angles.size(), opts.workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < qwp_angles.size(); ++j) {
            const OutputProjection c = output_mode(hwp_angles[i], qwp_angles[j], opts.polarizer, opts.plate_order);
            g.records[g.index(i, j)] = ev->evaluate(c);
        }
    });
    return g;
}

SimplexResult nelder_mead(const std::function<double(const std::array<double, 2>&)>& f,
                          const std::array<std::array<double, 2>, 3>& simplex, double ftol, double xtol,
                          int max_iter) {
    using Pt = std::array<double, 2>;
    std::array<Pt, 3> x = simplex;
    std::array<double, 3> fx{};
    for (int k = 0; k < 3; ++k) fx[k] = f(x[k]);
    auto lerp = [](const Pt& a, const Pt& b, double t) { return Pt{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}; };

    SimplexResult r;
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        const std::array<Pt, 3> xs{x[order[0]], x[order[1]], x[order[2]]};
        const std::array<double, 3> fs{fx[order[0]], fx[order[1]], fx[order[2]]};
        x = xs;
        fx = fs;

        double xspread = 0.0;
        for (int k = 1; k < 3; ++k)
            for (int d = 0; d < 2; ++d) xspread = std::max(xspread, std::abs(x[k][d] - x[0][d]));
        if (std::isfinite(fx[2]) && fx[2] - fx[0] <= ftol && xspread <= xtol) break;

        const Pt centroid = lerp(x[0], x[1], 0.5);
        const Pt xr = lerp(centroid, x[2], -1.0);
        const double fr = f(xr);
        if (fr < fx[0]) {
            const Pt xe = lerp(centroid, x[2], -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                x[2] = xe;
                fx[2] = fe;
            } else {
                x[2] = xr;
                fx[2] = fr;
            }
            continue;
        }
        if (fr < fx[1]) {
            x[2] = xr;
            fx[2] = fr;
            continue;
        }
        const bool outside = fr < fx[2];
        const Pt xc = outside ? lerp(centroid, xr, 0.5) : lerp(centroid, x[2], 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : fx[2])) {
            x[2] = xc;
            fx[2] = fc;
            continue;
        }
        for (int k = 1; k < 3; ++k) {
            x[k] = lerp(x[0], x[k], 0.5);
            fx[k] = f(x[k]);
        }
    }
    const int best = int(std::min_element(fx.begin(), fx.end()) - fx.begin());
    r.x = x[best];
    r.value = fx[best];
    return r;
}

OptimizeResult optimize_output(const ProjectionEvaluator& ev, const OptimizerOptions& o) {
    const CoarseBest coarse = coarse_scan(ev, o);
    const double da = kPi / o.grid, dp = 2.0 * kPi / o.grid;
    const auto f = [&](const std::array<double, 2>& x) { return objective(ev, x[0], x[1]); };
    const SimplexResult s =
        nelder_mead(f, {{{coarse.a, coarse.p}, {coarse.a + da, coarse.p}, {coarse.a, coarse.p + dp}}}, o.ftol, o.xtol);
    if (s.value < coarse.value - o.tie_tol) return make_result(ev, s.x[0], s.x[1], s.value, coarse);
    return make_result(ev, coarse.a, coarse.p, coarse.value, coarse);
}

OptimizeResult optimize_output(const SystemParams& p, double theta_in, const SweepOptions& opts,
                               const OptimizerOptions& o) {
    SweepOptions bare = opts;
    bare.detector_fwhm = 0.0;
    const ProjectionEvaluator ev(with_input_polarization(p, theta_in), bare);
    return optimize_output(ev, o);
}

std::vector<OptimizeResult> optimize_output_multistart(const ProjectionEvaluator& ev, std::uint64_t seed,
                                                       int starts, const OptimizerOptions& o) {
    const CoarseBest coarse = coarse_scan(ev, o);
    const double da = kPi / o.grid, dp = 2.0 * kPi / o.grid;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    const auto f = [&](const std::array<double, 2>& x) { return objective(ev, x[0], x[1]); };

    std::vector<OptimizeResult> out;
    for (int s = 0; s < starts; ++s) {
        const double a0 = coarse.a + 2.0 * da * offset(rng);
        const double p0 = coarse.p + 2.0 * dp * offset(rng);
        const double sa = da * scale(rng), sp = dp * scale(rng);
        const SimplexResult r = nelder_mead(f, {{{a0, p0}, {a0 + sa, p0}, {a0, p0 + sp}}}, o.ftol, o.xtol);
        out.push_back(make_result(ev, r.x[0], r.x[1], r.value, coarse));
    }
    return out;
}

double BrightnessCurve::enhancement(double theta_a, double theta_b) const {
    auto find = [&](double t) {
        for (const BrightnessPoint& q : points)
            if (std::abs(q.theta_in - t) < 1e-9) return q.mean_n_out;
        throw InvalidArgument("input angle " + std::to_string(rad_to_deg(t)) + " deg is not on the grid");
    };
    return find(theta_b) / find(theta_a);
}

void BrightnessCurve::write_csv(const std::filesystem::path& path) const {
    CsvWriter w(path, {"theta_in_deg", "mean_n_out", "g2_bare", "amplitude_angle_deg", "phase_deg",
                       "mean_n_cross", "status"});
    for (const BrightnessPoint& q : points) {
        w.cell(rad_to_deg(q.theta_in)).cell(q.mean_n_out).cell(q.g2_bare);
        w.cell(rad_to_deg(q.amplitude_angle)).cell(rad_to_deg(q.phase)).cell(q.mean_n_cross);
        w.cell(to_string(q.status));
        w.end_row();
    }
}

std::vector<BrightnessCurve> brightness_curve(const SystemParams& p, const std::vector<double>& theta_in,
                                              const std::vector<double>& splittings_ghz,
                                              const SweepOptions& opts, const OptimizerOptions& o) {
    if (theta_in.empty() || splittings_ghz.empty()) throw InvalidArgument("brightness grids must be non-empty");
    std::vector<BrightnessCurve> curves(splittings_ghz.size());
    for (std::size_t s = 0; s < splittings_ghz.size(); ++s) {
        curves[s].splitting_ghz = splittings_ghz[s];
        curves[s].points.resize(theta_in.size());
    }
    SweepOptions bare = opts;
    bare.detector_fwhm = 0.0;
    const std::size_t nt = theta_in.size();
    parallel_for(splittings_ghz.size() * nt, opts.workers, [&](std::size_t k) {
        const std::size_t s = k / nt, t = k % nt;
        BrightnessPoint& q = curves[s].points[t];
        q.theta_in = theta_in[t];
        try {
            const SystemParams ps = with_input_polarization(with_cavity_splitting(p, splittings_ghz[s]), theta_in[t]);
            const ProjectionEvaluator ev(ps, bare);
            q.mean_n_cross = ev.mean_n(linear_output(0.5 * kPi));
            const OptimizeResult r = optimize_output(ev, o);
            q.mean_n_out = r.mean_n;
            q.g2_bare = r.g2;
            q.amplitude_angle = r.amplitude_angle;
            q.phase = r.phase;
            q.status = Status::ok;
        } catch (const NoFeasibleOutput&) {
            q.status = Status::low_intensity;
        } catch (const Error&) {
            q.status = Status::solver_failed;
        }
    });
    return curves;
}

std::vector<double> half_open_grid(double lo, double hi, int n) {
    if (n < 1) throw InvalidArgument("grid needs at least one point");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) g[std::size_t(k)] = lo + (hi - lo) * double(k) / double(n);
    return g;
}

nlohmann::json params_to_json(const SystemParams& p) {
    return {{"units", "rad/ns (rates and frequencies), rad (angles)"},
            {"omega_L", p.omega_L},
            {"omega_c_H", p.omega_c_H},
            {"omega_c_V", p.omega_c_V},
            {"omega_QD", p.omega_QD},
            {"g", p.g},
            {"phi", p.phi},
            {"eta_H", p.eta_H},
            {"eta_V", p.eta_V},
            {"drive_phase", p.drive_phase},
            {"kappa_H", p.kappa_H},
            {"kappa_V", p.kappa_V},
            {"gamma_par", p.gamma_par},
            {"gamma_star", p.gamma_star},
            {"purcell_F_p", p.purcell_F_p},
            {"mean_input_photons", p.mean_input_photons()}};
}

} // namespace upb
