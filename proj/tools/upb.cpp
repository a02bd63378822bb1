// upb: command-line driver for the polarization photon-blockade simulator.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selftest.hpp"
#include "upb/config.hpp"
#include "upb/csv.hpp"
#include "upb/dynamics.hpp"
#include "upb/errors.hpp"
#include "upb/observables.hpp"
#include "upb/presets.hpp"
#include "upb/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<int> workers;
    std::optional<int> n_max;
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
};

struct PointChoice {
    std::string preset;
    std::optional<double> theta_out_deg;
    std::optional<double> hwp_deg;
    std::optional<double> qwp_deg;
};

upb::RunConfig resolve_config(const Globals& g) {
    json doc = upb::config_to_json(upb::RunConfig{});
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw upb::ConfigError("--config", "cannot open " + g.config_path);
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw upb::ConfigError("--config", std::string("JSON parse error: ") + e.what());
        }
    }
    for (const std::string& o : g.overrides) upb::apply_override(doc, o);
    if (g.workers) doc["workers"] = *g.workers;
    if (g.n_max) doc["n_max"] = *g.n_max;
    if (g.output_dir) doc["output_dir"] = *g.output_dir;
    if (g.seed) doc["seed"] = *g.seed;
    return upb::config_from_json(doc);
}

json provenance(const upb::RunConfig& cfg, const std::string& command, const upb::SystemParams& p) {
    return {{"command", command}, {"config", upb::config_to_json(cfg)}, {"system_params", upb::params_to_json(p)}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw upb::Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

// Sidecar next to every CSV: <name>.csv -> <name>.csv.json
void write_sidecar(const fs::path& csv, json meta) {
    meta["file"] = csv.filename().string();
    write_json(fs::path(csv.string() + ".json"), meta);
}

fs::path output_dir(const upb::RunConfig& cfg) {
    fs::path d(cfg.output_dir);
    fs::create_directories(d);
    return d;
}

json projection_json(const upb::OutputProjection& c) {
    return {{"u_re", c.u.real()}, {"u_im", c.u.imag()}, {"v_re", c.v.real()}, {"v_im", c.v.imag()}};
}

json point_json(const upb::OperatingPoint& op) {
    json j = {{"name", op.name},
              {"theta_in_deg", upb::rad_to_deg(op.theta_in)},
              {"g2_bare", op.g2_bare},
              {"mean_n", op.mean_n},
              {"projection", projection_json(op.projection)}};
    if (!std::isnan(op.hwp)) j["hwp_deg"] = upb::rad_to_deg(op.hwp);
    if (!std::isnan(op.qwp)) j["qwp_deg"] = upb::rad_to_deg(op.qwp);
    if (!std::isnan(op.theta_out)) j["theta_out_deg"] = upb::rad_to_deg(op.theta_out);
    return j;
}

upb::OperatingPoint choose_point(const upb::RunConfig& cfg, const PointChoice& pc) {
    const upb::SweepOptions opts = cfg.sweep_options();
    const upb::SystemParams base = cfg.system_params();
    if (pc.theta_out_deg || pc.hwp_deg || pc.qwp_deg) {
        if (!pc.preset.empty()) throw upb::ConfigError("--preset", "cannot be combined with explicit angles");
        upb::OperatingPoint op;
        op.params = base;
        op.theta_in = upb::deg_to_rad(cfg.system.theta_in_deg);
        if (pc.theta_out_deg) {
            if (pc.hwp_deg || pc.qwp_deg) throw upb::ConfigError("--theta-out", "cannot be combined with plates");
            op.name = "linear";
            op.theta_out = upb::deg_to_rad(*pc.theta_out_deg);
            op.projection = upb::linear_output(op.theta_out);
        } else {
            op.name = "plates";
            op.hwp = upb::deg_to_rad(pc.hwp_deg.value_or(0.0));
            op.qwp = upb::deg_to_rad(pc.qwp_deg.value_or(0.0));
            op.projection = upb::output_mode(op.hwp, op.qwp, opts.polarizer, opts.plate_order);
        }
        return op;
    }
    const std::string name = pc.preset.empty() ? "arrow-D" : pc.preset;
    return upb::resolve_preset(name, base, upb::deg_to_rad(cfg.system.theta_in_deg), cfg.fig3.hwp.radians(),
                               cfg.fig3.qwp.radians(), cfg.fig2.theta_out.radians(), opts);
}

void add_point_options(CLI::App* sub, PointChoice& pc) {
    sub->add_option("--preset", pc.preset, "Operating point: arrow-A, arrow-B, arrow-C, arrow-D (default arrow-D)");
    sub->add_option("--theta-out", pc.theta_out_deg, "Linear analyzer angle in degrees");
    sub->add_option("--hwp", pc.hwp_deg, "Half-wave plate angle in degrees");
    sub->add_option("--qwp", pc.qwp_deg, "Quarter-wave plate angle in degrees");
}

int cmd_steady(const upb::RunConfig& cfg, const PointChoice& pc) {
    const upb::SpaceLayout layout(cfg.n_max);
    std::optional<upb::OperatingPoint> op;
    upb::SystemParams p = cfg.system_params();
    if (!pc.preset.empty()) {
        op = choose_point(cfg, pc);
        p = op->params;
    }
    const upb::Operator h = upb::build_hamiltonian(p, layout);
    const auto c = upb::collapse_operators(p, layout);
    const upb::Superoperator l = upb::build_liouvillian(h, c);
    const upb::DensityMatrix rho = upb::steady_state(l);
    const upb::ModeOperators m(layout);
    json j = provenance(cfg, "steady", p);
    j["n_max"] = cfg.n_max;
    j["mean_n_H"] = rho.expect(m.a_h.adjoint() * m.a_h).real();
    j["mean_n_V"] = rho.expect(m.a_v.adjoint() * m.a_v).real();
    j["qd_population"] = rho.expect(m.sigma.adjoint() * m.sigma).real();
    j["trace"] = rho.trace();
    j["min_eigenvalue"] = rho.min_eigenvalue();
    j["residual"] = upb::steady_state_residual(l, rho);
    j["mean_input_photons"] = p.mean_input_photons();
    if (op) {
        const upb::G2Value g = upb::g2_zero(rho, op->projection);
        j["point"] = point_json(*op);
        j["mean_n_out"] = g.mean_n;
        j["g2_zero"] = g.value;
        j["status"] = upb::to_string(g.status);
    }
    write_json(output_dir(cfg) / "steady.json", j);
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_g2zero(const upb::RunConfig& cfg, const PointChoice& pc) {
    const upb::OperatingPoint op = choose_point(cfg, pc);
    const upb::SpaceLayout layout(cfg.n_max);
    const upb::Superoperator l = upb::build_liouvillian(upb::build_hamiltonian(op.params, layout),
                                                       upb::collapse_operators(op.params, layout));
    const upb::DensityMatrix rho = upb::steady_state(l);
    const upb::G2Value g = upb::g2_zero(rho, op.projection);
    json j = provenance(cfg, "g2zero", op.params);
    j["point"] = point_json(op);
    j["g2_zero"] = g.value;
    j["mean_n_out"] = g.mean_n;
    j["status"] = upb::to_string(g.status);
    write_json(output_dir(cfg) / "g2zero.json", j);
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_g2tau(const upb::RunConfig& cfg, const PointChoice& pc) {
    const upb::OperatingPoint op = choose_point(cfg, pc);
    const upb::SpaceLayout layout(cfg.n_max);
    const upb::Superoperator l = upb::build_liouvillian(upb::build_hamiltonian(op.params, layout),
                                                       upb::collapse_operators(op.params, layout));
    const upb::DensityMatrix rho = upb::steady_state(l);
    const std::vector<double> tau = upb::default_tau_grid(op.params, cfg.tau_points);
    const upb::CorrelationCurve bare = upb::g2_tau(l, rho, op.projection, tau);
    const upb::SweepOptions so = cfg.sweep_options();
    const upb::CorrelationCurve conv = upb::convolve_detector(bare, so.detector_fwhm, so.kernel);
    const fs::path path = output_dir(cfg) / ("g2tau_" + op.name + ".csv");
    upb::write_curve_csv(path, bare, conv);
    json meta = provenance(cfg, "g2tau", op.params);
    meta["point"] = point_json(op);
    meta["status"] = upb::to_string(bare.status);
    meta["mean_n_out"] = bare.mean_n;
    if (bare.status == upb::Status::ok) {
        meta["g2_bare_min"] = bare.min_value();
        meta["g2_convolved_min"] = conv.min_value();
        meta["g2_bare_zero"] = bare.at_zero();
        meta["g2_convolved_zero"] = conv.at_zero();
    }
    write_sidecar(path, meta);
    std::cout << "wrote " << path.string() << " (" << upb::to_string(bare.status) << ")\n";
    if (bare.status == upb::Status::ok) {
        std::cout << "g2(0) bare " << bare.at_zero() << ", convolved " << conv.at_zero() << "; minima "
                  << bare.min_value() << " / " << conv.min_value() << '\n';
    }
    return 0;
}

int cmd_fig2(const upb::RunConfig& cfg) {
    const upb::SystemParams p = upb::with_cavity_splitting(cfg.system_params(), cfg.fig2.cavity_splitting_ghz);
    const upb::SweepOptions opts = cfg.sweep_options();
    const upb::SweepGrid g = upb::sweep_linear(p, cfg.fig2.theta_in.radians(), cfg.fig2.theta_out.radians(), opts);
    const fs::path path = output_dir(cfg) / "fig2.csv";
    g.write_csv(path);
    json meta = provenance(cfg, "fig2", p);
    meta["cavity_splitting_ghz"] = cfg.fig2.cavity_splitting_ghz;
    meta["arrow_A"] = point_json(upb::arrow_a(p, opts));
    meta["arrow_B"] = point_json(upb::arrow_b(p, cfg.fig2.theta_out.radians(), opts));
    write_sidecar(path, meta);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_fig3(const upb::RunConfig& cfg) {
    const upb::SystemParams p = cfg.system_params();
    const upb::SweepOptions opts = cfg.sweep_options();
    const upb::BunchingPair cd = upb::arrows_cd(p, cfg.fig3.hwp.radians(), cfg.fig3.qwp.radians(), opts);
    const fs::path dir = output_dir(cfg);
    json meta = provenance(cfg, "fig3", p);
    meta["arrow_C"] = point_json(cd.c);
    meta["arrow_D"] = point_json(cd.d);
    {
        upb::SweepOptions bare = opts;
        bare.detector_fwhm = 0.0;
        const upb::ProjectionEvaluator ev(p, bare);
        const upb::OptimizerOptions oo = cfg.optimizer_options();
        const upb::OptimizeResult best = upb::optimize_output(ev, oo);
        json starts = json::array();
        for (const auto& r : upb::optimize_output_multistart(ev, cfg.seed, cfg.optimizer_starts, oo)) {
            starts.push_back(r.g2);
        }
        meta["optimizer"] = {{"g2_bare", best.g2},
                             {"mean_n", best.mean_n},
                             {"amplitude_angle_deg", upb::rad_to_deg(best.amplitude_angle)},
                             {"phase_deg", upb::rad_to_deg(best.phase)},
                             {"coarse_g2", best.coarse_g2},
                             {"multistart_g2", starts}};
    }
    const std::vector<std::pair<fs::path, std::string>> files = {
        {dir / "fig3_records.csv", ""},
        {dir / "fig3_n_out.csv", "mean_n_out"},
        {dir / "fig3_g2_bare.csv", "g2_bare"},
        {dir / "fig3_g2_convolved.csv", "g2_convolved"},
    };
    cd.map.write_csv(files[0].first);
    cd.map.write_map_csv(files[1].first, files[1].second, &upb::PointRecord::mean_n_out);
    cd.map.write_map_csv(files[2].first, files[2].second, &upb::PointRecord::g2_bare);
    cd.map.write_map_csv(files[3].first, files[3].second, &upb::PointRecord::g2_convolved);
    for (const auto& f : files) {
        write_sidecar(f.first, meta);
        std::cout << "wrote " << f.first.string() << '\n';
    }
    std::cout << "arrow-D g2 " << cd.d.g2_bare << ", arrow-C g2 " << cd.c.g2_bare << '\n';
    return 0;
}

int cmd_brightness(const upb::RunConfig& cfg) {
    const upb::SystemParams p = cfg.system_params();
    const std::vector<double> theta = cfg.brightness.theta_in.radians();
    const auto curves = upb::brightness_curve(p, theta, cfg.brightness.cavity_splittings_ghz, cfg.sweep_options(),
                                              cfg.optimizer_options());
    const fs::path dir = output_dir(cfg);
    for (const upb::BrightnessCurve& c : curves) {
        const fs::path path = dir / ("brightness_" + upb::format_double(c.splitting_ghz) + "ghz.csv");
        c.write_csv(path);
        json meta = provenance(cfg, "brightness", upb::with_cavity_splitting(p, c.splitting_ghz));
        meta["cavity_splitting_ghz"] = c.splitting_ghz;
        try {
            meta["enhancement_45_over_0"] = c.enhancement(0.0, 0.25 * std::numbers::pi);
        } catch (const upb::InvalidArgument&) {
            meta["enhancement_45_over_0"] = nullptr;
        }
        write_sidecar(path, meta);
        std::cout << "wrote " << path.string();
        if (!meta["enhancement_45_over_0"].is_null()) {
            std::cout << " (n_out(45)/n_out(0) = " << meta["enhancement_45_over_0"].get<double>() << ')';
        }
        std::cout << '\n';
    }
    return 0;
}

int cmd_squeeze(const upb::RunConfig& cfg, bool with_presets) {
    const fs::path dir = output_dir(cfg);
    const fs::path table = dir / "squeeze_two_photon.csv";
    {
        upb::CsvWriter w(table, {"alpha_bar", "r", "p2_exact", "p2_approx", "relative_error"});
        for (double a : {0.02, 0.05, 0.1, 0.2}) {
            for (double ratio : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const upb::SqueezeSpec s{a, 0.0, ratio * a * a, 0.0};
                const double exact = upb::displaced_squeezed_fock_probs(s, 40).p[2];
                const double approx = upb::two_photon_amplitude_approx(s);
                w.cell(a).cell(s.r).cell(exact).cell(approx).cell(std::abs(approx - exact) / exact);
                w.end_row();
            }
        }
    }
    json meta = provenance(cfg, "squeeze", cfg.system_params());
    meta["squeezing_db_r_0.004"] = upb::squeezing_db(0.004);
    write_sidecar(table, meta);
    std::cout << "wrote " << table.string() << "\nsqueezing_db(0.004) = " << upb::squeezing_db(0.004) << " dB\n";
    if (!with_presets) return 0;

    const upb::SystemParams p = cfg.system_params();
    const upb::BunchingPair cd = upb::arrows_cd(p, cfg.fig3.hwp.radians(), cfg.fig3.qwp.radians(),
                                                cfg.sweep_options());
    const upb::SpaceLayout layout(cfg.n_max);
    const upb::Superoperator l =
        upb::build_liouvillian(upb::build_hamiltonian(p, layout), upb::collapse_operators(p, layout));
    const upb::DensityMatrix rho = upb::steady_state(l);
    const upb::ModeMoments mom = upb::ModeMoments::of(rho);
    json summary = provenance(cfg, "squeeze", p);
    for (const upb::OperatingPoint* op : {&cd.c, &cd.d}) {
        const upb::PhotonDistribution dist = upb::photon_distribution(rho, op->projection);
        const fs::path path = dir / ("distribution_" + op->name + ".csv");
        upb::write_distribution_csv(path, dist);
        json m = provenance(cfg, "squeeze", p);
        m["point"] = point_json(*op);
        write_sidecar(path, m);
        json s = upb::variance_summary(dist, upb::quadrature_stats(mom, op->projection));
        s["point"] = point_json(*op);
        summary[op->name] = s;
        std::cout << "wrote " << path.string() << '\n';
    }
    // Coherent reference at the arrow-D mean photon number.
    upb::PhotonDistribution coh;
    coh.n_max = 2 * cfg.n_max;
    for (int n = 0; n <= coh.n_max; ++n) coh.p.push_back(upb::poisson_probability(cd.d.mean_n, n));
    const fs::path cpath = dir / "distribution_coherent.csv";
    upb::write_distribution_csv(cpath, coh);
    json cm = provenance(cfg, "squeeze", p);
    cm["mean_n"] = cd.d.mean_n;
    write_sidecar(cpath, cm);
    write_json(dir / "variance_summary.json", summary);
    std::cout << "wrote " << cpath.string() << "\nwrote " << (dir / "variance_summary.json").string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polarization-resolved photon blockade simulator"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("-c,--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--set", g.overrides, "Override a config key, e.g. --set system.g_ghz=10 (repeatable)");
    app.add_option("-j,--workers", g.workers, "Worker threads for sweeps");
    app.add_option("--n-max", g.n_max, "Fock cutoff per cavity mode");
    app.add_option("-o,--output-dir", g.output_dir, "Output directory");
    app.add_option("--seed", g.seed, "Seed for optimizer multi-start");

    PointChoice pc;
    bool with_presets = true;
    auto* steady = app.add_subcommand("steady", "Steady-state summary (JSON)");
    steady->add_option("--preset", pc.preset, "Use the drive and projection of a named operating point");
    auto* g2zero = app.add_subcommand("g2zero", "g2(0) for one output projection");
    add_point_options(g2zero, pc);
    auto* g2tau = app.add_subcommand("g2tau", "g2(tau) curve with bare and convolved columns");
    add_point_options(g2tau, pc);
    app.add_subcommand("fig2", "Linear input/output polarization map");
    app.add_subcommand("fig3", "Waveplate map: n_out, g2 bare, g2 convolved");
    app.add_subcommand("brightness", "Optimized brightness versus input polarization");
    auto* squeeze = app.add_subcommand("squeeze", "Displaced squeezed state comparison and number statistics");
    squeeze->add_flag("!--no-presets", with_presets, "Skip the arrow-C/D photon statistics");
    app.add_subcommand("selftest", "Run the built-in oracle checks");
    app.add_subcommand("config", "Print the resolved configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const upb::RunConfig cfg = resolve_config(g);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "steady") return cmd_steady(cfg, pc);
        if (cmd == "g2zero") return cmd_g2zero(cfg, pc);
        if (cmd == "g2tau") return cmd_g2tau(cfg, pc);
        if (cmd == "fig2") return cmd_fig2(cfg);
        if (cmd == "fig3") return cmd_fig3(cfg);
        if (cmd == "brightness") return cmd_brightness(cfg);
        if (cmd == "squeeze") return cmd_squeeze(cfg, with_presets);
        if (cmd == "selftest") return upb::tools::run_selftest(std::cout) ? 0 : 2;
        if (cmd == "config") {
            std::cout << upb::config_to_json(cfg).dump(2) << '\n';
            return 0;
        }
        return 1;
    } catch (const upb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
