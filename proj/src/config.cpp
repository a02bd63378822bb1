#include "upb/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "upb/errors.hpp"

namespace upb {

using nlohmann::json;

namespace {

const json& empty_object() {
    static const json e = json::object();
    return e;
}

class Reader {
public:
    Reader(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    Reader child(const char* key) {
        seen_.insert(key);
        return Reader(j_->contains(key) ? j_->at(key) : empty_object(), field(key));
    }

    void get(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(field(key), "expected a number");
            out = v->get<double>();
        }
    }

    void get(const char* key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
            out = v->get<int>();
        }
    }

    void get(const char* key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void get(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(field(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void get(const char* key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
            std::vector<double> tmp;
            for (const json& x : *v) {
                if (!x.is_number()) throw ConfigError(field(key), "expected an array of numbers");
                tmp.push_back(x.get<double>());
            }
            out = std::move(tmp);
        }
    }

    void get(const char* key, AngleGrid& out) {
        Reader r = child(key);
        r.get("lo_deg", out.lo_deg);
        r.get("hi_deg", out.hi_deg);
        r.get("points", out.points);
        r.finish();
    }

    void finish() const {
        for (const auto& [k, v] : j_->items()) {
            if (!seen_.count(k)) throw ConfigError(field(k.c_str()), "unknown key");
        }
    }

private:
    const json* find(const char* key) {
        seen_.insert(key);
        const auto it = j_->find(key);
        return it == j_->end() ? nullptr : &*it;
    }

    std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

json grid_json(const AngleGrid& g) { return {{"lo_deg", g.lo_deg}, {"hi_deg", g.hi_deg}, {"points", g.points}}; }

void check_grid(const AngleGrid& g, const std::string& name) {
    if (g.points < 1) throw ConfigError(name + ".points", "must be >= 1");
    if (!std::isfinite(g.lo_deg) || !std::isfinite(g.hi_deg) || !(g.hi_deg > g.lo_deg)) {
        throw ConfigError(name, "needs finite lo_deg < hi_deg");
    }
}

} // namespace

std::vector<double> AngleGrid::radians() const { return half_open_grid(deg_to_rad(lo_deg), deg_to_rad(hi_deg), points); }

PolarizerAxis parse_polarizer(const std::string& s) {
    if (s == "H") return PolarizerAxis::H;
    if (s == "V") return PolarizerAxis::V;
    throw ConfigError("fig3.polarizer", "must be \"H\" or \"V\", got \"" + s + "\"");
}

PlateOrder parse_plate_order(const std::string& s) {
    if (s == "hwp_then_qwp") return PlateOrder::HwpThenQwp;
    if (s == "qwp_then_hwp") return PlateOrder::QwpThenHwp;
    throw ConfigError("fig3.plate_order", "must be \"hwp_then_qwp\" or \"qwp_then_hwp\", got \"" + s + "\"");
}

KernelShape parse_kernel(const std::string& s) {
    if (s == "gaussian") return KernelShape::Gaussian;
    if (s == "exponential") return KernelShape::TwoSidedExponential;
    throw ConfigError("detector_kernel", "must be \"gaussian\" or \"exponential\", got \"" + s + "\"");
}

void RunConfig::validate() const {
    if (n_max < 1) throw ConfigError("n_max", "must be >= 1");
    if (!(detector_fwhm_ps >= 0.0)) throw ConfigError("detector_fwhm_ps", "must be >= 0");
    parse_kernel(detector_kernel);
    if (tau_points < 2) throw ConfigError("tau_points", "must be >= 2");
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    if (optimizer_grid < 2) throw ConfigError("optimizer_grid", "must be >= 2");
    if (optimizer_starts < 1) throw ConfigError("optimizer_starts", "must be >= 1");
    if (!(system.mean_input_photons >= 0.0)) throw ConfigError("system.mean_input_photons", "must be >= 0");
    if (!std::isfinite(system.theta_in_deg)) throw ConfigError("system.theta_in_deg", "must be finite");
    check_grid(fig2.theta_in, "fig2.theta_in");
    check_grid(fig2.theta_out, "fig2.theta_out");
    check_grid(fig3.hwp, "fig3.hwp");
    check_grid(fig3.qwp, "fig3.qwp");
    check_grid(brightness.theta_in, "brightness.theta_in");
    if (!std::isfinite(fig2.cavity_splitting_ghz)) throw ConfigError("fig2.cavity_splitting_ghz", "must be finite");
    if (brightness.cavity_splittings_ghz.empty()) {
        throw ConfigError("brightness.cavity_splittings_ghz", "needs at least one splitting");
    }
    parse_polarizer(fig3.polarizer);
    parse_plate_order(fig3.plate_order);
    try {
        system_params().validate();
    } catch (const ConfigError& e) {
        // SystemParams names native fields; map back to config keys.
        const std::string& f = e.field();
        std::string key = f + "_ghz";
        if (f == "phi") key = "phi_deg";
        if (f == "eta_H" || f == "eta_V") key = "mean_input_photons";
        if (f == "drive_phase") key = "theta_in_deg";
        throw ConfigError("system." + key, std::string(e.what()).substr(f.size() + 2));
    }
}

SystemParams RunConfig::system_params() const {
    SystemParams p;
    p.omega_L = ghz_to_rad_per_ns(system.omega_L_ghz);
    p.omega_c_H = ghz_to_rad_per_ns(system.omega_c_H_ghz);
    p.omega_c_V = ghz_to_rad_per_ns(system.omega_c_V_ghz);
    p.omega_QD = ghz_to_rad_per_ns(system.omega_QD_ghz);
    p.g = ghz_to_rad_per_ns(system.g_ghz);
    p.phi = deg_to_rad(system.phi_deg);
    p.kappa_H = ghz_to_rad_per_ns(system.kappa_H_ghz);
    p.kappa_V = ghz_to_rad_per_ns(system.kappa_V_ghz);
    p.gamma_par = ghz_to_rad_per_ns(system.gamma_par_ghz);
    p.gamma_star = ghz_to_rad_per_ns(system.gamma_star_ghz);
    p.purcell_F_p = system.purcell_F_p;
    const double eta = p.mean_kappa() * std::sqrt(std::max(system.mean_input_photons, 0.0) / 2.0);
    p.eta_H = eta;
    return with_input_polarization(p, deg_to_rad(system.theta_in_deg));
}

SweepOptions RunConfig::sweep_options() const {
    SweepOptions o;
    o.n_max = n_max;
    o.workers = workers;
    o.detector_fwhm = detector_fwhm_ps * 1e-3;
    o.kernel = parse_kernel(detector_kernel);
    o.tau_points = tau_points;
    o.polarizer = parse_polarizer(fig3.polarizer);
    o.plate_order = parse_plate_order(fig3.plate_order);
    return o;
}

OptimizerOptions RunConfig::optimizer_options() const {
    OptimizerOptions o;
    o.grid = optimizer_grid;
    return o;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    Reader root(j, "");
    {
        Reader s = root.child("system");
        SystemConfig& y = c.system;
        s.get("omega_L_ghz", y.omega_L_ghz);
        s.get("omega_c_H_ghz", y.omega_c_H_ghz);
        s.get("omega_c_V_ghz", y.omega_c_V_ghz);
        s.get("omega_QD_ghz", y.omega_QD_ghz);
        s.get("g_ghz", y.g_ghz);
        s.get("phi_deg", y.phi_deg);
        s.get("kappa_H_ghz", y.kappa_H_ghz);
        s.get("kappa_V_ghz", y.kappa_V_ghz);
        s.get("gamma_par_ghz", y.gamma_par_ghz);
        s.get("gamma_star_ghz", y.gamma_star_ghz);
        s.get("purcell_F_p", y.purcell_F_p);
        s.get("theta_in_deg", y.theta_in_deg);
        s.get("mean_input_photons", y.mean_input_photons);
        s.finish();
    }
    root.get("n_max", c.n_max);
    root.get("detector_fwhm_ps", c.detector_fwhm_ps);
    root.get("detector_kernel", c.detector_kernel);
    root.get("tau_points", c.tau_points);
    root.get("workers", c.workers);
    root.get("output_dir", c.output_dir);
    root.get("seed", c.seed);
    root.get("optimizer_grid", c.optimizer_grid);
    root.get("optimizer_starts", c.optimizer_starts);
    {
        Reader f = root.child("fig2");
        f.get("theta_in", c.fig2.theta_in);
        f.get("theta_out", c.fig2.theta_out);
        f.get("cavity_splitting_ghz", c.fig2.cavity_splitting_ghz);
        f.finish();
    }
    {
        Reader f = root.child("fig3");
        f.get("hwp", c.fig3.hwp);
        f.get("qwp", c.fig3.qwp);
        f.get("polarizer", c.fig3.polarizer);
        f.get("plate_order", c.fig3.plate_order);
        f.finish();
    }
    {
        Reader b = root.child("brightness");
        b.get("theta_in", c.brightness.theta_in);
        b.get("cavity_splittings_ghz", c.brightness.cavity_splittings_ghz);
        b.finish();
    }
    root.finish();
    c.validate();
    return c;
}

json config_to_json(const RunConfig& c) {
    const SystemConfig& y = c.system;
    json j;
    j["system"] = {{"omega_L_ghz", y.omega_L_ghz},       {"omega_c_H_ghz", y.omega_c_H_ghz},
                   {"omega_c_V_ghz", y.omega_c_V_ghz},   {"omega_QD_ghz", y.omega_QD_ghz},
                   {"g_ghz", y.g_ghz},                   {"phi_deg", y.phi_deg},
                   {"kappa_H_ghz", y.kappa_H_ghz},       {"kappa_V_ghz", y.kappa_V_ghz},
                   {"gamma_par_ghz", y.gamma_par_ghz},   {"gamma_star_ghz", y.gamma_star_ghz},
                   {"purcell_F_p", y.purcell_F_p},       {"theta_in_deg", y.theta_in_deg},
                   {"mean_input_photons", y.mean_input_photons}};
    j["n_max"] = c.n_max;
    j["detector_fwhm_ps"] = c.detector_fwhm_ps;
    j["detector_kernel"] = c.detector_kernel;
    j["tau_points"] = c.tau_points;
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["optimizer_grid"] = c.optimizer_grid;
    j["optimizer_starts"] = c.optimizer_starts;
    j["fig2"] = {{"theta_in", grid_json(c.fig2.theta_in)},
                 {"theta_out", grid_json(c.fig2.theta_out)},
                 {"cavity_splitting_ghz", c.fig2.cavity_splitting_ghz}};
    j["fig3"] = {{"hwp", grid_json(c.fig3.hwp)},
                 {"qwp", grid_json(c.fig3.qwp)},
                 {"polarizer", c.fig3.polarizer},
                 {"plate_order", c.fig3.plate_order}};
    j["brightness"] = {{"theta_in", grid_json(c.brightness.theta_in)},
                       {"cavity_splittings_ghz", c.brightness.cavity_splittings_ghz}};
    return j;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("JSON parse error: ") + e.what());
    }
    return config_from_json(j);
}

void save_config(const RunConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << config_to_json(c).dump(2) << '\n';
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(assignment, "override must look like key.path=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError(key, "empty path component");
        if (!node->is_object()) throw ConfigError(key, "path crosses a non-object value");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

} // namespace upb
