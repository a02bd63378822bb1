// config.hpp: run configuration in lab units (GHz, degrees, ps), JSON I/O.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "upb/model.hpp"
#include "upb/polarization.hpp"
#include "upb/sweep.hpp"

namespace upb {

// Half-open uniform grid [lo_deg, hi_deg) with `points` samples.
struct AngleGrid {
    double lo_deg = 0.0;
    double hi_deg = 180.0;
    int points = 121;

    std::vector<double> radians() const;
    friend bool operator==(const AngleGrid&, const AngleGrid&) = default;
};

// Frequencies in GHz (divide rad/ns by 2 pi), angles in degrees.
struct SystemConfig {
    double omega_L_ghz = 0.0;
    double omega_c_H_ghz = 5.0;
    double omega_c_V_ghz = -5.0;
    double omega_QD_ghz = 0.0;
    double g_ghz = 12.0;
    double phi_deg = 94.0;
    double kappa_H_ghz = 40.0;
    double kappa_V_ghz = 40.0;
    double gamma_par_ghz = 1.0;
    double gamma_star_ghz = 1.0;
    double purcell_F_p = 11.2;
    double theta_in_deg = 45.0;
    // ((eta_H + eta_V) / kappa)^2 at theta_in = 45 deg; sets the constant drive power.
    double mean_input_photons = kReferenceInputPhotons;

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct Fig2Config {
    AngleGrid theta_in{};
    AngleGrid theta_out{};
    double cavity_splitting_ghz = 0.0;

    friend bool operator==(const Fig2Config&, const Fig2Config&) = default;
};

struct Fig3Config {
    AngleGrid hwp{};
    AngleGrid qwp{};
    std::string polarizer = "H";
    std::string plate_order = "hwp_then_qwp";

    friend bool operator==(const Fig3Config&, const Fig3Config&) = default;
};

struct BrightnessConfig {
    AngleGrid theta_in{0.0, 180.0, 36};
    std::vector<double> cavity_splittings_ghz{0.0, 10.0, 20.0};

    friend bool operator==(const BrightnessConfig&, const BrightnessConfig&) = default;
};

struct RunConfig {
    SystemConfig system{};
    int n_max = 3;
    double detector_fwhm_ps = 530.0;
    std::string detector_kernel = "gaussian";
    int tau_points = 2048;
    int workers = 1;
    std::string output_dir = "out";
    std::uint64_t seed = 20180601;
    int optimizer_grid = 64;
    int optimizer_starts = 8;
    Fig2Config fig2{};
    Fig3Config fig3{};
    BrightnessConfig brightness{};

    // Throws ConfigError naming the first invalid field.
    void validate() const;

    SystemParams system_params() const;
    SweepOptions sweep_options() const;
    OptimizerOptions optimizer_options() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Unknown keys and wrong types are ConfigErrors with a dotted field path.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& c, const std::filesystem::path& path);

// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when
// possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

PolarizerAxis parse_polarizer(const std::string& s);
PlateOrder parse_plate_order(const std::string& s);
KernelShape parse_kernel(const std::string& s);

} // namespace upb
