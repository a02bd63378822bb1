// sweep.hpp: polarization maps, output-polarization optimizer and
// brightness curves.
//
// The steady state depends only on the drive, never on the detected
// projection, so each sweep solves once per input setting and evaluates
// every projection from cached field moments and regression correlators.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "upb/dynamics.hpp"
#include "upb/model.hpp"
#include "upb/observables.hpp"
#include "upb/polarization.hpp"

namespace upb {

struct Axis {
    std::string name; // CSV column header, e.g. "theta_in_deg"
    std::string unit;
    std::vector<double> samples; // in `unit`
};

struct PointRecord {
    double mean_n_out = std::numeric_limits<double>::quiet_NaN();
    double g2_bare = std::numeric_limits<double>::quiet_NaN();
    double g2_convolved = std::numeric_limits<double>::quiet_NaN();
    Status status = Status::solver_failed;
};

// Row-major over the axes: the last axis runs fastest.
struct SweepGrid {
    std::vector<Axis> axes;
    std::vector<PointRecord> records;

    std::size_t index(std::size_t i, std::size_t j) const { return i * axes.at(1).samples.size() + j; }
    const PointRecord& at(std::size_t i, std::size_t j) const { return records.at(index(i, j)); }

    // Columns: one per axis, mean_n_out, g2_bare, g2_convolved, status.
    void write_csv(const std::filesystem::path& path) const;
    // Long-format single-quantity map: axis columns, value, status.
    void write_map_csv(const std::filesystem::path& path, const std::string& column,
                       double PointRecord::*field) const;
};

struct SweepOptions {
    int n_max = 3;
    int workers = 1;
    double detector_fwhm = kDetectorFwhmNs; // ns; 0 disables the convolution
    KernelShape kernel = KernelShape::Gaussian;
    int tau_points = 2048;                  // density of the default delay grid
    PolarizerAxis polarizer = PolarizerAxis::H;
    PlateOrder plate_order = PlateOrder::HwpThenQwp;
    OdeOptions ode{};
};

// Everything needed to score any projection for one drive setting.
class ProjectionEvaluator {
public:
    ProjectionEvaluator(const SystemParams& p, const SweepOptions& opts);

    const DensityMatrix& state() const noexcept { return *rho_; }
    const ModeMoments& moments() const noexcept { return moments_; }
    const Superoperator& liouvillian() const noexcept { return *l_; }

    double mean_n(const OutputProjection& c) const { return moments_.mean_n(c); }
    // NaN below the photon floor.
    double g2_bare(const OutputProjection& c) const;
    PointRecord evaluate(const OutputProjection& c) const;

private:
    std::optional<Superoperator> l_;
    std::optional<DensityMatrix> rho_;
    ModeMoments moments_;
    std::optional<DetectorKernel> kernel_;
    std::optional<CorrelationBasis> basis_;
};

// Runs fn(0..count-1) on a pool of `workers` threads. Each index runs once.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

// Angles in rad. Drive amplitude follows input_drive at constant eta_total.
SweepGrid sweep_linear(const SystemParams& p, const std::vector<double>& theta_in,
                       const std::vector<double>& theta_out, const SweepOptions& opts = {});

SweepGrid sweep_waveplates(const SystemParams& p, const std::vector<double>& hwp_angles,
                           const std::vector<double>& qwp_angles, const SweepOptions& opts = {});

// Nelder-Mead in two dimensions.
struct SimplexResult {
    std::array<double, 2> x{};
    double value = 0.0;
    int iterations = 0;
};

SimplexResult nelder_mead(const std::function<double(const std::array<double, 2>&)>& f,
                          const std::array<std::array<double, 2>, 3>& simplex, double ftol = 1e-6,
                          double xtol = 1e-6, int max_iter = 4000);

struct OptimizerOptions {
    int grid = 64;           // coarse points per angle
    double ftol = 1e-6;
    double xtol = 1e-6;
    double tie_tol = 1e-9;   // equal-valued grid points keep the smaller phase
};

struct OptimizeResult {
    OutputProjection projection;
    double amplitude_angle = 0.0; // a in u = cos a, v = sin a e^{ip}
    double phase = 0.0;           // p
    double g2 = 0.0;              // bare g2(0)
    double mean_n = 0.0;
    double coarse_g2 = 0.0;
    int coarse_feasible = 0;
};

// Minimizes bare g2(0) over unit projections: coarse grid over
// a in [0, pi), p in [0, 2pi), then simplex refinement from the best point.
// Throws NoFeasibleOutput if every grid point is below the photon floor.
OptimizeResult optimize_output(const ProjectionEvaluator& ev, const OptimizerOptions& o = {});
OptimizeResult optimize_output(const SystemParams& p, double theta_in, const SweepOptions& opts = {},
                               const OptimizerOptions& o = {});

// Refines from `starts` random simplices around the coarse optimum.
std::vector<OptimizeResult> optimize_output_multistart(const ProjectionEvaluator& ev, std::uint64_t seed,
                                                       int starts = 8, const OptimizerOptions& o = {});

struct BrightnessPoint {
    double theta_in = 0.0; // rad
    double mean_n_out = std::numeric_limits<double>::quiet_NaN();
    double g2_bare = std::numeric_limits<double>::quiet_NaN();
    double amplitude_angle = std::numeric_limits<double>::quiet_NaN();
    double phase = std::numeric_limits<double>::quiet_NaN();
    double mean_n_cross = std::numeric_limits<double>::quiet_NaN(); // c = a_V at the same drive
    Status status = Status::solver_failed;
};

struct BrightnessCurve {
    double splitting_ghz = 0.0;
    std::vector<BrightnessPoint> points;

    // mean_n_out at theta_b over mean_n_out at theta_a; both must be grid points.
    double enhancement(double theta_a, double theta_b) const;
    void write_csv(const std::filesystem::path& path) const;
};

std::vector<BrightnessCurve> brightness_curve(const SystemParams& p, const std::vector<double>& theta_in,
                                              const std::vector<double>& splittings_ghz,
                                              const SweepOptions& opts = {}, const OptimizerOptions& o = {});

// n uniformly spaced samples over [lo, hi).
std::vector<double> half_open_grid(double lo, double hi, int n);

// Provenance for sidecars: every SystemParams field in native units.
nlohmann::json params_to_json(const SystemParams& p);

} // namespace upb
