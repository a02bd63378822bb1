#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "upb/errors.hpp"
#include "upb/presets.hpp"
#include "upb/sweep.hpp"

using namespace upb;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "upb_tests";
    fs::create_directories(d);
    return d / name;
}

SweepOptions quick(int workers = 1) {
    SweepOptions o;
    o.workers = workers;
    o.tau_points = 512;
    return o;
}

} // namespace

TEST_CASE("grid helpers") {
    const std::vector<double> g = half_open_grid(0.0, 180.0, 4);
    CHECK(g == std::vector<double>{0.0, 45.0, 90.0, 135.0});
    CHECK_THROWS_AS(half_open_grid(0.0, 1.0, 0), InvalidArgument);
}

TEST_CASE("parallel_for runs every index once") {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t k) { ++hits[k]; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t k) { if (k == 7) throw InvalidArgument("x"); }),
                    InvalidArgument);
}

SweepOptions bare(int n_max = 3) {
    SweepOptions o;
    o.n_max = n_max;
    o.detector_fwhm = 0.0;
    return o;
}

TEST_CASE("linear sweep records") {
    const SweepGrid g = sweep_linear(reference_defaults(0.0), half_open_grid(0.0, kPi, 6), half_open_grid(0.0, kPi, 7),
                                     bare());
    REQUIRE(g.records.size() == 42);
    for (const PointRecord& r : g.records) {
        if (r.status != Status::ok) {
            CHECK(std::isnan(r.g2_bare));
            continue;
        }
        CHECK(r.g2_bare >= 0.0);
        CHECK(r.mean_n_out > 0.0);
        CHECK(r.g2_convolved == r.g2_bare);
    }
}

TEST_CASE("linear sweep CSV is deterministic and independent of worker count") {
    const SystemParams p = reference_defaults(0.0);
    const std::vector<double> tin = half_open_grid(0.0, kPi, 2), tout = half_open_grid(0.0, kPi, 5);
    const SweepGrid g = sweep_linear(p, tin, tout, quick());
    for (const PointRecord& r : g.records) {
        if (r.status == Status::ok) CHECK(r.g2_convolved >= 0.0);
    }
    g.write_csv(scratch("a.csv"));
    sweep_linear(p, tin, tout, quick(2)).write_csv(scratch("b.csv"));
    CHECK(slurp(scratch("a.csv")) == slurp(scratch("b.csv")));
    const std::string text = slurp(scratch("a.csv"));
    CHECK(text.rfind("theta_in_deg,theta_out_deg,mean_n_out,g2_bare,g2_convolved,status\n", 0) == 0);
}

TEST_CASE("linear sweep half-turn symmetry at zero splitting") {
    const std::vector<double> a{0.3, 0.3 + kPi}, b{1.1, 1.1 + kPi};
    const SweepGrid s = sweep_linear(reference_defaults(0.0), a, b, bare());
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(s.at(i, j).g2_bare == doctest::Approx(s.at(0, 0).g2_bare).epsilon(1e-9));
}

// Weak drive and a generous cutoff keep truncation far below the tolerances.
SystemParams uncoupled() {
    SystemParams p = reference_defaults(0.0);
    p.g = 0.0;
    p.eta_H *= 0.1;
    p.eta_V *= 0.1;
    return p;
}

TEST_CASE("linear sweep without coupling is coherent") {
    const SweepGrid g = sweep_linear(uncoupled(), half_open_grid(0.0, kPi, 5), half_open_grid(0.0, kPi, 5), bare(5));
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(g.at(i, i).status == Status::ok);
        CHECK(std::abs(g.at(i, i).g2_bare - 1.0) < 1e-6);
    }
}

TEST_CASE("waveplate sweep writes its long-format maps") {
    const SweepGrid g =
        sweep_waveplates(reference_defaults(), half_open_grid(0.0, kPi, 4), half_open_grid(0.0, kPi, 3), quick());
    CHECK(g.at(0, 0).status == Status::ok);
    CHECK(g.at(0, 0).g2_bare > 0.5);
    g.write_map_csv(scratch("map.csv"), "g2_bare", &PointRecord::g2_bare);
    const std::string text = slurp(scratch("map.csv"));
    CHECK(text.rfind("hwp_deg,qwp_deg,g2_bare,status\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 13);
}

TEST_CASE("nelder-mead") {
    const auto f = [](const std::array<double, 2>& x) {
        return (x[0] - 1.0) * (x[0] - 1.0) + 3.0 * (x[1] + 0.5) * (x[1] + 0.5);
    };
    const SimplexResult r = nelder_mead(f, {{{0.0, 0.0}, {0.1, 0.0}, {0.0, 0.1}}}, 1e-12, 1e-10);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(-0.5).epsilon(1e-4));
}

TEST_CASE("output optimizer") {
    const ProjectionEvaluator ev(reference_defaults(), SweepOptions{.detector_fwhm = 0.0});
    const OptimizeResult r = optimize_output(ev);
    CHECK(r.g2 < 0.05);
    CHECK(r.g2 <= r.coarse_g2);
    CHECK(ev.g2_bare(r.projection) == doctest::Approx(r.g2).epsilon(1e-12));
    const std::vector<OptimizeResult> starts = optimize_output_multistart(ev, 20180601, 8);
    REQUIRE(starts.size() == 8);
    for (const OptimizeResult& s : starts) CHECK(std::abs(s.g2 - starts.front().g2) < 1e-4);

}

TEST_CASE("optimizer ties on coherent light resolve to the smallest phase") {
    const OptimizeResult c = optimize_output(uncoupled(), deg_to_rad(45.0), bare(6));
    CHECK(std::abs(c.g2 - 1.0) < 1e-6);
    CHECK(c.phase == 0.0);
    CHECK(c.coarse_feasible > 64 * 64 - 8);
}

TEST_CASE("presets") {
    const SystemParams base = reference_defaults(0.0);
    const SweepOptions o = quick();
    const OperatingPoint a = arrow_a(base, o);
    CHECK(a.g2_bare < 1.0);
    CHECK(a.theta_in == 0.0);
    const OperatingPoint b = arrow_b(base, half_open_grid(0.0, kPi, 121), o);
    CHECK(b.g2_bare < a.g2_bare);

    const std::vector<double> plates = half_open_grid(0.0, kPi, 61);
    const BunchingPair cd = arrows_cd(reference_defaults(), plates, plates, o);
    CHECK(cd.d.g2_bare < 1.0);
    CHECK(cd.c.g2_bare > 1.0);
    CHECK(cd.d.theta_in == doctest::Approx(deg_to_rad(45.0)));
    CHECK(plate_distance(cd.c.hwp, cd.c.qwp, cd.d.hwp, cd.d.qwp) <= deg_to_rad(kNeighbourhoodDeg));
    CHECK(plate_distance(0.01, 0.0, kPi - 0.01, 0.0) == doctest::Approx(0.02));

    CHECK_THROWS_AS(resolve_preset("arrow-E", base, 0.0, plates, plates, plates, o), ConfigError);
}

TEST_CASE("brightness curve") {
    const std::vector<double> theta = half_open_grid(0.0, kPi, 4);
    const std::vector<BrightnessCurve> curves =
        brightness_curve(reference_defaults(), theta, {0.0, 10.0}, quick(), OptimizerOptions{.grid = 24});
    REQUIRE(curves.size() == 2);
    for (const BrightnessCurve& c : curves) {
        REQUIRE(c.points.size() == 4);
        CHECK(c.enhancement(0.0, kPi / 4) > 1.0);
        CHECK_THROWS_AS(c.enhancement(0.0, 0.3), InvalidArgument);
    }
    // The theta_in = 0 cross-polarized baseline is the arrow-A point.
    const SweepGrid lin = sweep_linear(reference_defaults(0.0), {0.0}, {0.5 * kPi}, quick());
    CHECK(std::abs(curves[0].points[0].mean_n_cross - lin.at(0, 0).mean_n_out) < 1e-8);
    curves[0].write_csv(scratch("bright.csv"));
    CHECK(slurp(scratch("bright.csv"))
              .rfind("theta_in_deg,mean_n_out,g2_bare,amplitude_angle_deg,phase_deg,mean_n_cross,status\n", 0) == 0);
}

TEST_CASE("failed solves become status records") {
    SystemParams p = reference_defaults();
    p.kappa_H = -1.0;
    const SweepGrid g = sweep_linear(p, {0.0}, {0.0, 1.0}, quick());
    for (const PointRecord& r : g.records) {
        CHECK(r.status == Status::solver_failed);
        CHECK(std::isnan(r.mean_n_out));
    }
}
