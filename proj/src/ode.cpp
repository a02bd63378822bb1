#include "upb/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "upb/errors.hpp"

namespace upb {

namespace {

using Eigen::Index;

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension of order 4.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kFacMin = 0.2; // largest growth factor is 1/kFacMin
constexpr double kFacMax = 10.0;

double scaled_rms(const Eigen::MatrixXcd& err, const Eigen::MatrixXcd& y0, const Eigen::MatrixXcd& y1,
                  const OdeOptions& o) {
    double acc = 0.0;
    const Index n = err.size();
    for (Index k = 0; k < n; ++k) {
        const double sk = o.atol + o.rtol * std::max(std::abs(y0(k)), std::abs(y1(k)));
        const double q = std::abs(err(k)) / sk;
        acc += q * q;
    }
    return std::sqrt(acc / double(std::max<Index>(n, 1)));
}

double initial_step(const OdeRhs& rhs, const Eigen::MatrixXcd& y0, const Eigen::MatrixXcd& f0, double t_end,
                    const OdeOptions& o, long& evals) {
    auto norm = [&](const Eigen::MatrixXcd& v) {
        double acc = 0.0;
        for (Index k = 0; k < v.size(); ++k) {
            const double sk = o.atol + o.rtol * std::abs(y0(k));
            acc += std::norm(v(k)) / (sk * sk);
        }
        return std::sqrt(acc / double(std::max<Index>(v.size(), 1)));
    };
    const double dnf = norm(f0), dny = norm(y0);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, t_end);
    Eigen::MatrixXcd y1 = y0 + h * f0;
    Eigen::MatrixXcd f1(y0.rows(), y0.cols());
    rhs(y1, f1);
    ++evals;
    const double der2 = norm(f1 - f0) / h;
    const double der12 = std::max(std::abs(der2), dnf);
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, t_end, o.h_max});
}

} // namespace

std::string OdeDiagnostics::summary() const {
    std::ostringstream os;
    os << "accepted=" << accepted << " rejected=" << rejected << " rhs_evals=" << rhs_evals
       << " final_step=" << final_step << " stiff=" << (stiffness_detected ? "yes" : "no");
    return os.str();
}

OdeDiagnostics integrate_dopri5(const OdeRhs& rhs, Eigen::MatrixXcd y, std::span<const double> times,
                                const OdeObserver& observe, const OdeOptions& opts) {
    OdeDiagnostics diag;
    if (times.empty()) return diag;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0.0 || (k > 0 && times[k] < times[k - 1])) {
            throw InvalidArgument("output times must be non-negative and ascending");
        }
    }

    std::size_t next = 0;
    while (next < times.size() && times[next] == 0.0) observe(next++, y);
    if (next == times.size()) return diag;

    const double t_end = times.back();
    const Index rows = y.rows(), cols = y.cols();
    Eigen::MatrixXcd k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols), k5(rows, cols),
        k6(rows, cols), k7(rows, cols), ytmp(rows, cols), ystage6(rows, cols), y1(rows, cols);
    Eigen::MatrixXcd r1, r2, r3, r4, r5;

    rhs(y, k1);
    ++diag.rhs_evals;
    double h = opts.h_initial > 0.0 ? opts.h_initial : initial_step(rhs, y, k1, t_end, opts, diag.rhs_evals);
    h = std::min(h, opts.h_max);

    double t = 0.0;
    double facold = 1e-4;
    bool last_rejected = false;
    int stiff_hits = 0, nonstiff_hits = 0;
    long steps = 0;

    while (next < times.size()) {
        if (++steps > opts.max_steps) {
            throw IntegrationFailure("step budget exhausted at t=" + std::to_string(t) + " (" + diag.summary() + ")");
        }
        const bool final_step = t + 1.01 * h >= t_end;
        if (final_step) {
            h = t_end - t;
        } else if (h < std::max(opts.h_min, 1e-14 * std::max(1.0, std::abs(t)))) {
            throw IntegrationFailure("step size underflow h=" + std::to_string(h) + " at t=" + std::to_string(t) +
                                     " (" + diag.summary() + ")");
        }

        ytmp = y + h * a21 * k1;
        rhs(ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(ytmp, k5);
        ystage6 = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(ystage6, k6);
        y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs(y1, k7);
        diag.rhs_evals += 6;

        const Eigen::MatrixXcd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = scaled_rms(err, y, y1, opts);

        const double fac11 = std::pow(std::max(en, 1e-300), 0.2 - kBeta * 0.75);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::clamp(fac / kSafety, kFacMin, kFacMax);
        double h_new = h / fac;

        if (en <= 1.0) {
            facold = std::max(en, 1e-4);
            ++diag.accepted;

            const double st_den = (y1 - ystage6).squaredNorm();
            if (st_den > 0.0) {
                const double hl = h * std::sqrt((k7 - k6).squaredNorm() / st_den);
                if (hl > 3.25) {
                    nonstiff_hits = 0;
                    if (++stiff_hits >= 15) diag.stiffness_detected = true;
                } else if (++nonstiff_hits >= 6) {
                    stiff_hits = 0;
                }
            }

            // Dense output coefficients for this step.
            r1 = y;
            r2 = y1 - y;
            r3 = h * k1 - r2;
            r4 = r2 - h * k7 - r3;
            r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

            const double t_new = final_step ? t_end : t + h;
            while (next < times.size() && times[next] <= t_new) {
                const double th = (times[next] - t) / h;
                const double th1 = 1.0 - th;
                if (times[next] == t_new) {
                    observe(next, y1);
                } else {
                    const Eigen::MatrixXcd yi = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                    observe(next, yi);
                }
                ++next;
            }

            k1 = k7;
            y = y1;
            t = t_new;
            if (std::abs(h_new) > opts.h_max) h_new = opts.h_max;
            if (last_rejected) h_new = std::min(h_new, h);
            last_rejected = false;
            diag.final_step = h;
            h = h_new;
        } else {
            h_new = h / std::min(1.0 / kFacMin, fac11 / kSafety);
            ++diag.rejected;
            last_rejected = true;
            h = h_new;
        }
    }
    return diag;
}

} // namespace upb
