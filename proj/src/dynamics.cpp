#include "upb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "upb/csv.hpp"
#include "upb/errors.hpp"

namespace upb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Row vector w with w^T vec(X) = Tr(A X).
Eigen::VectorXcd trace_functional(const Eigen::MatrixXcd& a) {
    const Eigen::MatrixXcd at = a.transpose();
    return Eigen::Map<const Eigen::VectorXcd>(at.data(), at.size());
}

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& m) { return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size()); }

OdeRhs liouvillian_rhs(const Superoperator& l) {
    return [&l](const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) { dy.noalias() = l.matrix * y; };
}

double uniform_spacing(std::span<const double> tau) {
    if (tau.size() < 2) throw ResolutionError("correlation curve needs at least two samples");
    const double dt = tau[1] - tau[0];
    if (!(dt > 0.0)) throw ResolutionError("delay grid must be strictly ascending");
    for (std::size_t k = 1; k < tau.size(); ++k) {
        if (std::abs((tau[k] - tau[k - 1]) - dt) > 1e-6 * dt) throw ResolutionError("delay grid is not uniform");
    }
    return dt;
}

} // namespace

const char* to_string(Status s) noexcept {
    switch (s) {
    case Status::ok:
        return "ok";
    case Status::low_intensity:
        return "low_intensity";
    case Status::solver_failed:
        return "solver_failed";
    }
    return "unknown";
}

DensityMatrix evolve(const Superoperator& l, const DensityMatrix& rho0, double tau, const OdeOptions& opts) {
    if (tau < 0.0) throw InvalidArgument("evolve needs tau >= 0");
    if (rho0.layout() != l.layout) throw DimensionMismatch("state and Liouvillian layouts differ");
    if (tau == 0.0) return rho0;
    Eigen::MatrixXcd out;
    const double times[] = {tau};
    integrate_dopri5(liouvillian_rhs(l), rho0.vec(), times,
                     [&](std::size_t, const Eigen::MatrixXcd& y) { out = y; }, opts);
    return DensityMatrix::from_vec(l.layout, out.col(0));
}

G2Value g2_zero(const DensityMatrix& rho, const OutputProjection& c) {
    const Operator cm = c.mode(rho.layout());
    const Operator cd = cm.adjoint();
    G2Value r;
    r.mean_n = rho.expect(cd * cm).real();
    if (!(r.mean_n >= kPhotonFloor)) {
        r.value = kNaN;
        r.status = Status::low_intensity;
        return r;
    }
    r.value = rho.expect(cd * cd * cm * cm).real() / (r.mean_n * r.mean_n);
    return r;
}

double CorrelationCurve::at_zero() const {
    const auto it = std::lower_bound(tau.begin(), tau.end(), 0.0);
    if (it == tau.end() || *it != 0.0) throw InvalidArgument("curve has no tau = 0 sample");
    return values[std::size_t(it - tau.begin())];
}

double CorrelationCurve::min_value() const { return *std::min_element(values.begin(), values.end()); }

double CorrelationCurve::max_value() const { return *std::max_element(values.begin(), values.end()); }

std::vector<double> default_tau_grid(const SystemParams& p, int points) {
    if (points < 2) throw InvalidArgument("tau grid needs at least two points");
    const double span = 10.0 / p.min_nonzero_rate();
    std::vector<double> t(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) t[std::size_t(k)] = span * double(k) / double(points - 1);
    return t;
}

CorrelationCurve reflect(std::span<const double> tau_half, std::span<const double> g2_half, double mean_n,
                         Status status) {
    CorrelationCurve c;
    c.mean_n = mean_n;
    c.status = status;
    const std::size_t n = tau_half.size();
    c.tau.reserve(2 * n - 1);
    c.values.reserve(2 * n - 1);
    for (std::size_t k = n; k-- > 1;) {
        c.tau.push_back(-tau_half[k]);
        c.values.push_back(g2_half.empty() ? kNaN : g2_half[k]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        c.tau.push_back(tau_half[k]);
        c.values.push_back(g2_half.empty() ? kNaN : g2_half[k]);
    }
    return c;
}

CorrelationCurve g2_tau(const Superoperator& l, const DensityMatrix& rho_ss, const OutputProjection& c,
                        std::span<const double> tau_half, const OdeOptions& opts) {
    if (tau_half.empty() || tau_half.front() != 0.0) throw InvalidArgument("tau grid must start at 0");
    const Operator cm = c.mode(rho_ss.layout());
    const Eigen::MatrixXcd& cmat = cm.matrix();
    const Eigen::MatrixXcd nop = cmat.adjoint() * cmat;
    const double mean_n = rho_ss.expect(cm.adjoint() * cm).real();
    if (!(mean_n >= kPhotonFloor)) return reflect(tau_half, {}, mean_n, Status::low_intensity);

    const Eigen::VectorXcd w = trace_functional(nop);
    const Eigen::MatrixXcd x0 = vectorize(cmat * rho_ss.matrix() * cmat.adjoint());
    std::vector<double> g(tau_half.size());
    integrate_dopri5(
        liouvillian_rhs(l), x0, tau_half,
        [&](std::size_t k, const Eigen::MatrixXcd& y) {
            g[k] = (w.transpose() * y.col(0)).value().real() / (mean_n * mean_n);
        },
        opts);
    return reflect(tau_half, g, mean_n, Status::ok);
}

DetectorKernel::DetectorKernel(double dt, double fwhm, KernelShape shape) {
    if (!(dt > 0.0)) throw ResolutionError("grid spacing must be positive");
    if (!(fwhm >= 0.0)) throw InvalidArgument("detector FWHM must be >= 0");
    if (fwhm <= dt / 100.0) {
        weights_ = {1.0};
        return;
    }
    if (dt > fwhm / 10.0) {
        throw ResolutionError("grid spacing " + std::to_string(dt) + " ns is coarser than FWHM/10 = " +
                              std::to_string(fwhm / 10.0) + " ns");
    }
    std::vector<double> w;
    if (shape == KernelShape::Gaussian) {
        const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
        half_width_ = int(std::ceil(4.0 * sigma / dt));
        for (int k = -half_width_; k <= half_width_; ++k) {
            const double t = k * dt;
            w.push_back(std::exp(-0.5 * t * t / (sigma * sigma)));
        }
    } else {
        const double decay = fwhm / (2.0 * std::numbers::ln2);
        half_width_ = int(std::ceil(8.0 * decay / dt));
        for (int k = -half_width_; k <= half_width_; ++k) w.push_back(std::exp(-std::abs(k * dt) / decay));
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    weights_ = std::move(w);
}

double DetectorKernel::at_zero(std::span<const double> g2_half) const {
    auto sample = [&](int k) { return std::size_t(k) < g2_half.size() ? g2_half[std::size_t(k)] : 1.0; };
    double acc = weight(0) * sample(0);
    for (int k = 1; k <= half_width_; ++k) acc += (weight(k) + weight(-k)) * sample(k);
    return acc;
}

CorrelationCurve convolve_detector(const CorrelationCurve& curve, double fwhm, KernelShape shape) {
    const double dt = uniform_spacing(curve.tau);
    const DetectorKernel kernel(dt, fwhm, shape);
    CorrelationCurve out = curve;
    if (curve.status != Status::ok) return out;
    const long n = long(curve.values.size());
    const int hw = kernel.half_width();
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -hw; k <= hw; ++k) {
            const long j = i + k;
            acc += kernel.weight(k) * ((j >= 0 && j < n) ? curve.values[std::size_t(j)] : 1.0);
        }
        out.values[std::size_t(i)] = acc;
    }
    return out;
}

CorrelationBasis::CorrelationBasis(const Superoperator& l, const DensityMatrix& rho_ss, std::vector<double> tau_half,
                                   const OdeOptions& opts)
    : tau_(std::move(tau_half)) {
    if (tau_.empty() || tau_.front() != 0.0) throw InvalidArgument("tau grid must start at 0");
    const ModeOperators m(rho_ss.layout());
    const std::array<const Eigen::MatrixXcd*, 2> a{&m.a_h.matrix(), &m.a_v.matrix()};
    const Eigen::MatrixXcd& rho = rho_ss.matrix();
    const Index dd = rho.size();

    Eigen::MatrixXcd x0(dd, 4);
    std::array<Eigen::VectorXcd, 4> obs;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            x0.col(2 * i + j) = vectorize(*a[i] * rho * a[j]->adjoint());
            const Eigen::MatrixXcd adl = a[i]->adjoint() * *a[j];
            obs[std::size_t(2 * i + j)] = trace_functional(adl);
            first_[std::size_t(2 * i + j)] = (adl.transpose().cwiseProduct(rho)).sum();
        }
    }
    samples_.resize(tau_.size());
    integrate_dopri5(
        liouvillian_rhs(l), x0, tau_,
        [&](std::size_t s, const Eigen::MatrixXcd& y) {
            for (int kl = 0; kl < 4; ++kl) {
                const Eigen::RowVectorXcd proj = obs[std::size_t(kl)].transpose() * y;
                for (int ij = 0; ij < 4; ++ij) samples_[s][std::size_t(kl * 4 + ij)] = proj(ij);
            }
        },
        opts);
}

double CorrelationBasis::mean_n(const OutputProjection& c) const {
    const std::array<cplx, 2> w{c.u, c.v};
    cplx acc = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) acc += std::conj(w[i]) * w[j] * first_[std::size_t(2 * i + j)];
    return acc.real();
}

std::vector<double> CorrelationBasis::intensity_correlation(const OutputProjection& c) const {
    const std::array<cplx, 2> w{c.u, c.v};
    std::array<cplx, 16> coef{};
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    coef[std::size_t(((k * 2 + l) * 2 + i) * 2 + j)] =
                        std::conj(w[k]) * w[l] * w[i] * std::conj(w[j]);
    std::vector<double> out(samples_.size());
    for (std::size_t s = 0; s < samples_.size(); ++s) {
        cplx acc = 0.0;
        for (std::size_t q = 0; q < 16; ++q) acc += coef[q] * samples_[s][q];
        out[s] = acc.real();
    }
    return out;
}

std::vector<double> CorrelationBasis::g2_half(const OutputProjection& c) const {
    const double n = mean_n(c);
    if (!(n >= kPhotonFloor)) return {};
    std::vector<double> g = intensity_correlation(c);
    for (double& x : g) x /= n * n;
    return g;
}

CorrelationCurve CorrelationBasis::g2_curve(const OutputProjection& c) const {
    const double n = mean_n(c);
    const std::vector<double> g = g2_half(c);
    return reflect(tau_, g, n, g.empty() ? Status::low_intensity : Status::ok);
}

void write_curve_csv(const std::filesystem::path& path, const CorrelationCurve& bare,
                     const CorrelationCurve& convolved) {
    if (bare.tau != convolved.tau) throw InvalidArgument("bare and convolved curves use different grids");
    CsvWriter w(path, {"tau_ns", "g2_bare", "g2_convolved"});
    for (std::size_t k = 0; k < bare.tau.size(); ++k) {
        w.cell(bare.tau[k]).cell(bare.values[k]).cell(convolved.values[k]);
        w.end_row();
    }
}

} // namespace upb
