#include "upb/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "upb/csv.hpp"
#include "upb/errors.hpp"

namespace upb {

namespace {

constexpr double kTwoPiD = 2.0 * std::numbers::pi;

double wrap_phase(double x) {
    double w = std::fmod(x, kTwoPiD);
    if (w < 0.0) w += kTwoPiD;
    return w;
}

std::array<cplx, 2> weights(const OutputProjection& c) { return {c.u, c.v}; }

} // namespace

SqueezeSpec SqueezeSpec::normalized() const {
    if (!(alpha_bar >= 0.0)) throw InvalidArgument("alpha_bar must be >= 0");
    if (!(r >= 0.0)) throw InvalidArgument("squeeze magnitude r must be >= 0");
    return {alpha_bar, wrap_phase(vartheta), r, wrap_phase(theta)};
}

double PhotonDistribution::total() const {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
}

double PhotonDistribution::mean() const { return factorial_moment(1); }

double PhotonDistribution::factorial_moment(int k) const {
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        double f = 1.0;
        for (int j = 0; j < k; ++j) f *= double(n) - j;
        s += f * p[n];
    }
    return s;
}

Operator mode_rotation(const OutputProjection& c, const SpaceLayout& layout) {
    if (std::abs(c.norm_sq() - 1.0) > 1e-10) throw InvalidArgument("output projection must have unit norm");
    // Single-photon unitary W with first row (u, v); U = exp(i a^dag K a) with
    // e^{iK} = W gives U^dag a U = W a.
    Eigen::Matrix2cd w;
    w << c.u, c.v, -std::conj(c.v), std::conj(c.u);
    Eigen::ComplexSchur<Eigen::Matrix2cd> schur(w);
    const Eigen::Matrix2cd& q = schur.matrixU();
    Eigen::Matrix2cd theta = Eigen::Matrix2cd::Zero();
    for (int k = 0; k < 2; ++k) theta(k, k) = std::arg(schur.matrixT()(k, k));
    const Eigen::Matrix2cd kmat = q * theta * q.adjoint();

    const ModeOperators m(layout);
    const std::array<const Eigen::MatrixXcd*, 2> a{&m.a_h.matrix(), &m.a_v.matrix()};
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(layout.dim(), layout.dim());
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (kmat(i, j) != cplx(0.0)) gen += cplx(0.0, 1.0) * kmat(i, j) * (a[i]->adjoint() * *a[j]);
    return Operator(layout, gen.exp());
}

DensityMatrix embed_state(const DensityMatrix& rho, const SpaceLayout& target) {
    const SpaceLayout& src = rho.layout();
    if (target.n_max() < src.n_max()) throw DimensionMismatch("target layout is smaller than the state layout");
    std::vector<Index> map;
    map.reserve(std::size_t(src.dim()));
    for (int nh = 0; nh <= src.n_max(); ++nh)
        for (int nv = 0; nv <= src.n_max(); ++nv)
            for (int q = 0; q < 2; ++q) map.push_back(target.index(nh, nv, q));
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(target.dim(), target.dim());
    for (Index j = 0; j < src.dim(); ++j)
        for (Index i = 0; i < src.dim(); ++i) big(map[std::size_t(i)], map[std::size_t(j)]) = rho.matrix()(i, j);
    return DensityMatrix(target, std::move(big));
}

PhotonDistribution photon_distribution(const DensityMatrix& rho, const OutputProjection& c) {
    const SpaceLayout big(2 * rho.layout().n_max());
    const DensityMatrix r = embed_state(rho, big);
    const Eigen::MatrixXcd u = mode_rotation(c, big).matrix();
    const Eigen::MatrixXcd rot = u * r.matrix() * u.adjoint();

    PhotonDistribution d;
    d.n_max = rho.layout().n_max();
    d.p.assign(std::size_t(big.n_max() + 1), 0.0);
    for (int nh = 0; nh <= big.n_max(); ++nh)
        for (int nv = 0; nv <= big.n_max(); ++nv)
            for (int q = 0; q < 2; ++q) {
                const Index k = big.index(nh, nv, q);
                d.p[std::size_t(nh)] += rot(k, k).real();
            }
    double kept = 0.0;
    for (int n = 0; n <= d.n_max; ++n) kept += d.p[std::size_t(n)];
    d.residual = 1.0 - kept;
    d.truncation_warning = d.residual > kTruncationWarning;
    return d;
}

double number_variance(const PhotonDistribution& dist) {
    const double m = dist.mean();
    return dist.factorial_moment(2) + m - m * m;
}

double poisson_probability(double mean, int n) {
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

std::vector<double> poisson_deviation(const PhotonDistribution& dist) {
    const double m = dist.mean();
    std::vector<double> out(dist.p.size());
    for (std::size_t n = 0; n < dist.p.size(); ++n) out[n] = dist.p[n] - poisson_probability(m, int(n));
    return out;
}

PhotonDistribution displaced_squeezed_fock_probs(const SqueezeSpec& spec, int n_max) {
    if (n_max < 2) throw InvalidArgument("n_max must be >= 2");
    const SqueezeSpec s = spec.normalized();
    const int dim = std::max(2 * (n_max + 1), n_max + 32);
    const Eigen::MatrixXcd a = fock_annihilation(dim - 1).matrix();
    const Eigen::MatrixXcd ad = a.adjoint();
    const cplx alpha = std::polar(s.alpha_bar, s.vartheta);
    const cplx xi = std::polar(s.r, s.theta);

    const Eigen::MatrixXcd sq = (0.5 * (std::conj(xi) * a * a - xi * ad * ad)).exp();
    const Eigen::MatrixXcd disp = (alpha * ad - std::conj(alpha) * a).exp();
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(dim);
    vac(0) = 1.0;
    const Eigen::VectorXcd psi = disp * (sq * vac);

    PhotonDistribution d;
    d.n_max = n_max;
    d.p.resize(std::size_t(n_max + 1));
    double kept = 0.0;
    for (int n = 0; n <= n_max; ++n) kept += d.p[std::size_t(n)] = std::norm(psi(n));
    d.residual = 1.0 - kept;
    if (d.residual > 1e-8) {
        throw TruncationTooSmall("displaced squeezed state leaks " + std::to_string(d.residual) +
                                 " beyond n_max = " + std::to_string(n_max));
    }
    return d;
}

double two_photon_amplitude_approx(const SqueezeSpec& spec) {
    const SqueezeSpec s = spec.normalized();
    if (s.vartheta != 0.0 || s.theta != 0.0) {
        throw InvalidArgument("the two-photon approximation holds for zero displacement and squeeze phases");
    }
    const double d = s.alpha_bar * s.alpha_bar - s.r;
    return 0.5 * d * d;
}

double squeezing_db(double r) {
    if (!(r >= 0.0)) throw InvalidArgument("r must be >= 0");
    return 10.0 * std::log10(std::exp(-2.0 * r));
}

ModeMoments ModeMoments::of(const DensityMatrix& rho) {
    const ModeOperators m(rho.layout());
    const std::array<const Eigen::MatrixXcd*, 2> a{&m.a_h.matrix(), &m.a_v.matrix()};
    const Eigen::MatrixXcd& r = rho.matrix();
    auto tr = [&](const Eigen::MatrixXcd& op) { return (op.transpose().cwiseProduct(r)).sum(); };

    ModeMoments out;
    std::array<Eigen::MatrixXcd, 4> pairs; // a_k a_l
    for (int i = 0; i < 2; ++i) {
        out.a[std::size_t(i)] = tr(*a[i]);
        for (int j = 0; j < 2; ++j) {
            pairs[std::size_t(2 * i + j)] = *a[i] * *a[j];
            out.aa[std::size_t(2 * i + j)] = tr(pairs[std::size_t(2 * i + j)]);
            out.ada[std::size_t(2 * i + j)] = tr(a[i]->adjoint() * *a[j]);
        }
    }
    for (int ij = 0; ij < 4; ++ij) {
        // (a_i a_j)^dag = a_j^dag a_i^dag; index by (i, j) of the creation pair
        const int i = ij / 2, j = ij % 2;
        const Eigen::MatrixXcd create = pairs[std::size_t(2 * j + i)].adjoint();
        for (int kl = 0; kl < 4; ++kl) out.adadaa[std::size_t(ij * 4 + kl)] = tr(create * pairs[std::size_t(kl)]);
    }
    return out;
}

cplx ModeMoments::mean_field(const OutputProjection& c) const {
    const auto w = weights(c);
    return w[0] * a[0] + w[1] * a[1];
}

cplx ModeMoments::pair_amplitude(const OutputProjection& c) const {
    const auto w = weights(c);
    cplx s = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s += w[i] * w[j] * aa[std::size_t(2 * i + j)];
    return s;
}

double ModeMoments::mean_n(const OutputProjection& c) const {
    const auto w = weights(c);
    cplx s = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s += std::conj(w[i]) * w[j] * ada[std::size_t(2 * i + j)];
    return s.real();
}

double ModeMoments::pair_correlation(const OutputProjection& c) const {
    const auto w = weights(c);
    std::array<cplx, 4> cre{}, ann{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            cre[std::size_t(2 * i + j)] = std::conj(w[i] * w[j]);
            ann[std::size_t(2 * i + j)] = w[i] * w[j];
        }
    cplx s = 0.0;
    for (std::size_t ij = 0; ij < 4; ++ij)
        for (std::size_t kl = 0; kl < 4; ++kl) s += cre[ij] * ann[kl] * adadaa[ij * 4 + kl];
    return s.real();
}

double quadrature_variance(const ModeMoments& m, const OutputProjection& c, double lambda) {
    const cplx mean = m.mean_field(c);
    const double x = (std::polar(1.0, -lambda) * mean).real();
    return 0.25 + 0.5 * m.mean_n(c) + 0.5 * (std::polar(1.0, -2.0 * lambda) * m.pair_amplitude(c)).real() - x * x;
}

double quadrature_variance(const DensityMatrix& rho, const OutputProjection& c, double lambda) {
    return quadrature_variance(ModeMoments::of(rho), c, lambda);
}

QuadratureStats quadrature_stats(const ModeMoments& m, const OutputProjection& c) {
    QuadratureStats q;
    const cplx mean = m.mean_field(c);
    q.mean_n = m.mean_n(c);
    q.amplitude_angle = std::arg(mean);
    q.amplitude_variance = quadrature_variance(m, c, q.amplitude_angle);
    q.phase_variance = quadrature_variance(m, c, q.amplitude_angle + 0.5 * std::numbers::pi);
    // Fluctuation moments <dc^dag dc> and <dc dc>.
    const double nf = q.mean_n - std::norm(mean);
    const cplx mf = m.pair_amplitude(c) - mean * mean;
    q.min_variance = 0.25 + 0.5 * (nf - std::abs(mf));
    double lam = 0.5 * (std::arg(mf) - std::numbers::pi);
    lam = std::fmod(lam, std::numbers::pi);
    if (lam < 0.0) lam += std::numbers::pi;
    q.min_angle = lam;
    q.squeeze_estimate = -0.5 * std::log(4.0 * q.min_variance);
    return q;
}

void write_distribution_csv(const std::filesystem::path& path, const PhotonDistribution& dist) {
    CsvWriter w(path, {"n", "P_n"});
    for (std::size_t n = 0; n < dist.p.size(); ++n) {
        w.cell(static_cast<long long>(n)).cell(dist.p[n]);
        w.end_row();
    }
}

nlohmann::json variance_summary(const PhotonDistribution& dist, const QuadratureStats& q) {
    nlohmann::json j;
    const double mean = dist.mean();
    const double var = number_variance(dist);
    j["mean_n"] = mean;
    j["number_variance"] = var;
    j["fano_factor"] = mean > 0.0 ? var / mean : 1.0;
    j["sub_poissonian"] = var < mean;
    j["truncation_residual"] = dist.residual;
    j["truncation_warning"] = dist.truncation_warning;
    j["poisson_deviation"] = poisson_deviation(dist);
    j["quadrature"] = {{"amplitude_angle_rad", q.amplitude_angle},
                       {"amplitude_variance", q.amplitude_variance},
                       {"phase_variance", q.phase_variance},
                       {"min_variance", q.min_variance},
                       {"min_angle_rad", q.min_angle},
                       {"squeeze_estimate", q.squeeze_estimate},
                       {"squeezing_db", 10.0 * std::log10(4.0 * q.min_variance)}};
    return j;
}

} // namespace upb
