// dynamics.hpp: Time propagation under a Liouvillian, two-time intensity
// correlations via the quantum regression theorem, and detector-response
// convolution.

#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "upb/liouvillian.hpp"
#include "upb/model.hpp"
#include "upb/ode.hpp"
#include "upb/polarization.hpp"

namespace upb {

enum class Status { ok, low_intensity, solver_failed };

const char* to_string(Status s) noexcept;

// Below this <c^dag c> the normalized correlation is not computed.
inline constexpr double kPhotonFloor = 1e-12;

inline constexpr double kDetectorFwhmNs = 0.530;

DensityMatrix evolve(const Superoperator& l, const DensityMatrix& rho0, double tau, const OdeOptions& opts = {});

struct G2Value {
    double value = 0.0; // NaN unless status == ok
    double mean_n = 0.0;
    Status status = Status::ok;
};

// <c^dag c^dag c c> / <c^dag c>^2
G2Value g2_zero(const DensityMatrix& rho, const OutputProjection& c);

struct CorrelationCurve {
    std::vector<double> tau;    // symmetric about 0, ascending
    std::vector<double> values; // g2(tau)
    double mean_n = 0.0;
    Status status = Status::ok;

    double at_zero() const;
    double min_value() const;
    double max_value() const;
};

// Uniform grid of `points` delays over [0, 10 / (smallest nonzero rate)].
std::vector<double> default_tau_grid(const SystemParams& p, int points = 2048);

// Reflects a non-negative half-grid curve into a symmetric one.
CorrelationCurve reflect(std::span<const double> tau_half, std::span<const double> g2_half, double mean_n,
                         Status status);

// G2(tau) = Tr[c^dag c e^{L tau}(c rho c^dag)], normalized by <c^dag c>^2.
// tau_half must start at 0 and ascend.
CorrelationCurve g2_tau(const Superoperator& l, const DensityMatrix& rho_ss, const OutputProjection& c,
                        std::span<const double> tau_half, const OdeOptions& opts = {});

enum class KernelShape { Gaussian, TwoSidedExponential };

// Unit-sum discrete detector kernel on a uniform grid of spacing dt.
// Gaussian kernels are truncated at +-4 sigma, two-sided exponentials at
// +-8 decay lengths. A FWHM at or below dt/100 is treated as a delta; any
// other FWHM needs dt <= fwhm/10.
class DetectorKernel {
public:
    DetectorKernel(double dt, double fwhm, KernelShape shape = KernelShape::Gaussian);

    int half_width() const noexcept { return half_width_; }
    double weight(int offset) const { return weights_[std::size_t(offset + half_width_)]; }

    // Convolved value at tau = 0 of an even curve given on its non-negative
    // half (spacing dt). Samples beyond the half-grid count as 1.
    double at_zero(std::span<const double> g2_half) const;

private:
    int half_width_ = 0;
    std::vector<double> weights_;
};

// Discrete convolution of the symmetric curve with the detector kernel,
// padding beyond the grid with the asymptote 1.
CorrelationCurve convolve_detector(const CorrelationCurve& curve, double fwhm,
                                   KernelShape shape = KernelShape::Gaussian);

// Precomputed regression-theorem correlators for every projection of one
// steady state: F[k][l][i][j](tau) = Tr[a_k^dag a_l e^{L tau}(a_i rho a_j^dag)]
// with a_0 = a_H, a_1 = a_V. The g2(tau) curve of c = u a_H + v a_V is then a
// contraction with (u, v), so one propagation serves a whole polarization map.
class CorrelationBasis {
public:
    CorrelationBasis(const Superoperator& l, const DensityMatrix& rho_ss, std::vector<double> tau_half,
                     const OdeOptions& opts = {});

    const std::vector<double>& tau_half() const noexcept { return tau_; }

    double mean_n(const OutputProjection& c) const;
    // Unnormalized G2(tau) on the half grid.
    std::vector<double> intensity_correlation(const OutputProjection& c) const;
    // Normalized g2 on the half grid; empty when below the photon floor.
    std::vector<double> g2_half(const OutputProjection& c) const;
    CorrelationCurve g2_curve(const OutputProjection& c) const;

private:
    std::vector<double> tau_;
    std::array<cplx, 4> first_{}; // <a_i^dag a_j>, index 2*i + j
    // samples_[s][16]: flattened (k, l, i, j) for each tau sample.
    std::vector<std::array<cplx, 16>> samples_;
};

void write_curve_csv(const std::filesystem::path& path, const CorrelationCurve& bare,
                     const CorrelationCurve& convolved);

} // namespace upb
