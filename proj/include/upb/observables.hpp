// observables.hpp: photon statistics of the projected output mode and the
// displaced squeezed state reference.

#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "upb/hilbert.hpp"
#include "upb/liouvillian.hpp"
#include "upb/polarization.hpp"

namespace upb {

// D(alpha) S(xi)|0>, alpha = alpha_bar e^{i vartheta}, xi = r e^{i theta}.
struct SqueezeSpec {
    double alpha_bar = 0.0;
    double vartheta = 0.0;
    double r = 0.0;
    double theta = 0.0;

    // Throws InvalidArgument on negative magnitudes; wraps phases into [0, 2pi).
    SqueezeSpec normalized() const;
};

struct PhotonDistribution {
    std::vector<double> p; // P(0), P(1), ...
    int n_max = 0;         // nominal cutoff of the source layout
    double residual = 0.0; // 1 - sum_{n <= n_max} P(n)
    bool truncation_warning = false;

    double total() const;
    double mean() const;
    // sum n (n-1) ... (n-k+1) P(n)
    double factorial_moment(int k) const;
};

inline constexpr double kTruncationWarning = 1e-4;

// Passive two-mode unitary with U^dag a_H U = u a_H + v a_V, identity on the
// QD. Exact on every total-photon-number block that fits the layout.
Operator mode_rotation(const OutputProjection& c, const SpaceLayout& layout);

// Zero-pads rho into a layout with an equal or larger cutoff.
DensityMatrix embed_state(const DensityMatrix& rho, const SpaceLayout& target);

// Number distribution of c behind the polarizer. The state is rotated in a
// layout with cutoff 2 n_max, so every photon-number block it occupies is
// complete and P(n) is exact up to n = 2 n_max.
PhotonDistribution photon_distribution(const DensityMatrix& rho, const OutputProjection& c);

double number_variance(const PhotonDistribution& dist);

// P(n) minus the Poisson probability at the same mean.
std::vector<double> poisson_deviation(const PhotonDistribution& dist);

double poisson_probability(double mean, int n);

// |<n|D(alpha) S(xi)|0>|^2 for n = 0..n_max from matrix exponentials in a
// padded working space. Throws TruncationTooSmall when 1 - sum P > 1e-8.
PhotonDistribution displaced_squeezed_fock_probs(const SqueezeSpec& spec, int n_max);

// (alpha_bar^2 - r)^2 / 2, defined for zero phases only.
double two_photon_amplitude_approx(const SqueezeSpec& spec);

// 10 log10(e^{-2r})
double squeezing_db(double r);

// Low-order moments of the two cavity fields, enough for every statistic of
// any projection c = u a_H + v a_V. Index 0 is H, 1 is V.
struct ModeMoments {
    std::array<cplx, 2> a{};        // <a_i>
    std::array<cplx, 4> aa{};       // <a_i a_j>, 2*i + j
    std::array<cplx, 4> ada{};      // <a_i^dag a_j>, 2*i + j
    std::array<cplx, 16> adadaa{};  // <a_i^dag a_j^dag a_k a_l>, ((i*2+j)*2+k)*2+l

    static ModeMoments of(const DensityMatrix& rho);

    cplx mean_field(const OutputProjection& c) const;      // <c>
    cplx pair_amplitude(const OutputProjection& c) const;  // <c c>
    double mean_n(const OutputProjection& c) const;        // <c^dag c>
    double pair_correlation(const OutputProjection& c) const; // <c^dag c^dag c c>
};

// Var X(lambda) with X = (c e^{-i lambda} + c^dag e^{i lambda}) / 2, normal
// ordered so that the vacuum gives 1/4 at any truncation.
double quadrature_variance(const ModeMoments& m, const OutputProjection& c, double lambda);
double quadrature_variance(const DensityMatrix& rho, const OutputProjection& c, double lambda);

struct QuadratureStats {
    double mean_n = 0.0;
    double amplitude_angle = 0.0;    // arg <c>
    double amplitude_variance = 0.0; // Var X(arg <c>)
    double phase_variance = 0.0;     // Var X(arg <c> + pi/2)
    double min_variance = 0.0;
    double min_angle = 0.0;          // in [0, pi)
    double squeeze_estimate = 0.0;   // -ln(4 min_variance) / 2
};

QuadratureStats quadrature_stats(const ModeMoments& m, const OutputProjection& c);

// Columns n, P_n.
void write_distribution_csv(const std::filesystem::path& path, const PhotonDistribution& dist);

nlohmann::json variance_summary(const PhotonDistribution& dist, const QuadratureStats& q);

} // namespace upb
