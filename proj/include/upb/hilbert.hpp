// hilbert.hpp: Truncated Fock-space operator algebra for the H-cavity,
// V-cavity and quantum-dot composite space.

#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace upb {

using cplx = std::complex<double>;
using Index = Eigen::Index;

enum class Slot { H, V, QD };

// Photon cutoff per cavity mode (Fock levels 0..n_max). Slot order is fixed
// as (H, V, QD) with the QD index running fastest.
class SpaceLayout {
public:
    explicit SpaceLayout(int n_max);

    int n_max() const noexcept { return n_max_; }
    int fock_dim() const noexcept { return n_max_ + 1; }
    Index dim() const noexcept { return Index(fock_dim()) * fock_dim() * 2; }
    Index local_dim(Slot slot) const noexcept { return slot == Slot::QD ? 2 : fock_dim(); }

    // Basis index of |n_H, n_V, qd>, qd = 0 ground, 1 excited.
    Index index(int n_h, int n_v, int qd) const noexcept {
        return (Index(n_h) * fock_dim() + n_v) * 2 + qd;
    }

    friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

private:
    int n_max_;
};

// Complex square matrix, either local to one slot (no layout) or living on
// the full composite space. Immutable after construction.
class Operator {
public:
    explicit Operator(Eigen::MatrixXcd matrix);
    Operator(SpaceLayout layout, Eigen::MatrixXcd matrix);

    const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
    const std::optional<SpaceLayout>& layout() const noexcept { return layout_; }
    const SpaceLayout& composite_layout() const;
    Index dim() const noexcept { return matrix_.rows(); }

    Operator adjoint() const;
    bool is_hermitian(double tol = 1e-12) const;

    Operator operator+(const Operator& rhs) const;
    Operator operator-(const Operator& rhs) const;
    Operator operator*(const Operator& rhs) const;
    Operator operator*(cplx s) const;
    friend Operator operator*(cplx s, const Operator& op) { return op * s; }

private:
    void check_compatible(const Operator& rhs) const;

    std::optional<SpaceLayout> layout_;
    Eigen::MatrixXcd matrix_;
};

Operator commutator(const Operator& a, const Operator& b);

// Single-mode annihilation operator on levels 0..n_max.
Operator fock_annihilation(int n_max);

// Two-level lowering operator sigma in the basis (ground, excited).
Operator two_level_lowering();

Operator local_identity(Index dim);

// Kronecker embedding of a single-slot operator with identities elsewhere.
Operator embed(const Operator& op, Slot slot, const SpaceLayout& layout);

Operator identity(const SpaceLayout& layout);

// Composite-space ladder operators, ready for Hamiltonians and observables.
struct ModeOperators {
    Operator a_h;
    Operator a_v;
    Operator sigma;

    explicit ModeOperators(const SpaceLayout& layout);
};

} // namespace upb
