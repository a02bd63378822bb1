// liouvillian.hpp: Lindblad superoperator assembly and steady-state solve.
//
// Density matrices are vectorized column-major, vec(A rho B) = (B^T (x) A) vec(rho).

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "upb/hilbert.hpp"

namespace upb {

using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

struct Superoperator {
    SpaceLayout layout;
    SparseMatrixC matrix; // d^2 x d^2
};

class DensityMatrix {
public:
    DensityMatrix(SpaceLayout layout, Eigen::MatrixXcd matrix);

    const SpaceLayout& layout() const noexcept { return layout_; }
    const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }

    cplx expect(const Operator& op) const;
    double trace() const;
    double min_eigenvalue() const;
    bool is_hermitian(double tol = 1e-10) const;

    Eigen::VectorXcd vec() const;
    static DensityMatrix from_vec(const SpaceLayout& layout, const Eigen::VectorXcd& v);

    // Pure state |psi><psi|, normalized.
    static DensityMatrix pure(const SpaceLayout& layout, const Eigen::VectorXcd& psi);

private:
    SpaceLayout layout_;
    Eigen::MatrixXcd matrix_;
};

Superoperator build_liouvillian(const Operator& hamiltonian, std::span<const Operator> collapses);

// Largest |<vec(I), L x>| over columns, i.e. ||vec(I)^T L||_max.
double trace_preservation_defect(const Superoperator& l);

struct SteadyStateOptions {
    double residual_tol = 1e-10;  // ||L x||_2 / ||L||_F
    double positivity_tol = 1e-8; // allowed negative eigenvalue magnitude
};

// Unique zero-eigenvalue state of L. Direct sparse LU with one row replaced
// by the trace constraint, solved in real Hermitian coordinates first and in
// complex form if that fails; shifted inverse iteration when both
// factorizations are singular. Throws DegenerateSteadyState or
// TruncationTooSmall.
DensityMatrix steady_state(const Superoperator& l, const SteadyStateOptions& opts = {});

// ||L vec(rho)||_2 / ||L||_F
double steady_state_residual(const Superoperator& l, const DensityMatrix& rho);

} // namespace upb
