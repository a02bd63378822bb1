#include "upb/liouvillian.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "upb/errors.hpp"

namespace upb {

DensityMatrix::DensityMatrix(SpaceLayout layout, Eigen::MatrixXcd matrix)
    : layout_(layout), matrix_(std::move(matrix)) {
    if (matrix_.rows() != layout_.dim() || matrix_.cols() != layout_.dim()) {
        throw DimensionMismatch("density matrix does not match layout dimension " +
                                std::to_string(layout_.dim()));
    }
}

cplx DensityMatrix::expect(const Operator& op) const {
    if (op.composite_layout() != layout_) throw DimensionMismatch("operator/state layout mismatch");
    // Tr(A rho) without forming the product.
    return (op.matrix().transpose().cwiseProduct(matrix_)).sum();
}

double DensityMatrix::trace() const { return matrix_.trace().real(); }

double DensityMatrix::min_eigenvalue() const {
    const Eigen::MatrixXcd h = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool DensityMatrix::is_hermitian(double tol) const {
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() < tol;
}

Eigen::VectorXcd DensityMatrix::vec() const {
    return Eigen::Map<const Eigen::VectorXcd>(matrix_.data(), matrix_.size());
}

DensityMatrix DensityMatrix::from_vec(const SpaceLayout& layout, const Eigen::VectorXcd& v) {
    const Index d = layout.dim();
    if (v.size() != d * d) throw DimensionMismatch("vectorized state has wrong length");
    return DensityMatrix(layout, Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d));
}

DensityMatrix DensityMatrix::pure(const SpaceLayout& layout, const Eigen::VectorXcd& psi) {
    const Eigen::VectorXcd n = psi / psi.norm();
    return DensityMatrix(layout, n * n.adjoint());
}

namespace {

using Triplet = Eigen::Triplet<cplx>;

// Appends scale * (A (x) B) to the triplet list, skipping exact zeros.
void add_kron(std::vector<Triplet>& out, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, cplx scale) {
    const Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
    for (Index j = 0; j < ca; ++j) {
        for (Index i = 0; i < ra; ++i) {
            const cplx x = a(i, j);
            if (x == cplx(0.0)) continue;
            for (Index l = 0; l < cb; ++l) {
                for (Index k = 0; k < rb; ++k) {
                    const cplx y = b(k, l);
                    if (y == cplx(0.0)) continue;
                    out.emplace_back(i * rb + k, j * cb + l, scale * x * y);
                }
            }
        }
    }
}

Eigen::VectorXcd vec_identity(Index d) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
    for (Index k = 0; k < d; ++k) v(k * (d + 1)) = 1.0;
    return v;
}

DensityMatrix finalize(const SpaceLayout& layout, const Eigen::VectorXcd& x) {
    const Index d = layout.dim();
    Eigen::MatrixXcd rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), d, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return DensityMatrix(layout, std::move(rho));
}

// Shifted inverse iteration toward the eigenvalue of L closest to zero.
Eigen::VectorXcd inverse_iteration(const SparseMatrixC& l, Eigen::VectorXcd x, double shift) {
    SparseMatrixC id(l.rows(), l.cols());
    id.setIdentity();
    const SparseMatrixC a = l - cplx(shift) * id;
    Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw DegenerateSteadyState("shifted inverse iteration could not factorize L");
    }
    x /= x.norm();
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXcd y = lu.solve(x);
        y /= y.norm();
        // Fix the arbitrary phase by the largest component.
        Index k;
        y.cwiseAbs().maxCoeff(&k);
        y *= std::conj(y(k)) / std::abs(y(k));
        const double change = (y - x).norm();
        x = std::move(y);
        if (change < 1e-13) break;
    }
    return x;
}

// Steady state restricted to Hermitian matrices. The real coordinates of
// rho are x[k,k] = rho_kk and, for k < l, x[k,l] = Re rho_kl, x[l,k] = Im rho_kl.
// L maps Hermitian matrices to Hermitian matrices, so its action on these
// coordinates is a real matrix of the same order and a quarter of the cost.
std::optional<Eigen::VectorXcd> hermitian_solve(const SparseMatrixC& l, Index d) {
    using TripletD = Eigen::Triplet<double>;
    const Index n = d * d;
    std::vector<TripletD> t;
    t.reserve(std::size_t(2 * l.nonZeros()));
    const auto put = [&](Index row, Index col, double v) {
        if (v != 0.0) t.emplace_back(row, col, v);
    };
    for (Index col = 0; col < l.outerSize(); ++col) {
        const Index k = col % d, c = col / d;
        // rho_kc in real coordinates: up to two (index, coefficient) terms.
        std::array<std::pair<Index, cplx>, 2> terms;
        int count = 1;
        if (k == c) {
            terms[0] = {k + d * k, 1.0};
        } else if (k < c) {
            terms = {{{k + d * c, 1.0}, {c + d * k, cplx(0.0, 1.0)}}};
            count = 2;
        } else {
            terms = {{{c + d * k, 1.0}, {k + d * c, cplx(0.0, -1.0)}}};
            count = 2;
        }
        for (SparseMatrixC::InnerIterator it(l, col); it; ++it) {
            const Index i = it.row() % d, j = it.row() / d;
            if (i > j) continue;
            if (i == 0 && j == 0) continue; // trace row
            for (int q = 0; q < count; ++q) {
                const cplx v = it.value() * terms[std::size_t(q)].second;
                put(i + d * j, terms[std::size_t(q)].first, v.real());
                if (i < j) put(j + d * i, terms[std::size_t(q)].first, v.imag());
            }
        }
    }
    for (Index k = 0; k < d; ++k) t.emplace_back(0, k * (d + 1), 1.0);
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    // Weak drives make ILUT-preconditioned BiCGSTAB converge in a handful of
    // iterations; the sparse LU is the exact fallback.
    Eigen::VectorXd x;
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-3);
    it.preconditioner().setFillfactor(10);
    it.setTolerance(1e-14);
    it.setMaxIterations(200);
    it.compute(a);
    if (it.info() == Eigen::Success) x = it.solve(rhs);
    if (it.info() != Eigen::Success || x.size() != n || !x.allFinite() || (a * x - rhs).norm() > 1e-12) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(a);
        if (lu.info() != Eigen::Success) return std::nullopt;
        x = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !x.allFinite()) return std::nullopt;
    }

    Eigen::VectorXcd out(n);
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) {
            if (i == j) out(i + d * j) = x(i + d * i);
            else if (i < j) out(i + d * j) = cplx(x(i + d * j), x(j + d * i));
            else out(i + d * j) = cplx(x(j + d * i), -x(i + d * j));
        }
    }
    return out;
}

} // namespace

Superoperator build_liouvillian(const Operator& hamiltonian, std::span<const Operator> collapses) {
    const SpaceLayout layout = hamiltonian.composite_layout();
    for (const Operator& c : collapses) {
        if (c.composite_layout() != layout) throw DimensionMismatch("collapse operator layout mismatch");
    }
    const Index d = layout.dim();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd& h = hamiltonian.matrix();

    std::vector<Triplet> t;
    const cplx minus_i(0.0, -1.0);
    add_kron(t, id, h, minus_i);
    add_kron(t, h.transpose(), id, -minus_i);
    for (const Operator& c : collapses) {
        const Eigen::MatrixXcd& cm = c.matrix();
        const Eigen::MatrixXcd cdc = cm.adjoint() * cm;
        add_kron(t, cm.conjugate(), cm, 1.0);
        add_kron(t, id, cdc, -0.5);
        add_kron(t, cdc.transpose(), id, -0.5);
    }
    SparseMatrixC l(d * d, d * d);
    l.setFromTriplets(t.begin(), t.end());
    l.prune(cplx(0.0), 0.0);
    l.makeCompressed();
    return {layout, std::move(l)};
}

double trace_preservation_defect(const Superoperator& l) {
    const Eigen::VectorXcd one = vec_identity(l.layout.dim());
    const Eigen::VectorXcd row = l.matrix.transpose() * one;
    return row.size() ? row.cwiseAbs().maxCoeff() : 0.0;
}

double steady_state_residual(const Superoperator& l, const DensityMatrix& rho) {
    const Eigen::VectorXcd r = l.matrix * rho.vec();
    return r.norm() / l.matrix.norm();
}

DensityMatrix steady_state(const Superoperator& l, const SteadyStateOptions& opts) {
    const Index d = l.layout.dim();
    const Index n = d * d;
    const double l_norm = l.matrix.norm();
    if (l_norm == 0.0) throw DegenerateSteadyState("Liouvillian is zero; every state is stationary");

    // Row 0 is the (0,0) population equation; it is a linear combination of
    // the other population rows, so it can carry the trace constraint.
    std::optional<DensityMatrix> rho;
    if (const auto x = hermitian_solve(l.matrix, d); x && std::abs(x->dot(vec_identity(d))) > 0.5) {
        DensityMatrix candidate = finalize(l.layout, *x);
        if (steady_state_residual(l, candidate) < opts.residual_tol) rho = std::move(candidate);
    }

    if (!rho) {
        SparseMatrixC a = l.matrix;
        a.prune([](Index row, Index, const cplx&) { return row != 0; });
        std::vector<Triplet> t;
        t.reserve(std::size_t(a.nonZeros() + d));
        for (Index k = 0; k < a.outerSize(); ++k) {
            for (SparseMatrixC::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
        }
        for (Index k = 0; k < d; ++k) t.emplace_back(0, k * (d + 1), 1.0);
        a.resize(n, n);
        a.setFromTriplets(t.begin(), t.end());
        a.makeCompressed();
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
        rhs(0) = 1.0;
        Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(a);
        if (lu.info() == Eigen::Success) {
            const Eigen::VectorXcd x = lu.solve(rhs);
            if (lu.info() == Eigen::Success && x.allFinite() && std::abs(x.dot(vec_identity(d))) > 0.5) {
                DensityMatrix candidate = finalize(l.layout, x);
                if (steady_state_residual(l, candidate) < opts.residual_tol) rho = std::move(candidate);
            }
        }
    }

    if (!rho) {
        // Two independent starts must land on the same state, otherwise the
        // kernel is not one-dimensional.
        const double shift = -1e-9 * l_norm;
        Eigen::VectorXcd s1 = vec_identity(d) / double(d);
        Eigen::VectorXcd s2(n);
        for (Index k = 0; k < n; ++k) s2(k) = cplx(std::cos(0.7 * double(k) + 0.3), std::sin(1.3 * double(k)));
        const Eigen::VectorXcd x1 = inverse_iteration(l.matrix, s1, shift);
        const Eigen::VectorXcd x2 = inverse_iteration(l.matrix, s2, shift);
        const Eigen::VectorXcd one = vec_identity(d);
        const cplx t1 = one.dot(x1), t2 = one.dot(x2);
        if (std::abs(t1) < 1e-8 || std::abs(t2) < 1e-8) {
            throw DegenerateSteadyState("no trace-carrying null vector of L");
        }
        const Eigen::VectorXcd y1 = x1 / t1, y2 = x2 / t2;
        if ((y1 - y2).norm() > 1e-6 * y1.norm()) {
            throw DegenerateSteadyState("Liouvillian kernel is not one-dimensional");
        }
        DensityMatrix candidate = finalize(l.layout, y1);
        const double res = steady_state_residual(l, candidate);
        if (res > opts.residual_tol) {
            throw DegenerateSteadyState("steady-state residual " + std::to_string(res) + " above tolerance");
        }
        rho = std::move(candidate);
    }

    const double lam = rho->min_eigenvalue();
    if (lam < -opts.positivity_tol) {
        throw TruncationTooSmall("steady state has eigenvalue " + std::to_string(lam) +
                                 "; increase n_max beyond " + std::to_string(l.layout.n_max()));
    }
    return std::move(*rho);
}

} // namespace upb
