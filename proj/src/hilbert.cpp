#include "upb/hilbert.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "upb/errors.hpp"

namespace upb {

SpaceLayout::SpaceLayout(int n_max) : n_max_(n_max) {
    if (n_max < 1) {
        throw InvalidArgument("photon cutoff n_max must be >= 1, got " + std::to_string(n_max));
    }
}

Operator::Operator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) {
        throw DimensionMismatch("operator matrix must be square");
    }
}

Operator::Operator(SpaceLayout layout, Eigen::MatrixXcd matrix)
    : layout_(layout), matrix_(std::move(matrix)) {
    if (matrix_.rows() != layout.dim() || matrix_.cols() != layout.dim()) {
        throw DimensionMismatch("operator is " + std::to_string(matrix_.rows()) + "x" +
                                std::to_string(matrix_.cols()) + ", layout needs " +
                                std::to_string(layout.dim()));
    }
}

const SpaceLayout& Operator::composite_layout() const {
    if (!layout_) throw DimensionMismatch("operator is local to one slot, not composite");
    return *layout_;
}

Operator Operator::adjoint() const {
    Operator out = *this;
    out.matrix_ = matrix_.adjoint();
    return out;
}

bool Operator::is_hermitian(double tol) const {
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() < tol;
}

void Operator::check_compatible(const Operator& rhs) const {
    if (layout_ != rhs.layout_ || dim() != rhs.dim()) {
        throw DimensionMismatch("operators live on different spaces");
    }
}

Operator Operator::operator+(const Operator& rhs) const {
    check_compatible(rhs);
    Operator out = *this;
    out.matrix_ += rhs.matrix_;
    return out;
}

Operator Operator::operator-(const Operator& rhs) const {
    check_compatible(rhs);
    Operator out = *this;
    out.matrix_ -= rhs.matrix_;
    return out;
}

Operator Operator::operator*(const Operator& rhs) const {
    check_compatible(rhs);
    Operator out = *this;
    out.matrix_ = matrix_ * rhs.matrix_;
    return out;
}

Operator Operator::operator*(cplx s) const {
    Operator out = *this;
    out.matrix_ *= s;
    return out;
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator fock_annihilation(int n_max) {
    if (n_max < 1) {
        throw InvalidArgument("photon cutoff n_max must be >= 1, got " + std::to_string(n_max));
    }
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
    return Operator(std::move(a));
}

Operator two_level_lowering() {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2, 2);
    s(0, 1) = 1.0;
    return Operator(std::move(s));
}

Operator local_identity(Index dim) { return Operator(Eigen::MatrixXcd::Identity(dim, dim)); }

Operator embed(const Operator& op, Slot slot, const SpaceLayout& layout) {
    if (op.layout()) throw DimensionMismatch("embed expects a single-slot operator");
    if (op.dim() != layout.local_dim(slot)) {
        throw DimensionMismatch("slot needs local dimension " + std::to_string(layout.local_dim(slot)) +
                                ", operator has " + std::to_string(op.dim()));
    }
    const Eigen::MatrixXcd id_f = Eigen::MatrixXcd::Identity(layout.fock_dim(), layout.fock_dim());
    const Eigen::MatrixXcd id_q = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd& m = op.matrix();

    Eigen::MatrixXcd full;
    switch (slot) {
    case Slot::H:
        full = Eigen::kroneckerProduct(Eigen::MatrixXcd(Eigen::kroneckerProduct(m, id_f)), id_q);
        break;
    case Slot::V:
        full = Eigen::kroneckerProduct(Eigen::MatrixXcd(Eigen::kroneckerProduct(id_f, m)), id_q);
        break;
    case Slot::QD:
        full = Eigen::kroneckerProduct(Eigen::MatrixXcd(Eigen::kroneckerProduct(id_f, id_f)), m);
        break;
    }
    return Operator(layout, std::move(full));
}

Operator identity(const SpaceLayout& layout) {
    return Operator(layout, Eigen::MatrixXcd::Identity(layout.dim(), layout.dim()));
}

ModeOperators::ModeOperators(const SpaceLayout& layout)
    : a_h(embed(fock_annihilation(layout.n_max()), Slot::H, layout)),
      a_v(embed(fock_annihilation(layout.n_max()), Slot::V, layout)),
      sigma(embed(two_level_lowering(), Slot::QD, layout)) {}

} // namespace upb
