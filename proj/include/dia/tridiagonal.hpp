#pragma once

#include "dia/errors.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace dia {

/// Tridiagonal system with row i reading
///   sub(i) x(i-1) + diag(i) x(i) + super(i) x(i+1) = rhs(i).
/// sub(0) and super(n-1) are ignored.
template <typename Scalar>
struct TridiagonalSystem {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vector sub;
    Vector diag;
    Vector super;
    Vector rhs;

    TridiagonalSystem() = default;
    explicit TridiagonalSystem(Eigen::Index n)
        : sub(Vector::Zero(n)), diag(Vector::Zero(n)), super(Vector::Zero(n)), rhs(Vector::Zero(n)) {}

    Eigen::Index size() const { return diag.size(); }

    /// |diag| >= |sub| + |super| + margin on every row.
    bool diagonally_dominant(Scalar margin = Scalar(0)) const {
        const Eigen::Index n = size();
        for (Eigen::Index i = 0; i < n; ++i) {
            const Scalar off = (i > 0 ? std::abs(sub(i)) : Scalar(0)) + (i + 1 < n ? std::abs(super(i)) : Scalar(0));
            if (std::abs(diag(i)) < off + margin) return false;
        }
        return true;
    }

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense() const {
        const Eigen::Index n = size();
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A =
            Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            A(i, i) = diag(i);
            if (i > 0) A(i, i - 1) = sub(i);
            if (i + 1 < n) A(i, i + 1) = super(i);
        }
        return A;
    }
};

/// Thomas algorithm writing into `x`; `scratch` must have the system size.
template <typename Scalar, typename DerivedX, typename DerivedS>
void thomas_solve_into(const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& sub,
                       const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& diag,
                       const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& super,
                       const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& rhs,
                       Eigen::MatrixBase<DerivedX>& x, Eigen::MatrixBase<DerivedS>& scratch) {
    const Eigen::Index n = diag.size();
    if (n == 0) return;
    Scalar pivot = diag(0);
    if (pivot == Scalar(0)) throw NumericalError("thomas_solve: zero pivot in row 0");
    x(0) = rhs(0) / pivot;
    for (Eigen::Index i = 1; i < n; ++i) {
        scratch(i) = super(i - 1) / pivot;
        pivot = diag(i) - sub(i) * scratch(i);
        if (pivot == Scalar(0)) throw NumericalError("thomas_solve: zero pivot");
        x(i) = (rhs(i) - sub(i) * x(i - 1)) / pivot;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) -= scratch(i + 1) * x(i + 1);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> thomas_solve(const TridiagonalSystem<Scalar>& sys) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = sys.size();
    if (sys.sub.size() != n || sys.super.size() != n || sys.rhs.size() != n)
        throw std::invalid_argument("thomas_solve: inconsistent system sizes");
    Vector x(n);
    Vector scratch(n);
    thomas_solve_into<Scalar>(sys.sub, sys.diag, sys.super, sys.rhs, x, scratch);
    return x;
}

}  // namespace dia
