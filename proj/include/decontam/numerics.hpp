#pragma once

// Dense complex linear-algebra kernel shared by every other module.
//
// Matrices are Eigen::MatrixXcd, i.e. column-major storage. All routines are
// pure functions of their arguments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "decontam/errors.hpp"

namespace decontam {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Tolerances used by the kernel. The defaults are what every caller in the
/// library uses; tests and experiments may override them.
struct NumericTolerances {
    double hermitian_rel = 1e-10; ///< max ||A - A^H||_F / ||A||_F accepted as Hermitian
    double pinv_rel = 1e-9;       ///< eigenvalues <= pinv_rel * lambda_1 are treated as zero
    double max_condition = 1e14;  ///< solve_hpd refuses systems beyond this condition estimate
};

/// Eigenvalues in non-increasing order with matching orthonormal eigenvectors
/// (columns). Each eigenvector has its largest-modulus entry real and positive.
struct HermitianEig {
    RVector values;
    CMatrix vectors;
};

namespace detail {

inline void require_finite(const CMatrix& a, const char* what) {
    if (!a.allFinite()) {
        throw InvalidInputError(std::string(what) + ": matrix has non-finite entries");
    }
}

inline void require_square(const CMatrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
}

// Rotate v so that its largest-modulus entry is real-positive.
inline void normalize_phase(Eigen::Ref<CVector> v) {
    if (v.size() == 0) {
        return;
    }
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        // strict comparison keeps the first index on ties
        if (a > best_abs * (1.0 + 1e-12)) {
            best_abs = a;
            best = i;
        }
    }
    if (best_abs > 0.0) {
        v *= std::conj(v(best)) / best_abs;
        v(best) = std::abs(v(best));
    }
}

} // namespace detail

/// (A + A^H) / 2
inline CMatrix hermitian_part(const CMatrix& a) {
    return (a + a.adjoint()) * 0.5;
}

inline HermitianEig hermitian_eig(const CMatrix& a, const NumericTolerances& tol = {}) {
    detail::require_square(a, "hermitian_eig");
    detail::require_finite(a, "hermitian_eig");
    const double scale = a.norm();
    if (scale > 0.0 && (a - a.adjoint()).norm() > tol.hermitian_rel * scale) {
        throw InvalidInputError("hermitian_eig: matrix is not Hermitian within tolerance");
    }
    const Eigen::Index n = a.rows();
    HermitianEig out;
    if (n == 0) {
        return out;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(a));
    if (solver.info() != Eigen::Success) {
        throw InvalidInputError("hermitian_eig: eigensolver did not converge");
    }
    // Eigen sorts ascending.
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j) {
        detail::normalize_phase(out.vectors.col(j));
    }
    return out;
}

/// Solves A X = B for Hermitian positive-definite A without forming A^{-1}.
inline CMatrix solve_hpd(const CMatrix& a, const CMatrix& b, const NumericTolerances& tol = {}) {
    detail::require_square(a, "solve_hpd");
    if (a.rows() != b.rows()) {
        throw DimensionError("solve_hpd: A is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " but B has " + std::to_string(b.rows()) +
                             " rows");
    }
    detail::require_finite(a, "solve_hpd");
    detail::require_finite(b, "solve_hpd");
    Eigen::LLT<CMatrix> llt(hermitian_part(a));
    if (llt.info() != Eigen::Success) {
        throw SingularityError("solve_hpd: matrix is not numerically positive definite");
    }
    if (llt.rcond() * tol.max_condition < 1.0) {
        throw SingularityError("solve_hpd: condition estimate exceeds limit");
    }
    return llt.solve(b);
}

/// Moore-Penrose pseudo-inverse of a Hermitian PSD matrix. Eigenvalues at or
/// below rel_tol * lambda_1 are zeroed. The all-zero matrix maps to itself.
inline CMatrix pseudo_inverse(const CMatrix& a, double rel_tol = NumericTolerances{}.pinv_rel) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw InvalidInputError("pseudo_inverse: rel_tol must lie in (0,1)");
    }
    const HermitianEig eig = hermitian_eig(a);
    const Eigen::Index n = a.rows();
    CMatrix out = CMatrix::Zero(n, n);
    if (n == 0 || eig.values(0) <= 0.0) {
        return out;
    }
    const double cut = rel_tol * eig.values(0);
    for (Eigen::Index i = 0; i < n && eig.values(i) > cut; ++i) {
        out.noalias() += (1.0 / eig.values(i)) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    }
    return out;
}

/// Largest singular value.
inline double spectral_norm(const CMatrix& a) {
    detail::require_finite(a, "spectral_norm");
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::BDCSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

/// Eigenvector of the largest eigenvalue of a Hermitian matrix, unit norm.
inline CVector dominant_eigenvector(const CMatrix& a, double* eigenvalue = nullptr) {
    const HermitianEig eig = hermitian_eig(a);
    if (eig.values.size() == 0) {
        throw DimensionError("dominant_eigenvector: empty matrix");
    }
    if (eigenvalue != nullptr) {
        *eigenvalue = eig.values(0);
    }
    return eig.vectors.col(0);
}

} // namespace decontam
