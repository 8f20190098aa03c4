#pragma once

// Brute-force reference implementations used only by the tests. None of them
// calls into the library code they are compared against.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

inline constexpr double kPi = std::numbers::pi;

inline Complex gaussian(Rng& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    return {re, n(rng)};
}

inline CMatrix gaussian_matrix(Rng& rng, int rows, int cols) {
    CMatrix m(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            m(r, c) = gaussian(rng);
        }
    }
    return m;
}

inline CMatrix random_hermitian(Rng& rng, int n) {
    const CMatrix g = gaussian_matrix(rng, n, n);
    return 0.5 * (g + g.adjoint());
}

/// B B^H with B n x rank Gaussian.
inline CMatrix random_psd(Rng& rng, int n, int rank) {
    const CMatrix b = gaussian_matrix(rng, n, rank);
    return b * b.adjoint();
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
inline CMatrix gauss_jordan_inverse(CMatrix a) {
    const int n = static_cast<int>(a.rows());
    CMatrix inv = CMatrix::Identity(n, n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
                pivot = r;
            }
        }
        if (std::abs(a(pivot, col)) == 0.0) {
            throw std::runtime_error("gauss_jordan_inverse: singular");
        }
        a.row(col).swap(a.row(pivot));
        inv.row(col).swap(inv.row(pivot));
        const Complex p = a(col, col);
        a.row(col) /= p;
        inv.row(col) /= p;
        for (int r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const Complex f = a(r, col);
            for (int c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

/// Dominant eigenpair of a Hermitian PSD matrix by power iteration.
inline CVector power_iteration(const CMatrix& a, double* eigenvalue = nullptr, int iters = 5000) {
    Rng rng(12345);
    CVector v = gaussian_matrix(rng, static_cast<int>(a.rows()), 1);
    v /= v.norm();
    double lambda = 0.0;
    for (int i = 0; i < iters; ++i) {
        CVector w = a * v;
        const double next = w.norm();
        if (next == 0.0) {
            break;
        }
        v = w / next;
        if (std::abs(next - lambda) <= 1e-15 * next) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    if (eigenvalue != nullptr) {
        *eigenvalue = (v.adjoint() * a * v)(0).real();
    }
    return v;
}

/// Largest singular value: sqrt of the dominant eigenvalue of A^H A.
inline double power_spectral_norm(const CMatrix& a) {
    double lambda = 0.0;
    power_iteration(a.adjoint() * a, &lambda);
    return std::sqrt(lambda);
}

/// Orthonormal basis of the column span by modified Gram-Schmidt.
inline CMatrix gram_schmidt(const CMatrix& b, double drop = 1e-12) {
    std::vector<CVector> basis;
    for (int c = 0; c < b.cols(); ++c) {
        CVector v = b.col(c);
        for (const auto& q : basis) {
            v -= q * q.dot(v);
        }
        const double n = v.norm();
        if (n > drop) {
            basis.push_back(v / n);
        }
    }
    CMatrix q(b.rows(), static_cast<int>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        q.col(static_cast<int>(i)) = basis[i];
    }
    return q;
}

/// a(theta)_m = exp(-j 2 pi d m cos theta), entry by entry.
inline CVector steering(int m, double d, double theta) {
    CVector a(m);
    for (int i = 0; i < m; ++i) {
        a(i) = std::exp(Complex(0.0, -2.0 * kPi * d * i * std::cos(theta)));
    }
    return a;
}

/// beta^2 E[a a^H] with theta uniform on [lo, hi], midpoint rule over n cells.
inline CMatrix midpoint_covariance(double beta, double lo, double hi, int m, double d, int n) {
    CMatrix r = CMatrix::Zero(m, m);
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        const CVector a = steering(m, d, lo + (i + 0.5) * h);
        r += a * a.adjoint();
    }
    return beta * beta * r / n;
}

/// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double relative_frobenius(const CMatrix& a, const CMatrix& ref) {
    return (a - ref).norm() / ref.norm();
}

} // namespace oracle
