#pragma once

#include "pakf/gauss_kernel.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <random>

namespace pakf {

using Rng = std::mt19937_64;

/// Square-root factor G with GGᵀ = cov for a positive semidefinite cov. Uses the
/// Cholesky factor when it exists and a symmetric eigen square root otherwise
/// (e.g. zero or rank-deficient noise covariances).
template <typename Derived>
Matrix<typename Derived::Scalar> noise_factor(const Eigen::MatrixBase<Derived>& cov) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = cov.rows();
    if (n == 0 || cov.isZero(Scalar(0))) {
        return Matrix<Scalar>::Zero(n, n);
    }
    try {
        return cholesky_lower(cov);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NotPositiveDefinite) {
            throw;
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(symmetrized(cov));
    if (eig.eigenvalues().minCoeff() < -Scalar(1e-9) * eig.eigenvalues().cwiseAbs().maxCoeff()) {
        throw Error(ErrorCode::NotPositiveDefinite, "noise covariance is indefinite");
    }
    const Vector<Scalar> root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

template <typename Scalar>
Vector<Scalar> standard_normal_vector(Eigen::Index n, Rng& rng) {
    std::normal_distribution<Scalar> normal;
    Vector<Scalar> z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        z(i) = normal(rng);
    }
    return z;
}

/// Counter-based seed derivation (splitmix64 finalizer): stream k of a base
/// seed does not depend on how many streams are drawn.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base ^ (stream * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace pakf
