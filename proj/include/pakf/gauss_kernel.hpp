#pragma once

// Gaussian numerics used by the filters: Cholesky factor, standard normal
// pdf/cdf, interval probabilities, moments of a normal truncated on its first
// component, and collapse of a Gaussian mixture to a single Gaussian.

#include "pakf/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace pakf {

template <typename Scalar>
struct Gaussian {
    Vector<Scalar> mean;
    Matrix<Scalar> cov;
};

template <typename Scalar>
struct WeightedGaussian {
    Scalar weight{};
    Vector<Scalar> mean;
    Matrix<Scalar> cov;
};

/// Lower Cholesky factor L with LLᵀ = S. Only the lower triangle of S is read.
/// Fails when a pivot drops to 1e-12 times the largest diagonal entry.
template <typename Derived>
Matrix<typename Derived::Scalar> cholesky_lower(const Eigen::MatrixBase<Derived>& S) {
    using Scalar = typename Derived::Scalar;
    if (S.rows() != S.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "cholesky_lower needs a square matrix");
    }
    const Eigen::Index n = S.rows();
    Matrix<Scalar> L = Matrix<Scalar>::Zero(n, n);
    if (n == 0) {
        return L;
    }
    const Scalar max_diag = S.diagonal().maxCoeff();
    if (!(max_diag > Scalar(0)) || !std::isfinite(max_diag)) {
        throw Error(ErrorCode::NotPositiveDefinite, "non-positive or non-finite diagonal");
    }
    const Scalar tol = Scalar(1e-12) * max_diag;
    for (Eigen::Index j = 0; j < n; ++j) {
        Scalar pivot = S(j, j) - L.row(j).head(j).squaredNorm();
        if (!(pivot > tol)) {
            throw Error(ErrorCode::NotPositiveDefinite,
                        "pivot " + std::to_string(static_cast<double>(pivot)) + " at column " +
                            std::to_string(j));
        }
        const Scalar d = std::sqrt(pivot);
        L(j, j) = d;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            L(i, j) = (S(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / d;
        }
    }
    return L;
}

template <typename Scalar>
Scalar std_normal_pdf(Scalar x) {
    const Scalar inv_sqrt_2pi = Scalar(1) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
    return inv_sqrt_2pi * std::exp(Scalar(-0.5) * x * x);
}

template <typename Scalar>
Scalar std_normal_cdf(Scalar x) {
    // erfc keeps relative accuracy in the lower tail where 1 + erf cancels.
    return Scalar(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

/// Φ(b) − Φ(a) for a < b, using upper-tail complements when both limits sit
/// on the same side so the difference never cancels to zero.
template <typename Scalar>
Scalar std_normal_interval_prob(Scalar a, Scalar b) {
    const Scalar r2 = std::numbers::sqrt2_v<Scalar>;
    if (a >= Scalar(0)) {
        return Scalar(0.5) * (std::erfc(a / r2) - std::erfc(b / r2));
    }
    if (b <= Scalar(0)) {
        return Scalar(0.5) * (std::erfc(-b / r2) - std::erfc(-a / r2));
    }
    return Scalar(1) - Scalar(0.5) * std::erfc(b / r2) - Scalar(0.5) * std::erfc(-a / r2);
}

template <typename Scalar>
Scalar gaussian_interval_prob(Scalar mean, Scalar var, const Interval<Scalar>& iv) {
    if (!(var > Scalar(0))) {
        throw Error(ErrorCode::NonPositiveVariance, "interval probability needs var > 0");
    }
    const Scalar sd = std::sqrt(var);
    const Scalar p = std_normal_interval_prob((iv.lo - mean) / sd, (iv.hi - mean) / sd);
    return std::clamp(p, Scalar(0), Scalar(1));
}

template <typename DerivedX, typename DerivedM, typename DerivedC>
typename DerivedX::Scalar gaussian_logpdf(const Eigen::MatrixBase<DerivedX>& x,
                                          const Eigen::MatrixBase<DerivedM>& mean,
                                          const Eigen::MatrixBase<DerivedC>& cov) {
    using Scalar = typename DerivedX::Scalar;
    if (x.size() != mean.size() || cov.rows() != x.size()) {
        throw Error(ErrorCode::DimensionMismatch, "gaussian_logpdf dimensions");
    }
    const Matrix<Scalar> L = cholesky_lower(cov);
    const Vector<Scalar> z =
        L.template triangularView<Eigen::Lower>().solve(Vector<Scalar>(x - mean));
    const Scalar log_det_half = L.diagonal().array().log().sum();
    const Scalar n = static_cast<Scalar>(x.size());
    return Scalar(-0.5) * z.squaredNorm() - log_det_half -
           Scalar(0.5) * n * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// Moments of a standard normal truncated to [lo, hi].
template <typename Scalar>
struct StandardTruncatedMoments {
    Scalar mass;  // Φ(hi) − Φ(lo)
    Scalar mean;  // m*
    Scalar var;   // s*
};

namespace detail {

// Laplace continued fraction Q(x)/φ(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))),
// evaluated backwards. Returns the first three partial tails U0, U1, U2 with
// U_k = x + (k+1)/U_{k+1}. Accurate to machine precision for x > 8.
template <typename Scalar>
std::array<Scalar, 3> mills_tails(Scalar x) {
    constexpr int depth = 64;
    Scalar u = x;
    std::array<Scalar, 3> head{};
    for (int k = depth; k >= 0; --k) {
        u = x + Scalar(k + 1) / u;
        if (k <= 2) {
            head[static_cast<std::size_t>(k)] = u;
        }
    }
    return head;
}

// Upper-tail branch, lo > 8. Works with ratios to φ(lo) so nothing underflows
// before the mass itself does.
template <typename Scalar>
StandardTruncatedMoments<Scalar> upper_tail_moments(Scalar lo, Scalar hi) {
    const auto tails_lo = mills_tails(lo);
    const Scalar r_lo = Scalar(1) / tails_lo[0];
    StandardTruncatedMoments<Scalar> out{};
    if (std::isinf(hi)) {
        const Scalar t = Scalar(1) / tails_lo[1];
        const Scalar u = Scalar(1) / tails_lo[2];
        out.mass = std_normal_pdf(lo) * r_lo;
        out.mean = tails_lo[0];
        // 1 − m*(m* − lo) rewritten through the fraction tails to avoid cancellation.
        out.var = t * (Scalar(2) * u - t);
        return out;
    }
    const Scalar rho = std::exp(Scalar(-0.5) * (hi - lo) * (hi + lo));  // φ(hi)/φ(lo)
    const Scalar r_hi = Scalar(1) / mills_tails(hi)[0];
    const Scalar scaled_mass = r_lo - rho * r_hi;  // mass / φ(lo)
    out.mass = std_normal_pdf(lo) * scaled_mass;
    out.mean = (Scalar(1) - rho) / scaled_mass;
    out.var = Scalar(1) + (lo - hi * rho) / scaled_mass - out.mean * out.mean;
    return out;
}

template <typename Scalar>
Scalar x_pdf(Scalar x) {
    return std::isinf(x) ? Scalar(0) : x * std_normal_pdf(x);
}

}  // namespace detail

template <typename Scalar>
StandardTruncatedMoments<Scalar> standard_truncated_moments(Scalar lo, Scalar hi) {
    constexpr Scalar tail = Scalar(8);
    StandardTruncatedMoments<Scalar> out{};
    if (lo > tail) {
        out = detail::upper_tail_moments(lo, hi);
    } else if (hi < -tail) {
        out = detail::upper_tail_moments(-hi, -lo);
        out.mean = -out.mean;
    } else {
        out.mass = std_normal_interval_prob(lo, hi);
        const Scalar pdf_lo = std_normal_pdf(lo);
        const Scalar pdf_hi = std_normal_pdf(hi);
        out.mean = (pdf_lo - pdf_hi) / out.mass;
        out.var = Scalar(1) + (detail::x_pdf(lo) - detail::x_pdf(hi)) / out.mass -
                  out.mean * out.mean;
    }
    out.var = std::clamp(out.var, Scalar(0), Scalar(1));
    return out;
}

template <typename Scalar>
struct TruncatedMoments {
    Vector<Scalar> mean;
    Matrix<Scalar> cov;
    Scalar mass{};
};

/// Mean and covariance of N(mu, cov) truncated to iv on its FIRST component,
/// plus the retained probability mass. With an unbounded interval the input
/// is returned unchanged with mass 1 and cov is not factorized.
template <typename DerivedM, typename DerivedC>
TruncatedMoments<typename DerivedM::Scalar> dtmnd_moments(
    const Eigen::MatrixBase<DerivedM>& mu, const Eigen::MatrixBase<DerivedC>& cov,
    const Interval<typename DerivedM::Scalar>& iv) {
    using Scalar = typename DerivedM::Scalar;
    if (mu.size() == 0 || cov.rows() != mu.size() || cov.cols() != mu.size()) {
        throw Error(ErrorCode::DimensionMismatch, "dtmnd_moments dimensions");
    }
    if (!(iv.lo < iv.hi)) {
        throw std::invalid_argument("dtmnd_moments requires lo < hi");
    }
    if (iv.unbounded()) {
        return {mu, cov, Scalar(1)};
    }
    const Matrix<Scalar> chol = cholesky_lower(cov);
    const Scalar scale = chol(0, 0);
    const auto std_moments =
        standard_truncated_moments((iv.lo - mu(0)) / scale, (iv.hi - mu(0)) / scale);
    if (!(std_moments.mass >= mass_epsilon<Scalar>()) || !std::isfinite(std_moments.mean)) {
        throw Error(ErrorCode::DegenerateMass,
                    "truncated mass " + std::to_string(static_cast<double>(std_moments.mass)));
    }

    TruncatedMoments<Scalar> out;
    out.mean = mu + chol.col(0) * std_moments.mean;
    Vector<Scalar> d = Vector<Scalar>::Ones(mu.size());
    d(0) = std_moments.var;
    out.cov = symmetrized(chol * d.asDiagonal() * chol.transpose());
    out.mass = std_moments.mass;
    return out;
}

/// Single Gaussian with the first two moments of the mixture. Weights are
/// normalized internally; components under the mass threshold are ignored.
template <typename Scalar>
Gaussian<Scalar> moment_match(std::span<const WeightedGaussian<Scalar>> components) {
    Scalar total = 0;
    Eigen::Index dim = -1;
    for (const auto& c : components) {
        if (c.weight < Scalar(0) || !std::isfinite(c.weight)) {
            throw std::invalid_argument("moment_match weights must be finite and nonnegative");
        }
        if (dim < 0) {
            dim = c.mean.size();
        }
        if (c.mean.size() != dim || c.cov.rows() != dim || c.cov.cols() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "moment_match component dimensions");
        }
        if (c.weight >= mass_epsilon<Scalar>()) {
            total += c.weight;
        }
    }
    if (!(total > Scalar(0))) {
        throw Error(ErrorCode::EmptyMixture, "no component carries weight");
    }

    Gaussian<Scalar> out{Vector<Scalar>::Zero(dim), Matrix<Scalar>::Zero(dim, dim)};
    for (const auto& c : components) {
        if (c.weight >= mass_epsilon<Scalar>()) {
            out.mean += (c.weight / total) * c.mean;
        }
    }
    for (const auto& c : components) {
        if (c.weight >= mass_epsilon<Scalar>()) {
            const Vector<Scalar> spread = c.mean - out.mean;
            out.cov += (c.weight / total) * (c.cov + spread * spread.transpose());
        }
    }
    out.cov = symmetrized(out.cov);
    return out;
}

template <typename Scalar>
Gaussian<Scalar> moment_match(const std::vector<WeightedGaussian<Scalar>>& components) {
    return moment_match(std::span<const WeightedGaussian<Scalar>>(components));
}

}  // namespace pakf
