#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace pakf {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class ErrorCode {
    NotPositiveDefinite,
    NonPositiveVariance,
    DegenerateMass,
    EmptyMixture,
    IndexOutOfRange,
    DimensionMismatch,
    LengthMismatch,
    InvalidModel,
    AllRegionsDegenerate,
    AllWeightsZero,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::DegenerateMass: return "DegenerateMass";
    case ErrorCode::EmptyMixture: return "EmptyMixture";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::AllRegionsDegenerate: return "AllRegionsDegenerate";
    case ErrorCode::AllWeightsZero: return "AllWeightsZero";
    }
    return "Unknown";
}

/// Numerical or contract failure raised by the library. The code identifies
/// the failure class so callers can react (e.g. drop a degenerate component).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Probability mass below which a truncated component is treated as empty.
template <typename Scalar>
constexpr Scalar mass_epsilon() {
    if constexpr (std::numeric_limits<Scalar>::min_exponent10 < -300) {
        return Scalar(1e-300);
    } else {
        return std::numeric_limits<Scalar>::min();
    }
}

/// Interval (lo, hi] on the real line. Either endpoint may be infinite; the
/// open/closed distinction has no measure and is ignored by the numerics.
template <typename Scalar>
struct Interval {
    Scalar lo = -std::numeric_limits<Scalar>::infinity();
    Scalar hi = std::numeric_limits<Scalar>::infinity();

    bool unbounded() const {
        return lo == -std::numeric_limits<Scalar>::infinity() &&
               hi == std::numeric_limits<Scalar>::infinity();
    }
};

template <typename Scalar>
Interval<Scalar> make_interval(Scalar lo, Scalar hi) {
    if (!(lo < hi)) {
        throw std::invalid_argument("interval requires lo < hi");
    }
    return Interval<Scalar>{lo, hi};
}

/// (x + xᵀ)/2, evaluated into a fresh matrix.
template <typename Derived>
Matrix<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m) {
    return (m + m.transpose()) / typename Derived::Scalar(2);
}

}  // namespace pakf
