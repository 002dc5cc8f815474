#pragma once

// Gaussian-belief filters for piecewise affine state-space models.
//
// One step consumes (u_t, y_{t+1}) and maps the belief N(m_{t|t}, P_{t|t}) to
// N(m_{t+1|t+1}, P_{t+1|t+1}). The piecewise affine Kalman filter (PAKF) runs
// the joint prediction/update of (x_t, x_{t+1}) for every region, truncates
// each joint Gaussian to its region on η_t, and collapses the region mixture
// to one Gaussian. The EKF baseline runs the same joint update for the region
// holding the current mean only.

#include "pakf/gauss_kernel.hpp"
#include "pakf/pwass_model.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace pakf {

template <typename Scalar>
using GaussianBelief = Gaussian<Scalar>;

/// Moments of (x_t, x_{t+1}, y_{t+1}) under one affine submodel, split into
/// the state block (index 1) and the measurement block (index 2).
template <typename Scalar>
struct RegionJoint {
    Vector<Scalar> mu1;  // 2 n_x
    Vector<Scalar> mu2;  // n_y
    Matrix<Scalar> S11;  // 2 n_x × 2 n_x
    Matrix<Scalar> S21;  // n_y × 2 n_x
    Matrix<Scalar> S22;  // n_y × n_y
};

template <typename Scalar>
struct ConditionedJoint {
    Vector<Scalar> mean;  // μ̃, 2 n_x
    Matrix<Scalar> cov;   // Σ̃, 2 n_x × 2 n_x
    Scalar loglik{};      // log N(y; μ2, Σ22)
};

template <typename Scalar>
struct StepDiagnostics {
    std::vector<Scalar> region_probs;  // Pr(x_t ∈ R_i | y_{1:t+1}); 0 for dropped regions
    Scalar log_normalizer{};           // log Z_t
    int dropped_regions = 0;
};

template <typename Scalar>
struct PakfStepResult {
    GaussianBelief<Scalar> belief;
    StepDiagnostics<Scalar> diagnostics;
};

namespace detail {

template <typename Scalar>
void check_step_dims(const PwassModel<Scalar>& model, const GaussianBelief<Scalar>& belief,
                     const Vector<Scalar>& u, const Vector<Scalar>& y) {
    const Eigen::Index nx = model.nx();
    if (belief.mean.size() != nx || belief.cov.rows() != nx || belief.cov.cols() != nx ||
        u.size() != model.nu() || y.size() != model.ny()) {
        throw Error(ErrorCode::DimensionMismatch, "filter step dimensions");
    }
}

template <typename Scalar>
GaussianBelief<Scalar> next_state_block(const ConditionedJoint<Scalar>& c, Eigen::Index nx) {
    return {c.mean.tail(nx), symmetrized(c.cov.bottomRightCorner(nx, nx))};
}

}  // namespace detail

template <typename Scalar>
RegionJoint<Scalar> predict_joint(const PwassModel<Scalar>& model,
                                  const GaussianBelief<Scalar>& belief, int i,
                                  const Vector<Scalar>& u) {
    const Eigen::Index nx = model.nx();
    if (belief.mean.size() != nx || belief.cov.rows() != nx || u.size() != model.nu()) {
        throw Error(ErrorCode::DimensionMismatch, "predict_joint dimensions");
    }
    const auto rm = region_matrices(model, i);
    const Matrix<Scalar>& P = belief.cov;
    const Matrix<Scalar>& C = model.C();

    const Vector<Scalar> next_mean = rm.A * belief.mean + model.B() * u + rm.b;
    const Matrix<Scalar> AP = rm.A * P;
    const Matrix<Scalar> next_cov = symmetrized(AP * rm.A.transpose() + model.Q());

    RegionJoint<Scalar> j;
    j.mu1.resize(2 * nx);
    j.mu1 << belief.mean, next_mean;
    j.mu2 = C * next_mean;
    j.S11.resize(2 * nx, 2 * nx);
    j.S11 << P, AP.transpose(), AP, next_cov;
    j.S21.resize(model.ny(), 2 * nx);
    j.S21 << C * AP, C * next_cov;
    j.S22 = symmetrized(C * next_cov * C.transpose() + model.R());
    return j;
}

/// Conditions the state block of a region joint on y.
template <typename Scalar>
ConditionedJoint<Scalar> condition_on_measurement(const RegionJoint<Scalar>& j,
                                                  const Vector<Scalar>& y) {
    if (y.size() != j.mu2.size()) {
        throw Error(ErrorCode::DimensionMismatch, "condition_on_measurement: y dimension");
    }
    const Matrix<Scalar> L = cholesky_lower(j.S22);
    const auto lower = L.template triangularView<Eigen::Lower>();
    const Matrix<Scalar> W = lower.solve(j.S21);  // L⁻¹ Σ21
    const Vector<Scalar> innovation = y - j.mu2;
    const Vector<Scalar> z = lower.solve(innovation);

    ConditionedJoint<Scalar> out;
    out.mean = j.mu1 + W.transpose() * z;
    out.cov = symmetrized(j.S11 - W.transpose() * W);
    out.loglik = gaussian_logpdf(y, j.mu2, j.S22);
    return out;
}

/// Plain Kalman measurement update N(m, P) | y with y = C x + ν, ν ~ N(0, R).
/// Used for the first measurement, which has no transition in front of it.
template <typename Scalar>
GaussianBelief<Scalar> measurement_update(const GaussianBelief<Scalar>& prior,
                                          const Matrix<Scalar>& C, const Matrix<Scalar>& R,
                                          const Vector<Scalar>& y) {
    if (C.cols() != prior.mean.size() || R.rows() != C.rows() || y.size() != C.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "measurement_update dimensions");
    }
    const Matrix<Scalar> PCt = prior.cov * C.transpose();
    const Matrix<Scalar> S = symmetrized(C * PCt + R);
    const Matrix<Scalar> L = cholesky_lower(S);
    const auto lower = L.template triangularView<Eigen::Lower>();
    const Matrix<Scalar> W = lower.solve(PCt.transpose());
    const Vector<Scalar> z = lower.solve(Vector<Scalar>(y - C * prior.mean));
    return {prior.mean + W.transpose() * z, symmetrized(prior.cov - W.transpose() * W)};
}

template <typename Scalar>
PakfStepResult<Scalar> pakf_step(const PwassModel<Scalar>& model,
                                 const GaussianBelief<Scalar>& belief, const Vector<Scalar>& u,
                                 const Vector<Scalar>& y) {
    detail::check_step_dims(model, belief, u, y);
    const Eigen::Index nx = model.nx();
    const int n_regions = model.num_regions();
    const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();

    std::vector<WeightedGaussian<Scalar>> components(static_cast<std::size_t>(n_regions));
    std::vector<Scalar> log_weights(static_cast<std::size_t>(n_regions), neg_inf);
    int dropped = 0;

    for (int i = 0; i < n_regions; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const auto region = model.f().region(i);
        const auto cond = condition_on_measurement(predict_joint(model, belief, i, u), y);

        Scalar mass = 1;
        if (!region.unbounded()) {
            mass = gaussian_interval_prob(cond.mean(0), cond.cov(0, 0), region);
        }
        if (!(mass >= mass_epsilon<Scalar>()) || !std::isfinite(cond.loglik)) {
            ++dropped;
            continue;
        }
        try {
            auto tm = dtmnd_moments(cond.mean, cond.cov, region);
            if (!tm.mean.allFinite() || !tm.cov.allFinite()) {
                ++dropped;
                continue;
            }
            components[k] = {Scalar(0), std::move(tm.mean), std::move(tm.cov)};
            log_weights[k] = cond.loglik + std::log(mass);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateMass) {
                throw;
            }
            ++dropped;
        }
    }
    if (dropped == n_regions) {
        throw Error(ErrorCode::AllRegionsDegenerate, "every region weight underflowed");
    }

    Scalar max_log = neg_inf;
    for (const Scalar lw : log_weights) {
        max_log = std::max(max_log, lw);
    }
    Scalar sum = 0;
    for (const Scalar lw : log_weights) {
        sum += std::exp(lw - max_log);
    }

    PakfStepResult<Scalar> out;
    out.diagnostics.log_normalizer = max_log + std::log(sum);
    out.diagnostics.dropped_regions = dropped;
    out.diagnostics.region_probs.assign(static_cast<std::size_t>(n_regions), Scalar(0));
    std::vector<WeightedGaussian<Scalar>> kept;
    kept.reserve(static_cast<std::size_t>(n_regions - dropped));
    for (std::size_t k = 0; k < components.size(); ++k) {
        if (log_weights[k] == neg_inf) {
            continue;
        }
        const Scalar w = std::exp(log_weights[k] - max_log) / sum;
        out.diagnostics.region_probs[k] = w;
        components[k].weight = w;
        kept.push_back(std::move(components[k]));
    }

    const auto joint = moment_match(std::span<const WeightedGaussian<Scalar>>(kept));
    out.belief = {joint.mean.tail(nx), symmetrized(joint.cov.bottomRightCorner(nx, nx))};
    return out;
}

/// Kalman recursion on the single affine piece that holds the current mean.
template <typename Scalar>
GaussianBelief<Scalar> ekf_step(const PwassModel<Scalar>& model,
                                const GaussianBelief<Scalar>& belief, const Vector<Scalar>& u,
                                const Vector<Scalar>& y) {
    detail::check_step_dims(model, belief, u, y);
    const int active = region_index(model.f(), belief.mean(0));
    const auto cond = condition_on_measurement(predict_joint(model, belief, active, u), y);
    return detail::next_state_block(cond, model.nx());
}

}  // namespace pakf
