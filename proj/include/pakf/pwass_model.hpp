#pragma once

// Piecewise affine state-space model. The state is ordered x = [η, ζ, χᵀ]ᵀ and
// the dynamics switch on the scalar η:
//
//   x_{t+1} = [Φᵀx; a_i η + b_i + φᵀ x_{1:}; F x] + B u_t + w_t,   w_t ~ N(0, Q)
//   y_t     = C x_t + ν_t,                                        ν_t ~ N(0, R)
//
// with region i active for l_i < η ≤ l_{i+1}. Regions are 0-based here.

#include "pakf/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace pakf {

template <typename Scalar>
class PwaFunction {
public:
    PwaFunction() = default;

    /// breakpoints has one more entry than slopes/intercepts and runs from
    /// −∞ to +∞, strictly increasing.
    PwaFunction(std::vector<Scalar> breakpoints, std::vector<Scalar> slopes,
                std::vector<Scalar> intercepts)
        : breakpoints_(std::move(breakpoints)),
          slopes_(std::move(slopes)),
          intercepts_(std::move(intercepts)) {
        const auto inf = std::numeric_limits<Scalar>::infinity();
        if (slopes_.empty() || slopes_.size() != intercepts_.size() ||
            breakpoints_.size() != slopes_.size() + 1) {
            throw Error(ErrorCode::InvalidModel, "need N slopes, N intercepts, N+1 breakpoints");
        }
        if (breakpoints_.front() != -inf || breakpoints_.back() != inf) {
            throw Error(ErrorCode::InvalidModel, "outer breakpoints must be -inf and +inf");
        }
        for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
            if (!(breakpoints_[i - 1] < breakpoints_[i])) {
                throw Error(ErrorCode::InvalidModel, "breakpoints must increase strictly");
            }
        }
        for (std::size_t i = 0; i < slopes_.size(); ++i) {
            if (!std::isfinite(slopes_[i]) || !std::isfinite(intercepts_[i])) {
                throw Error(ErrorCode::InvalidModel, "slopes and intercepts must be finite");
            }
        }
    }

    int num_regions() const { return static_cast<int>(slopes_.size()); }
    const std::vector<Scalar>& breakpoints() const { return breakpoints_; }
    const std::vector<Scalar>& slopes() const { return slopes_; }
    const std::vector<Scalar>& intercepts() const { return intercepts_; }

    Scalar slope(int i) const { return slopes_.at(static_cast<std::size_t>(i)); }
    Scalar intercept(int i) const { return intercepts_.at(static_cast<std::size_t>(i)); }

    Interval<Scalar> region(int i) const {
        const auto k = static_cast<std::size_t>(i);
        return {breakpoints_.at(k), breakpoints_.at(k + 1)};
    }

    Scalar operator()(Scalar eta) const;

private:
    std::vector<Scalar> breakpoints_;
    std::vector<Scalar> slopes_;
    std::vector<Scalar> intercepts_;
};

/// Index of the region with l_i < eta ≤ l_{i+1}; a point on a breakpoint
/// belongs to the lower region.
template <typename Scalar>
int region_index(const PwaFunction<Scalar>& f, Scalar eta) {
    if (std::isnan(eta)) {
        throw std::invalid_argument("region_index: eta is NaN");
    }
    const auto& bp = f.breakpoints();
    // First interior/upper breakpoint with eta <= l_{i+1}.
    const auto it = std::lower_bound(bp.begin() + 1, bp.end(), eta);
    return static_cast<int>(std::distance(bp.begin() + 1, it));
}

template <typename Scalar>
Scalar PwaFunction<Scalar>::operator()(Scalar eta) const {
    const int i = region_index(*this, eta);
    return slope(i) * eta + intercept(i);
}

template <typename Scalar>
struct RegionMatrices {
    Matrix<Scalar> A;
    Vector<Scalar> b;
};

template <typename Scalar>
class PwassModel {
public:
    PwassModel() = default;

    PwassModel(Vector<Scalar> Phi, Vector<Scalar> phi, Matrix<Scalar> F, Matrix<Scalar> B,
               Matrix<Scalar> C, Matrix<Scalar> Q, Matrix<Scalar> R, PwaFunction<Scalar> f)
        : Phi_(std::move(Phi)),
          phi_(std::move(phi)),
          F_(std::move(F)),
          B_(std::move(B)),
          C_(std::move(C)),
          Q_(std::move(Q)),
          R_(std::move(R)),
          f_(std::move(f)) {
        const Eigen::Index nx = Phi_.size();
        if (nx < 2) {
            throw Error(ErrorCode::InvalidModel, "state dimension must be at least 2");
        }
        if (phi_.size() != nx - 1 || F_.rows() != nx - 2 || (F_.rows() > 0 && F_.cols() != nx)) {
            throw Error(ErrorCode::InvalidModel, "Phi/phi/F shapes are inconsistent");
        }
        if (F_.rows() == 0) {
            F_.resize(0, nx);
        }
        if (B_.rows() != nx) {
            throw Error(ErrorCode::InvalidModel, "B must have n_x rows");
        }
        if (C_.cols() != nx || C_.rows() < 1) {
            throw Error(ErrorCode::InvalidModel, "C must be n_y x n_x with n_y >= 1");
        }
        if (Q_.rows() != nx || Q_.cols() != nx || R_.rows() != C_.rows() ||
            R_.cols() != C_.rows()) {
            throw Error(ErrorCode::InvalidModel, "Q must be n_x x n_x and R n_y x n_y");
        }
        if (!Q_.isApprox(Q_.transpose()) || !R_.isApprox(R_.transpose())) {
            throw Error(ErrorCode::InvalidModel, "Q and R must be symmetric");
        }
        if (f_.num_regions() < 1) {
            throw Error(ErrorCode::InvalidModel, "missing piecewise affine function");
        }
    }

    Eigen::Index nx() const { return Phi_.size(); }
    Eigen::Index ny() const { return C_.rows(); }
    Eigen::Index nu() const { return B_.cols(); }
    int num_regions() const { return f_.num_regions(); }

    const Vector<Scalar>& Phi() const { return Phi_; }
    const Vector<Scalar>& phi() const { return phi_; }
    const Matrix<Scalar>& F() const { return F_; }
    const Matrix<Scalar>& B() const { return B_; }
    const Matrix<Scalar>& C() const { return C_; }
    const Matrix<Scalar>& Q() const { return Q_; }
    const Matrix<Scalar>& R() const { return R_; }
    const PwaFunction<Scalar>& f() const { return f_; }

private:
    Vector<Scalar> Phi_;
    Vector<Scalar> phi_;
    Matrix<Scalar> F_;
    Matrix<Scalar> B_;
    Matrix<Scalar> C_;
    Matrix<Scalar> Q_;
    Matrix<Scalar> R_;
    PwaFunction<Scalar> f_;
};

/// A_i and b_i of the affine submodel active in region i:
/// A_i = [Φᵀ; a_i φᵀ; F], b_i = [0; b_i; 0].
template <typename Scalar>
RegionMatrices<Scalar> region_matrices(const PwassModel<Scalar>& model, int i) {
    if (i < 0 || i >= model.num_regions()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "region " + std::to_string(i) + " of " + std::to_string(model.num_regions()));
    }
    const Eigen::Index nx = model.nx();
    RegionMatrices<Scalar> out{Matrix<Scalar>(nx, nx), Vector<Scalar>::Zero(nx)};
    out.A.row(0) = model.Phi().transpose();
    out.A(1, 0) = model.f().slope(i);
    out.A.row(1).tail(nx - 1) = model.phi().transpose();
    out.A.bottomRows(nx - 2) = model.F();
    out.b(1) = model.f().intercept(i);
    return out;
}

template <typename Scalar>
Vector<Scalar> step_state(const PwassModel<Scalar>& model, const Vector<Scalar>& x,
                          const Vector<Scalar>& u, const Vector<Scalar>& w) {
    if (x.size() != model.nx() || u.size() != model.nu() || w.size() != model.nx()) {
        throw Error(ErrorCode::DimensionMismatch, "step_state dimensions");
    }
    const auto rm = region_matrices(model, region_index(model.f(), x(0)));
    return rm.A * x + model.B() * u + rm.b + w;
}

template <typename Scalar>
struct Trajectory {
    std::vector<Vector<Scalar>> states;        // x_1..x_T
    std::vector<Vector<Scalar>> inputs;        // u_1..u_{T-1}
    std::vector<Vector<Scalar>> measurements;  // y_1..y_T

    std::size_t length() const { return measurements.size(); }
};

/// Simulates T = inputs.size() + 1 steps from x1 with process and measurement
/// noise drawn from one generator seeded with rng_seed.
template <typename Scalar>
Trajectory<Scalar> simulate(const PwassModel<Scalar>& model, const Vector<Scalar>& x1,
                            const std::vector<Vector<Scalar>>& inputs, std::uint64_t rng_seed) {
    if (x1.size() != model.nx()) {
        throw Error(ErrorCode::DimensionMismatch, "simulate: x1 dimension");
    }
    for (const auto& u : inputs) {
        if (u.size() != model.nu()) {
            throw Error(ErrorCode::DimensionMismatch, "simulate: input dimension");
        }
    }
    Rng rng(rng_seed);
    const Matrix<Scalar> q_root = noise_factor(model.Q());
    const Matrix<Scalar> r_root = noise_factor(model.R());
    const std::size_t T = inputs.size() + 1;

    Trajectory<Scalar> traj;
    traj.inputs = inputs;
    traj.states.reserve(T);
    traj.measurements.reserve(T);
    Vector<Scalar> x = x1;
    for (std::size_t t = 0; t < T; ++t) {
        const Vector<Scalar> nu = r_root * standard_normal_vector<Scalar>(model.ny(), rng);
        traj.states.push_back(x);
        traj.measurements.push_back(model.C() * x + nu);
        if (t + 1 < T) {
            const Vector<Scalar> w = q_root * standard_normal_vector<Scalar>(model.nx(), rng);
            x = step_state(model, x, inputs[t], w);
        }
    }
    return traj;
}

/// Physical parameters of the single-degree-of-freedom clearance oscillator.
struct SdofsParams {
    double dt = 0.01;       // s
    double damping = 1.0;   // N·s/mm
    double mass = 1.0;      // t
    double a1 = 50.0;       // N/mm, outer stiffness (a3 = a1)
    double a2 = 5.0;        // N/mm, stiffness inside the clearance
    double l1 = -1.0;       // mm
    double l2 = 1.0;        // mm
    double q = 0.01;        // process noise variance per state
    double r = 1.0;         // measurement noise variance
};

/// Discretized mass-spring-damper with a piecewise affine spring. The state
/// is [position, velocity]; the spring map is stored already scaled by
/// −Δt/M so the generic region assembly applies.
template <typename Scalar = double>
PwassModel<Scalar> sdofs_model(const SdofsParams& p = {}) {
    const auto inf = std::numeric_limits<Scalar>::infinity();
    const double a3 = p.a1;
    const double b1 = p.l1 * (p.a2 - p.a1);
    const double b2 = 0.0;
    const double b3 = p.l2 * (p.a2 - a3);
    const double k = -p.dt / p.mass;

    PwaFunction<Scalar> f({-inf, Scalar(p.l1), Scalar(p.l2), inf},
                          {Scalar(k * p.a1), Scalar(k * p.a2), Scalar(k * a3)},
                          {Scalar(k * b1), Scalar(k * b2), Scalar(k * b3)});

    Vector<Scalar> Phi(2);
    Phi << Scalar(1), Scalar(p.dt);
    Vector<Scalar> phi(1);
    phi << Scalar(1.0 - p.dt * p.damping / p.mass);
    Matrix<Scalar> B(2, 1);
    B << Scalar(0), Scalar(p.dt / p.mass);
    Matrix<Scalar> C(1, 2);
    C << Scalar(1), Scalar(0);
    const Matrix<Scalar> Q = Scalar(p.q) * Matrix<Scalar>::Identity(2, 2);
    const Matrix<Scalar> R = Scalar(p.r) * Matrix<Scalar>::Identity(1, 1);
    return PwassModel<Scalar>(Phi, phi, Matrix<Scalar>(0, 2), B, C, Q, R, std::move(f));
}

}  // namespace pakf
