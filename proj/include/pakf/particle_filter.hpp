#pragma once

// Bootstrap particle filter on the full state: transition-prior proposals,
// measurement-likelihood weights, systematic resampling when the effective
// sample size drops below half the particle count.

#include "pakf/filters.hpp"
#include "pakf/sampling.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace pakf {

template <typename Scalar>
struct ParticleEnsemble {
    Matrix<Scalar> particles;  // n_x × N, one particle per column
    Vector<Scalar> weights;    // normalized
    Rng rng;

    Eigen::Index size() const { return particles.cols(); }
};

namespace detail {

template <typename Scalar>
void fill_standard_normal(Matrix<Scalar>& z, Rng& rng) {
    std::normal_distribution<Scalar> normal;
    Scalar* data = z.data();
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        data[k] = normal(rng);
    }
}

// Multiplies the weights by N(y; C x, R) and renormalizes in the log domain.
template <typename Scalar>
void reweight(const PwassModel<Scalar>& model, ParticleEnsemble<Scalar>& ens,
              const Vector<Scalar>& y) {
    const Matrix<Scalar> r_chol = cholesky_lower(model.R());
    Matrix<Scalar> residual = (-model.C() * ens.particles).colwise() + y;
    r_chol.template triangularView<Eigen::Lower>().solveInPlace(residual);
    Vector<Scalar> log_w = Scalar(-0.5) * residual.colwise().squaredNorm().transpose();
    log_w.array() += ens.weights.array().log();

    const Scalar max_log = log_w.maxCoeff();
    if (!std::isfinite(max_log)) {
        throw Error(ErrorCode::AllWeightsZero, "no particle explains the measurement");
    }
    ens.weights = (log_w.array() - max_log).exp().matrix();
    ens.weights /= ens.weights.sum();
}

template <typename Scalar>
void systematic_resample(ParticleEnsemble<Scalar>& ens) {
    const Eigen::Index n = ens.size();
    std::uniform_real_distribution<Scalar> uniform(Scalar(0), Scalar(1) / Scalar(n));
    const Scalar offset = uniform(ens.rng);
    Matrix<Scalar> picked(ens.particles.rows(), n);
    Scalar cumulative = ens.weights(0);
    Eigen::Index src = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar target = offset + Scalar(j) / Scalar(n);
        while (cumulative < target && src + 1 < n) {
            ++src;
            cumulative += ens.weights(src);
        }
        picked.col(j) = ens.particles.col(src);
    }
    ens.particles = std::move(picked);
    ens.weights.setConstant(Scalar(1) / Scalar(n));
}

template <typename Scalar>
void resample_if_degenerate(ParticleEnsemble<Scalar>& ens) {
    const Scalar ess = Scalar(1) / ens.weights.squaredNorm();
    if (ess < Scalar(0.5) * Scalar(ens.size())) {
        systematic_resample(ens);
    }
}

}  // namespace detail

/// N particles drawn from the prior, equally weighted.
template <typename Scalar>
ParticleEnsemble<Scalar> make_ensemble(const GaussianBelief<Scalar>& prior, Eigen::Index n,
                                       std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("particle count must be at least 1");
    }
    ParticleEnsemble<Scalar> ens{Matrix<Scalar>(prior.mean.size(), n),
                                 Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)), Rng(seed)};
    detail::fill_standard_normal(ens.particles, ens.rng);
    ens.particles = (noise_factor(prior.cov) * ens.particles).colwise() + prior.mean;
    return ens;
}

/// Weights the ensemble by the first measurement (no transition before it).
template <typename Scalar>
void pf_measurement_update(const PwassModel<Scalar>& model, ParticleEnsemble<Scalar>& ens,
                           const Vector<Scalar>& y) {
    if (y.size() != model.ny() || ens.particles.rows() != model.nx()) {
        throw Error(ErrorCode::DimensionMismatch, "pf_measurement_update dimensions");
    }
    detail::reweight(model, ens, y);
    detail::resample_if_degenerate(ens);
}

template <typename Scalar>
ParticleEnsemble<Scalar> pf_step(const PwassModel<Scalar>& model, ParticleEnsemble<Scalar> ens,
                                 const Vector<Scalar>& u, const Vector<Scalar>& y) {
    if (ens.particles.rows() != model.nx() || u.size() != model.nu() || y.size() != model.ny()) {
        throw Error(ErrorCode::DimensionMismatch, "pf_step dimensions");
    }
    // All regions share every entry of A_i except (1, 0), and b_i is nonzero only
    // in row 1, so propagate with the shared part and patch row 1 per particle.
    Matrix<Scalar> shared = region_matrices(model, 0).A;
    shared(1, 0) = Scalar(0);
    const Vector<Scalar> drive = model.B() * u;

    Matrix<Scalar> noise(model.nx(), ens.size());
    detail::fill_standard_normal(noise, ens.rng);
    Matrix<Scalar> next = shared * ens.particles + noise_factor(model.Q()) * noise;
    next.colwise() += drive;
    const auto& f = model.f();
    for (Eigen::Index j = 0; j < ens.size(); ++j) {
        const Scalar eta = ens.particles(0, j);
        const int i = region_index(f, eta);
        next(1, j) += f.slope(i) * eta + f.intercept(i);
    }
    ens.particles = std::move(next);

    detail::reweight(model, ens, y);
    detail::resample_if_degenerate(ens);
    return ens;
}

/// Weighted sample mean and (population) covariance.
template <typename Scalar>
GaussianBelief<Scalar> estimate(const ParticleEnsemble<Scalar>& ens) {
    const Vector<Scalar> mean = ens.particles * ens.weights;
    const Matrix<Scalar> centered = ens.particles.colwise() - mean;
    const Matrix<Scalar> cov =
        centered * ens.weights.asDiagonal() * centered.transpose();
    return {mean, symmetrized(cov)};
}

}  // namespace pakf
