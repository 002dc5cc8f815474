#pragma once

// Randomized models and beliefs shared by the unit and acceptance tests.

#include "oracles/oracles.hpp"
#include "pakf/filters.hpp"

#include <limits>
#include <random>
#include <vector>

namespace fixture {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec gaussian_vector(Eigen::Index n, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> normal(0.0, sd);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

/// Random model with the given breakpoints (interior only). Dynamics are
/// scaled to stay moderately stable so long runs remain well conditioned.
inline pakf::PwassModel<double> random_model(Eigen::Index nx, Eigen::Index ny, Eigen::Index nu,
                                             const std::vector<double>& interior,
                                             std::mt19937_64& rng) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    std::vector<double> bp{-inf};
    bp.insert(bp.end(), interior.begin(), interior.end());
    bp.push_back(inf);
    std::vector<double> slopes, intercepts;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        slopes.push_back(uni(rng));
        intercepts.push_back(uni(rng));
    }
    Vec Phi(nx), phi(nx - 1);
    for (Eigen::Index i = 0; i < nx; ++i) Phi(i) = 0.5 * uni(rng);
    Phi(0) += 0.9;
    for (Eigen::Index i = 0; i < nx - 1; ++i) phi(i) = 0.5 * uni(rng);
    phi(0) += 0.8;
    Mat F(nx - 2, nx);
    for (Eigen::Index r = 0; r < nx - 2; ++r) {
        for (Eigen::Index c = 0; c < nx; ++c) F(r, c) = 0.4 * uni(rng);
        F(r, r + 2) += 0.7;
    }
    Mat B(nx, nu), C(ny, nx);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = uni(rng);
    for (Eigen::Index i = 0; i < C.size(); ++i) C.data()[i] = 2 * uni(rng);
    C(0, 0) += 1.0;
    const Mat Q = oracle::random_spd(nx, rng, 0.01, 0.2);
    const Mat R = oracle::random_spd(ny, rng, 0.1, 1.0);
    return {Phi, phi, F, B, C, Q, R, pakf::PwaFunction<double>(bp, slopes, intercepts)};
}

inline pakf::GaussianBelief<double> random_belief(Eigen::Index nx, std::mt19937_64& rng,
                                                  double mean_sd = 1.0, double lo = 0.05,
                                                  double hi = 2.0) {
    return {gaussian_vector(nx, rng, mean_sd), oracle::random_spd(nx, rng, lo, hi)};
}

}  // namespace fixture
