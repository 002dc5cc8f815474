#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"
#include "pakf/particle_filter.hpp"

using namespace pakf;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace {
Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// One bootstrap step from N(m, P) on the oscillator, as the weighted ensemble.
ParticleEnsemble<double> one_step(const Eigen::Vector2d& m, const Eigen::Matrix2d& P, double u,
                                  double y, Eigen::Index n, std::uint64_t seed) {
    const auto model = sdofs_model();
    auto ens = make_ensemble(GaussianBelief<double>{Vec(m), Mat(P)}, n, seed);
    return pf_step(model, std::move(ens), v1(u), v1(y));
}
}  // namespace

TEST_CASE("estimate examples") {
    ParticleEnsemble<double> same{Mat::Constant(2, 5, 0.0), Vec::Constant(5, 0.2), Rng(1)};
    same.particles.row(0).setConstant(3.0);
    same.particles.row(1).setConstant(-1.0);
    const auto e = estimate(same);
    CHECK((e.mean - v2(3, -1)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(e.cov.cwiseAbs().maxCoeff() < 1e-15);

    ParticleEnsemble<double> pair{(Mat(1, 2) << -1, 1).finished(), Vec::Constant(2, 0.5), Rng(1)};
    const auto p = estimate(pair);
    CHECK(p.mean(0) == 0.0);
    CHECK(p.cov(0, 0) == 1.0);
}

TEST_CASE("make_ensemble reproduces the prior") {
    std::mt19937_64 rng(2);
    const auto prior = fixture::random_belief(3, rng);
    const Eigen::Index n = 200'000;
    const auto ens = make_ensemble(prior, n, 9);
    const auto e = estimate(ens);
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(std::abs(e.mean(i) - prior.mean(i)) < 3 * std::sqrt(prior.cov(i, i) / n));
        for (Eigen::Index j = 0; j < 3; ++j) {
            // var of x_i x_j for a Gaussian: Σii Σjj + Σij².
            const double se = std::sqrt((prior.cov(i, i) * prior.cov(j, j) +
                                         prior.cov(i, j) * prior.cov(i, j)) / n);
            CHECK(std::abs(e.cov(i, j) - prior.cov(i, j)) < 3 * se);
        }
    }
    CHECK_THROWS(make_ensemble(prior, 0, 1));
}

TEST_CASE("pf_step is deterministic for a fixed seed") {
    const auto a = one_step({0.2, 0.1}, Eigen::Matrix2d::Identity(), 1.0, 0.5, 500, 4);
    const auto b = one_step({0.2, 0.1}, Eigen::Matrix2d::Identity(), 1.0, 0.5, 500, 4);
    const auto c = one_step({0.2, 0.1}, Eigen::Matrix2d::Identity(), 1.0, 0.5, 500, 5);
    CHECK(a.particles == b.particles);
    CHECK(a.weights == b.weights);
    CHECK(a.particles != c.particles);
    CHECK(a.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.weights.minCoeff() >= 0);
}

TEST_CASE("uninformative measurement propagates the prior") {
    SdofsParams p;
    p.q = 0;
    p.r = 1e12;
    const auto model = sdofs_model(p);
    const Eigen::Index n = 100'000;
    auto ens = make_ensemble(GaussianBelief<double>{v2(1.5, 0.5), 0.01 * Mat::Identity(2, 2)}, n, 3);
    const Mat before = ens.particles;
    ens = pf_step(model, std::move(ens), v1(2.0), v1(100.0));
    // With Q = 0 each particle moves deterministically; compare means.
    Vec propagated = Vec::Zero(2);
    for (Eigen::Index j = 0; j < n; ++j) {
        propagated += step_state(model, Vec(before.col(j)), v1(2.0), Vec(Vec::Zero(2)));
    }
    propagated /= double(n);
    CHECK((estimate(ens).mean - propagated).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("pf_step propagation matches step_state per particle") {
    SdofsParams p;
    p.q = 0;
    const auto model = sdofs_model(p);
    auto ens = make_ensemble(GaussianBelief<double>{v2(0, 0), 4 * Mat::Identity(2, 2)}, 64, 8);
    // Keep weights uniform so no resampling happens: huge R.
    const PwassModel<double> flat(model.Phi(), model.phi(), model.F(), model.B(), model.C(),
                                  model.Q(), 1e20 * Mat::Identity(1, 1), model.f());
    const Mat before = ens.particles;
    ens = pf_step(flat, std::move(ens), v1(-0.7), v1(0.0));
    for (Eigen::Index j = 0; j < 64; ++j) {
        const Vec expected = step_state(flat, Vec(before.col(j)), v1(-0.7), Vec(Vec::Zero(2)));
        CHECK((ens.particles.col(j) - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("weights follow the measurement likelihood") {
    const auto model = sdofs_model();
    ParticleEnsemble<double> ens{(Mat(2, 3) << -1, 0, 2, 0, 0, 0).finished(),
                                 Vec::Constant(3, 1.0 / 3), Rng(1)};
    detail::reweight(model, ens, v1(0.0));
    const double w0 = std::exp(-0.5), w1 = 1.0, w2 = std::exp(-2.0);
    const double s = w0 + w1 + w2;
    CHECK(ens.weights(0) == doctest::Approx(w0 / s).epsilon(1e-14));
    CHECK(ens.weights(1) == doctest::Approx(w1 / s).epsilon(1e-14));
    CHECK(ens.weights(2) == doctest::Approx(w2 / s).epsilon(1e-14));

    // Far-off measurements stay finite in log form.
    ParticleEnsemble<double> far{(Mat(2, 2) << 0, 1, 0, 0).finished(), Vec::Constant(2, 0.5), Rng(1)};
    detail::reweight(model, far, v1(1e3));
    CHECK(far.weights(1) == doctest::Approx(1.0));
    CHECK(far.weights.allFinite());
}

TEST_CASE("systematic resampling keeps expected counts") {
    ParticleEnsemble<double> ens{(Mat(1, 4) << 0, 1, 2, 3).finished(),
                                 (Vec(4) << 0.5, 0.25, 0.125, 0.125).finished(), Rng(12)};
    // 4 draws: counts must be floor or ceil of 4 w.
    detail::systematic_resample(ens);
    int counts[4] = {0, 0, 0, 0};
    for (Eigen::Index j = 0; j < 4; ++j) ++counts[static_cast<int>(ens.particles(0, j))];
    CHECK(counts[0] == 2);
    CHECK(counts[1] == 1);
    CHECK(counts[2] + counts[3] == 1);
    CHECK(ens.weights == Vec::Constant(4, 0.25));
}

TEST_CASE("all-zero weights are reported") {
    const auto model = sdofs_model();
    ParticleEnsemble<double> ens{Mat::Zero(2, 3), Vec::Constant(3, 1.0 / 3), Rng(1)};
    try {
        detail::reweight(model, ens, v1(std::numeric_limits<double>::infinity()));
        FAIL("expected AllWeightsZero");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AllWeightsZero);
    }
}

TEST_CASE("particle posterior mean converges to posterior quadrature") {
    const Eigen::Vector2d m(-0.6, 0.4);
    Eigen::Matrix2d P;
    P << 1.2, 0.3, 0.3, 0.9;
    const double u = 1.0, y = -0.3;
    const auto grid = oracle::sdofs_posterior_grid(SdofsParams{}, m, P, u, y);

    const auto big = one_step(m, P, u, y, 100'000, 21);
    const auto e = estimate(big);
    // Weighted-sample standard error with effective sample size 1/Σw².
    const double ess = 1.0 / big.weights.squaredNorm();
    for (Eigen::Index i = 0; i < 2; ++i) {
        const double se = std::sqrt(grid.cov(i, i) / ess);
        CHECK(std::abs(e.mean(i) - grid.mean(i)) < 3 * se);
    }

    // Error shrinks from 1e3 to 1e5 particles, averaged over seeds.
    double small_err = 0, big_err = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        small_err += (estimate(one_step(m, P, u, y, 1'000, 100 + s)).mean - Vec(grid.mean)).squaredNorm();
        big_err += (estimate(one_step(m, P, u, y, 100'000, 200 + s)).mean - Vec(grid.mean)).squaredNorm();
    }
    CHECK(big_err < small_err);
}

TEST_CASE("dimension checks") {
    const auto model = sdofs_model();
    auto ens = make_ensemble(GaussianBelief<double>{Vec::Zero(3), Mat::Identity(3, 3)}, 10, 1);
    CHECK_THROWS_AS(pf_step(model, ens, v1(0), v1(0)), Error);
    CHECK_THROWS_AS(pf_measurement_update(model, ens, v1(0)), Error);
}
