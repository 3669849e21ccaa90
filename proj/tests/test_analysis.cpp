#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "uwise/analysis.hpp"

using namespace uwise;

TEST_CASE("lognormal_sampler has unit-mean weights and the right moments") {
    const double sigma = 0.8;
    const LogWeightSampler sampler = lognormal_sampler(sigma);
    RngStream rng = RngStream::from_seed(41);
    const int R = 200000;
    double sum_v = 0.0, sum_w = 0.0;
    for (int r = 0; r < R; ++r) {
        const Vec v = sampler(1, rng);
        sum_v += v[0];
        sum_w += std::exp(v[0]);
    }
    // E V = -sigma^2/2, E e^V = 1
    CHECK(std::abs(sum_v / R + 0.5 * sigma * sigma) < 4.0 * sigma / std::sqrt(static_cast<double>(R)));
    const double w_sd = std::sqrt(std::exp(sigma * sigma) - 1.0);
    CHECK(std::abs(sum_w / R - 1.0) < 4.0 * w_sd / std::sqrt(static_cast<double>(R)));
}

TEST_CASE("estimate_zeta degenerate cases") {
    RngStream rng = RngStream::from_seed(42);
    // constant log-weights: every zeta is exactly zero
    const LogWeightSampler constant = [](int n, RngStream&) { return Vec::Constant(n, -1.5); };
    for (int c : {0, 1, 2}) {
        const ZetaEstimate z = estimate_zeta(constant, 2, c, 500, rng.derive("const"));
        CHECK(z.value == 0.0);
        CHECK(z.std_error == 0.0);
        CHECK(z.c == c);
    }

    // m = 1, c = 1: variance of a single log-weight, known in closed form
    // for the lognormal vehicle (var V = sigma^2)
    const double sigma = 0.5;
    const ZetaEstimate z1 = estimate_zeta(lognormal_sampler(sigma), 1, 1, 100000, rng.derive("m1"));
    CHECK(std::abs(z1.value - sigma * sigma) < 5.0 * z1.std_error);
    CHECK(z1.std_error > 0.0);

    // c = 0: independent batches, covariance is zero
    const ZetaEstimate z0 = estimate_zeta(lognormal_sampler(sigma), 3, 0, 100000, rng.derive("c0"));
    CHECK(std::abs(z0.value) < 5.0 * z0.std_error);

    CHECK_THROWS_AS(estimate_zeta(lognormal_sampler(sigma), 2, 3, 100, rng), std::invalid_argument);
}

TEST_CASE("zeta_c is non-decreasing in c and m*zeta1 <= zeta_m") {
    RngStream rng = RngStream::from_seed(43);
    const LogWeightSampler sampler = lognormal_sampler(1.0);
    const int m = 4, R = 60000;
    std::vector<ZetaEstimate> z;
    for (int c = 0; c <= m; ++c) z.push_back(estimate_zeta(sampler, m, c, R, rng.derive(static_cast<std::uint64_t>(c))));
    for (int c = 1; c <= m; ++c)
        CHECK(z[c].value >= z[c - 1].value - 4.0 * std::hypot(z[c].std_error, z[c - 1].std_error));
    CHECK(z[m].value >= m * z[1].value - 4.0 * std::hypot(z[m].std_error, m * z[1].std_error));
}

TEST_CASE("evaluate_objective dispatches to the estimators") {
    RngStream rng = RngStream::from_seed(44);
    const std::vector<double> vals{-6034.091, -4351.335, -4157.236, -5419.201};
    const LogWeights v{vals};

    ObjectiveEstimatorSpec spec;
    spec.m = 2;
    spec.kind = ObjectiveEstimatorSpec::Kind::Complete;
    CHECK(evaluate_objective(spec, v, rng) == doctest::Approx(-4432.956).epsilon(2e-7));

    spec.kind = ObjectiveEstimatorSpec::Kind::Approx1;
    CHECK(evaluate_objective(spec, v, rng) == doctest::Approx(approx_first_order(v, 2).value).epsilon(1e-14));

    spec.kind = ObjectiveEstimatorSpec::Kind::Approx2;
    CHECK(evaluate_objective(spec, v, rng) == doctest::Approx(approx_second_order(v, 2).value).epsilon(1e-14));

    spec.kind = ObjectiveEstimatorSpec::Kind::Standard;
    CHECK(evaluate_objective(spec, v, rng) ==
          doctest::Approx(u_statistic(v, IndexSetCollection::disjoint_blocks(4, 2)).value).epsilon(1e-14));

    // Permuted / Random are random but deterministic given the stream
    spec.kind = ObjectiveEstimatorSpec::Kind::Permuted;
    spec.ell = 3;
    RngStream r1 = RngStream::from_seed(9);
    RngStream r2 = RngStream::from_seed(9);
    CHECK(evaluate_objective(spec, v, r1) == evaluate_objective(spec, v, r2));

    spec.kind = ObjectiveEstimatorSpec::Kind::Random;
    spec.k = 5;
    RngStream r3 = RngStream::from_seed(9);
    RngStream r4 = RngStream::from_seed(9);
    CHECK(evaluate_objective(spec, v, r3) == evaluate_objective(spec, v, r4));
}

TEST_CASE("empirical_variance recovers var(mean V) = sigma^2 / n for m = 1") {
    // with m = 1 the standard estimator is the plain average of n log-weights
    RngStream rng = RngStream::from_seed(45);
    const double sigma = 0.7;
    const int n = 8, R = 60000;
    ObjectiveEstimatorSpec spec;
    spec.kind = ObjectiveEstimatorSpec::Kind::Standard;
    spec.m = 1;
    const VarStat vs = empirical_variance(spec, lognormal_sampler(sigma), n, R, rng);
    CHECK(std::abs(vs.value - sigma * sigma / n) < 5.0 * vs.std_error);
    CHECK(vs.std_error > 0.0);
    CHECK(vs.std_error < sigma * sigma / n);  // informative, not vacuous
}

TEST_CASE("empirical_mean is consistent across estimators sharing m") {
    RngStream rng = RngStream::from_seed(46);
    const LogWeightSampler sampler = lognormal_sampler(1.0);
    const int n = 8, R = 40000;
    ObjectiveEstimatorSpec a, b;
    a.kind = ObjectiveEstimatorSpec::Kind::Standard;
    a.m = 4;
    b.kind = ObjectiveEstimatorSpec::Kind::Complete;
    b.m = 4;
    const VarStat ma = empirical_mean(a, sampler, n, R, rng.derive("a"));
    const VarStat mb = empirical_mean(b, sampler, n, R, rng.derive("b"));
    CHECK(std::abs(ma.value - mb.value) <= 4.0 * std::hypot(ma.std_error, mb.std_error));
}

TEST_CASE("check_hoeffding passes on the lognormal vehicle") {
    RngStream rng = RngStream::from_seed(47);
    const VarianceReport rep = check_hoeffding(lognormal_sampler(1.0), 8, 4, 40000, rng);
    CHECK(rep.all_pass());
    CHECK(rep.checks.size() >= 3);
    for (const auto& c : rep.checks) {
        INFO(c.name, " value=", c.value, " band=", c.band);
        CHECK(c.pass);
    }
}

TEST_CASE("check_ordering_and_fraction passes and reports a sane fraction") {
    RngStream rng = RngStream::from_seed(48);
    const int n = 8, m = 4, ell = 5, R = 40000;
    const VarianceReport rep =
        check_ordering_and_fraction(lognormal_sampler(1.0), n, m, ell, R, rng);
    for (const auto& c : rep.checks) {
        INFO(c.name, " value=", c.value, " band=", c.band);
        CHECK(c.pass);
    }
    CHECK(rep.all_pass());
    CHECK(rep.fraction_target == doctest::Approx(1.0 - 1.0 / ell).epsilon(1e-15));
    CHECK(std::abs(rep.fraction - rep.fraction_target) <= 4.0 * rep.fraction_se);
    CHECK(rep.entries.size() == 4);
    for (const auto& e : rep.entries) {
        CHECK(e.variance > 0.0);
        CHECK(e.std_error > 0.0);
        CHECK(e.n == n);
        CHECK(e.m == m);
    }
}

TEST_CASE("gradient_variance_report: complete beats standard on a small model") {
    RngStream rng = RngStream::from_seed(49);
    RngStream setup = rng.derive("setup");
    Mat A(3, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) A(i, j) = setup.next_normal();
    Vec x(3);
    for (int i = 0; i < 3; ++i) x[i] = setup.next_normal();
    const TargetModel model = linear_gaussian_model(A, 0.8, x);
    GaussianVariational fam(FamilyKind::Diagonal, 2);
    const Vec phi = fam.random_init(setup);
    const VarianceReport rep = gradient_variance_report(model, fam, phi, BaseGradientKind::Reparam,
                                                        8, 4, 3, 3000, rng.derive("run"));
    for (const auto& c : rep.checks) {
        INFO(c.name, " value=", c.value, " band=", c.band);
        CHECK(c.pass);
    }
    CHECK(rep.all_pass());
    // trace-of-variance and expected squared norm per estimator
    CHECK(rep.entries.size() == 8);
    for (const auto& e : rep.entries) CHECK(e.variance > 0.0);
}
