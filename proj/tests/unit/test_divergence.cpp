#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "seqpred/divergence.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/measure.hpp"
#include "seqpred/predictor.hpp"
#include "seqpred/rng.hpp"

using namespace seqpred;

namespace {

History bin(std::initializer_list<Symbol> symbols) { return History::of(kBinary, symbols); }

}  // namespace

TEST_CASE("identical measures have zero divergence, exactly") {
    const BernoulliMeasure b(0.37);
    const MarkovMeasure m = MarkovMeasure::random(kBinary, 1, 3);
    for (int n : {1, 4, 10}) {
        CHECK(kl_exact(b, b, n).value_nats == 0.0);
        CHECK(kl_exact(m, m, n).value_nats == 0.0);
        CHECK(kl_identity(b, b, n).value_nats == 0.0);
    }
}

TEST_CASE("one-step divergence between bernoulli measures, by hand") {
    // 0.5 ln(0.5/0.25) + 0.5 ln(0.5/0.75) = 0.5 ln(4/3).
    const BernoulliMeasure mu(0.5), rho(0.25);
    const double expected = 0.5 * std::log(4.0 / 3.0);  // 0.14384103622589045
    CHECK(kl_exact(mu, rho, 1).value_nats == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("i.i.d. divergence is additive in the horizon") {
    const BernoulliMeasure mu(0.3), rho(0.6);
    const double one = kl_exact(mu, rho, 1).value_nats;
    for (int n = 2; n <= 8; ++n)
        CHECK(kl_exact(mu, rho, n).value_nats == doctest::Approx(n * one).epsilon(1e-12));
}

TEST_CASE("the conditional and marginal routes agree") {
    // Random Markov pairs of order <= 2; the full 200-pair sweep runs in the
    // acceptance suite.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const MarkovMeasure mu = MarkovMeasure::random(kBinary, static_cast<int>(seed % 3), 1000 + seed);
        const MarkovMeasure rho = MarkovMeasure::random(kBinary, static_cast<int>((seed + 1) % 3), 2000 + seed);
        for (int n : {1, 5, 10}) {
            const double direct = kl_exact(mu, rho, n).value_nats;
            const double grouped = kl_identity(mu, rho, n).value_nats;
            CHECK(std::abs(direct - grouped) <= 1e-9);
            CHECK(direct >= -1e-12);
        }
    }
}

TEST_CASE("a point mass against the uniform measure costs n ln 2") {
    const BernoulliMeasure point0(1.0);
    const UniformMeasure uniform(kBinary);
    for (int n : {1, 3, 8})
        CHECK(kl_identity(point0, uniform, n).value_nats ==
              doctest::Approx(n * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("absolute-continuity failures surface as +inf") {
    const BernoulliMeasure mu(0.5), rho(1.0);
    CHECK(kl_exact(mu, rho, 2).diverged());
    CHECK(kl_identity(mu, rho, 2).diverged());
    const auto mc = kl_monte_carlo(mu, rho, 5, 10, 1);
    CHECK(mc.diverged());

    const auto curve = kl_exact_curve(mu, rho, 3);
    CHECK(curve[0].diverged());  // the failure is already possible at step one
}

TEST_CASE("the curve matches single-horizon evaluations") {
    const BernoulliMeasure mu(0.3);
    const LaplacePredictor rho(kBinary);
    const auto curve = kl_exact_curve(mu, rho, 10);
    for (int m : {1, 4, 7, 10})
        CHECK(curve[static_cast<std::size_t>(m - 1)].value_nats ==
              doctest::Approx(kl_exact(mu, rho, m).value_nats).epsilon(1e-14));
}

TEST_CASE("enumeration refuses past the cap instead of switching estimators") {
    const BernoulliMeasure mu(0.3), rho(0.5);
    CHECK_THROWS_AS(kl_exact(mu, rho, 17), enumeration_cap_error);
    CHECK_THROWS_AS(kl_identity(mu, rho, 17), enumeration_cap_error);
    CHECK(kl_exact(mu, rho, 17, 18).n == 17);  // raised cap allows it
}

TEST_CASE("monte carlo agrees with exact enumeration within three sigmas") {
    // For an i.i.d. pair the per-path value is constant (the symbol sum is
    // computed exactly), so the estimator is degenerate-exact.
    const BernoulliMeasure mu(0.3);
    const BernoulliMeasure rho(0.55);
    const double exact = kl_exact(mu, rho, 10).value_nats;
    const auto est = kl_monte_carlo(mu, rho, 10, 10000, 42);
    CHECK(std::abs(est.value_nats - exact) <= 3 * est.std_error + 1e-12);

    // A pair with genuine path-to-path variance.
    const MarkovMeasure mk = MarkovMeasure::random(kBinary, 1, 55);
    const LaplacePredictor lp(kBinary);
    const double exact2 = kl_exact(mk, lp, 10).value_nats;
    const auto est2 = kl_monte_carlo(mk, lp, 10, 10000, 42);
    CHECK(est2.std_error > 0.0);
    CHECK(std::abs(est2.value_nats - exact2) <= 3 * est2.std_error);
}

TEST_CASE("monte carlo collapses to zero variance when rho equals mu") {
    const BernoulliMeasure mu(0.3), same(0.3);
    const auto est = kl_monte_carlo(mu, same, 50, 100, 9);
    CHECK(est.value_nats == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("monte carlo is reproducible per seed") {
    const BernoulliMeasure mu(0.3);
    const LaplacePredictor rho(kBinary);
    const auto a = kl_monte_carlo(mu, rho, 20, 1, 31);
    const auto b = kl_monte_carlo(mu, rho, 20, 1, 31);
    CHECK(a.value_nats == b.value_nats);
    const auto c = kl_monte_carlo(mu, rho, 20, 1, 32);
    CHECK(a.value_nats != c.value_nats);
}

TEST_CASE("monte carlo is unbiased against the exact value") {
    const BernoulliMeasure mu(0.3);
    const LaplacePredictor rho(kBinary);
    const double exact = kl_exact(mu, rho, 8).value_nats;
    const int runs = 50;
    double mean = 0.0;
    double pooled_var = 0.0;
    for (int r = 0; r < runs; ++r) {
        const auto est = kl_monte_carlo(mu, rho, 8, 2000, 5000 + static_cast<std::uint64_t>(r));
        mean += est.value_nats;
        pooled_var += est.std_error * est.std_error;
    }
    mean /= runs;
    const double pooled_se = std::sqrt(pooled_var) / runs;
    CHECK(std::abs(mean - exact) <= 4 * pooled_se);
}

TEST_CASE("horizon total variation on hand cases") {
    const BernoulliMeasure a(0.3), b(0.7);
    const History empty(kBinary);

    CHECK(tv_horizon(a, a, empty, 3).value == 0.0);
    CHECK(tv_horizon(a, b, empty, 1).value == doctest::Approx(0.4).epsilon(1e-12));

    const BernoulliMeasure point0(1.0), point1(0.0);
    CHECK(tv_horizon(point0, point1, empty, 1).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("horizon total variation never decreases with the horizon") {
    const History empty(kBinary);
    const BernoulliMeasure mu(0.25);
    const LaplacePredictor lp(kBinary);
    const MarkovMeasure mk = MarkovMeasure::random(kBinary, 1, 8);

    auto check_monotone = [&](const ProcessMeasure& m1, const ProcessMeasure& m2,
                              const History& cond) {
        const auto ladder = tv_ladder(m1, m2, cond, 8);
        for (std::size_t i = 1; i < ladder.size(); ++i)
            CHECK(ladder[i].value >= ladder[i - 1].value - 1e-12);
        CHECK(ladder.back().value <= 1.0 + 1e-12);
        CHECK(ladder.front().value >= 0.0);
    };
    check_monotone(mu, lp, empty);
    check_monotone(mu, mk, empty);
    check_monotone(mu, lp, bin({0, 1, 1, 0}));
}

TEST_CASE("total variation requires a possible conditioning history") {
    const BernoulliMeasure point0(1.0);
    const BernoulliMeasure fair(0.5);
    CHECK_THROWS_AS(tv_horizon(point0, fair, bin({1}), 2), undefined_conditional_error);
}

TEST_CASE("grouping a subset never increases the per-string sum") {
    std::mt19937_64 g(177);
    const int n = 6;
    for (int trial = 0; trial < 30; ++trial) {
        const BernoulliMeasure mu(uniform01_positive(g));
        const BernoulliMeasure rho(uniform01_positive(g));
        std::vector<History> subset;
        History h(kBinary);
        for (std::uint64_t idx = 0; idx < 64; ++idx) {
            if (uniform01(g) < 0.4) {
                decode_string(h, idx, n);
                subset.push_back(h);
            }
        }
        if (subset.empty()) continue;
        const auto check = jensen_gap(mu, rho, subset);
        CHECK(check.holds);
        CHECK(check.lhs >= check.rhs - 1e-9);
    }
}

TEST_CASE("the grouped bound is tight on singletons and covers the full set") {
    const BernoulliMeasure mu(0.3), rho(0.8);
    const int n = 5;

    // Singleton: both sides are the same single term.
    std::vector<History> single{bin({0, 1, 0, 1, 1})};
    const auto tight = jensen_gap(mu, rho, single);
    CHECK(tight.lhs == doctest::Approx(tight.rhs).epsilon(1e-12));

    // Full set: the left side is the whole divergence, the right side is zero.
    std::vector<History> all;
    History h(kBinary);
    for (std::uint64_t idx = 0; idx < 32; ++idx) {
        decode_string(h, idx, n);
        all.push_back(h);
    }
    const auto full = jensen_gap(mu, rho, all);
    CHECK(full.holds);
    CHECK(full.lhs == doctest::Approx(kl_identity(mu, rho, n).value_nats).epsilon(1e-10));
    CHECK(full.rhs == doctest::Approx(0.0).epsilon(1e-10));

    CHECK_THROWS_AS(jensen_gap(mu, rho, std::vector<History>{}), input_error);
    const BernoulliMeasure point0(1.0);
    CHECK_THROWS_AS(jensen_gap(point0, rho, std::vector<History>{bin({1})}), input_error);
}
