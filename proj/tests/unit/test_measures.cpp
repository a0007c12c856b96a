#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "seqpred/enumeration.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/measure.hpp"
#include "seqpred/predictor.hpp"
#include "seqpred/rng.hpp"

using namespace seqpred;

namespace {

History bin(std::initializer_list<Symbol> symbols) { return History::of(kBinary, symbols); }

// The measures every contract test runs over: i.i.d., point masses, Markov of
// both orders, smoothed predictors, and a mixture.
std::vector<std::shared_ptr<const ProcessMeasure>> contract_measures() {
    std::vector<std::shared_ptr<const ProcessMeasure>> out;
    out.push_back(std::make_shared<BernoulliMeasure>(0.3));
    out.push_back(std::make_shared<BernoulliMeasure>(0.0));
    out.push_back(std::make_shared<BernoulliMeasure>(1.0));
    out.push_back(std::make_shared<UniformMeasure>(kBinary));
    out.push_back(std::make_shared<MarkovMeasure>(
        kBinary, 1, std::vector<std::vector<double>>{{0.9, 0.1}, {0.2, 0.8}}));
    out.push_back(std::make_shared<MarkovMeasure>(MarkovMeasure::random(kBinary, 2, 17)));
    out.push_back(std::make_shared<LaplacePredictor>(kBinary));
    out.push_back(std::make_shared<MarkovLaplacePredictor>(kBinary, 2));
    out.push_back(std::make_shared<MixturePredictor>(
        std::vector<std::shared_ptr<const ProcessMeasure>>{
            std::make_shared<BernoulliMeasure>(0.3), std::make_shared<BernoulliMeasure>(0.7)},
        std::vector<double>{0.5, 0.5}));
    return out;
}

}  // namespace

TEST_CASE("alphabet and history validate their symbols") {
    CHECK_THROWS_AS(Alphabet(1), input_error);
    CHECK_THROWS_AS(History(kBinary, {0, 2}), input_error);
    History h(kBinary);
    CHECK_THROWS_AS(h.push(-1), input_error);
    h.push(1);
    CHECK(h.length() == 1);
}

TEST_CASE("bernoulli marginals follow the product form") {
    const BernoulliMeasure half(0.5);
    CHECK(half.log_marginal(bin({0, 1, 0})) == doctest::Approx(std::log(0.125)).epsilon(1e-12));

    // Point mass: the constant-zero path has probability one.
    const BernoulliMeasure point0(1.0);
    CHECK(point0.log_marginal(bin({0, 0, 0})) == 0.0);
    CHECK(point0.log_marginal(bin({0, 1, 0})) == kNegInf);

    const BernoulliMeasure b(0.3);
    CHECK(b.log_marginal(bin({0, 1})) == doctest::Approx(std::log(0.21)).epsilon(1e-12));
    CHECK(b.log_marginal(History(kBinary)) == 0.0);
}

TEST_CASE("conditionals are the i.i.d. parameters and table rows") {
    const BernoulliMeasure b(0.3);
    const auto lp = b.next_log_probs(bin({1, 1, 0}));
    CHECK(lp[0] == doctest::Approx(std::log(0.3)).epsilon(1e-12));
    CHECK(lp[1] == doctest::Approx(std::log(0.7)).epsilon(1e-12));

    const UniformMeasure u(kBinary);
    const auto ulp = u.next_log_probs(History(kBinary));
    CHECK(std::exp(ulp[0]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::exp(ulp[1]) == doctest::Approx(0.5).epsilon(1e-12));

    const MarkovMeasure m(kBinary, 1, {{0.9, 0.1}, {0.2, 0.8}});
    const auto mlp = m.next_log_probs(bin({1, 0}));
    CHECK(mlp[0] == doctest::Approx(std::log(0.9)).epsilon(1e-12));
    CHECK(mlp[1] == doctest::Approx(std::log(0.1)).epsilon(1e-12));
}

TEST_CASE("conditioning on an impossible history is an error, not a NaN") {
    const BernoulliMeasure point0(1.0);
    CHECK_THROWS_AS(point0.next_log_probs(bin({1})), undefined_conditional_error);

    const MarkovMeasure dead(kBinary, 1, {{1.0, 0.0}, {0.5, 0.5}}, {1.0, 0.0});
    CHECK_THROWS_AS(dead.next_log_probs(bin({0, 1})), undefined_conditional_error);
}

TEST_CASE("alphabet mismatch is an input error") {
    const BernoulliMeasure b(0.3);
    const History h(Alphabet(3), {0, 1, 2});
    CHECK_THROWS_AS(b.log_marginal(h), input_error);
}

TEST_CASE("markov marginals handle prefixes shorter than the order") {
    // Uniform initial over X^2, so mu(x1) = 1/2 and mu(x1 x2) = 1/4.
    const MarkovMeasure m(MarkovMeasure::random(kBinary, 2, 5));
    CHECK(std::exp(m.log_marginal(bin({0}))) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::exp(m.log_marginal(bin({1, 0}))) == doctest::Approx(0.25).epsilon(1e-12));

    // Explicit initial distribution: mass of a length-1 prefix sums its block.
    const MarkovMeasure e(kBinary, 1, {{0.5, 0.5}, {0.5, 0.5}}, {0.7, 0.3});
    CHECK(std::exp(e.log_marginal(bin({0}))) == doctest::Approx(0.7).epsilon(1e-12));
    const auto lp = e.next_log_probs(History(kBinary));
    CHECK(std::exp(lp[0]) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("markov rows must be distributions") {
    CHECK_THROWS_AS(MarkovMeasure(kBinary, 1, {{0.9, 0.2}, {0.5, 0.5}}), input_error);
    CHECK_THROWS_AS(MarkovMeasure(kBinary, 1, {{1.0, 0.0}}), input_error);
}

TEST_CASE("marginal consistency: children sum to the parent, exhaustively") {
    for (const auto& m : contract_measures()) {
        History h(kBinary);
        double worst = 0.0;
        // Depth-first over every history of length <= 12.
        std::function<void()> walk = [&]() {
            const double parent = std::exp(m->log_marginal(h));
            double children = 0.0;
            for (Symbol a = 0; a < 2; ++a) {
                h.push(a);
                children += std::exp(m->log_marginal(h));
                h.pop();
            }
            worst = std::max(worst, std::abs(children - parent));
            if (h.length() == 12) return;
            for (Symbol a = 0; a < 2; ++a) {
                h.push(a);
                walk();
                h.pop();
            }
        };
        walk();
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("total mass over X^n is one") {
    for (const auto& m : contract_measures()) {
        // n = 0 doubles as the empty-history contract: log_marginal() = 0.
        for (int n : {0, 1, 5, 12}) {
            const std::uint64_t paths = checked_path_count(kBinary, n, 16);
            History h(kBinary);
            double total = 0.0;
            for (std::uint64_t idx = 0; idx < paths; ++idx) {
                decode_string(h, idx, n);
                const double lm = m->log_marginal(h);
                if (lm != kNegInf) total += std::exp(lm);
            }
            CHECK(std::abs(total - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("chain rule: the marginal is the product of its conditionals") {
    for (const auto& m : contract_measures()) {
        for (std::uint64_t seed : {11u, 12u, 13u}) {
            // Sample from the measure itself so the path stays possible.
            const History h = sample_history(*m, 12, seed);
            double total = 0.0;
            History prefix(kBinary);
            for (int t = 0; t < h.length(); ++t) {
                total += m->next_log_probs(prefix)[static_cast<std::size_t>(h.at(t))];
                prefix.push(h.at(t));
            }
            const double direct = m->log_marginal(h);
            if (direct == kNegInf)
                CHECK(total == kNegInf);
            else
                CHECK(std::abs(total - direct) <= 1e-10);
        }
    }
}

TEST_CASE("normalization deviation stays at rounding level") {
    for (const auto& m : contract_measures()) CHECK(max_normalization_deviation(*m, 8) <= 1e-12);
}

TEST_CASE("cursors agree with history-based evaluation") {
    for (const auto& m : contract_measures()) {
        const History h = sample_history(*m, 20, 99);
        auto cur = m->cursor();
        History prefix(kBinary);
        for (int t = 0; t < h.length(); ++t) {
            const auto expect = m->next_log_probs(prefix);
            std::vector<double> got(2);
            cur->next_log_probs(got);
            CHECK(std::abs(std::exp(got[0]) - std::exp(expect[0])) <= 1e-12);
            CHECK(std::abs(std::exp(got[1]) - std::exp(expect[1])) <= 1e-12);
            cur->advance(h.at(t));
            prefix.push(h.at(t));
        }
        const double lm = m->log_marginal(h);
        if (lm == kNegInf)
            CHECK(cur->log_marginal() == kNegInf);
        else
            CHECK(cur->log_marginal() == doctest::Approx(lm).epsilon(1e-10));
    }
}

TEST_CASE("sampling is deterministic and respects point masses") {
    const BernoulliMeasure point0(1.0);
    const History all_zero = sample_history(point0, 5, 7);
    CHECK(all_zero == bin({0, 0, 0, 0, 0}));

    CHECK(sample_history(point0, 0, 7).length() == 0);

    const BernoulliMeasure half(0.5);
    const History a = sample_history(half, 64, 1234);
    const History b = sample_history(half, 64, 1234);
    const History c = sample_history(half, 64, 1235);
    CHECK(a == b);
    CHECK(a.symbols() != c.symbols());
}

TEST_CASE("empirical frequency concentrates for a fair coin") {
    const BernoulliMeasure half(0.5);
    const History h = sample_history(half, 100000, 20240817);
    int zeros = 0;
    for (int t = 0; t < h.length(); ++t)
        if (h.at(t) == 0) ++zeros;
    const double freq = static_cast<double>(zeros) / h.length();
    // Three binomial sigmas around 1/2.
    CHECK(freq >= 0.495);
    CHECK(freq <= 0.505);
}

TEST_CASE("random markov measures are valid and seed-stable") {
    const MarkovMeasure a = MarkovMeasure::random(kBinary, 1, 42);
    const MarkovMeasure b = MarkovMeasure::random(kBinary, 1, 42);
    CHECK(a.rows() == b.rows());
    for (const auto& row : a.rows()) {
        double sum = 0.0;
        for (double v : row) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}
