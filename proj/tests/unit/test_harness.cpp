#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "seqpred/errors.hpp"
#include "seqpred/experiment.hpp"

using namespace seqpred;
using nlohmann::json;

namespace {

ExperimentSpec spec_from_text(const char* text) {
    return ExperimentSpec::from_json(json::parse(text));
}

BoundDecl bound_from_text(const char* text) { return BoundDecl::from_json(json::parse(text)); }

}  // namespace

TEST_CASE("an exact kl experiment produces a decreasing per-symbol curve") {
    const auto spec = spec_from_text(R"({
        "name": "laplace_vs_bern03",
        "kind": "kl",
        "params": {
            "generator": {"family":"bernoulli","p":0.3},
            "predictor": {"family":"laplace","alphabet":2},
            "horizons": [4, 8, 12],
            "method": "exact"
        }})");
    const auto report = run_experiment(spec);
    REQUIRE(report.rows.size() == 6);  // kl + kl_rate per horizon

    std::vector<double> rates;
    for (const auto& row : report.rows)
        if (row.metric == "kl_rate") rates.push_back(row.value_nats);
    REQUIRE(rates.size() == 3);
    CHECK(rates[1] < rates[0]);
    CHECK(rates[2] < rates[1]);

    const auto results = verify_bounds(
        report, {bound_from_text(R"({"name":"decreasing","experiment":"laplace_vs_bern03",
                                     "metric":"kl_rate","assert":"strictly_decreasing"})")});
    CHECK(results[0].passed);
}

TEST_CASE("invalid experiment specs are rejected") {
    CHECK_THROWS_AS(run_experiment(spec_from_text(R"({
        "name": "bad", "kind": "kl",
        "params": {"generator": {"family":"bernoulli","p":0.3},
                    "predictor": {"family":"laplace","alphabet":2},
                    "horizons": [], "method": "exact"}})")),
                    input_error);
    CHECK_THROWS_AS(run_experiment(spec_from_text(R"({
        "name": "bad2", "kind": "kl",
        "params": {"generator": {"family":"bernoulli","p":0.3},
                    "predictor": {"family":"laplace","alphabet":2},
                    "horizons": [8, 4], "method": "exact"}})")),
                    input_error);
    CHECK_THROWS_AS(run_experiment(spec_from_text(R"({"name":"bad3","kind":"mystery"})")),
                    input_error);
    CHECK_THROWS_AS(spec_from_text(R"({"name":"a,b","kind":"kl"})"), input_error);
    // Monte Carlo without seeds.
    CHECK_THROWS_AS(run_experiment(spec_from_text(R"({
        "name": "bad4", "kind": "kl",
        "params": {"generator": {"family":"bernoulli","p":0.3},
                    "predictor": {"family":"laplace","alphabet":2},
                    "horizons": [4], "method": "monte_carlo", "samples": 10}})")),
                    input_error);
}

TEST_CASE("identical specs give byte-identical CSV") {
    const char* text = R"({
        "name": "mc_repro", "kind": "kl", "seeds": [5, 6],
        "params": {
            "generator": {"family":"random_markov","alphabet":2,"order":1,"seed":3},
            "predictor": {"family":"markov_mixture","alphabet":2,"k_max":2,
                          "scheme":{"rule":"inverse_square"}},
            "horizons": [5, 10], "method": "monte_carlo", "samples": 200
        }})";
    const std::string a = to_csv(run_experiment(spec_from_text(text)));
    const std::string b = to_csv(run_experiment(spec_from_text(text)));
    CHECK(a == b);
    CHECK(a.find("mc_repro,kl,5") != std::string::npos);
}

TEST_CASE("reports survive the CSV round trip") {
    const auto spec = spec_from_text(R"({
        "name": "tv_small", "kind": "tv", "seeds": [11],
        "params": {
            "generator": {"family":"bernoulli","p":0.3},
            "predictor": {"family":"mixture",
                          "components":[{"family":"bernoulli","p":0.3},{"family":"bernoulli","p":0.7}],
                          "weights":[0.5,0.5]},
            "cond_length": 40, "horizons": [1,2,3,4]
        }})");
    const auto report = run_experiment(spec);
    const std::string csv = to_csv(report);
    const auto back = parse_csv(csv);
    CHECK(to_csv(back) == csv);

    // Horizon TV is nondecreasing on every evaluation.
    const auto results = verify_bounds(
        back, {bound_from_text(R"({"name":"tv_monotone","experiment":"tv_small","metric":"tv",
                                   "assert":"nondecreasing","slack":1e-12})")});
    CHECK(results[0].passed);
}

TEST_CASE("infinities survive the CSV round trip") {
    EvalReport report;
    EvalRow row;
    row.experiment = "inf_case";
    row.metric = "kl";
    row.n = 3;
    row.value_nats = kInf;
    row.value_bits = kInf;
    row.method = "exact";
    report.rows.push_back(row);
    const auto back = parse_csv(to_csv(report));
    CHECK(std::isinf(back.rows[0].value_nats));
}

TEST_CASE("bound verification pinpoints the violating row") {
    // An unnormalized predictor fails the normalization bound on exactly the
    // row that carries its deviation.
    EvalReport report;
    EvalRow good;
    good.experiment = "normcheck";
    good.metric = "normalization_max_abs_dev/honest";
    good.n = 6;
    good.value_nats = 3e-16;
    report.rows.push_back(good);
    EvalRow bad = good;
    bad.metric = "normalization_max_abs_dev/broken";
    bad.value_nats = 0.02;
    report.rows.push_back(bad);

    const auto results = verify_bounds(
        report,
        {bound_from_text(R"({"name":"normalized","experiment":"normcheck",
                             "metric":"normalization_max_abs_dev","assert":"le","threshold":1e-12})")});
    REQUIRE(results.size() == 1);
    CHECK_FALSE(results[0].passed);
    CHECK(results[0].detail.find("broken") != std::string::npos);

    const auto missing = verify_bounds(
        report, {bound_from_text(R"({"name":"gone","experiment":"normcheck",
                                     "metric":"no_such_metric","assert":"le","threshold":1})")});
    CHECK_FALSE(missing[0].passed);
    CHECK(missing[0].detail.find("missing") != std::string::npos);
}

TEST_CASE("the normalization experiment flags honest measures as honest") {
    const auto spec = spec_from_text(R"({
        "name": "norm", "kind": "normalization",
        "params": {"measure": {"family":"markov_mixture","alphabet":2,"k_max":2,
                               "scheme":{"rule":"inverse_square"}},
                   "max_length": 6}})");
    const auto report = run_experiment(spec);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].value_nats <= 1e-12);
}

TEST_CASE("markov bound sweeps pass across measures and references") {
    const auto spec = spec_from_text(R"({
        "name": "markov_sweep", "kind": "markov_bound",
        "params": {
            "measures": [{"family":"bernoulli","p":0.2},
                          {"family":"random_markov","alphabet":2,"order":1,"seed":4},
                          {"family":"bernoulli","p":1.0}],
            "rhos": [{"family":"uniform","alphabet":2},{"family":"laplace","alphabet":2}],
            "n_max": 8
        }})");
    const auto report = run_experiment(spec);
    CHECK(report.rows.size() == 3 * 2 * 8);
    const auto results = verify_bounds(
        report, {bound_from_text(R"({"name":"markov","experiment":"markov_sweep",
                                     "metric":"markov_complement","assert":"le","slack":1e-12})")});
    CHECK(results[0].passed);
}

TEST_CASE("dominance rows carry their component bound") {
    const auto spec = spec_from_text(R"({
        "name": "dom", "kind": "dominance",
        "params": {
            "mixture": {"family":"mixture",
                        "components":[{"family":"bernoulli_grid","points":5}],
                        "scheme":{"rule":"inverse_square"}},
            "horizons": [4, 8], "method": "exact"
        }})");
    const auto report = run_experiment(spec);
    const auto results = verify_bounds(
        report, {bound_from_text(R"({"name":"dominance","experiment":"dom",
                                     "metric":"kl","assert":"le","slack":1e-12})")});
    CHECK(results[0].passed);

    bool saw_bound = false;
    for (const auto& row : report.rows)
        if (row.metric == "kl/k0" && row.bound_ref) saw_bound = true;
    CHECK(saw_bound);
}

TEST_CASE("posterior merge aggregates over seeds") {
    const auto spec = spec_from_text(R"({
        "name": "merge", "kind": "posterior_merge",
        "seeds": [1,2,3,4,5,6,7,8,9,10],
        "params": {
            "mixture": {"family":"mixture",
                        "components":[{"family":"bernoulli","p":0.3},{"family":"bernoulli","p":0.7}],
                        "weights":[0.5,0.5]},
            "true_component": 0, "length": 200
        }})");
    const auto report = run_experiment(spec);
    CHECK(report.rows.size() == 11);
    const auto results = verify_bounds(
        report, {bound_from_text(R"({"name":"merged","experiment":"merge",
                                     "metric":"posterior_true_mean","assert":"ge","threshold":0.95})")});
    CHECK(results[0].passed);
}

TEST_CASE("cover trace experiments reproduce the hand-traced case") {
    const auto spec = spec_from_text(R"({
        "name": "trace", "kind": "cover_trace",
        "params": {
            "class": [{"family":"bernoulli","p":1.0},{"family":"bernoulli","p":0.0}],
            "rho": {"family":"uniform","alphabet":2},
            "horizons": [1]
        }})");
    const auto report = run_experiment(spec);
    double rounds = 0.0, residual = -1.0;
    for (const auto& row : report.rows) {
        if (row.metric == "cover_rounds") rounds = row.value_nats;
        if (row.metric == "cover_residual_mass") residual = row.value_nats;
    }
    CHECK(rounds == 2.0);
    CHECK(residual == 0.0);
}

TEST_CASE("identity check and jensen experiments pass their declared bounds") {
    const auto identity_spec = spec_from_text(R"({
        "name": "ident", "kind": "identity_check", "seeds": [77],
        "params": {"pairs": 10, "horizons": [1,2,3,4,5], "max_order": 2}})");
    const auto jensen_spec = spec_from_text(R"({
        "name": "jen", "kind": "jensen", "seeds": [78],
        "params": {"trials": 25, "n": 6}})");

    Suite suite;
    suite.experiments = {identity_spec, jensen_spec};
    suite.bounds = {
        bound_from_text(R"({"name":"identity","experiment":"ident","metric":"identity_abs_diff",
                            "assert":"le","threshold":1e-9})"),
        bound_from_text(R"({"name":"jensen","experiment":"jen","metric":"jensen_gap",
                            "assert":"ge","threshold":-1e-9})")};

    const auto serial = run_suite(suite, 1);
    CHECK(serial.all_passed());

    // A worker pool gives the identical report.
    const auto parallel = run_suite(suite, 2);
    CHECK(to_csv(parallel.report) == to_csv(serial.report));
}

TEST_CASE("suites round-trip through JSON") {
    Suite suite;
    suite.experiments = {spec_from_text(R"({
        "name": "x", "kind": "jensen", "seeds": [9], "params": {"trials": 2, "n": 3}})")};
    suite.bounds = {bound_from_text(R"({"name":"b","experiment":"x","metric":"jensen_gap",
                                        "assert":"ge","threshold":-1e-9})")};
    const Suite back = Suite::from_json(suite.to_json());
    CHECK(back.experiments.size() == 1);
    CHECK(back.experiments[0].name == "x");
    CHECK(back.bounds[0].threshold == suite.bounds[0].threshold);
}

TEST_CASE("sequence bounds detect violations") {
    EvalReport report;
    for (int i = 0; i < 3; ++i) {
        EvalRow row;
        row.experiment = "seq";
        row.metric = "kl_rate";
        row.n = (i + 1) * 4;
        row.value_nats = 0.5 - 0.1 * i;
        report.rows.push_back(row);
    }
    auto ok = verify_bounds(report, {bound_from_text(R"({"name":"dec","experiment":"seq",
        "metric":"kl_rate","assert":"strictly_decreasing"})")});
    CHECK(ok[0].passed);

    auto ratio = verify_bounds(report, {bound_from_text(R"({"name":"ratio","experiment":"seq",
        "metric":"kl_rate","assert":"last_le_first_times","factor":0.7})")});
    CHECK(ratio[0].passed);

    report.rows[2].value_nats = 0.6;  // now increasing at the end
    auto bad = verify_bounds(report, {bound_from_text(R"({"name":"dec","experiment":"seq",
        "metric":"kl_rate","assert":"strictly_decreasing"})")});
    CHECK_FALSE(bad[0].passed);
    auto bad_ratio = verify_bounds(report, {bound_from_text(R"({"name":"ratio","experiment":"seq",
        "metric":"kl_rate","assert":"last_le_first_times","factor":0.7})")});
    CHECK_FALSE(bad_ratio[0].passed);
}
