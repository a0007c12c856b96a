#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqpred/enumeration.hpp"
#include "seqpred/log_space.hpp"

namespace seqpred {

// One row of an evaluation report. `metric` is a base name optionally
// qualified with "/sub/case" segments so a bound can select a whole family
// while a violation still pinpoints the exact case.
struct EvalRow {
    std::string experiment;
    std::string metric;
    long long n = 0;  // the horizon or length the row refers to
    double value_nats = 0.0;
    double value_bits = 0.0;  // value/ln2 for KL rows, the plain value for unitless ones
    std::string method;       // exact | identity | monte_carlo | enumeration | sample
    long long samples = 0;
    double std_error = 0.0;
    std::string seed;  // "", a seed integer, or "agg" for seed-averaged rows
    std::optional<double> bound_ref;  // per-row declared bound, when one exists

    std::string describe() const;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    void append(EvalReport other);
};

// Stable CSV: fixed header and column order, %.17g doubles, literal inf.
// Identical inputs produce byte-identical text.
std::string to_csv(const EvalReport& report);
void write_csv(const EvalReport& report, const std::string& path);
EvalReport parse_csv(const std::string& text);
EvalReport read_csv_file(const std::string& path);

// A reproducible experiment: a kind, kind-specific parameters, explicit
// seeds. Kinds: kl, tv, markov_bound, dominance, posterior_merge, nu_bound,
// regularizer_bound, jensen, cover_trace, identity_check, normalization.
struct ExperimentSpec {
    std::string name;
    std::string kind;
    nlohmann::json params;
    std::vector<std::uint64_t> seeds;
    int exact_cap = kDefaultExactCap;

    static ExperimentSpec from_json(const nlohmann::json& spec);
    nlohmann::json to_json() const;
};

// Runs one experiment; the report is a pure function of the spec.
EvalReport run_experiment(const ExperimentSpec& spec);

// A declared inequality over report rows.
//   le / ge:                 every matching row against threshold or its own
//                            bound_ref, with se_mult * std_error slack for
//                            Monte Carlo rows plus an absolute slack.
//   strictly_decreasing:     per seed group, ordered by n.
//   nondecreasing:           per seed group, ordered by n, with slack.
//   last_le_first_times:     per seed group, last value <= factor * first.
struct BoundDecl {
    std::string name;
    std::string experiment;
    std::string metric;  // matches rows with this metric or this metric + "/..."
    std::string assertion;
    std::optional<double> threshold;
    double se_mult = 0.0;
    double slack = 0.0;
    double factor = 1.0;

    static BoundDecl from_json(const nlohmann::json& spec);
    nlohmann::json to_json() const;
};

struct BoundResult {
    std::string name;
    bool passed = false;
    std::string detail;  // violating row (or missing-quantity note) on failure
};

std::vector<BoundResult> verify_bounds(const EvalReport& report,
                                       const std::vector<BoundDecl>& bounds);

struct Suite {
    std::vector<ExperimentSpec> experiments;
    std::vector<BoundDecl> bounds;

    static Suite from_json(const nlohmann::json& spec);
    nlohmann::json to_json() const;
};

struct SuiteResult {
    EvalReport report;
    std::vector<BoundResult> bounds;

    bool all_passed() const;
};

// Runs the experiments (in a small worker pool when jobs > 1; results are
// collected in spec order either way) and verifies the declared bounds.
SuiteResult run_suite(const Suite& suite, int jobs = 1);

}  // namespace seqpred
