#include "seqpred/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include "seqpred/config.hpp"
#include "seqpred/cover.hpp"
#include "seqpred/divergence.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/rng.hpp"

namespace seqpred {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Report rows and CSV

std::string EvalRow::describe() const {
    std::ostringstream os;
    os << experiment << ":" << metric << " n=" << n << " value=" << value_nats;
    if (!seed.empty()) os << " seed=" << seed;
    return os.str();
}

void EvalReport::append(EvalReport other) {
    rows.insert(rows.end(), std::make_move_iterator(other.rows.begin()),
                std::make_move_iterator(other.rows.end()));
}

namespace {

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "inf") return kInf;
    if (s == "-inf") return kNegInf;
    if (s == "nan") return std::nan("");
    return std::stod(s);
}

constexpr const char* kCsvHeader =
    "experiment,metric,n,value_nats,value_bits,method,samples,std_error,seed,bound_ref";

void check_csv_name(const std::string& s, const char* what) {
    if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
        throw input_error(std::string(what) + " must not contain commas or newlines: '" + s + "'");
}

}  // namespace

std::string to_csv(const EvalReport& report) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : report.rows) {
        check_csv_name(r.experiment, "experiment name");
        check_csv_name(r.metric, "metric name");
        out += r.experiment;
        out += ',';
        out += r.metric;
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += format_double(r.value_nats);
        out += ',';
        out += format_double(r.value_bits);
        out += ',';
        out += r.method;
        out += ',';
        out += std::to_string(r.samples);
        out += ',';
        out += format_double(r.std_error);
        out += ',';
        out += r.seed;
        out += ',';
        if (r.bound_ref) out += format_double(*r.bound_ref);
        out += '\n';
    }
    return out;
}

void write_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open '" + path + "' for writing");
    out << to_csv(report);
}

EvalReport parse_csv(const std::string& text) {
    EvalReport report;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw input_error("empty report file");
    if (line != kCsvHeader) throw input_error("unexpected report header: " + line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        while (fields.size() < 10) fields.emplace_back();  // trailing empty bound_ref
        if (fields.size() != 10) throw input_error("malformed report row: " + line);
        EvalRow r;
        r.experiment = fields[0];
        r.metric = fields[1];
        r.n = std::stoll(fields[2]);
        r.value_nats = parse_double(fields[3]);
        r.value_bits = parse_double(fields[4]);
        r.method = fields[5];
        r.samples = std::stoll(fields[6]);
        r.std_error = parse_double(fields[7]);
        r.seed = fields[8];
        if (!fields[9].empty()) r.bound_ref = parse_double(fields[9]);
        report.rows.push_back(std::move(r));
    }
    return report;
}

EvalReport read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open report '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

// ---------------------------------------------------------------------------
// Spec parsing

ExperimentSpec ExperimentSpec::from_json(const json& spec) {
    ExperimentSpec out;
    out.name = spec.at("name").get<std::string>();
    if (out.name.empty()) throw input_error("experiment name must be nonempty");
    check_csv_name(out.name, "experiment name");
    out.kind = spec.at("kind").get<std::string>();
    out.params = spec.value("params", json::object());
    if (spec.contains("seeds")) out.seeds = spec["seeds"].get<std::vector<std::uint64_t>>();
    out.exact_cap = spec.value("exact_cap", kDefaultExactCap);
    return out;
}

json ExperimentSpec::to_json() const {
    return json{{"name", name},
                {"kind", kind},
                {"params", params},
                {"seeds", seeds},
                {"exact_cap", exact_cap}};
}

BoundDecl BoundDecl::from_json(const json& spec) {
    BoundDecl out;
    out.name = spec.at("name").get<std::string>();
    out.experiment = spec.at("experiment").get<std::string>();
    out.metric = spec.at("metric").get<std::string>();
    out.assertion = spec.at("assert").get<std::string>();
    if (spec.contains("threshold")) out.threshold = spec["threshold"].get<double>();
    out.se_mult = spec.value("se_mult", 0.0);
    out.slack = spec.value("slack", 0.0);
    out.factor = spec.value("factor", 1.0);
    return out;
}

json BoundDecl::to_json() const {
    json out{{"name", name},       {"experiment", experiment}, {"metric", metric},
             {"assert", assertion}, {"se_mult", se_mult},       {"slack", slack},
             {"factor", factor}};
    if (threshold) out["threshold"] = *threshold;
    return out;
}

// ---------------------------------------------------------------------------
// Experiment runners

namespace {

std::vector<int> horizons_from(const json& params, const char* key = "horizons") {
    if (!params.contains(key)) throw input_error(std::string("experiment needs '") + key + "'");
    auto horizons = params[key].get<std::vector<int>>();
    if (horizons.empty()) throw input_error("horizons list must be nonempty");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] < 1) throw input_error("horizons must be >= 1");
        if (i > 0 && horizons[i] <= horizons[i - 1])
            throw input_error("horizons must be strictly ascending");
    }
    return horizons;
}

std::vector<std::uint64_t> require_seeds(const ExperimentSpec& spec) {
    if (spec.seeds.empty())
        throw input_error("experiment '" + spec.name + "' needs at least one seed");
    return spec.seeds;
}

EvalRow base_row(const ExperimentSpec& spec, std::string metric, long long n) {
    EvalRow r;
    r.experiment = spec.name;
    r.metric = std::move(metric);
    r.n = n;
    return r;
}

// Emits "kl<suffix>" and "kl_rate<suffix>" rows, so a bound on metric "kl"
// selects the cumulative values across every qualifier without touching the
// rate rows.
void push_kl_rows(EvalReport& report, const ExperimentSpec& spec, const std::string& suffix,
                  const KlEstimate& e, const std::string& seed) {
    EvalRow row = base_row(spec, "kl" + suffix, e.n);
    row.value_nats = e.value_nats;
    row.value_bits = e.value_bits();
    row.method = kl_method_name(e.method);
    row.samples = e.mc_samples;
    row.std_error = e.std_error;
    row.seed = seed;
    report.rows.push_back(row);

    EvalRow rate = row;
    rate.metric = "kl_rate" + suffix;
    rate.value_nats = e.rate();
    rate.value_bits = nats_to_bits(rate.value_nats);
    rate.std_error = e.n > 0 ? e.std_error / e.n : 0.0;
    report.rows.push_back(rate);
}

void push_kl_rows_with_bound(EvalReport& report, const ExperimentSpec& spec,
                             const std::string& suffix, const KlEstimate& e,
                             const std::string& seed, double bound) {
    push_kl_rows(report, spec, suffix, e, seed);
    report.rows[report.rows.size() - 2].bound_ref = bound;  // the kl row, not the rate row
}

EvalReport run_kl(const ExperimentSpec& spec) {
    EvalReport report;
    const auto generator = measure_from_json(spec.params.at("generator"));
    const auto predictor = measure_from_json(spec.params.at("predictor"));
    const auto horizons = horizons_from(spec.params);
    const std::string method = spec.params.value("method", "exact");

    if (method == "exact") {
        const auto curve = kl_exact_curve(*generator, *predictor, horizons.back(), spec.exact_cap);
        for (int h : horizons)
            push_kl_rows(report, spec, "", curve[static_cast<std::size_t>(h - 1)], "");
    } else if (method == "identity") {
        for (int h : horizons)
            push_kl_rows(report, spec, "", kl_identity(*generator, *predictor, h, spec.exact_cap), "");
    } else if (method == "monte_carlo") {
        const long long samples = spec.params.at("samples").get<long long>();
        for (std::uint64_t seed : require_seeds(spec))
            for (int h : horizons)
                push_kl_rows(report, spec, "", kl_monte_carlo(*generator, *predictor, h, samples, seed),
                             std::to_string(seed));
    } else {
        throw input_error("unknown kl method '" + method + "'");
    }
    return report;
}

EvalReport run_tv(const ExperimentSpec& spec) {
    EvalReport report;
    const auto generator = measure_from_json(spec.params.at("generator"));
    const auto predictor = measure_from_json(spec.params.at("predictor"));
    const auto horizons = horizons_from(spec.params);
    const int cond_length = spec.params.at("cond_length").get<int>();

    for (std::uint64_t seed : require_seeds(spec)) {
        const History cond = sample_history(*generator, cond_length, seed);
        const auto ladder = tv_ladder(*generator, *predictor, cond, horizons.back(), spec.exact_cap);
        for (int h : horizons) {
            EvalRow row = base_row(spec, "tv", h);
            row.value_nats = ladder[static_cast<std::size_t>(h - 1)].value;
            row.value_bits = row.value_nats;  // unitless
            row.method = "exact";
            row.seed = std::to_string(seed);
            report.rows.push_back(row);
        }
    }
    return report;
}

EvalReport run_markov_bound(const ExperimentSpec& spec) {
    EvalReport report;
    const auto measures = measure_list_from_json(spec.params.at("measures"));
    const auto rhos = measure_list_from_json(spec.params.at("rhos"));
    const int n_max = spec.params.at("n_max").get<int>();
    if (n_max < 1) throw input_error("n_max must be >= 1");

    for (std::size_t i = 0; i < measures.size(); ++i) {
        for (std::size_t j = 0; j < rhos.size(); ++j) {
            for (int n = 1; n <= n_max; ++n) {
                const auto set = build_dominance_set(*measures[i], *rhos[j], n, spec.exact_cap);
                EvalRow row = base_row(
                    spec, "markov_complement/mu" + std::to_string(i) + "/rho" + std::to_string(j), n);
                row.value_nats = set.complement_mu_mass;
                row.value_bits = row.value_nats;
                row.method = "enumeration";
                row.bound_ref = 1.0 / n;
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

EvalReport run_dominance(const ExperimentSpec& spec) {
    EvalReport report;
    const auto measure = measure_from_json(spec.params.at("mixture"));
    const auto* mixture = dynamic_cast<const MixturePredictor*>(measure.get());
    if (mixture == nullptr) throw input_error("dominance experiment needs a mixture predictor");
    const auto horizons = horizons_from(spec.params);
    const std::string method = spec.params.value("method", "exact");

    for (int k = 0; k < mixture->component_count(); ++k) {
        const double bound = -std::log(mixture->weight(k));
        const std::string suffix = "/k" + std::to_string(k);
        if (method == "exact") {
            const auto curve =
                kl_exact_curve(mixture->component(k), *mixture, horizons.back(), spec.exact_cap);
            for (int h : horizons)
                push_kl_rows_with_bound(report, spec, suffix, curve[static_cast<std::size_t>(h - 1)],
                                        "", bound);
        } else if (method == "monte_carlo") {
            const long long samples = spec.params.at("samples").get<long long>();
            for (std::uint64_t seed : require_seeds(spec))
                for (int h : horizons)
                    push_kl_rows_with_bound(
                        report, spec, suffix,
                        kl_monte_carlo(mixture->component(k), *mixture, h, samples, seed),
                        std::to_string(seed), bound);
        } else {
            throw input_error("unknown dominance method '" + method + "'");
        }
    }
    return report;
}

EvalReport run_posterior_merge(const ExperimentSpec& spec) {
    EvalReport report;
    const auto measure = measure_from_json(spec.params.at("mixture"));
    const auto* mixture = dynamic_cast<const MixturePredictor*>(measure.get());
    if (mixture == nullptr) throw input_error("posterior experiment needs a mixture predictor");
    const int true_component = spec.params.at("true_component").get<int>();
    if (true_component < 0 || true_component >= mixture->component_count())
        throw input_error("true_component outside the mixture");
    const int length = spec.params.at("length").get<int>();

    double sum = 0.0;
    const auto seeds = require_seeds(spec);
    for (std::uint64_t seed : seeds) {
        const History h = sample_history(mixture->component(true_component), length, seed);
        const double post =
            mixture->posterior_weights(h)[static_cast<std::size_t>(true_component)];
        sum += post;
        EvalRow row = base_row(spec, "posterior_true", length);
        row.value_nats = post;
        row.value_bits = post;
        row.method = "sample";
        row.seed = std::to_string(seed);
        report.rows.push_back(row);
    }
    EvalRow agg = base_row(spec, "posterior_true_mean", length);
    agg.value_nats = sum / static_cast<double>(seeds.size());
    agg.value_bits = agg.value_nats;
    agg.method = "sample";
    agg.samples = static_cast<long long>(seeds.size());
    agg.seed = "agg";
    report.rows.push_back(agg);
    return report;
}

EvalReport run_nu_bound(const ExperimentSpec& spec) {
    EvalReport report;
    const auto measure = measure_from_json(spec.params.at("nu"));
    const auto* nu = dynamic_cast<const CoverPredictor*>(measure.get());
    if (nu == nullptr) throw input_error("nu_bound experiment needs a cover predictor");
    std::vector<int> horizons;
    if (spec.params.contains("horizons")) {
        horizons = horizons_from(spec.params);
    } else {
        for (int n = 1; n <= nu->max_horizon(); ++n) horizons.push_back(n);
    }
    for (int n : horizons) {
        EvalRow row = base_row(spec, "nu_lower_bound_log_slack", n);
        row.value_nats = nu->lower_bound_log_slack(n, spec.exact_cap);
        row.value_bits = row.value_nats;
        row.method = "enumeration";
        report.rows.push_back(row);
    }
    return report;
}

EvalReport run_regularizer_bound(const ExperimentSpec& spec) {
    EvalReport report;
    const auto class_members = measure_list_from_json(spec.params.at("class"));
    const int n_max = spec.params.at("n_max").get<int>();
    const auto reg = build_class_regularizer(class_members, n_max, spec.exact_cap);
    const double log_size = std::log(static_cast<double>(reg.alphabet().size()));

    History h(reg.alphabet());
    for (int n = 1; n <= n_max; ++n) {
        const std::uint64_t paths = checked_path_count(reg.alphabet(), n, spec.exact_cap);
        const double coeff = reg.log_horizon_weight(n) - n * log_size;
        double min_slack = kInf;
        for (std::uint64_t idx = 0; idx < paths; ++idx) {
            decode_string(h, idx, n);
            double best_member = kNegInf;
            for (const auto& m : class_members)
                best_member = std::max(best_member, m->log_marginal(h));
            if (best_member == kNegInf) continue;  // outside the supported set
            const double slack = reg.log_marginal(h) - (coeff + best_member);
            min_slack = std::min(min_slack, slack);
        }
        EvalRow row = base_row(spec, "regularizer_bound_log_slack", n);
        row.value_nats = min_slack;
        row.value_bits = min_slack;
        row.method = "enumeration";
        report.rows.push_back(row);
    }
    return report;
}

EvalReport run_jensen(const ExperimentSpec& spec) {
    EvalReport report;
    const int trials = spec.params.at("trials").get<int>();
    const int n = spec.params.at("n").get<int>();
    if (trials < 1) throw input_error("jensen experiment needs trials >= 1");
    const std::uint64_t master = require_seeds(spec).front();

    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 g(substream_seed(master, static_cast<std::uint64_t>(t)));
        const BernoulliMeasure mu(uniform01_positive(g));
        const BernoulliMeasure rho(uniform01_positive(g));
        // Random nonempty subset of X^n; interior parameters keep mu(A) > 0.
        const std::uint64_t paths = checked_path_count(mu.alphabet(), n, spec.exact_cap);
        std::vector<History> subset;
        History h(mu.alphabet());
        for (std::uint64_t idx = 0; idx < paths; ++idx) {
            if (uniform01(g) < 0.5) {
                decode_string(h, idx, n);
                subset.push_back(h);
            }
        }
        if (subset.empty()) {
            decode_string(h, g() % paths, n);
            subset.push_back(h);
        }
        const JensenCheck check = jensen_gap(mu, rho, subset);
        EvalRow row = base_row(spec, "jensen_gap/t" + std::to_string(t), n);
        row.value_nats = check.lhs - check.rhs;
        row.value_bits = row.value_nats;
        row.method = "enumeration";
        row.seed = std::to_string(master);
        report.rows.push_back(row);
    }
    return report;
}

EvalReport run_cover_trace(const ExperimentSpec& spec) {
    EvalReport report;
    const auto class_members = measure_list_from_json(spec.params.at("class"));
    const auto rho = measure_from_json(spec.params.at("rho"));
    const auto horizons = horizons_from(spec.params);

    for (int n : horizons) {
        const CoverResult cover = greedy_cover(class_members, *rho, n, spec.exact_cap);
        const int rounds = cover.round_count();

        long long nested_violations = 0;
        for (int k = 1; k < rounds; ++k) {
            const auto& prev = cover.rounds[static_cast<std::size_t>(k - 1)].cumulative;
            const auto& cur = cover.rounds[static_cast<std::size_t>(k)].cumulative;
            for (std::size_t idx = 0; idx < prev.size(); ++idx)
                if (prev[idx] && !cur[idx]) ++nested_violations;
        }

        double monotone_slack = kInf;
        for (int k = 1; k < rounds; ++k)
            monotone_slack = std::min(monotone_slack,
                                      cover.rounds[static_cast<std::size_t>(k - 1)].claimed_rho_mass -
                                          cover.rounds[static_cast<std::size_t>(k)].claimed_rho_mass);

        double claim_bound_slack = kInf;
        for (int k = 1; k <= rounds; ++k)
            claim_bound_slack =
                std::min(claim_bound_slack,
                         1.0 / k - cover.rounds[static_cast<std::size_t>(k - 1)].claimed_rho_mass);

        // Residual after the last round, recomputed from scratch.
        double residual = 0.0;
        {
            const std::uint64_t paths = checked_path_count(rho->alphabet(), n, spec.exact_cap);
            std::vector<double> rho_mass(paths);
            History h(rho->alphabet());
            for (std::uint64_t idx = 0; idx < paths; ++idx) {
                decode_string(h, idx, n);
                const double lr = rho->log_marginal(h);
                rho_mass[idx] = lr == kNegInf ? 0.0 : std::exp(lr);
            }
            const auto& covered = cover.rounds.back().cumulative;
            for (const auto& m : class_members) {
                const auto set = build_dominance_set(*m, *rho, n, spec.exact_cap);
                double left = 0.0;
                for (std::uint64_t idx = 0; idx < paths; ++idx)
                    if (set.member[idx] && !covered[idx]) left += rho_mass[idx];
                residual = std::max(residual, left);
            }
        }

        auto push = [&](const std::string& metric, double value,
                        std::optional<double> bound = std::nullopt) {
            EvalRow row = base_row(spec, metric, n);
            row.value_nats = value;
            row.value_bits = value;
            row.method = "enumeration";
            row.bound_ref = bound;
            report.rows.push_back(row);
        };
        push("cover_nested_violations", static_cast<double>(nested_violations));
        push("cover_claimed_monotone_slack", monotone_slack);
        push("cover_claim_bound_slack", claim_bound_slack);
        push("cover_residual_mass", residual);
        push("cover_rounds", static_cast<double>(rounds),
             static_cast<double>(checked_path_count(rho->alphabet(), n, spec.exact_cap)));
    }
    return report;
}

EvalReport run_identity_check(const ExperimentSpec& spec) {
    EvalReport report;
    const int pairs = spec.params.at("pairs").get<int>();
    const auto horizons = horizons_from(spec.params);
    const int max_order = spec.params.value("max_order", 2);
    const std::uint64_t master = require_seeds(spec).front();

    for (int i = 0; i < pairs; ++i) {
        std::mt19937_64 g(substream_seed(master, static_cast<std::uint64_t>(i)));
        const auto order_mu = static_cast<int>(g() % static_cast<std::uint64_t>(max_order + 1));
        const auto order_rho = static_cast<int>(g() % static_cast<std::uint64_t>(max_order + 1));
        const MarkovMeasure mu = MarkovMeasure::random(kBinary, order_mu, g());
        const MarkovMeasure rho = MarkovMeasure::random(kBinary, order_rho, g());
        for (int h : horizons) {
            const KlEstimate direct = kl_exact(mu, rho, h, spec.exact_cap);
            const KlEstimate grouped = kl_identity(mu, rho, h, spec.exact_cap);
            double diff;
            if (direct.diverged() && grouped.diverged())
                diff = 0.0;
            else if (direct.diverged() || grouped.diverged())
                diff = kInf;
            else
                diff = std::abs(direct.value_nats - grouped.value_nats);
            EvalRow row = base_row(spec, "identity_abs_diff/pair" + std::to_string(i), h);
            row.value_nats = diff;
            row.value_bits = diff;
            row.method = "exact";
            row.seed = std::to_string(master);
            report.rows.push_back(row);
        }
    }
    return report;
}

EvalReport run_normalization(const ExperimentSpec& spec) {
    EvalReport report;
    const auto measure = measure_from_json(spec.params.at("measure"));
    const int max_length = spec.params.at("max_length").get<int>();
    checked_path_count(measure->alphabet(), max_length, spec.exact_cap);
    EvalRow row = base_row(spec, "normalization_max_abs_dev", max_length);
    row.value_nats = max_normalization_deviation(*measure, max_length);
    row.value_bits = row.value_nats;
    row.method = "enumeration";
    report.rows.push_back(row);
    return report;
}

}  // namespace

EvalReport run_experiment(const ExperimentSpec& spec) {
    if (spec.kind == "kl") return run_kl(spec);
    if (spec.kind == "tv") return run_tv(spec);
    if (spec.kind == "markov_bound") return run_markov_bound(spec);
    if (spec.kind == "dominance") return run_dominance(spec);
    if (spec.kind == "posterior_merge") return run_posterior_merge(spec);
    if (spec.kind == "nu_bound") return run_nu_bound(spec);
    if (spec.kind == "regularizer_bound") return run_regularizer_bound(spec);
    if (spec.kind == "jensen") return run_jensen(spec);
    if (spec.kind == "cover_trace") return run_cover_trace(spec);
    if (spec.kind == "identity_check") return run_identity_check(spec);
    if (spec.kind == "normalization") return run_normalization(spec);
    throw input_error("unknown experiment kind '" + spec.kind + "'");
}

// ---------------------------------------------------------------------------
// Bound verification

namespace {

bool metric_matches(const std::string& metric, const std::string& pattern) {
    if (metric == pattern) return true;
    return metric.size() > pattern.size() && metric.compare(0, pattern.size(), pattern) == 0 &&
           metric[pattern.size()] == '/';
}

BoundResult check_rowwise(const BoundDecl& decl, const std::vector<const EvalRow*>& rows) {
    for (const EvalRow* row : rows) {
        double limit;
        if (decl.threshold) {
            limit = *decl.threshold;
        } else if (row->bound_ref) {
            limit = *row->bound_ref;
        } else {
            return {decl.name, false, "row lacks a bound_ref: " + row->describe()};
        }
        const double margin = decl.se_mult * row->std_error + decl.slack;
        const bool ok = decl.assertion == "le" ? row->value_nats <= limit + margin
                                               : row->value_nats >= limit - margin;
        if (!ok)
            return {decl.name, false,
                    "violated at " + row->describe() + " (limit " + std::to_string(limit) +
                        ", margin " + std::to_string(margin) + ")"};
    }
    return {decl.name, true, ""};
}

BoundResult check_sequence(const BoundDecl& decl, const std::vector<const EvalRow*>& rows) {
    // Group by seed; rows keep emission order, which runners make ascending in n.
    std::vector<std::string> seeds;
    for (const EvalRow* row : rows)
        if (std::find(seeds.begin(), seeds.end(), row->seed) == seeds.end())
            seeds.push_back(row->seed);

    for (const auto& seed : seeds) {
        std::vector<const EvalRow*> group;
        for (const EvalRow* row : rows)
            if (row->seed == seed) group.push_back(row);
        std::stable_sort(group.begin(), group.end(),
                         [](const EvalRow* a, const EvalRow* b) { return a->n < b->n; });
        if (decl.assertion == "last_le_first_times") {
            if (group.size() < 2)
                return {decl.name, false, "needs at least two rows per seed group"};
            const EvalRow* first = group.front();
            const EvalRow* last = group.back();
            if (!(last->value_nats <= decl.factor * first->value_nats + decl.slack))
                return {decl.name, false,
                        "violated: " + last->describe() + " > " + std::to_string(decl.factor) +
                            " * " + first->describe()};
            continue;
        }
        for (std::size_t i = 1; i < group.size(); ++i) {
            const double prev = group[i - 1]->value_nats;
            const double cur = group[i]->value_nats;
            const bool ok = decl.assertion == "strictly_decreasing"
                                ? cur < prev
                                : cur >= prev - decl.slack;  // nondecreasing
            if (!ok)
                return {decl.name, false,
                        "violated between " + group[i - 1]->describe() + " and " +
                            group[i]->describe()};
        }
    }
    return {decl.name, true, ""};
}

}  // namespace

std::vector<BoundResult> verify_bounds(const EvalReport& report,
                                       const std::vector<BoundDecl>& bounds) {
    std::vector<BoundResult> results;
    results.reserve(bounds.size());
    for (const auto& decl : bounds) {
        std::vector<const EvalRow*> rows;
        for (const auto& row : report.rows)
            if (row.experiment == decl.experiment && metric_matches(row.metric, decl.metric))
                rows.push_back(&row);
        if (rows.empty()) {
            results.push_back({decl.name, false,
                               "referenced quantity missing: no rows match experiment '" +
                                   decl.experiment + "' metric '" + decl.metric + "'"});
            continue;
        }
        if (decl.assertion == "le" || decl.assertion == "ge") {
            results.push_back(check_rowwise(decl, rows));
        } else if (decl.assertion == "strictly_decreasing" || decl.assertion == "nondecreasing" ||
                   decl.assertion == "last_le_first_times") {
            results.push_back(check_sequence(decl, rows));
        } else {
            results.push_back({decl.name, false, "unknown assertion '" + decl.assertion + "'"});
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// Suites

Suite Suite::from_json(const json& spec) {
    Suite suite;
    for (const auto& e : spec.at("experiments")) suite.experiments.push_back(ExperimentSpec::from_json(e));
    if (spec.contains("bounds"))
        for (const auto& b : spec["bounds"]) suite.bounds.push_back(BoundDecl::from_json(b));
    return suite;
}

json Suite::to_json() const {
    json experiments_json = json::array();
    for (const auto& e : experiments) experiments_json.push_back(e.to_json());
    json bounds_json = json::array();
    for (const auto& b : bounds) bounds_json.push_back(b.to_json());
    return json{{"experiments", experiments_json}, {"bounds", bounds_json}};
}

bool SuiteResult::all_passed() const {
    for (const auto& b : bounds)
        if (!b.passed) return false;
    return true;
}

SuiteResult run_suite(const Suite& suite, int jobs) {
    if (jobs < 1) throw input_error("jobs must be >= 1");
    const std::size_t count = suite.experiments.size();
    std::vector<EvalReport> partial(count);
    std::vector<std::exception_ptr> errors(count);

    if (jobs == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) partial[i] = run_experiment(suite.experiments[i]);
    } else {
        // One experiment per worker; results land in spec order regardless of
        // scheduling, so the report is identical to a serial run.
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    partial[i] = run_experiment(suite.experiments[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        const int workers = std::min<int>(jobs, static_cast<int>(count));
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    SuiteResult result;
    for (auto& p : partial) result.report.append(std::move(p));
    result.bounds = verify_bounds(result.report, suite.bounds);
    return result;
}

}  // namespace seqpred
