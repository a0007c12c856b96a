// Command-line front end: evaluate prediction metrics, build covers, and run
// reproducible experiment suites described by JSON specs. See README.md for
// the spec schemas.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqpred/config.hpp"
#include "seqpred/cover.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/experiment.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string spec_path;
    std::string out_path;
    std::vector<std::uint64_t> seeds;
    int exact_cap = -1;  // -1: keep the spec's value
    int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_out) {
    cmd->add_option("--spec", opts.spec_path, "JSON spec file")->required();
    auto* out = cmd->add_option("--out", opts.out_path, "output file");
    if (needs_out) out->required();
    cmd->add_option("--seed", opts.seeds, "seed list overriding the spec's seeds")->delimiter(',');
    cmd->add_option("--exact-cap", opts.exact_cap,
                    "refuse exact enumeration past |X|^n = 2^cap (default 16)");
    cmd->add_option("--jobs", opts.jobs, "worker pool size for run-suite");
}

void apply_overrides(seqpred::ExperimentSpec& spec, const CommonOpts& opts) {
    if (!opts.seeds.empty()) spec.seeds = opts.seeds;
    if (opts.exact_cap >= 0) spec.exact_cap = opts.exact_cap;
}

int run_single(const CommonOpts& opts, const char* expected_kind) {
    auto spec = seqpred::ExperimentSpec::from_json(seqpred::load_json_file(opts.spec_path));
    if (spec.kind != expected_kind)
        throw seqpred::input_error("spec kind is '" + spec.kind + "', expected '" + expected_kind +
                                   "'");
    apply_overrides(spec, opts);
    const auto report = seqpred::run_experiment(spec);
    seqpred::write_csv(report, opts.out_path);
    std::cout << "wrote " << report.rows.size() << " rows to " << opts.out_path << "\n";
    return 0;
}

int run_build_cover(const CommonOpts& opts, const std::string& nu_out) {
    const json spec = seqpred::load_json_file(opts.spec_path);
    const int cap = opts.exact_cap >= 0 ? opts.exact_cap : spec.value("exact_cap", seqpred::kDefaultExactCap);
    seqpred::RegularizerKind reg = seqpred::RegularizerKind::uniform;
    const std::string reg_name = spec.value("regularizer", "uniform");
    if (reg_name == "class")
        reg = seqpred::RegularizerKind::class_blend;
    else if (reg_name != "uniform")
        throw seqpred::input_error("unknown regularizer '" + reg_name + "'");

    const auto nu = seqpred::build_cover_predictor(
        seqpred::measure_list_from_json(spec.at("class")),
        seqpred::measure_from_json(spec.at("rho")), spec.at("n_max").get<int>(),
        seqpred::scheme_from_json(spec.at("scheme")), reg, cap);

    // Trace CSV: one row per greedy round.
    std::string csv = "n,k,component_id,m_k,rho_cum_mass,K_n\n";
    char buf[64];
    for (int n = 1; n <= nu.max_horizon(); ++n) {
        const auto& cover = nu.cover(n);
        for (int k = 1; k <= cover.round_count(); ++k) {
            const auto& round = cover.rounds[static_cast<std::size_t>(k - 1)];
            csv += std::to_string(n) + "," + std::to_string(k) + "," +
                   std::to_string(round.component) + ",";
            std::snprintf(buf, sizeof(buf), "%.17g", round.claimed_rho_mass);
            csv += buf;
            csv += ",";
            std::snprintf(buf, sizeof(buf), "%.17g", round.cumulative_rho_mass);
            csv += buf;
            csv += "," + std::to_string(cover.round_count()) + "\n";
        }
    }
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw seqpred::input_error("cannot open '" + opts.out_path + "' for writing");
    out << csv;
    std::cout << "wrote cover trace to " << opts.out_path << "\n";

    if (!nu_out.empty()) {
        seqpred::write_json_file(nu_out, seqpred::cover_predictor_to_json(nu));
        std::cout << "wrote predictor spec to " << nu_out << "\n";
    }
    return 0;
}

int print_bound_results(const std::vector<seqpred::BoundResult>& results) {
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.passed) std::cout << " -- " << r.detail;
        std::cout << "\n";
        all = all && r.passed;
    }
    std::cout << (all ? "all bounds hold" : "some bounds failed") << "\n";
    return all ? 0 : 1;
}

int run_verify_bounds(const CommonOpts& opts, const std::string& report_path) {
    const json spec = seqpred::load_json_file(opts.spec_path);
    std::vector<seqpred::BoundDecl> bounds;
    for (const auto& b : spec.at("bounds")) bounds.push_back(seqpred::BoundDecl::from_json(b));
    const auto report = seqpred::read_csv_file(report_path);
    return print_bound_results(seqpred::verify_bounds(report, bounds));
}

int run_suite_cmd(const CommonOpts& opts) {
    auto suite = seqpred::Suite::from_json(seqpred::load_json_file(opts.spec_path));
    for (auto& spec : suite.experiments) apply_overrides(spec, opts);
    const auto result = seqpred::run_suite(suite, opts.jobs);
    if (!opts.out_path.empty()) {
        seqpred::write_csv(result.report, opts.out_path);
        std::cout << "wrote " << result.report.rows.size() << " rows to " << opts.out_path << "\n";
    }
    return print_bound_results(result.bounds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequence prediction experiments: KL/TV metrics, mixture predictors, greedy covers"};
    app.require_subcommand(1);

    CommonOpts eval_kl_opts, eval_tv_opts, cover_opts, verify_opts, suite_opts;
    std::string nu_out, report_path;

    auto* eval_kl = app.add_subcommand("eval-kl", "evaluate cumulative KL divergence per a kl spec");
    add_common(eval_kl, eval_kl_opts, true);

    auto* eval_tv = app.add_subcommand("eval-tv", "evaluate horizon total variation per a tv spec");
    add_common(eval_tv, eval_tv_opts, true);

    auto* build_cover = app.add_subcommand("build-cover", "run greedy covers and emit trace + predictor spec");
    add_common(build_cover, cover_opts, true);
    build_cover->add_option("--nu-out", nu_out, "write the serialized predictor spec here");

    auto* verify = app.add_subcommand("verify-bounds", "check declared bounds against a report CSV");
    add_common(verify, verify_opts, false);
    verify->add_option("--report", report_path, "report CSV produced by eval-* or run-suite")->required();

    auto* suite = app.add_subcommand("run-suite", "run a suite of experiments and verify its bounds");
    add_common(suite, suite_opts, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (eval_kl->parsed()) return run_single(eval_kl_opts, "kl");
        if (eval_tv->parsed()) return run_single(eval_tv_opts, "tv");
        if (build_cover->parsed()) return run_build_cover(cover_opts, nu_out);
        if (verify->parsed()) return run_verify_bounds(verify_opts, report_path);
        if (suite->parsed()) return run_suite_cmd(suite_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
