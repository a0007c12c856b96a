#include "seqpred/config.hpp"

#include <cmath>
#include <fstream>

#include "seqpred/errors.hpp"

namespace seqpred {

using nlohmann::json;

namespace {

const json& require_field(const json& spec, const char* key) {
    auto it = spec.find(key);
    if (it == spec.end())
        throw input_error("spec is missing required field '" + std::string(key) + "'");
    return *it;
}

Alphabet alphabet_from(const json& spec) {
    return Alphabet(require_field(spec, "alphabet").get<int>());
}

double smoothing_from(const json& spec) {
    return spec.value("smoothing", 1.0);
}

std::vector<double> doubles_from(const json& v, const char* what) {
    if (!v.is_array()) throw input_error(std::string(what) + " must be an array of numbers");
    return v.get<std::vector<double>>();
}

}  // namespace

WeightScheme scheme_from_json(const json& spec) {
    const std::string rule = require_field(spec, "rule").get<std::string>();
    if (rule == "inverse_square") return WeightScheme::inverse_square();
    if (rule == "geometric") return WeightScheme::geometric();
    if (rule == "custom")
        return WeightScheme::custom(doubles_from(require_field(spec, "values"), "custom weights"));
    throw input_error("unknown weight scheme rule '" + rule + "'");
}

json scheme_to_json(const WeightScheme& scheme) {
    json out{{"rule", scheme.name()}};
    if (scheme.rule() == WeightScheme::Rule::custom) out["values"] = scheme.custom_values();
    return out;
}

std::shared_ptr<const ProcessMeasure> measure_from_json(const json& spec) {
    if (!spec.is_object()) throw input_error("measure spec must be a JSON object");
    const std::string family = require_field(spec, "family").get<std::string>();

    if (family == "bernoulli")
        return std::make_shared<BernoulliMeasure>(require_field(spec, "p").get<double>());

    if (family == "uniform") return std::make_shared<UniformMeasure>(alphabet_from(spec));

    if (family == "markov") {
        const json& rows_json = require_field(spec, "rows");
        std::vector<std::vector<double>> rows;
        for (const auto& row : rows_json) rows.push_back(doubles_from(row, "markov row"));
        std::vector<double> initial;
        if (spec.contains("initial")) initial = doubles_from(spec["initial"], "markov initial");
        return std::make_shared<MarkovMeasure>(alphabet_from(spec),
                                               require_field(spec, "order").get<int>(),
                                               std::move(rows), std::move(initial));
    }

    if (family == "random_markov")
        return std::make_shared<MarkovMeasure>(
            MarkovMeasure::random(alphabet_from(spec), require_field(spec, "order").get<int>(),
                                  require_field(spec, "seed").get<std::uint64_t>()));

    if (family == "laplace")
        return std::make_shared<LaplacePredictor>(alphabet_from(spec), smoothing_from(spec));

    if (family == "markov_laplace")
        return std::make_shared<MarkovLaplacePredictor>(
            alphabet_from(spec), require_field(spec, "order").get<int>(), smoothing_from(spec));

    if (family == "markov_mixture")
        return std::make_shared<MixturePredictor>(
            build_markov_mixture(alphabet_from(spec), require_field(spec, "k_max").get<int>(),
                                 scheme_from_json(require_field(spec, "scheme")),
                                 smoothing_from(spec)));

    if (family == "mixture") {
        auto components = measure_list_from_json(require_field(spec, "components"));
        const bool has_weights = spec.contains("weights");
        const bool has_scheme = spec.contains("scheme");
        if (has_weights == has_scheme)
            throw input_error("mixture spec needs exactly one of 'weights' or 'scheme'");
        if (has_weights)
            return std::make_shared<MixturePredictor>(std::move(components),
                                                      doubles_from(spec["weights"], "mixture weights"));
        return std::make_shared<MixturePredictor>(std::move(components),
                                                  scheme_from_json(spec["scheme"]));
    }

    if (family == "cover_build") {
        RegularizerKind reg = RegularizerKind::uniform;
        const std::string reg_name = spec.value("regularizer", "uniform");
        if (reg_name == "class")
            reg = RegularizerKind::class_blend;
        else if (reg_name != "uniform")
            throw input_error("unknown regularizer '" + reg_name + "'");
        return std::make_shared<CoverPredictor>(build_cover_predictor(
            measure_list_from_json(require_field(spec, "class")),
            measure_from_json(require_field(spec, "rho")), require_field(spec, "n_max").get<int>(),
            scheme_from_json(require_field(spec, "scheme")), reg,
            spec.value("exact_cap", kDefaultExactCap)));
    }

    if (family == "cover_predictor") return cover_predictor_from_json(spec);

    if (family == "from_file")
        return measure_from_json(load_json_file(require_field(spec, "path").get<std::string>()));

    if (family == "bernoulli_grid")
        throw input_error("bernoulli_grid expands only inside component or class lists");

    throw input_error("unknown measure family '" + family + "'");
}

std::vector<std::shared_ptr<const ProcessMeasure>> measure_list_from_json(const json& list) {
    if (!list.is_array()) throw input_error("expected a JSON array of measure specs");
    std::vector<std::shared_ptr<const ProcessMeasure>> out;
    for (const auto& spec : list) {
        if (spec.is_object() && spec.value("family", "") == "bernoulli_grid") {
            for (auto& m : bernoulli_grid(require_field(spec, "points").get<int>()))
                out.push_back(std::move(m));
        } else {
            out.push_back(measure_from_json(spec));
        }
    }
    return out;
}

json measure_to_json(const ProcessMeasure& m) {
    if (const auto* b = dynamic_cast<const BernoulliMeasure*>(&m))
        return json{{"family", "bernoulli"}, {"p", b->p()}};

    if (dynamic_cast<const UniformMeasure*>(&m) != nullptr)
        return json{{"family", "uniform"}, {"alphabet", m.alphabet().size()}};

    if (const auto* mk = dynamic_cast<const MarkovMeasure*>(&m))
        return json{{"family", "markov"},
                    {"alphabet", m.alphabet().size()},
                    {"order", mk->order()},
                    {"rows", mk->rows()},
                    {"initial", mk->initial()}};

    if (const auto* ml = dynamic_cast<const MarkovLaplacePredictor*>(&m)) {
        if (ml->order() == 0)  // canonical form for the order-0 case
            return json{{"family", "laplace"},
                        {"alphabet", m.alphabet().size()},
                        {"smoothing", ml->smoothing()}};
        return json{{"family", "markov_laplace"},
                    {"alphabet", m.alphabet().size()},
                    {"order", ml->order()},
                    {"smoothing", ml->smoothing()}};
    }

    if (const auto* nu = dynamic_cast<const CoverPredictor*>(&m)) return cover_predictor_to_json(*nu);

    if (const auto* reg = dynamic_cast<const ClassRegularizer*>(&m)) return measure_to_json(reg->blend());

    if (const auto* mix = dynamic_cast<const MixturePredictor*>(&m)) {
        json components = json::array();
        for (int k = 0; k < mix->component_count(); ++k)
            components.push_back(measure_to_json(mix->component(k)));
        return json{{"family", "mixture"}, {"components", components}, {"weights", mix->weights()}};
    }

    throw input_error("measure type has no JSON form");
}

json cover_predictor_to_json(const CoverPredictor& nu) {
    json class_json = json::array();
    for (const auto& member : nu.class_members()) class_json.push_back(measure_to_json(*member));

    json trace = json::array();
    for (int n = 1; n <= nu.max_horizon(); ++n) {
        const CoverResult& cover = nu.cover(n);
        json rounds = json::array();
        for (const auto& round : cover.rounds)
            rounds.push_back(json{{"component", round.component},
                                  {"claimed_rho_mass", round.claimed_rho_mass}});
        trace.push_back(json{{"n", n}, {"rounds", rounds}});
    }

    return json{{"family", "cover_predictor"},
                {"alphabet", nu.alphabet().size()},
                {"class", class_json},
                {"rho", measure_to_json(nu.reference())},
                {"n_max", nu.max_horizon()},
                {"scheme", scheme_to_json(nu.scheme())},
                {"regularizer", regularizer_name(nu.regularizer_kind())},
                {"trace", trace}};
}

std::shared_ptr<const CoverPredictor> cover_predictor_from_json(const json& spec, int exact_cap) {
    const std::string reg_name = require_field(spec, "regularizer").get<std::string>();
    if (reg_name != "class" && reg_name != "uniform")
        throw input_error("unknown regularizer '" + reg_name + "'");
    const RegularizerKind reg =
        reg_name == "class" ? RegularizerKind::class_blend : RegularizerKind::uniform;
    auto nu = std::make_shared<CoverPredictor>(build_cover_predictor(
        measure_list_from_json(require_field(spec, "class")),
        measure_from_json(require_field(spec, "rho")), require_field(spec, "n_max").get<int>(),
        scheme_from_json(require_field(spec, "scheme")), reg, exact_cap));

    // The greedy construction is deterministic, so the stored trace must come
    // out identical; a mismatch means the file was edited inconsistently.
    const json& trace = require_field(spec, "trace");
    for (const auto& horizon : trace) {
        const int n = require_field(horizon, "n").get<int>();
        const CoverResult& cover = nu->cover(n);
        const json& rounds = require_field(horizon, "rounds");
        if (rounds.size() != static_cast<std::size_t>(cover.round_count()))
            throw input_error("stored cover trace disagrees with the rebuilt cover at n = " +
                              std::to_string(n));
        for (std::size_t k = 0; k < rounds.size(); ++k) {
            const auto& round = cover.rounds[k];
            if (rounds[k].at("component").get<int>() != round.component ||
                std::abs(rounds[k].at("claimed_rho_mass").get<double>() - round.claimed_rho_mass) >
                    1e-12)
                throw input_error("stored cover trace disagrees with the rebuilt cover at n = " +
                                  std::to_string(n) + ", round " + std::to_string(k + 1));
        }
    }
    return nu;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open file '" + path + "'");
    json value;
    try {
        in >> value;
    } catch (const json::parse_error& e) {
        throw input_error("cannot parse '" + path + "': " + e.what());
    }
    return value;
}

void write_json_file(const std::string& path, const json& value) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open file '" + path + "' for writing");
    out << value.dump(2) << '\n';
}

}  // namespace seqpred
