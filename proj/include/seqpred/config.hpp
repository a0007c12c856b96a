#pragma once

#include <memory>
#include <vector>

#include <json.hpp>

#include "seqpred/cover.hpp"
#include "seqpred/measure.hpp"
#include "seqpred/predictor.hpp"

namespace seqpred {

// JSON specs are the single external description of measures and predictors.
// Every family round-trips losslessly: parameters are plain JSON numbers and
// to_json(from_json(spec)) is canonical-form identical.
//
// Families:
//   {"family": "bernoulli", "p": 0.3}
//   {"family": "uniform", "alphabet": 2}
//   {"family": "markov", "alphabet": 2, "order": 1, "rows": [[..], ..], "initial": [..]}
//   {"family": "random_markov", "alphabet": 2, "order": 1, "seed": 7}
//   {"family": "laplace", "alphabet": 2, "smoothing": 1.0}
//   {"family": "markov_laplace", "alphabet": 2, "order": 2, "smoothing": 1.0}
//   {"family": "markov_mixture", "alphabet": 2, "k_max": 4, "scheme": {...}, "smoothing": 1.0}
//   {"family": "mixture", "components": [...], "weights": [..] | "scheme": {...}}
//   {"family": "cover_predictor", ...}            (serialized build, see below)
//   {"family": "cover_build", "class": [...], "rho": {...}, "n_max": 12,
//    "scheme": {...}, "regularizer": "uniform"|"class"}
//   {"family": "from_file", "path": "spec.json"}
//
// Weight schemes:
//   {"rule": "inverse_square"} | {"rule": "geometric"} | {"rule": "custom", "values": [..]}
//
// Inside component/class lists, {"family": "bernoulli_grid", "points": 11}
// expands to the grid members.

std::shared_ptr<const ProcessMeasure> measure_from_json(const nlohmann::json& spec);
nlohmann::json measure_to_json(const ProcessMeasure& m);

// Parses a JSON array of specs, expanding grid entries in place.
std::vector<std::shared_ptr<const ProcessMeasure>> measure_list_from_json(const nlohmann::json& list);

WeightScheme scheme_from_json(const nlohmann::json& spec);
nlohmann::json scheme_to_json(const WeightScheme& scheme);

// Serialized cover predictor: class, reference predictor, scheme, regularizer
// kind, horizon weights and the per-horizon round traces (component index and
// claimed mass per round). Loading rebuilds the dominance sets from the trace
// instead of re-running the greedy selection.
nlohmann::json cover_predictor_to_json(const CoverPredictor& nu);
std::shared_ptr<const CoverPredictor> cover_predictor_from_json(const nlohmann::json& spec,
                                                                int exact_cap = kDefaultExactCap);

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& value);

}  // namespace seqpred
