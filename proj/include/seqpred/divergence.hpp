#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "seqpred/enumeration.hpp"
#include "seqpred/log_space.hpp"
#include "seqpred/measure.hpp"

namespace seqpred {

enum class KlMethod { exact_enumeration, identity, monte_carlo };

std::string kl_method_name(KlMethod m);

// Expected cumulative KL divergence between next-symbol conditionals over the
// first n steps, in nats. +inf records an absolute-continuity failure (rho
// assigns zero where mu does not) rather than saturating to a big float.
struct KlEstimate {
    int n = 0;
    double value_nats = 0.0;
    KlMethod method = KlMethod::exact_enumeration;
    long long mc_samples = 0;  // 0 for exact methods
    double std_error = 0.0;    // 0 for exact methods
    double value_bits() const { return nats_to_bits(value_nats); }
    double rate() const { return n > 0 ? value_nats / n : 0.0; }
    bool diverged() const { return std::isinf(value_nats); }
};

// Exact sup over events measurable at the given horizon of the difference in
// conditional probabilities; a lower bound on the full-sigma-field distance,
// nondecreasing in the horizon.
struct TvEstimate {
    int horizon = 0;
    double value = 0.0;
};

// Sum over time steps and symbols of mu-weighted per-step conditional KL,
// by full enumeration of the prefix tree.
KlEstimate kl_exact(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                    int exact_cap = kDefaultExactCap);

// All horizons 1..n from one tree walk; entry m-1 equals kl_exact at m.
std::vector<KlEstimate> kl_exact_curve(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                                       int exact_cap = kDefaultExactCap);

// The same quantity computed from length-n marginals instead of conditionals:
//   sum over x in X^n of mu(x) (ln mu(x) - ln rho(x)).
// Agrees with kl_exact to ~1e-9; tested as such.
KlEstimate kl_identity(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                       int exact_cap = kDefaultExactCap);

// Sample paths from mu and average the per-path sums of one-step conditional
// KL terms (the inner sum over symbols is computed exactly, only the path is
// sampled). Deterministic per seed; substreams are keyed by path index.
KlEstimate kl_monte_carlo(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                          long long samples, std::uint64_t seed);

// Half the L1 distance of the two conditional distributions over length-
// `horizon` continuations of the conditioning history.
TvEstimate tv_horizon(const ProcessMeasure& mu, const ProcessMeasure& rho,
                      const History& conditioning, int horizon,
                      int exact_cap = kDefaultExactCap);

// All horizons 1..max_horizon from one walk.
std::vector<TvEstimate> tv_ladder(const ProcessMeasure& mu, const ProcessMeasure& rho,
                                  const History& conditioning, int max_horizon,
                                  int exact_cap = kDefaultExactCap);

// Restricting the identity-form sum to a subset A never beats the grouped
// term: -sum_{x in A} mu(x) ln(rho(x)/mu(x)) >= -mu(A) ln(rho(A)/mu(A)).
struct JensenCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// Evaluates both sides over a set of same-length histories. Requires
// mu(A) > 0.
JensenCheck jensen_gap(const ProcessMeasure& mu, const ProcessMeasure& rho,
                       const std::vector<History>& subset);

}  // namespace seqpred
