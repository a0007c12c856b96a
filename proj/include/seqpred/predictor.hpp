#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seqpred/measure.hpp"

namespace seqpred {

// Prior weighting rule for finite mixtures. Weights are always renormalized
// over the actual (finite) component list, so they sum to one exactly.
class WeightScheme {
public:
    enum class Rule { inverse_square, geometric, custom };

    static WeightScheme inverse_square() { return WeightScheme(Rule::inverse_square, {}); }
    static WeightScheme geometric() { return WeightScheme(Rule::geometric, {}); }
    static WeightScheme custom(std::vector<double> weights);

    Rule rule() const { return rule_; }
    const std::vector<double>& custom_values() const { return custom_; }
    std::string name() const;

    // Renormalized log weights for `count` components. k-th component (1-based)
    // gets k^-2 under inverse_square and 2^-k under geometric.
    std::vector<double> log_weights(int count) const;

    // Whether -ln w_k grows sublinearly in k. Horizon weights in the cover
    // construction require this; it is a structural property of the rule
    // (polynomial decay qualifies, exponential does not, and a finite custom
    // list cannot establish it), not something a finite prefix can witness.
    bool subexponential() const { return rule_ == Rule::inverse_square; }

private:
    WeightScheme(Rule rule, std::vector<double> custom) : rule_(rule), custom_(std::move(custom)) {}

    Rule rule_;
    std::vector<double> custom_;
};

// Add-constant smoothed predictor over length-k contexts. The first k symbols
// are predicted uniformly; from then on
//   P(a | h) = (count(a after context) + c) / (count(context) + c|X|)
// with counts taken from the conditioning history itself. The default c = 1
// is plain add-one smoothing; c = 0.5 gives the Krichevsky-Trofimov variant.
class MarkovLaplacePredictor : public ProcessMeasure {
public:
    using ProcessMeasure::next_log_probs;
    MarkovLaplacePredictor(Alphabet a, int order, double smoothing = 1.0);

    int order() const { return order_; }
    double smoothing() const { return smoothing_; }

    double log_marginal(const History& h) const override;
    void next_log_probs(const History& h, std::span<double> out) const override;
    std::unique_ptr<MeasureCursor> cursor() const override;

private:
    friend class MarkovLaplaceCursor;

    int order_;
    std::size_t context_count_;
    double smoothing_;
};

// Order-0 special case: P(a | x_1..x_n) = (count(a) + 1) / (n + |X|).
class LaplacePredictor final : public MarkovLaplacePredictor {
public:
    explicit LaplacePredictor(Alphabet a, double smoothing = 1.0)
        : MarkovLaplacePredictor(a, 0, smoothing) {}
};

// The add-one conditional computed directly from symbol counts. Kept separate
// from LaplacePredictor so tests can cross-check the two routes.
double laplace_conditional(const History& h, Symbol a);

// Finite convex combination of process measures with positive weights.
// The mixture marginal dominates every component: mix(h) >= w_k mu_k(h).
class MixturePredictor : public ProcessMeasure {
public:
    using ProcessMeasure::next_log_probs;
    MixturePredictor(std::vector<std::shared_ptr<const ProcessMeasure>> components,
                     std::vector<double> weights);
    MixturePredictor(std::vector<std::shared_ptr<const ProcessMeasure>> components,
                     const WeightScheme& scheme);

    int component_count() const { return static_cast<int>(components_.size()); }
    const ProcessMeasure& component(int k) const { return *components_[static_cast<std::size_t>(k)]; }
    std::shared_ptr<const ProcessMeasure> component_ptr(int k) const {
        return components_[static_cast<std::size_t>(k)];
    }
    double weight(int k) const { return weights_[static_cast<std::size_t>(k)]; }
    double log_weight(int k) const { return log_weights_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& weights() const { return weights_; }

    // Bayes posterior over components given h:
    //   post_k = w_k mu_k(h) / sum_j w_j mu_j(h).
    // The empty history returns the prior. Throws undefined_posterior_error
    // when every component assigns zero mass.
    std::vector<double> posterior_weights(const History& h) const;

    double log_marginal(const History& h) const override;
    void next_log_probs(const History& h, std::span<double> out) const override;
    std::unique_ptr<MeasureCursor> cursor() const override;

private:
    std::vector<std::shared_ptr<const ProcessMeasure>> components_;
    std::vector<double> weights_;
    std::vector<double> log_weights_;
};

// Mixture of smoothed Markov predictors of orders 0..k_max, the standard
// route to predicting finite-memory sources of unknown order.
MixturePredictor build_markov_mixture(Alphabet a, int k_max, const WeightScheme& scheme,
                                      double smoothing = 1.0);

}  // namespace seqpred
