#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "seqpred/enumeration.hpp"
#include "seqpred/measure.hpp"
#include "seqpred/predictor.hpp"

namespace seqpred {

// The length-n strings where mu(x) >= rho(x)/n. By Markov's inequality the
// mu-mass of the complement is at most 1/n. Membership is indexed by the
// lexicographic string encoding.
struct DominanceSet {
    int n = 0;
    std::vector<std::uint8_t> member;
    double mu_mass = 0.0;
    double rho_mass = 0.0;
    double complement_mu_mass = 0.0;

    bool contains(std::uint64_t idx) const { return member[idx] != 0; }
    std::uint64_t member_count() const;
};

DominanceSet build_dominance_set(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                                 int exact_cap = kDefaultExactCap);

// One round of the greedy cover: the chosen component, the rho-mass it newly
// claimed, and the cumulative union after the round.
struct CoverRound {
    int component = -1;
    double claimed_rho_mass = 0.0;     // rho(T_component \ previous union)
    double cumulative_rho_mass = 0.0;  // rho(union after this round)
    std::vector<std::uint8_t> cumulative;
};

// Trace of the greedy cover at one horizon. Rounds stop at the first zero
// residual, so rounds.size() is the number of components with positive claim.
struct CoverResult {
    int n = 0;
    std::vector<CoverRound> rounds;

    int round_count() const { return static_cast<int>(rounds.size()); }
};

// Repeatedly picks the class member whose dominance set claims the largest
// rho-mass outside the current union (ties to the lowest index) until nothing
// is left to claim.
CoverResult greedy_cover(std::span<const std::shared_ptr<const ProcessMeasure>> class_members,
                         const ProcessMeasure& rho, int n, int exact_cap = kDefaultExactCap);

enum class RegularizerKind { uniform, class_blend };

std::string regularizer_name(RegularizerKind k);

// Substitute regularizer assembled from the class itself: at each horizon k,
// the uniform average over supported strings of the class member maximizing
// that string's probability, the horizons blended with inverse-square
// weights. Satisfies reg(x_1..n) >= w_n |X|^-n mu(x_1..n) for every class
// member mu and every supported x.
class ClassRegularizer final : public ProcessMeasure {
public:
    using ProcessMeasure::next_log_probs;
    double log_marginal(const History& h) const override { return blend_->log_marginal(h); }
    void next_log_probs(const History& h, std::span<double> out) const override {
        blend_->next_log_probs(h, out);
    }
    std::unique_ptr<MeasureCursor> cursor() const override { return blend_->cursor(); }

    int max_horizon() const { return static_cast<int>(log_horizon_weights_.size()); }
    double log_horizon_weight(int n) const { return log_horizon_weights_[static_cast<std::size_t>(n - 1)]; }
    std::uint64_t support_size(int n) const { return support_sizes_[static_cast<std::size_t>(n - 1)]; }
    const MixturePredictor& blend() const { return *blend_; }

private:
    friend ClassRegularizer build_class_regularizer(
        std::span<const std::shared_ptr<const ProcessMeasure>>, int, int);

    explicit ClassRegularizer(Alphabet a) : ProcessMeasure(a) {}

    std::shared_ptr<const MixturePredictor> blend_;
    std::vector<double> log_horizon_weights_;
    std::vector<std::uint64_t> support_sizes_;
};

ClassRegularizer build_class_regularizer(
    std::span<const std::shared_ptr<const ProcessMeasure>> class_members, int max_horizon,
    int exact_cap = kDefaultExactCap);

// Predictor assembled from per-horizon greedy covers:
//   half a regularizer plus half the horizon-weighted blend of the per-horizon
//   cover mixtures, every weight renormalized over what is actually present,
//   so the whole thing is a proper process measure. Every component is a full
//   process measure, so conditionals stay defined at any length, including
//   past the horizon the covers were built to.
//
// On every covered string the construction guarantees
//   nu(x_1..n) >= 1/2 * w_n * w_k * (1/n) * rho(x_1..n)   for x in round k's union,
// with w_n the horizon weight and w_k the in-cover component weight.
class CoverPredictor final : public ProcessMeasure {
public:
    using ProcessMeasure::next_log_probs;
    double log_marginal(const History& h) const override { return flat_->log_marginal(h); }
    void next_log_probs(const History& h, std::span<double> out) const override {
        flat_->next_log_probs(h, out);
    }
    std::unique_ptr<MeasureCursor> cursor() const override { return flat_->cursor(); }

    int max_horizon() const { return static_cast<int>(covers_.size()); }
    const CoverResult& cover(int n) const { return covers_[static_cast<std::size_t>(n - 1)]; }
    double log_horizon_weight(int n) const { return log_horizon_weights_[static_cast<std::size_t>(n - 1)]; }
    // Weight of round k (1-based) inside the horizon-n cover mixture.
    double log_cover_weight(int n, int k) const {
        return log_cover_weights_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k - 1)];
    }

    RegularizerKind regularizer_kind() const { return regularizer_kind_; }
    const ProcessMeasure& regularizer() const { return *regularizer_; }
    const ProcessMeasure& reference() const { return *rho_; }
    std::shared_ptr<const ProcessMeasure> reference_ptr() const { return rho_; }
    const std::vector<std::shared_ptr<const ProcessMeasure>>& class_members() const {
        return class_members_;
    }
    const WeightScheme& scheme() const { return scheme_; }

    // The flattened finite mixture (regularizer plus every chosen class
    // member with its accumulated weight) that evaluation runs on.
    const MixturePredictor& flattened() const { return *flat_; }

    // Smallest slack, in log space, of nu over its per-horizon guarantee at
    // horizon n: min over rounds k and strings x in the round-k union of
    // ln nu(x) - [ln(1/2) + ln w_n + ln w_k - ln n + ln rho(x)].
    double lower_bound_log_slack(int n, int exact_cap = kDefaultExactCap) const;

private:
    friend CoverPredictor build_cover_predictor(
        std::vector<std::shared_ptr<const ProcessMeasure>>, std::shared_ptr<const ProcessMeasure>,
        int, const WeightScheme&, RegularizerKind, int);

    explicit CoverPredictor(Alphabet a, WeightScheme scheme)
        : ProcessMeasure(a), scheme_(std::move(scheme)) {}

    std::vector<std::shared_ptr<const ProcessMeasure>> class_members_;
    std::shared_ptr<const ProcessMeasure> rho_;
    std::shared_ptr<const ProcessMeasure> regularizer_;
    RegularizerKind regularizer_kind_ = RegularizerKind::uniform;
    WeightScheme scheme_;
    std::vector<CoverResult> covers_;
    std::vector<double> log_horizon_weights_;
    std::vector<std::vector<double>> log_cover_weights_;
    std::shared_ptr<const MixturePredictor> flat_;
};

// Builds covers for every horizon 1..max_horizon and assembles the composite
// predictor. The horizon weights must decay subexponentially for the
// construction to carry its guarantee, so schemes without that structural
// property are rejected.
CoverPredictor build_cover_predictor(std::vector<std::shared_ptr<const ProcessMeasure>> class_members,
                                     std::shared_ptr<const ProcessMeasure> rho, int max_horizon,
                                     const WeightScheme& scheme, RegularizerKind regularizer,
                                     int exact_cap = kDefaultExactCap);

// Evenly spaced Bernoulli parameters: p_i = i/(points-1), i = 0..points-1.
std::vector<std::shared_ptr<const ProcessMeasure>> bernoulli_grid(int points);

}  // namespace seqpred
