#include "seqpred/predictor.hpp"

#include <cmath>

#include "seqpred/errors.hpp"

namespace seqpred {

// ---------------------------------------------------------------------------
// WeightScheme

WeightScheme WeightScheme::custom(std::vector<double> weights) {
    if (weights.empty()) throw input_error("custom weight list must be nonempty");
    for (double w : weights)
        if (!(w > 0.0)) throw input_error("custom weights must be strictly positive");
    return WeightScheme(Rule::custom, std::move(weights));
}

std::string WeightScheme::name() const {
    switch (rule_) {
        case Rule::inverse_square: return "inverse_square";
        case Rule::geometric: return "geometric";
        case Rule::custom: return "custom";
    }
    return "?";
}

std::vector<double> WeightScheme::log_weights(int count) const {
    if (count < 1) throw input_error("weight scheme needs at least one component");
    std::vector<double> w(static_cast<std::size_t>(count));
    switch (rule_) {
        case Rule::inverse_square:
            for (int k = 1; k <= count; ++k)
                w[static_cast<std::size_t>(k - 1)] = 1.0 / (static_cast<double>(k) * k);
            break;
        case Rule::geometric:
            for (int k = 1; k <= count; ++k)
                w[static_cast<std::size_t>(k - 1)] = std::ldexp(1.0, -k);
            break;
        case Rule::custom:
            if (static_cast<std::size_t>(count) > custom_.size())
                throw input_error("custom weight list has " + std::to_string(custom_.size()) +
                                  " entries, need " + std::to_string(count));
            for (int k = 0; k < count; ++k) w[static_cast<std::size_t>(k)] = custom_[static_cast<std::size_t>(k)];
            break;
    }
    double sum = 0.0;
    for (double v : w) sum += v;
    std::vector<double> logs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) logs[i] = std::log(w[i] / sum);
    return logs;
}

// ---------------------------------------------------------------------------
// Smoothed Markov predictors

namespace {

std::size_t pow_size(int base, int exp) {
    std::size_t v = 1;
    for (int i = 0; i < exp; ++i) {
        v *= static_cast<std::size_t>(base);
        if (v > (1u << 20)) throw input_error("predictor context table too large: |X|^order exceeds 2^20");
    }
    return v;
}

}  // namespace

MarkovLaplacePredictor::MarkovLaplacePredictor(Alphabet a, int order, double smoothing)
    : ProcessMeasure(a), order_(order), context_count_(pow_size(a.size(), order)), smoothing_(smoothing) {
    if (order < 0) throw input_error("predictor order must be nonnegative");
    if (!(smoothing > 0.0)) throw input_error("smoothing constant must be strictly positive");
}

double MarkovLaplacePredictor::log_marginal(const History& h) const {
    require_same_alphabet(h);
    const int size = alphabet().size();
    const double log_uniform = -std::log(static_cast<double>(size));
    std::vector<int> counts(context_count_ * static_cast<std::size_t>(size), 0);
    std::vector<int> totals(context_count_, 0);
    double total = 0.0;
    std::size_t ctx = 0;
    const std::size_t ctx_mod = context_count_ / static_cast<std::size_t>(size) > 0
                                    ? context_count_ / static_cast<std::size_t>(size)
                                    : 1;
    for (int t = 0; t < h.length(); ++t) {
        const auto a = static_cast<std::size_t>(h.at(t));
        if (t < order_) {
            total += log_uniform;
        } else {
            const double num = counts[ctx * static_cast<std::size_t>(size) + a] + smoothing_;
            const double den = totals[ctx] + smoothing_ * size;
            total += std::log(num / den);
            ++counts[ctx * static_cast<std::size_t>(size) + a];
            ++totals[ctx];
        }
        if (order_ > 0) ctx = (ctx % ctx_mod) * static_cast<std::size_t>(size) + a;
    }
    return total;
}

void MarkovLaplacePredictor::next_log_probs(const History& h, std::span<double> out) const {
    require_same_alphabet(h);
    const int size = alphabet().size();
    const int n = h.length();
    if (n < order_) {
        const double log_uniform = -std::log(static_cast<double>(size));
        for (int a = 0; a < size; ++a) out[static_cast<std::size_t>(a)] = log_uniform;
        return;
    }
    std::vector<int> counts(static_cast<std::size_t>(size), 0);
    int total = 0;
    // Context of the upcoming symbol, then one rolling pass over the history
    // to collect counts for exactly that context.
    std::size_t target = 0;
    for (int t = n - order_; t < n; ++t)
        target = target * static_cast<std::size_t>(size) + static_cast<std::size_t>(h.at(t));
    std::size_t ctx = 0;
    const std::size_t ctx_mod = context_count_ / static_cast<std::size_t>(size) > 0
                                    ? context_count_ / static_cast<std::size_t>(size)
                                    : 1;
    for (int t = 0; t < n; ++t) {
        if (t >= order_ && ctx == target) {
            ++counts[static_cast<std::size_t>(h.at(t))];
            ++total;
        }
        if (order_ > 0) ctx = (ctx % ctx_mod) * static_cast<std::size_t>(size) + static_cast<std::size_t>(h.at(t));
    }
    const double den = total + smoothing_ * size;
    for (int a = 0; a < size; ++a)
        out[static_cast<std::size_t>(a)] = std::log((counts[static_cast<std::size_t>(a)] + smoothing_) / den);
}

class MarkovLaplaceCursor final : public MeasureCursor {
public:
    explicit MarkovLaplaceCursor(const MarkovLaplacePredictor& m)
        : measure_(m),
          size_(m.alphabet().size()),
          counts_(m.context_count_ * static_cast<std::size_t>(size_), 0),
          totals_(m.context_count_, 0),
          ctx_mod_(m.context_count_ / static_cast<std::size_t>(size_) > 0
                       ? m.context_count_ / static_cast<std::size_t>(size_)
                       : 1) {}

    void next_log_probs(std::span<double> out) const override {
        if (position_ < measure_.order()) {
            const double log_uniform = -std::log(static_cast<double>(size_));
            for (int a = 0; a < size_; ++a) out[static_cast<std::size_t>(a)] = log_uniform;
            return;
        }
        const double den = totals_[ctx_] + measure_.smoothing() * size_;
        for (int a = 0; a < size_; ++a)
            out[static_cast<std::size_t>(a)] =
                std::log((counts_[ctx_ * static_cast<std::size_t>(size_) + static_cast<std::size_t>(a)] +
                          measure_.smoothing()) /
                         den);
    }

    void advance(Symbol a) override {
        const auto sym = static_cast<std::size_t>(a);
        if (position_ < measure_.order()) {
            log_marginal_ += -std::log(static_cast<double>(size_));
        } else {
            const double num = counts_[ctx_ * static_cast<std::size_t>(size_) + sym] + measure_.smoothing();
            const double den = totals_[ctx_] + measure_.smoothing() * size_;
            log_marginal_ += std::log(num / den);
            ++counts_[ctx_ * static_cast<std::size_t>(size_) + sym];
            ++totals_[ctx_];
        }
        if (measure_.order() > 0) ctx_ = (ctx_ % ctx_mod_) * static_cast<std::size_t>(size_) + sym;
        ++position_;
    }

private:
    const MarkovLaplacePredictor& measure_;
    int size_;
    std::vector<int> counts_;
    std::vector<int> totals_;
    std::size_t ctx_ = 0;
    std::size_t ctx_mod_;
    int position_ = 0;
};

std::unique_ptr<MeasureCursor> MarkovLaplacePredictor::cursor() const {
    return std::make_unique<MarkovLaplaceCursor>(*this);
}

double laplace_conditional(const History& h, Symbol a) {
    if (a < 0 || a >= h.alphabet().size())
        throw input_error("symbol outside the history's alphabet");
    int count = 0;
    for (int t = 0; t < h.length(); ++t)
        if (h.at(t) == a) ++count;
    return (count + 1.0) / (h.length() + h.alphabet().size());
}

// ---------------------------------------------------------------------------
// Mixtures

namespace {

std::vector<std::shared_ptr<const ProcessMeasure>> checked_components(
    std::vector<std::shared_ptr<const ProcessMeasure>> components) {
    if (components.empty()) throw input_error("mixture needs at least one component");
    for (const auto& c : components) {
        if (!c) throw input_error("mixture component is null");
        if (c->alphabet() != components.front()->alphabet())
            throw input_error("mixture components must share one alphabet");
    }
    return components;
}

std::vector<double> normalized_weights(std::vector<double> w, std::size_t count) {
    if (w.size() != count)
        throw input_error("mixture has " + std::to_string(count) + " components but " +
                          std::to_string(w.size()) + " weights");
    double sum = 0.0;
    for (double v : w) {
        if (!(v > 0.0)) throw input_error("mixture weights must be strictly positive");
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

MixturePredictor::MixturePredictor(std::vector<std::shared_ptr<const ProcessMeasure>> components,
                                   std::vector<double> weights)
    : ProcessMeasure(components.empty() ? kBinary : components.front()->alphabet()),
      components_(checked_components(std::move(components))),
      weights_(normalized_weights(std::move(weights), components_.size())) {
    log_weights_.resize(weights_.size());
    for (std::size_t k = 0; k < weights_.size(); ++k) log_weights_[k] = std::log(weights_[k]);
}

MixturePredictor::MixturePredictor(std::vector<std::shared_ptr<const ProcessMeasure>> components,
                                   const WeightScheme& scheme)
    : ProcessMeasure(components.empty() ? kBinary : components.front()->alphabet()),
      components_(checked_components(std::move(components))) {
    log_weights_ = scheme.log_weights(static_cast<int>(components_.size()));
    weights_.resize(log_weights_.size());
    for (std::size_t k = 0; k < log_weights_.size(); ++k) weights_[k] = std::exp(log_weights_[k]);
}

double MixturePredictor::log_marginal(const History& h) const {
    require_same_alphabet(h);
    std::vector<double> terms(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k)
        terms[k] = log_weights_[k] + components_[k]->log_marginal(h);
    return log_sum_exp(terms);
}

void MixturePredictor::next_log_probs(const History& h, std::span<double> out) const {
    require_same_alphabet(h);
    const std::size_t size = static_cast<std::size_t>(alphabet().size());
    std::vector<double> weighted(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k)
        weighted[k] = log_weights_[k] + components_[k]->log_marginal(h);
    const double base = log_sum_exp(weighted);
    if (base == kNegInf)
        throw undefined_conditional_error("conditioning on a zero-probability history");
    // Posterior-weighted blend of the live components' conditionals.
    std::vector<double> row(size);
    std::vector<double> per_symbol(size, kNegInf);
    for (std::size_t k = 0; k < components_.size(); ++k) {
        if (weighted[k] == kNegInf) continue;
        components_[k]->next_log_probs(h, row);
        for (std::size_t a = 0; a < size; ++a)
            per_symbol[a] = log_add(per_symbol[a], weighted[k] + row[a]);
    }
    for (std::size_t a = 0; a < size; ++a) out[a] = per_symbol[a] - base;
}

std::vector<double> MixturePredictor::posterior_weights(const History& h) const {
    require_same_alphabet(h);
    std::vector<double> weighted(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k)
        weighted[k] = log_weights_[k] + components_[k]->log_marginal(h);
    const double base = log_sum_exp(weighted);
    if (base == kNegInf)
        throw undefined_posterior_error("posterior undefined: every component assigns zero mass");
    std::vector<double> post(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k)
        post[k] = weighted[k] == kNegInf ? 0.0 : std::exp(weighted[k] - base);
    return post;
}

class MixtureCursor final : public MeasureCursor {
public:
    explicit MixtureCursor(const MixturePredictor& m) : measure_(m) {
        const std::size_t size = static_cast<std::size_t>(m.alphabet().size());
        for (int k = 0; k < m.component_count(); ++k) {
            children_.push_back(m.component(k).cursor());
            log_posts_.push_back(m.log_weight(k));
        }
        rows_.assign(children_.size(), std::vector<double>(size));
        terms_.resize(children_.size());
    }

    void next_log_probs(std::span<double> out) const override {
        if (exhausted())
            throw undefined_conditional_error("conditioning on a zero-probability history");
        const std::size_t size = static_cast<std::size_t>(measure_.alphabet().size());
        for (std::size_t k = 0; k < children_.size(); ++k)
            if (log_posts_[k] != kNegInf) children_[k]->next_log_probs(rows_[k]);
        for (std::size_t a = 0; a < size; ++a) {
            for (std::size_t k = 0; k < children_.size(); ++k)
                terms_[k] = log_posts_[k] == kNegInf ? kNegInf : log_posts_[k] + rows_[k][a];
            out[a] = log_sum_exp(terms_) - log_marginal_;
        }
    }

    void advance(Symbol a) override {
        for (std::size_t k = 0; k < children_.size(); ++k) {
            children_[k]->advance(a);
            terms_[k] = measure_.log_weight(static_cast<int>(k)) + children_[k]->log_marginal();
            log_posts_[k] = terms_[k];
        }
        log_marginal_ = log_sum_exp(terms_);
    }

private:
    const MixturePredictor& measure_;
    std::vector<std::unique_ptr<MeasureCursor>> children_;
    std::vector<double> log_posts_;  // log w_k + log mu_k(consumed prefix)
    mutable std::vector<std::vector<double>> rows_;
    mutable std::vector<double> terms_;
};

std::unique_ptr<MeasureCursor> MixturePredictor::cursor() const {
    return std::make_unique<MixtureCursor>(*this);
}

MixturePredictor build_markov_mixture(Alphabet a, int k_max, const WeightScheme& scheme,
                                      double smoothing) {
    if (k_max < 0) throw input_error("k_max must be nonnegative");
    std::vector<std::shared_ptr<const ProcessMeasure>> components;
    components.reserve(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k)
        components.push_back(std::make_shared<MarkovLaplacePredictor>(a, k, smoothing));
    return MixturePredictor(std::move(components), scheme);
}

}  // namespace seqpred
