#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "seqpred/alphabet.hpp"
#include "seqpred/log_space.hpp"

namespace seqpred {

class MeasureCursor;

// A stochastic process over a finite alphabet, determined by the natural-log
// probabilities it assigns to finite prefixes. The empty prefix has log
// probability 0; impossible prefixes have log probability -inf. Measures are
// immutable after construction and safe to share across threads.
class ProcessMeasure {
public:
    virtual ~ProcessMeasure() = default;

    const Alphabet& alphabet() const { return alphabet_; }

    // ln mu(x_1..x_n). Default implementation walks the chain rule over
    // next_log_probs and stops at the first impossible step; subclasses with
    // a closed form override.
    virtual double log_marginal(const History& h) const;

    // Conditional log probabilities of the next symbol given h; out must have
    // alphabet().size() entries and their exp-sum is 1. Throws
    // undefined_conditional_error when h itself has zero probability.
    virtual void next_log_probs(const History& h, std::span<double> out) const = 0;

    std::vector<double> next_log_probs(const History& h) const {
        std::vector<double> out(static_cast<std::size_t>(alphabet_.size()));
        next_log_probs(h, out);
        return out;
    }

    // Stateful left-to-right evaluator with cheap per-symbol conditionals.
    // The default keeps a History and re-asks the measure each step; families
    // with incremental state override.
    virtual std::unique_ptr<MeasureCursor> cursor() const;

protected:
    explicit ProcessMeasure(Alphabet a) : alphabet_(a) {}

    // Shared precondition check for operations taking a History.
    void require_same_alphabet(const History& h) const;

private:
    Alphabet alphabet_;
};

// Left-to-right evaluation state for one growing prefix. Advancing through a
// zero-probability symbol is allowed (the running marginal becomes -inf and
// the cursor is exhausted); asking an exhausted cursor for conditionals is
// not.
class MeasureCursor {
public:
    virtual ~MeasureCursor() = default;

    virtual void next_log_probs(std::span<double> out) const = 0;
    virtual void advance(Symbol a) = 0;

    double log_marginal() const { return log_marginal_; }
    bool exhausted() const { return log_marginal_ == kNegInf; }

protected:
    double log_marginal_ = 0.0;
};

// I.i.d. binary source; p is the probability of symbol 0.
class BernoulliMeasure final : public ProcessMeasure {
public:
    using ProcessMeasure::next_log_probs;
    explicit BernoulliMeasure(double p);

    double p() const { return p_; }

    double log_marginal(const History& h) const override;
    void next_log_probs(const History& h, std::span<double> out) const override;
    std::unique_ptr<MeasureCursor> cursor() const override;

private:
    double p_;
    double log_probs_[2];
};

// I.i.d. uniform over the alphabet: every length-n string has mass |X|^-n.
class UniformMeasure final : public ProcessMeasure {
public:
    using ProcessMeasure::next_log_probs;
    explicit UniformMeasure(Alphabet a);

    double log_marginal(const History& h) const override;
    void next_log_probs(const History& h, std::span<double> out) const override;
    std::unique_ptr<MeasureCursor> cursor() const override;

private:
    double log_inv_size_;
};

// Finite-order Markov process. The first `order` symbols follow an explicit
// joint distribution over X^order (uniform when none is given); later symbols
// follow the transition row of their length-`order` context. Contexts are
// encoded base |X|, most recent symbol least significant... see encode_context.
class MarkovMeasure final : public ProcessMeasure {
public:
    using ProcessMeasure::next_log_probs;
    // rows[c][a] = P(next = a | context c); one row per context in X^order.
    // initial[c] = P(x_1..x_order = context c); empty means uniform.
    MarkovMeasure(Alphabet a, int order, std::vector<std::vector<double>> rows,
                  std::vector<double> initial = {});

    // Rows (and, for order > 0, nothing else) drawn from a flat Dirichlet;
    // initial distribution left uniform. Deterministic per seed.
    static MarkovMeasure random(Alphabet a, int order, std::uint64_t seed);

    int order() const { return order_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    const std::vector<double>& initial() const { return initial_; }

    double log_marginal(const History& h) const override;
    void next_log_probs(const History& h, std::span<double> out) const override;
    std::unique_ptr<MeasureCursor> cursor() const override;

    // Context of the symbol at position len(h)+1, i.e. the last `order`
    // symbols of h encoded base |X| with the oldest most significant.
    // Requires h.length() >= order.
    std::size_t encode_context(const History& h) const;

private:
    double initial_prefix_log_mass(const History& h, int len) const;

    int order_;
    std::size_t context_count_;
    std::vector<std::vector<double>> rows_;      // probabilities
    std::vector<std::vector<double>> log_rows_;  // cached logs
    std::vector<double> initial_;
    std::vector<double> log_initial_;
};

// Draw a length-n history from the measure by sequential sampling of the
// conditionals. Deterministic per seed, independent of platform.
History sample_history(const ProcessMeasure& m, int n, std::uint64_t seed);

// Largest absolute deviation of exp-sum(next_log_probs(h)) from 1 over every
// history of length < max_len with positive marginal. A contract check:
// honest measures keep this below ~1e-12.
double max_normalization_deviation(const ProcessMeasure& m, int max_len);

}  // namespace seqpred
