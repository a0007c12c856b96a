#include "seqpred/measure.hpp"

#include <cmath>
#include <cstddef>
#include <functional>

#include "seqpred/errors.hpp"
#include "seqpred/rng.hpp"

namespace seqpred {

namespace {

// Fallback cursor: keeps the consumed prefix and re-asks the measure.
class HistoryCursor final : public MeasureCursor {
public:
    explicit HistoryCursor(const ProcessMeasure& m)
        : measure_(m),
          history_(m.alphabet()),
          scratch_(static_cast<std::size_t>(m.alphabet().size())) {}

    void next_log_probs(std::span<double> out) const override {
        if (exhausted())
            throw undefined_conditional_error("conditioning on a zero-probability history");
        measure_.next_log_probs(history_, out);
    }

    void advance(Symbol a) override {
        if (!exhausted()) {
            measure_.next_log_probs(history_, scratch_);
            log_marginal_ += scratch_[static_cast<std::size_t>(a)];
        }
        history_.push(a);
    }

private:
    const ProcessMeasure& measure_;
    History history_;
    std::vector<double> scratch_;
};

class IidCursor final : public MeasureCursor {
public:
    explicit IidCursor(std::vector<double> log_probs) : log_probs_(std::move(log_probs)) {}

    void next_log_probs(std::span<double> out) const override {
        if (exhausted())
            throw undefined_conditional_error("conditioning on a zero-probability history");
        for (std::size_t a = 0; a < log_probs_.size(); ++a) out[a] = log_probs_[a];
    }

    void advance(Symbol a) override { log_marginal_ += log_probs_[static_cast<std::size_t>(a)]; }

private:
    std::vector<double> log_probs_;
};

double checked_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

void ProcessMeasure::require_same_alphabet(const History& h) const {
    if (h.alphabet() != alphabet_)
        throw input_error("history alphabet (size " + std::to_string(h.alphabet().size()) +
                          ") does not match the measure's (size " + std::to_string(alphabet_.size()) + ")");
}

double ProcessMeasure::log_marginal(const History& h) const {
    require_same_alphabet(h);
    History prefix(alphabet());
    std::vector<double> lp(static_cast<std::size_t>(alphabet().size()));
    double total = 0.0;
    for (int t = 0; t < h.length(); ++t) {
        next_log_probs(prefix, lp);
        const double step = lp[static_cast<std::size_t>(h.at(t))];
        if (step == kNegInf) return kNegInf;
        total += step;
        prefix.push(h.at(t));
    }
    return total;
}

std::unique_ptr<MeasureCursor> ProcessMeasure::cursor() const {
    return std::make_unique<HistoryCursor>(*this);
}

// ---------------------------------------------------------------------------
// Bernoulli

BernoulliMeasure::BernoulliMeasure(double p) : ProcessMeasure(kBinary), p_(p) {
    if (!(p >= 0.0 && p <= 1.0)) throw input_error("bernoulli parameter must lie in [0, 1]");
    log_probs_[0] = checked_log(p);
    log_probs_[1] = checked_log(1.0 - p);
}

double BernoulliMeasure::log_marginal(const History& h) const {
    require_same_alphabet(h);
    int counts[2] = {0, 0};
    for (int t = 0; t < h.length(); ++t) ++counts[h.at(t)];
    // A count of zero contributes nothing even when the symbol itself is
    // impossible, so point masses stay on the 0 * (-inf) safe path.
    double total = 0.0;
    for (int a = 0; a < 2; ++a) {
        if (counts[a] == 0) continue;
        if (log_probs_[a] == kNegInf) return kNegInf;
        total += counts[a] * log_probs_[a];
    }
    return total;
}

void BernoulliMeasure::next_log_probs(const History& h, std::span<double> out) const {
    require_same_alphabet(h);
    if ((p_ == 0.0 || p_ == 1.0) && log_marginal(h) == kNegInf)
        throw undefined_conditional_error("conditioning on a zero-probability history");
    out[0] = log_probs_[0];
    out[1] = log_probs_[1];
}

std::unique_ptr<MeasureCursor> BernoulliMeasure::cursor() const {
    return std::make_unique<IidCursor>(std::vector<double>{log_probs_[0], log_probs_[1]});
}

// ---------------------------------------------------------------------------
// Uniform

UniformMeasure::UniformMeasure(Alphabet a)
    : ProcessMeasure(a), log_inv_size_(-std::log(static_cast<double>(a.size()))) {}

double UniformMeasure::log_marginal(const History& h) const {
    require_same_alphabet(h);
    return static_cast<double>(h.length()) * log_inv_size_;
}

void UniformMeasure::next_log_probs(const History& h, std::span<double> out) const {
    require_same_alphabet(h);
    for (int a = 0; a < alphabet().size(); ++a) out[static_cast<std::size_t>(a)] = log_inv_size_;
}

std::unique_ptr<MeasureCursor> UniformMeasure::cursor() const {
    return std::make_unique<IidCursor>(
        std::vector<double>(static_cast<std::size_t>(alphabet().size()), log_inv_size_));
}

// ---------------------------------------------------------------------------
// Markov

namespace {

std::size_t checked_context_count(int alphabet_size, int order) {
    if (order < 0) throw input_error("markov order must be nonnegative");
    std::size_t count = 1;
    for (int i = 0; i < order; ++i) {
        count *= static_cast<std::size_t>(alphabet_size);
        if (count > (1u << 20))
            throw input_error("markov context table too large: |X|^order exceeds 2^20");
    }
    return count;
}

void check_distribution(const std::vector<double>& p, std::size_t size, const char* what) {
    if (p.size() != size)
        throw input_error(std::string(what) + " has wrong length: expected " + std::to_string(size) +
                          ", got " + std::to_string(p.size()));
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw input_error(std::string(what) + " has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw input_error(std::string(what) + " sums to " + std::to_string(sum) + ", not 1");
}

std::vector<double> to_logs(const std::vector<double>& p) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = checked_log(p[i]);
    return out;
}

}  // namespace

MarkovMeasure::MarkovMeasure(Alphabet a, int order, std::vector<std::vector<double>> rows,
                             std::vector<double> initial)
    : ProcessMeasure(a),
      order_(order),
      context_count_(checked_context_count(a.size(), order)),
      rows_(std::move(rows)),
      initial_(std::move(initial)) {
    if (rows_.size() != context_count_)
        throw input_error("markov transition table needs " + std::to_string(context_count_) +
                          " rows, got " + std::to_string(rows_.size()));
    log_rows_.reserve(context_count_);
    for (const auto& row : rows_) {
        check_distribution(row, static_cast<std::size_t>(a.size()), "markov transition row");
        log_rows_.push_back(to_logs(row));
    }
    if (initial_.empty())
        initial_.assign(context_count_, 1.0 / static_cast<double>(context_count_));
    check_distribution(initial_, context_count_, "markov initial distribution");
    log_initial_ = to_logs(initial_);
}

MarkovMeasure MarkovMeasure::random(Alphabet a, int order, std::uint64_t seed) {
    const std::size_t contexts = checked_context_count(a.size(), order);
    std::mt19937_64 g(mix64(seed));
    std::vector<std::vector<double>> rows(contexts);
    for (auto& row : rows) {
        row.resize(static_cast<std::size_t>(a.size()));
        double sum = 0.0;
        for (double& v : row) {
            // Flat Dirichlet via normalized exponentials; entries stay
            // strictly positive so random measures have full support.
            v = -std::log(1.0 - uniform01_positive(g));
            if (v == 0.0) v = 1e-300;
            sum += v;
        }
        for (double& v : row) v /= sum;
        // Guard the 1e-12 row-sum invariant against rounding.
        double check = 0.0;
        for (double v : row) check += v;
        row.back() += 1.0 - check;
    }
    return MarkovMeasure(a, order, std::move(rows));
}

std::size_t MarkovMeasure::encode_context(const History& h) const {
    std::size_t idx = 0;
    for (int t = h.length() - order_; t < h.length(); ++t)
        idx = idx * static_cast<std::size_t>(alphabet().size()) + static_cast<std::size_t>(h.at(t));
    return idx;
}

double MarkovMeasure::initial_prefix_log_mass(const History& h, int len) const {
    // Strings sharing a length-len prefix occupy a contiguous index range,
    // because the initial distribution is encoded oldest-symbol-first.
    std::size_t prefix = 0;
    for (int t = 0; t < len; ++t)
        prefix = prefix * static_cast<std::size_t>(alphabet().size()) + static_cast<std::size_t>(h.at(t));
    std::size_t block = 1;
    for (int i = 0; i < order_ - len; ++i) block *= static_cast<std::size_t>(alphabet().size());
    double mass = 0.0;
    for (std::size_t i = prefix * block; i < (prefix + 1) * block; ++i) mass += initial_[i];
    return checked_log(mass);
}

double MarkovMeasure::log_marginal(const History& h) const {
    require_same_alphabet(h);
    const int n = h.length();
    if (n <= order_) return initial_prefix_log_mass(h, n);
    double total = log_initial_[encode_context(h.prefix(order_))];
    if (total == kNegInf) return kNegInf;
    History prefix = h.prefix(order_);
    for (int t = order_; t < n; ++t) {
        const double step = log_rows_[encode_context(prefix)][static_cast<std::size_t>(h.at(t))];
        if (step == kNegInf) return kNegInf;
        total += step;
        prefix.push(h.at(t));
    }
    return total;
}

void MarkovMeasure::next_log_probs(const History& h, std::span<double> out) const {
    require_same_alphabet(h);
    const double base = log_marginal(h);
    if (base == kNegInf)
        throw undefined_conditional_error("conditioning on a zero-probability history");
    if (h.length() >= order_) {
        const auto& row = log_rows_[encode_context(h)];
        for (std::size_t a = 0; a < row.size(); ++a) out[a] = row[a];
        return;
    }
    // Inside the initial block the conditional is a ratio of prefix masses.
    History child(h);
    for (int a = 0; a < alphabet().size(); ++a) {
        child.push(a);
        out[static_cast<std::size_t>(a)] = initial_prefix_log_mass(child, child.length()) - base;
        child.pop();
    }
}

namespace {

class MarkovCursor final : public MeasureCursor {
public:
    explicit MarkovCursor(const MarkovMeasure& m)
        : measure_(m),
          prefix_(m.alphabet()),
          scratch_(static_cast<std::size_t>(m.alphabet().size())) {}

    void next_log_probs(std::span<double> out) const override {
        if (exhausted())
            throw undefined_conditional_error("conditioning on a zero-probability history");
        if (prefix_.length() >= measure_.order()) {
            const auto& row = measure_.rows()[context_];
            for (std::size_t a = 0; a < row.size(); ++a)
                out[a] = row[a] > 0.0 ? std::log(row[a]) : kNegInf;
        } else {
            measure_.next_log_probs(prefix_, out);
        }
    }

    void advance(Symbol a) override {
        if (!exhausted()) {
            next_log_probs(scratch_);
            log_marginal_ += scratch_[static_cast<std::size_t>(a)];
        }
        prefix_.push(a);
        if (prefix_.length() >= measure_.order()) context_ = measure_.encode_context(prefix_);
    }

private:
    const MarkovMeasure& measure_;
    History prefix_;        // only the last `order` symbols matter once warm
    std::size_t context_ = 0;
    std::vector<double> scratch_;
};

}  // namespace

std::unique_ptr<MeasureCursor> MarkovMeasure::cursor() const {
    return std::make_unique<MarkovCursor>(*this);
}

// ---------------------------------------------------------------------------
// Sampling and contract checks

History sample_history(const ProcessMeasure& m, int n, std::uint64_t seed) {
    if (n < 0) throw input_error("sample length must be nonnegative");
    std::mt19937_64 g(mix64(seed));
    auto cur = m.cursor();
    History h(m.alphabet());
    std::vector<double> lp(static_cast<std::size_t>(m.alphabet().size()));
    for (int t = 0; t < n; ++t) {
        cur->next_log_probs(lp);
        const double u = uniform01(g);
        double acc = 0.0;
        Symbol picked = -1;
        for (int a = 0; a < m.alphabet().size(); ++a) {
            const double p = std::exp(lp[static_cast<std::size_t>(a)]);
            if (p <= 0.0) continue;
            acc += p;
            picked = a;
            if (u < acc) break;
        }
        h.push(picked);
        cur->advance(picked);
    }
    return h;
}

double max_normalization_deviation(const ProcessMeasure& m, int max_len) {
    double worst = 0.0;
    History h(m.alphabet());
    // Per-depth buffers: recursion below a node must not clobber its view.
    std::vector<std::vector<double>> lp(
        static_cast<std::size_t>(std::max(max_len, 1)),
        std::vector<double>(static_cast<std::size_t>(m.alphabet().size())));
    std::function<void()> walk = [&]() {
        auto& row = lp[static_cast<std::size_t>(h.length())];
        m.next_log_probs(h, row);
        double sum = 0.0;
        for (double v : row) sum += std::exp(v);
        worst = std::max(worst, std::abs(sum - 1.0));
        if (h.length() + 1 >= max_len) return;
        for (int a = 0; a < m.alphabet().size(); ++a) {
            if (row[static_cast<std::size_t>(a)] == kNegInf) continue;
            h.push(a);
            walk();
            h.pop();
        }
    };
    if (max_len > 0) walk();
    return worst;
}

}  // namespace seqpred
