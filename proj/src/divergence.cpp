#include "seqpred/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "seqpred/errors.hpp"
#include "seqpred/rng.hpp"

namespace seqpred {

std::string kl_method_name(KlMethod m) {
    switch (m) {
        case KlMethod::exact_enumeration: return "exact";
        case KlMethod::identity: return "identity";
        case KlMethod::monte_carlo: return "monte_carlo";
    }
    return "?";
}

namespace {

void require_shared_alphabet(const ProcessMeasure& mu, const ProcessMeasure& rho) {
    if (mu.alphabet() != rho.alphabet())
        throw input_error("divergence needs both measures on the same alphabet");
}

}  // namespace

std::vector<KlEstimate> kl_exact_curve(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                                       int exact_cap) {
    require_shared_alphabet(mu, rho);
    checked_path_count(mu.alphabet(), n, exact_cap);
    const int size = mu.alphabet().size();

    // per_step[t] accumulates the mu-weighted conditional KL of step t+1 over
    // all mu-reachable prefixes of length t. Branches below an absolute-
    // continuity failure only feed horizons that are +inf anyway, so they are
    // pruned without affecting finite entries.
    std::vector<double> per_step(static_cast<std::size_t>(n), 0.0);
    int inf_from = n + 1;  // smallest horizon whose value is +inf

    History h(mu.alphabet());
    // One conditional buffer per depth: the recursion below a node must not
    // clobber the node's own view of its conditionals.
    std::vector<std::vector<double>> pmu(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(size)));
    std::vector<std::vector<double>> prho = pmu;

    std::function<void(double)> walk = [&](double log_mu) {
        const int depth = h.length();
        if (depth == n) return;
        auto& lmu = pmu[static_cast<std::size_t>(depth)];
        auto& lrho = prho[static_cast<std::size_t>(depth)];
        mu.next_log_probs(h, lmu);
        rho.next_log_probs(h, lrho);
        double term = 0.0;
        for (int a = 0; a < size; ++a) {
            const double lm = lmu[static_cast<std::size_t>(a)];
            if (lm == kNegInf) continue;
            const double lr = lrho[static_cast<std::size_t>(a)];
            if (lr == kNegInf) {
                inf_from = std::min(inf_from, depth + 1);
                continue;
            }
            term += std::exp(log_mu + lm) * (lm - lr);
        }
        per_step[static_cast<std::size_t>(depth)] += term;
        for (int a = 0; a < size; ++a) {
            const double lm = lmu[static_cast<std::size_t>(a)];
            if (lm == kNegInf) continue;
            if (lrho[static_cast<std::size_t>(a)] == kNegInf) continue;
            h.push(a);
            walk(log_mu + lm);
            h.pop();
        }
    };
    if (n > 0) walk(0.0);

    std::vector<KlEstimate> curve;
    curve.reserve(static_cast<std::size_t>(n));
    double running = 0.0;
    for (int m = 1; m <= n; ++m) {
        running += per_step[static_cast<std::size_t>(m - 1)];
        KlEstimate e;
        e.n = m;
        e.method = KlMethod::exact_enumeration;
        e.value_nats = m >= inf_from ? kInf : running;
        curve.push_back(e);
    }
    return curve;
}

KlEstimate kl_exact(const ProcessMeasure& mu, const ProcessMeasure& rho, int n, int exact_cap) {
    if (n == 0) return KlEstimate{0, 0.0, KlMethod::exact_enumeration, 0, 0.0};
    return kl_exact_curve(mu, rho, n, exact_cap).back();
}

KlEstimate kl_identity(const ProcessMeasure& mu, const ProcessMeasure& rho, int n, int exact_cap) {
    require_shared_alphabet(mu, rho);
    const std::uint64_t paths = checked_path_count(mu.alphabet(), n, exact_cap);
    double sum = 0.0;
    bool diverged = false;
    History h(mu.alphabet());
    for (std::uint64_t idx = 0; idx < paths; ++idx) {
        decode_string(h, idx, n);
        const double lm = mu.log_marginal(h);
        if (lm == kNegInf) continue;
        const double lr = rho.log_marginal(h);
        if (lr == kNegInf) {
            diverged = true;
            break;
        }
        sum += std::exp(lm) * (lm - lr);
    }
    KlEstimate e;
    e.n = n;
    e.method = KlMethod::identity;
    e.value_nats = diverged ? kInf : sum;
    return e;
}

KlEstimate kl_monte_carlo(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                          long long samples, std::uint64_t seed) {
    require_shared_alphabet(mu, rho);
    if (n < 0) throw input_error("horizon must be nonnegative");
    if (samples < 1) throw input_error("monte carlo needs at least one sample");
    const int size = mu.alphabet().size();

    bool diverged = false;
    // Welford accumulation of per-path values.
    double mean = 0.0;
    double m2 = 0.0;
    std::vector<double> pmu(static_cast<std::size_t>(size));
    std::vector<double> prho(static_cast<std::size_t>(size));

    for (long long i = 0; i < samples && !diverged; ++i) {
        std::mt19937_64 g(substream_seed(seed, static_cast<std::uint64_t>(i)));
        auto mu_cur = mu.cursor();
        auto rho_cur = rho.cursor();
        double path = 0.0;
        for (int t = 0; t < n; ++t) {
            mu_cur->next_log_probs(pmu);
            rho_cur->next_log_probs(prho);
            double term = 0.0;
            for (int a = 0; a < size; ++a) {
                const double lm = pmu[static_cast<std::size_t>(a)];
                if (lm == kNegInf) continue;
                const double lr = prho[static_cast<std::size_t>(a)];
                if (lr == kNegInf) {
                    diverged = true;
                    break;
                }
                term += std::exp(lm) * (lm - lr);
            }
            if (diverged) break;
            path += term;
            // Draw the next symbol from mu's conditional.
            const double u = uniform01(g);
            double acc = 0.0;
            Symbol picked = -1;
            for (int a = 0; a < size; ++a) {
                const double p = std::exp(pmu[static_cast<std::size_t>(a)]);
                if (p <= 0.0) continue;
                acc += p;
                picked = a;
                if (u < acc) break;
            }
            mu_cur->advance(picked);
            rho_cur->advance(picked);
        }
        const double delta = path - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (path - mean);
    }

    KlEstimate e;
    e.n = n;
    e.method = KlMethod::monte_carlo;
    e.mc_samples = samples;
    if (diverged) {
        e.value_nats = kInf;
        e.std_error = kInf;
    } else {
        e.value_nats = mean;
        e.std_error =
            samples > 1 ? std::sqrt(std::max(0.0, m2) / (static_cast<double>(samples) *
                                                         static_cast<double>(samples - 1)))
                        : 0.0;
    }
    return e;
}

std::vector<TvEstimate> tv_ladder(const ProcessMeasure& mu, const ProcessMeasure& rho,
                                  const History& conditioning, int max_horizon, int exact_cap) {
    require_shared_alphabet(mu, rho);
    if (max_horizon < 1) throw input_error("horizon must be at least 1");
    checked_path_count(mu.alphabet(), max_horizon, exact_cap);
    const double base_mu = mu.log_marginal(conditioning);
    const double base_rho = rho.log_marginal(conditioning);
    if (base_mu == kNegInf || base_rho == kNegInf)
        throw undefined_conditional_error("conditioning history has zero probability");

    const int size = mu.alphabet().size();
    std::vector<double> level_sum(static_cast<std::size_t>(max_horizon), 0.0);
    History h(conditioning);

    // Walks the continuation tree on marginals alone, so branches where one
    // measure has died stay well-defined; both-dead branches carry no mass.
    std::function<void(int)> walk = [&](int depth) {
        if (depth == max_horizon) return;
        for (int a = 0; a < size; ++a) {
            h.push(a);
            const double lm = mu.log_marginal(h);
            const double lr = rho.log_marginal(h);
            if (lm == kNegInf && lr == kNegInf) {
                h.pop();
                continue;
            }
            const double pm = lm == kNegInf ? 0.0 : std::exp(lm - base_mu);
            const double pr = lr == kNegInf ? 0.0 : std::exp(lr - base_rho);
            level_sum[static_cast<std::size_t>(depth)] += std::abs(pm - pr);
            walk(depth + 1);
            h.pop();
        }
    };
    walk(0);

    std::vector<TvEstimate> out;
    out.reserve(static_cast<std::size_t>(max_horizon));
    for (int j = 1; j <= max_horizon; ++j)
        out.push_back(TvEstimate{j, 0.5 * level_sum[static_cast<std::size_t>(j - 1)]});
    return out;
}

TvEstimate tv_horizon(const ProcessMeasure& mu, const ProcessMeasure& rho,
                      const History& conditioning, int horizon, int exact_cap) {
    return tv_ladder(mu, rho, conditioning, horizon, exact_cap).back();
}

JensenCheck jensen_gap(const ProcessMeasure& mu, const ProcessMeasure& rho,
                       const std::vector<History>& subset) {
    require_shared_alphabet(mu, rho);
    if (subset.empty()) throw input_error("jensen check needs a nonempty subset");
    const int n = subset.front().length();
    for (const auto& h : subset)
        if (h.length() != n || h.alphabet() != mu.alphabet())
            throw input_error("jensen subset must hold same-length histories over the measure's alphabet");

    double mu_mass = 0.0;
    double rho_mass = 0.0;
    double lhs = 0.0;
    bool lhs_inf = false;
    for (const auto& h : subset) {
        const double lm = mu.log_marginal(h);
        const double lr = rho.log_marginal(h);
        if (lr != kNegInf) rho_mass += std::exp(lr);
        if (lm == kNegInf) continue;
        mu_mass += std::exp(lm);
        if (lr == kNegInf)
            lhs_inf = true;
        else
            lhs += std::exp(lm) * (lm - lr);
    }
    if (!(mu_mass > 0.0)) throw input_error("jensen check requires mu(A) > 0");

    JensenCheck out;
    out.lhs = lhs_inf ? kInf : lhs;
    out.rhs = rho_mass > 0.0 ? mu_mass * (std::log(mu_mass) - std::log(rho_mass)) : kInf;
    out.holds = out.lhs >= out.rhs - 1e-9;
    return out;
}

}  // namespace seqpred
