#include "seqpred/cover.hpp"

#include <cmath>
#include <stdexcept>

#include "seqpred/errors.hpp"

namespace seqpred {

namespace {

void require_class(std::span<const std::shared_ptr<const ProcessMeasure>> class_members,
                   const Alphabet& alphabet) {
    if (class_members.empty()) throw input_error("class must hold at least one measure");
    for (const auto& m : class_members) {
        if (!m) throw input_error("class contains a null measure");
        if (m->alphabet() != alphabet) throw input_error("class members must share the alphabet");
    }
}

}  // namespace

std::uint64_t DominanceSet::member_count() const {
    std::uint64_t c = 0;
    for (std::uint8_t b : member) c += b;
    return c;
}

DominanceSet build_dominance_set(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                                 int exact_cap) {
    if (mu.alphabet() != rho.alphabet())
        throw input_error("dominance set needs both measures on the same alphabet");
    if (n < 1) throw input_error("dominance sets are defined for horizons n >= 1");
    const std::uint64_t paths = checked_path_count(mu.alphabet(), n, exact_cap);
    const double log_n = std::log(static_cast<double>(n));

    DominanceSet set;
    set.n = n;
    set.member.assign(paths, 0);
    History h(mu.alphabet());
    for (std::uint64_t idx = 0; idx < paths; ++idx) {
        decode_string(h, idx, n);
        const double lm = mu.log_marginal(h);
        const double lr = rho.log_marginal(h);
        // mu(x) >= rho(x)/n; a rho-null string is claimed by every measure.
        const bool in = lr == kNegInf || (lm != kNegInf && lm >= lr - log_n);
        if (in) {
            set.member[idx] = 1;
            if (lm != kNegInf) set.mu_mass += std::exp(lm);
            if (lr != kNegInf) set.rho_mass += std::exp(lr);
        } else if (lm != kNegInf) {
            set.complement_mu_mass += std::exp(lm);
        }
    }
    if (set.complement_mu_mass > 1.0 / n + 1e-12)
        throw std::logic_error("mass bound violated: mu(complement) = " +
                               std::to_string(set.complement_mu_mass) + " > 1/" + std::to_string(n));
    return set;
}

CoverResult greedy_cover(std::span<const std::shared_ptr<const ProcessMeasure>> class_members,
                         const ProcessMeasure& rho, int n, int exact_cap) {
    require_class(class_members, rho.alphabet());
    const std::uint64_t paths = checked_path_count(rho.alphabet(), n, exact_cap);

    std::vector<double> rho_mass(paths);
    History h(rho.alphabet());
    for (std::uint64_t idx = 0; idx < paths; ++idx) {
        decode_string(h, idx, n);
        const double lr = rho.log_marginal(h);
        rho_mass[idx] = lr == kNegInf ? 0.0 : std::exp(lr);
    }

    std::vector<std::vector<std::uint8_t>> sets;
    sets.reserve(class_members.size());
    for (const auto& m : class_members)
        sets.push_back(build_dominance_set(*m, rho, n, exact_cap).member);

    CoverResult result;
    result.n = n;
    std::vector<std::uint8_t> covered(paths, 0);
    double covered_mass = 0.0;
    while (true) {
        int best = -1;
        double best_mass = 0.0;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            double residual = 0.0;
            for (std::uint64_t idx = 0; idx < paths; ++idx)
                if (sets[i][idx] && !covered[idx]) residual += rho_mass[idx];
            if (residual > best_mass) {
                best_mass = residual;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;
        for (std::uint64_t idx = 0; idx < paths; ++idx)
            if (sets[static_cast<std::size_t>(best)][idx]) covered[idx] = 1;
        covered_mass += best_mass;
        CoverRound round;
        round.component = best;
        round.claimed_rho_mass = best_mass;
        round.cumulative_rho_mass = covered_mass;
        round.cumulative = covered;
        result.rounds.push_back(std::move(round));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Regularizers

std::string regularizer_name(RegularizerKind k) {
    return k == RegularizerKind::uniform ? "uniform" : "class";
}

ClassRegularizer build_class_regularizer(
    std::span<const std::shared_ptr<const ProcessMeasure>> class_members, int max_horizon,
    int exact_cap) {
    if (class_members.empty()) throw input_error("class must hold at least one measure");
    const Alphabet alphabet = class_members.front()->alphabet();
    require_class(class_members, alphabet);
    if (max_horizon < 1) throw input_error("regularizer needs max_horizon >= 1");

    ClassRegularizer reg(alphabet);
    reg.log_horizon_weights_ = WeightScheme::inverse_square().log_weights(max_horizon);
    reg.support_sizes_.resize(static_cast<std::size_t>(max_horizon));

    std::vector<double> flat_weights(class_members.size(), 0.0);
    History h(alphabet);
    for (int k = 1; k <= max_horizon; ++k) {
        const std::uint64_t paths = checked_path_count(alphabet, k, exact_cap);
        std::vector<std::uint64_t> argmax_hits(class_members.size(), 0);
        std::uint64_t supported = 0;
        for (std::uint64_t idx = 0; idx < paths; ++idx) {
            decode_string(h, idx, k);
            int best = -1;
            double best_log = kNegInf;
            for (std::size_t i = 0; i < class_members.size(); ++i) {
                const double lm = class_members[i]->log_marginal(h);
                if (lm != kNegInf && lm > best_log) {
                    best_log = lm;
                    best = static_cast<int>(i);
                }
            }
            if (best < 0) continue;  // no member supports this string
            ++supported;
            ++argmax_hits[static_cast<std::size_t>(best)];
        }
        reg.support_sizes_[static_cast<std::size_t>(k - 1)] = supported;
        const double wk = std::exp(reg.log_horizon_weights_[static_cast<std::size_t>(k - 1)]);
        for (std::size_t i = 0; i < class_members.size(); ++i)
            flat_weights[i] += wk * static_cast<double>(argmax_hits[i]) / static_cast<double>(supported);
    }

    std::vector<std::shared_ptr<const ProcessMeasure>> used;
    std::vector<double> used_weights;
    for (std::size_t i = 0; i < class_members.size(); ++i) {
        if (flat_weights[i] > 0.0) {
            used.push_back(class_members[i]);
            used_weights.push_back(flat_weights[i]);
        }
    }
    reg.blend_ = std::make_shared<MixturePredictor>(std::move(used), std::move(used_weights));
    return reg;
}

// ---------------------------------------------------------------------------
// Composite predictor

CoverPredictor build_cover_predictor(std::vector<std::shared_ptr<const ProcessMeasure>> class_members,
                                     std::shared_ptr<const ProcessMeasure> rho, int max_horizon,
                                     const WeightScheme& scheme, RegularizerKind regularizer,
                                     int exact_cap) {
    if (!rho) throw input_error("reference predictor is null");
    require_class(class_members, rho->alphabet());
    if (max_horizon < 1) throw input_error("cover predictor needs max_horizon >= 1");
    if (!scheme.subexponential())
        throw input_error("horizon weights must decay subexponentially (-ln w_n = o(n)); "
                          "the inverse-square rule qualifies, " +
                          scheme.name() + " does not");

    CoverPredictor nu(rho->alphabet(), scheme);
    nu.class_members_ = std::move(class_members);
    nu.rho_ = std::move(rho);
    nu.regularizer_kind_ = regularizer;
    nu.log_horizon_weights_ = scheme.log_weights(max_horizon);

    std::vector<double> flat_weights(nu.class_members_.size(), 0.0);
    for (int n = 1; n <= max_horizon; ++n) {
        CoverResult cover = greedy_cover(nu.class_members_, *nu.rho_, n, exact_cap);
        const double wn = std::exp(nu.log_horizon_weights_[static_cast<std::size_t>(n - 1)]);
        std::vector<double> log_wk = scheme.log_weights(cover.round_count());
        for (int k = 1; k <= cover.round_count(); ++k) {
            const auto& round = cover.rounds[static_cast<std::size_t>(k - 1)];
            flat_weights[static_cast<std::size_t>(round.component)] +=
                0.5 * wn * std::exp(log_wk[static_cast<std::size_t>(k - 1)]);
        }
        nu.covers_.push_back(std::move(cover));
        nu.log_cover_weights_.push_back(std::move(log_wk));
    }

    if (regularizer == RegularizerKind::uniform)
        nu.regularizer_ = std::make_shared<UniformMeasure>(nu.alphabet());
    else
        nu.regularizer_ = std::make_shared<ClassRegularizer>(
            build_class_regularizer(nu.class_members_, max_horizon, exact_cap));

    std::vector<std::shared_ptr<const ProcessMeasure>> flat_components{nu.regularizer_};
    std::vector<double> weights{0.5};
    for (std::size_t i = 0; i < nu.class_members_.size(); ++i) {
        if (flat_weights[i] > 0.0) {
            flat_components.push_back(nu.class_members_[i]);
            weights.push_back(flat_weights[i]);
        }
    }
    nu.flat_ = std::make_shared<MixturePredictor>(std::move(flat_components), std::move(weights));
    return nu;
}

double CoverPredictor::lower_bound_log_slack(int n, int exact_cap) const {
    if (n < 1 || n > max_horizon()) throw input_error("horizon outside the built range");
    const std::uint64_t paths = checked_path_count(alphabet(), n, exact_cap);
    const CoverResult& cov = cover(n);
    const double log_half = std::log(0.5);
    const double log_n = std::log(static_cast<double>(n));
    const double log_wn = log_horizon_weight(n);

    std::vector<double> log_nu(paths);
    std::vector<double> log_rho(paths);
    History h(alphabet());
    for (std::uint64_t idx = 0; idx < paths; ++idx) {
        decode_string(h, idx, n);
        log_nu[idx] = log_marginal(h);
        log_rho[idx] = rho_->log_marginal(h);
    }

    double min_slack = kInf;
    for (int k = 1; k <= cov.round_count(); ++k) {
        const auto& round = cov.rounds[static_cast<std::size_t>(k - 1)];
        const double log_bound_coeff = log_half + log_wn + log_cover_weight(n, k) - log_n;
        for (std::uint64_t idx = 0; idx < paths; ++idx) {
            if (!round.cumulative[idx]) continue;
            if (log_rho[idx] == kNegInf) continue;  // bound is vacuous on rho-null strings
            const double slack = log_nu[idx] - (log_bound_coeff + log_rho[idx]);
            if (slack < min_slack) min_slack = slack;
        }
    }
    return min_slack;
}

std::vector<std::shared_ptr<const ProcessMeasure>> bernoulli_grid(int points) {
    if (points < 2) throw input_error("bernoulli grid needs at least two points");
    std::vector<std::shared_ptr<const ProcessMeasure>> grid;
    grid.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid.push_back(std::make_shared<BernoulliMeasure>(static_cast<double>(i) / (points - 1)));
    return grid;
}

}  // namespace seqpred
