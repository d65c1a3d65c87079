#ifndef DETERRENCE_SIMULATOR_HPP
#define DETERRENCE_SIMULATOR_HPP

// Agent population with per-agent Poisson opportunity counts. Victims are
// not sampled: each realised offence costs l in expectation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "behavior.hpp"
#include "distributions.hpp"
#include "welfare.hpp"

namespace deterrence {

enum class GammaMode { shared_mean, per_agent };

struct SimConfig {
    std::size_t n_agents = 1000;
    double delta_t = 1.0;
    double lambda_rate = 0.0;  // per-edge rate; each agent sees n_agents * lambda_rate * delta_t
    std::uint64_t seed = 0;
    GammaMode gamma_mode = GammaMode::shared_mean;
    int threads = 1;

    double expected_opportunities_per_agent() const {
        return static_cast<double>(n_agents) * lambda_rate * delta_t;
    }
    void validate() const {
        detail::require(n_agents >= 1, "SimConfig: n_agents must be >= 1");
        detail::require(delta_t > 0.0, "SimConfig: delta_t must be > 0");
        detail::require(lambda_rate >= 0.0, "SimConfig: lambda_rate must be >= 0");
    }
};

struct SimReport {
    std::array<std::size_t, 3> label_counts{};     // agents per PartitionLabel
    std::array<double, 3> label_welfare{};         // summed summands per label
    std::size_t n_informed = 0;
    std::size_t n_uninformed = 0;
    std::uint64_t opportunities = 0;
    std::uint64_t offenses = 0;
    double expected_opportunities = 0.0;           // n_agents * N lambda dt
    double detection = 0.0;                        // c_p p
    double welfare_per_capita = 0.0;
    double welfare_se = 0.0;
    std::optional<double> analytic_welfare;

    // Normalisation shared by the per-capita figure and its recomputation.
    double normaliser() const {
        return static_cast<double>(n_informed) * expected_opportunities / static_cast<double>(n_informed + n_uninformed);
    }
    double recomputed_welfare() const {
        return (label_welfare[0] + label_welfare[1] + label_welfare[2]) / normaliser() - detection;
    }
    bool agrees_with_analytic(double n_se = 3.0) const {
        return analytic_welfare && std::abs(welfare_per_capita - *analytic_welfare) <= n_se * welfare_se;
    }
};

inline std::vector<Agent> build_population(const PopulationModel& pop, const SimConfig& cfg) {
    pop.validate();
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::vector<Agent> agents(cfg.n_agents);
    for (auto& a : agents) {
        a.w = draw_wealth(pop.wealth, rng);
        a.k = draw_discount(pop.discount, rng);
        a.gamma = cfg.gamma_mode == GammaMode::per_agent ? draw_gamma(pop.gamma, rng) : pop.gamma.mu_gamma;
    }
    const auto n = static_cast<double>(cfg.n_agents);
    const auto n_uninformed = static_cast<std::size_t>(std::floor(pop.epsilon * n / (1.0 + pop.epsilon)));
    for (std::size_t i = cfg.n_agents - n_uninformed; i < cfg.n_agents; ++i) agents[i].informed = false;
    return agents;
}

namespace detail {

inline constexpr std::size_t kBlock = 4096;

struct BlockTally {
    std::array<std::size_t, 3> labels{};
    std::array<double, 3> welfare{};
    std::uint64_t opportunities = 0;
    std::uint64_t offenses = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
};

// Each block of agents owns a generator seeded from (seed, block index), so
// results do not depend on how blocks are spread over threads.
template <class Label, class Value>
SimReport run_blocks(const std::vector<Agent>& agents, const SimConfig& cfg, double detection, Label&& label_of,
                     Value&& value_of) {
    const std::size_t n = agents.size();
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    const double mean = cfg.expected_opportunities_per_agent();
    std::vector<BlockTally> tallies(n_blocks);

    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t b = first; b < n_blocks; b += stride) {
            std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(b + 1)));
            std::poisson_distribution<long long> poisson(mean > 0.0 ? mean : 1.0);
            BlockTally t;
            const std::size_t end = std::min(n, (b + 1) * kBlock);
            for (std::size_t i = b * kBlock; i < end; ++i) {
                const Agent& a = agents[i];
                const PartitionLabel lab = label_of(a);
                const auto li = static_cast<std::size_t>(lab);
                const long long count = mean > 0.0 ? poisson(rng) : 0;
                const double total = static_cast<double>(count) * value_of(a, lab);
                ++t.labels[li];
                t.welfare[li] += total;
                t.opportunities += static_cast<std::uint64_t>(count);
                if (lab != PartitionLabel::NonOffender) t.offenses += static_cast<std::uint64_t>(count);
                t.sum += total;
                t.sum_sq += total * total;
            }
            tallies[b] = t;
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, cfg.threads));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
    }

    SimReport rep;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& t : tallies) {
        for (int k = 0; k < 3; ++k) {
            rep.label_counts[k] += t.labels[k];
            rep.label_welfare[k] += t.welfare[k];
        }
        rep.opportunities += t.opportunities;
        rep.offenses += t.offenses;
        sum += t.sum;
        sum_sq += t.sum_sq;
    }
    for (const auto& a : agents) (a.informed ? rep.n_informed : rep.n_uninformed)++;
    rep.expected_opportunities = static_cast<double>(n) * mean;
    rep.detection = detection;
    if (rep.n_informed == 0 || mean <= 0.0) {
        rep.welfare_per_capita = -detection;
        return rep;
    }
    const double norm = rep.normaliser();
    rep.welfare_per_capita = sum / norm - detection;
    const double nd = static_cast<double>(n);
    const double var = n > 1 ? (sum_sq - sum * sum / nd) / (nd - 1.0) : 0.0;
    rep.welfare_se = std::sqrt(std::max(var, 0.0) * nd) / norm;
    return rep;
}

}  // namespace detail

inline SimReport simulate(const std::vector<Agent>& agents, const PenalStrategy& st, const CrimeParams& cr,
                          const CostParams& c, const SimConfig& cfg) {
    st.validate();
    auto label_of = [&](const Agent& a) { return classify(a, st, cr); };
    auto value_of = [&](const Agent& a, PartitionLabel lab) {
        switch (lab) {
            case PartitionLabel::NonOffender: return cr.l - cr.b * a.w;
            case PartitionLabel::FineChooser:
                return -st.p * punishment_social_cost(a.w, st.t, st.tau, st.r, PunishmentChoice::fine, cr, c);
            case PartitionLabel::PrisonChooser:
                break;
        }
        if (st.p == 0.0) return 0.0;
        return -st.p * punishment_social_cost(a.w, st.t, st.tau, st.r, PunishmentChoice::prison, cr, c);
    };
    return detail::run_blocks(agents, cfg, c.c_p * st.p, label_of, value_of);
}

// Fixed gain B replaces b w in the deterrence benefit; p is taken as 1 for
// classification while costs still scale with st.p.
inline SimReport burglary_simulate(const std::vector<Agent>& agents, const PenalStrategy& st, double gain,
                                   const CrimeParams& cr, const CostParams& c, const SimConfig& cfg) {
    st.validate();
    auto label_of = [&](const Agent& a) { return burglary_classify(a, st, gain); };
    auto value_of = [&](const Agent& a, PartitionLabel lab) {
        switch (lab) {
            case PartitionLabel::NonOffender: return cr.l - gain;
            case PartitionLabel::FineChooser: return -st.p * (c.c_f + cr.g * cr.s * a.w);
            case PartitionLabel::PrisonChooser: break;
        }
        const double cost = imprisonment_cost_Ci(st.t, st.tau, c) + cr.g * a.w * (cr.s + st.r * st.tau) -
                            cr.Lambda * st.tau * (cr.l - gain);
        return -st.p * cost;
    };
    return detail::run_blocks(agents, cfg, c.c_p * st.p, label_of, value_of);
}

// Label shares for burglary_classify. P(k < c w) = 1 - rho alpha E_{alpha+1}(c w_m / beta)
// under the Pareto x zero-inflated exponential density.
struct BurglaryFractions {
    double non_offender = 0.0;
    double fine = 0.0;
    double prison = 0.0;
};

inline BurglaryFractions burglary_fractions(const PopulationModel& pop, const PenalStrategy& st, double gain,
                                            double informed_share) {
    if (!(gain > 0.0)) throw DomainError("burglary_fractions: gain must be > 0");
    if (!(st.t > 0.0)) throw DomainError("burglary_fractions: linearised lines need t > 0");
    const double L = std::log1p(st.tau / st.t);
    auto below = [&](double slope) {
        const double x = slope * pop.wealth.w_m / pop.discount.beta;
        if (!(x > 0.0)) return 1.0 - pop.discount.rho;  // alpha E_{alpha+1}(0) = 1
        return 1.0 - pop.discount.rho * pop.wealth.alpha * exp_integral_E(pop.wealth.alpha + 1.0, x);
    };
    const double fine_all = below(st.r * L / st.f);
    BurglaryFractions out;
    const double q = informed_share;
    if (gain < st.f) {
        const double deterred = below(st.r * L / gain);  // contains the whole fine region
        out.non_offender = q * deterred;
        out.fine = (1.0 - q) * fine_all;
        out.prison = q * (1.0 - deterred) + (1.0 - q) * (1.0 - fine_all);
    } else {
        out.fine = fine_all;
        out.prison = 1.0 - fine_all;
    }
    return out;
}

// Quadrature welfare for the targets a strategy implies under shared gamma;
// empty when the strategy deters nobody.
inline std::optional<double> analytic_welfare(const PenalStrategy& st, const PopulationModel& pop,
                                              const CrimeParams& cr, const CostParams& c) {
    if (st.p == 0.0) return 0.0;
    const auto x = targets_from_strategy(st, cr, pop.gamma.mu_gamma);
    if (x.w0 < pop.wealth.w_m) return std::nullopt;
    return welfare_quadrature(x, pop, cr, c, st.tau).total;
}

}  // namespace deterrence

#endif
