#include <deterrence/welfare.hpp>

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

using namespace deterrence;

namespace {

PopulationModel population(double alpha = 2.5, double rho = 0.66, double eps = 0.1) {
    PopulationModel pop;
    pop.wealth = {alpha, 100.0};
    pop.discount = {rho, 0.00431};
    pop.gamma = {0.61, 0.07};
    pop.epsilon = eps;
    return pop;
}

StrategyTargets targets(const PopulationModel& pop, double v, double kappa0, double t = 5.0, double p = 0.5,
                        double r = 0.05) {
    StrategyTargets x;
    x.p = p;
    x.r = r;
    x.t = t;
    x.w0 = pop.wealth.w_m / v;
    x.k0 = kappa0 * pop.discount.beta;
    return x;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Costs, ImprisonmentCost) {
    CostParams c{0, 0, 10, 0, 1, 2};
    EXPECT_DOUBLE_EQ(imprisonment_cost_Ci(1.0, 5.0, c), 15.0);
    EXPECT_DOUBLE_EQ(imprisonment_cost_Ci(77.0, 5.0, c), 15.0);
    EXPECT_DOUBLE_EQ(imprisonment_cost_Ci(1.0, 10.0, c) - imprisonment_cost_Ci(1.0, 5.0, c), 5.0);
    c.c_t = 8.0;
    EXPECT_DOUBLE_EQ(imprisonment_cost_Ci(4.0, 5.0, c), 16.0);
    EXPECT_THROW(imprisonment_cost_Ci(0.0, 5.0, c), DomainError);
}

TEST(Costs, PunishmentSocialCost) {
    const CostParams c{0, 20, 10, 8, 1, 2};
    const CrimeParams cr{1.0, 0.5, 1000.0, 2.0, 0.0};
    EXPECT_DOUBLE_EQ(punishment_social_cost(100.0, 1.0, 5.0, 0.05, PunishmentChoice::fine, cr, c), 120.0);
    EXPECT_DOUBLE_EQ(punishment_social_cost(100.0, 9.0, 50.0, 0.05, PunishmentChoice::fine, cr, c), 120.0);
    const double p1 = punishment_social_cost(100.0, 4.0, 5.0, 0.05, PunishmentChoice::prison, cr, c);
    const double p2 = punishment_social_cost(100.0, 4.0, 10.0, 0.05, PunishmentChoice::prison, cr, c);
    const double p3 = punishment_social_cost(100.0, 4.0, 15.0, 0.05, PunishmentChoice::prison, cr, c);
    EXPECT_NEAR(p3 - p2, p2 - p1, 1e-12);
    EXPECT_DOUBLE_EQ(p1, 16.0 + 2.0 * 100.0 * (0.5 + 0.05 * 5.0));
}

TEST(Welfare, J0Examples) {
    auto pop = population(2.0, 0.66, 0.0);
    CrimeParams cr{1.0, 0.0, 1000.0, 1.5, 0.0};
    const CostParams c{};
    const auto x = targets(pop, 0.5, 1.0);
    const double tau = 10.0;
    EXPECT_NEAR(welfare_closed_form(x, pop, cr, c, tau).j0, 492.18, 5e-3);
    EXPECT_LT(rel(welfare_quadrature(x, pop, cr, c, tau).j0, welfare_closed_form(x, pop, cr, c, tau).j0), 1e-9);

    const auto edge = targets(pop, 1.0, 3.0);
    EXPECT_EQ(welfare_quadrature(edge, pop, cr, c, tau).j0, 0.0);
    EXPECT_EQ(welfare_closed_form(edge, pop, cr, c, tau).j0, 0.0);
    EXPECT_EQ(welfare_asymptotic(edge, pop, cr, c, tau).j0, 0.0);
}

TEST(Welfare, FullDeterrenceLimit) {
    auto pop = population(2.5, 0.66, 0.0);
    CrimeParams cr{1.0, 0.0, 1000.0, 1.5, 0.0};
    auto x = targets(pop, 1e-6, 200.0, 5.0, 0.0);
    const auto w = welfare_quadrature(x, pop, cr, CostParams{}, 10.0);
    const double limit = cr.l - pop.wealth.alpha / (pop.wealth.alpha - 1.0) * cr.b * pop.wealth.w_m;
    EXPECT_NEAR(w.total, limit, 1e-4 * std::abs(limit));
}

TEST(Welfare, DegenerateBelowMinimumWealth) {
    auto pop = population();
    auto x = targets(pop, 1.5, 5.0);
    EXPECT_THROW(welfare_quadrature(x, pop, CrimeParams{}, CostParams{}, 1.0), DegenerateStrategy);
    EXPECT_THROW(welfare_closed_form(x, pop, CrimeParams{}, CostParams{}, 1.0), DegenerateStrategy);
}

TEST(Welfare, J1NoDiscounterReduction) {
    auto pop = population(2.5, 0.0, 0.0);
    CrimeParams cr{1.0, 0.3, 1000.0, 1.8, 0.0};
    CostParams c{5, 20, 0, 0, 0, 2};
    const double v = 0.4;
    const auto x = targets(pop, v, 4.0);
    const double a = pop.wealth.alpha;
    const double expect = c.c_f * std::pow(v, a) + cr.g * cr.s * a / (a - 1.0) * std::pow(v, a - 1.0) * pop.wealth.w_m;
    EXPECT_LT(rel(welfare_closed_form(x, pop, cr, c, 10.0).j1, expect), 1e-12);
    EXPECT_LT(rel(welfare_quadrature(x, pop, cr, c, 10.0).j1, expect), 1e-9);
}

TEST(Welfare, TotalRecomputesFromParts) {
    auto pop = population();
    CrimeParams cr{1.0, 0.3, 1000.0, 1.8, 0.01};
    CostParams c{50, 20, 10, 100, 1, 2};
    const auto x = targets(pop, 0.4, 6.0, 3.0, 0.7, 0.04);
    for (const auto& w : {welfare_quadrature(x, pop, cr, c, 12.0), welfare_closed_form(x, pop, cr, c, 12.0),
                          welfare_asymptotic(x, pop, cr, c, 12.0)}) {
        EXPECT_EQ(w.total, w.j0 - x.p * (w.j1 + w.j2) - c.c_p * x.p);
        EXPECT_EQ(w.detection, c.c_p * x.p);
    }
}

// The same draw ranges as the tier-agreement property; the acceptance run uses 100 draws.
TEST(Welfare, TiersAgreeOnRandomDraws) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(1.2, 4.0), uv(0.05, 0.95), uk(0.1, 20.0), u01(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        auto pop = population(ua(rng), 0.2 + 0.8 * u01(rng), 0.3 * u01(rng));
        CrimeParams cr{1.0, 0.5 * u01(rng), 500.0 + 1000.0 * u01(rng), 1.1 + u01(rng), 0.01 * u01(rng)};
        CostParams c{10 * u01(rng), 50 * u01(rng), 20 * u01(rng), 100 * u01(rng), u01(rng), 2};
        const auto x = targets(pop, uv(rng), uk(rng), 0.5 + 20 * u01(rng), 0.1 + 0.9 * u01(rng), 0.01 + 0.1 * u01(rng));
        const double tau = 1.0 + 50.0 * u01(rng);
        const auto q = welfare_quadrature(x, pop, cr, c, tau);
        const auto cf = welfare_closed_form(x, pop, cr, c, tau);
        EXPECT_LE(rel(cf.j0, q.j0), 1e-9) << i;
        EXPECT_LE(rel(cf.j1, q.j1), 1e-6) << i;
        EXPECT_LE(std::abs(cf.j2 - q.j2), 1e-6 * std::max(std::abs(q.j2), std::abs(q.j1))) << i;
    }
}

// The uninformed term converges like 1/(v kappa0), so the sweep runs well past 50.
TEST(Welfare, AsymptoticConvergesToClosedForm) {
    auto pop = population(2.5, 0.66, 0.1);
    CrimeParams cr{1.0, 0.3, 1000.0, 1.8, 0.0};
    CostParams c{5, 20, 10, 100, 1, 2};
    std::vector<double> d1, d2;
    for (double kappa : {5.0, 50.0, 500.0}) {
        const auto x = targets(pop, 0.6, kappa);
        const auto cf = welfare_closed_form(x, pop, cr, c, 10.0);
        const auto as = welfare_asymptotic(x, pop, cr, c, 10.0);
        EXPECT_EQ(cf.j0, as.j0);
        d1.push_back(std::abs(as.j1 / cf.j1 - 1.0));
        d2.push_back(std::abs(as.j2 / cf.j2 - 1.0));
    }
    EXPECT_LT(d1[1], d1[0]);
    EXPECT_LT(d1[2], d1[1] + 1e-15);
    EXPECT_LT(d1[2], 1e-6);
    EXPECT_LT(d2[1], d2[0]);
    EXPECT_LT(d2[2], d2[1]);
    EXPECT_LT(d2[2], 0.02);
}

TEST(Welfare, NonIncreasingInEveryCost) {
    auto pop = population();
    CrimeParams cr{1.0, 0.3, 1000.0, 1.8, 0.0};
    const CostParams base{10, 20, 10, 100, 1, 2};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> bump(0.0, 50.0), uv(0.1, 0.9), uk(0.5, 15.0);
    for (int i = 0; i < 20; ++i) {
        const auto x = targets(pop, uv(rng), uk(rng), 4.0, 0.6);
        const double w = welfare_closed_form(x, pop, cr, base, 8.0).total;
        for (double CostParams::*field : {&CostParams::c_p, &CostParams::c_f, &CostParams::c_0, &CostParams::c_t,
                                          &CostParams::c_tau}) {
            CostParams c = base;
            c.*field += bump(rng);
            EXPECT_LE(welfare_closed_form(x, pop, cr, c, 8.0).total, w);
            EXPECT_LE(welfare_quadrature(x, pop, cr, c, 8.0).total, welfare_quadrature(x, pop, cr, base, 8.0).total);
        }
    }
}

TEST(DelayOptimum, KernelMinimum) {
    // J2 is A0 + a/t + b t in t exactly, so the numeric minimiser sits at sqrt(a/b).
    auto pop = population();
    CrimeParams cr{1.0, 0.0, 1000.0, 1.5, 0.0};
    CostParams c{0, 0, 0, 50, 1, 2};
    const auto d = optimal_t_tau(10.0, pop, cr, c, 1.0, 0.5, 0.05);
    ASSERT_TRUE(std::isfinite(d.t_kernel));
    EXPECT_NEAR(d.t / d.t_kernel, 1.0, 1e-5);
    EXPECT_FALSE(d.at_search_boundary);
    // Value check: 2 sqrt(ab) above the t-independent part.
    const double k0 = 10.0 * pop.discount.beta;
    StrategyTargets x{1.0, pop.wealth.w_m / 0.5, k0, d.t, 0.05};
    EXPECT_NEAR(welfare_closed_form(x, pop, cr, c, d.tau).j2 / d.j2_min, 1.0, 1e-12);
    for (double f : {0.5, 2.0}) {
        x.t = d.t * f;
        EXPECT_GT(welfare_closed_form(x, pop, cr, c, tau_for_target(k0, x.t, d.psi)).j2, d.j2_min);
    }
}

// The e^(-v kappa0) decay comes from the uninformed copy, so epsilon > 0.
TEST(DelayOptimum, AsymptoticSlopes) {
    auto pop = population(2.5, 0.66, 0.1);
    CrimeParams cr{1.0, 0.0, 1000.0, 1.5, 0.0};
    CostParams c{0, 0, 0, 1e14, 1, 2};
    const double r = 2.0 * pop.discount.beta, v = 0.6;
    std::vector<double> xs, lt, lj;
    for (double kappa = 10.0; kappa <= 40.0; kappa += 2.0) {
        const auto d = optimal_t_tau(kappa, pop, cr, c, 1.0, v, r);
        xs.push_back(kappa);
        lt.push_back(std::log(d.t));
        lj.push_back(std::log(kappa * d.j2_min));
    }
    auto slope = [&](const std::vector<double>& y) {
        const double n = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += y[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * y[i];
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const auto d = optimal_t_tau(20.0, pop, cr, c, 1.0, v, r);
    EXPECT_NEAR(slope(lt) / d.log_t_slope, 1.0, 0.05);
    EXPECT_NEAR(slope(lj) / d.log_j2_slope, 1.0, 0.05);
}

TEST(DelayOptimum, DecayFollowsPhaseCondition) {
    auto pop = population(2.5, 0.66, 0.1);
    CrimeParams cr{1.0, 0.0, 1000.0, 1.5, 0.0};
    CostParams c{0, 0, 0, 1e40, 1, 2};
    const double r = 2.0 * pop.discount.beta;  // v_c(1) = 1/4
    for (double v : {0.6, 0.1}) {
        const bool decays = phase_condition(v, 1.0, pop, cr, r);
        EXPECT_EQ(decays, v > 0.25);
        const double j10 = optimal_t_tau(10.0, pop, cr, c, 1.0, v, r).j2_min;
        const double j20 = optimal_t_tau(20.0, pop, cr, c, 1.0, v, r).j2_min;
        const double j40 = optimal_t_tau(40.0, pop, cr, c, 1.0, v, r).j2_min;
        if (decays) {
            EXPECT_LT(j40, j20);
            EXPECT_LT(j20, j10);
        } else {
            EXPECT_GT(j40, j20);
            EXPECT_GT(j20, j10);
        }
    }
}

TEST(Thresholds, Examples) {
    auto pop = population();
    CrimeParams cr{1.0, 0.3, 1000.0, 1.5, 0.0};
    const auto th = thresholds(pop, cr, 0.0505);
    EXPECT_NEAR(th.fine_bound / pop.wealth.w_m, 23.4, 0.05);
    EXPECT_DOUBLE_EQ(th.r_threshold, 0.7 * pop.discount.beta / 2.0);
    pop.wealth.w_m *= 3.0;
    EXPECT_NEAR(thresholds(pop, cr, 0.0505).fine_bound, 3.0 * th.fine_bound, 1e-9);
    cr.s = cr.b;
    EXPECT_EQ(thresholds(pop, cr, 0.0505).r_threshold, 0.0);
}

TEST(PhaseCondition, SatisfiableIffHarshEnough) {
    auto pop = population();
    CrimeParams cr{1.0, 0.3, 1000.0, 1.5, 0.0};
    const double r_th = thresholds(pop, cr, 1.0).r_threshold;
    auto satisfiable = [&](double r) {
        for (int i = 1; i <= 200; ++i)
            for (int j = 1; j <= 200; ++j)
                if (phase_condition(i / 200.0, j / 200.0, pop, cr, r)) return true;
        return false;
    };
    EXPECT_TRUE(satisfiable(1.05 * r_th));
    EXPECT_FALSE(satisfiable(0.95 * r_th));
    EXPECT_TRUE(phase_condition(1e-6, 0.01, pop, cr, 1e9));
    EXPECT_DOUBLE_EQ(critical_v(1.0, pop, cr, 2.0 * r_th), 0.5);
}
