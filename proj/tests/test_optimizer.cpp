#include <deterrence/optimizer.hpp>

#include <cmath>
#include <random>

#include <gtest/gtest.h>

using namespace deterrence;

namespace {

PopulationModel population(double eps = 0.1) {
    PopulationModel pop;
    pop.wealth = {2.5, 100.0};
    pop.discount = {0.66, 0.00431};
    pop.gamma = {0.61, 0.07};
    pop.epsilon = eps;
    return pop;
}

}  // namespace

TEST(ReducedObjective, Limits) {
    const auto pop = population();
    const CrimeParams cr{1.0, 0.2, 1000.0, 2.0, 0.0};
    const CostParams c{30, 20, 0, 0, 0, 2};
    const double a = pop.wealth.alpha, eps = pop.epsilon, p = 0.4;
    const double at_one = -p * c.c_f * (1 + eps) - a / (a - 1) * p * cr.g * cr.s * pop.wealth.w_m * (1 + eps) - c.c_p * p;
    EXPECT_NEAR(reduced_objective(1.0, p, pop, cr, c), at_one, 1e-10);
    EXPECT_NEAR(reduced_objective(1e-12, 0.0, pop, cr, c), cr.l - a / (a - 1) * cr.b * pop.wealth.w_m, 1e-6);
}

TEST(ReducedObjective, MatchesAsymptoticWelfareAtLargeKappa) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        auto pop = population(0.2 * u01(rng));
        const CrimeParams cr{1.0, 0.3 * u01(rng), 500.0 + 1000 * u01(rng), 1.2 + u01(rng), 0.0};
        const CostParams c{20 * u01(rng), 30 * u01(rng), 0, 0, 0, 2};
        const double v = 0.2 + 0.7 * u01(rng), p = 0.1 + 0.9 * u01(rng);
        StrategyTargets x{p, pop.wealth.w_m / v, 50.0 * pop.discount.beta, 1.0, 0.05};
        const double w = welfare_asymptotic(x, pop, cr, c, 1.0).total;
        EXPECT_NEAR(reduced_objective(v, p, pop, cr, c) / w, 1.0, 1e-3) << i;
    }
}

TEST(ConstraintCurves, InversePairAndEndpoints) {
    const auto pop = population();
    const CrimeParams cr{1.0, 0.2, 1000.0, 2.0, 0.0};
    const double r = 0.01;
    for (double v : {0.3, 0.5, 0.9, 1.0}) EXPECT_NEAR(v_critical(p_critical(v, pop, cr, r), pop, cr, r), v, 1e-8);
    const double beta = pop.discount.beta;
    EXPECT_NEAR(v_critical(1.0, pop, cr, r), beta * (cr.b - cr.s) / (2 * r), 1e-15);
    const double pmin = p_critical(1.0, pop, cr, r);
    EXPECT_NEAR(weighting_pi(pmin, pop.gamma.mu_gamma), cr.b * beta / (2 * r + cr.s * beta), 1e-10);
}

TEST(UnconstrainedV, Examples) {
    auto pop = population();
    const CrimeParams cr{1.0, 0.1, 1000.0, 2.0, 0.0};
    const CostParams c{0, 20, 0, 0, 0, 2};
    const auto v0 = unconstrained_v_opt(0.0, pop, cr, c);
    EXPECT_NEAR(v0.v, cr.b * pop.wealth.w_m / cr.l, 1e-15);
    EXPECT_LT(v0.v, 1.0);
    EXPECT_NEAR(unconstrained_v_opt(1.0, pop, cr, c).v, 0.8 * 100.0 / 1020.0, 1e-12);
    EXPECT_NEAR(unconstrained_v_opt(1.0, pop, cr, c).v, 0.0784, 5e-5);
    for (double p : {0.1, 0.5, 0.9}) EXPECT_NEAR(unconstrained_p_opt(unconstrained_v_opt(p, pop, cr, c).v, pop, cr, c), p, 1e-12);
    const CrimeParams heavy{1.0, 0.6, 1000.0, 2.0, 0.0};
    EXPECT_TRUE(unconstrained_v_opt(1.0, pop, heavy, c).degenerate);
}

TEST(VStar, MaxOfConstraintAndUnconstrained) {
    const auto pop = population();
    const CrimeParams cr{1.0, 0.1, 1000.0, 2.0, 0.0};
    const CostParams c{5, 20, 0, 0, 0, 2};
    const double r = 0.005;
    for (double p : {0.3, 0.6, 1.0}) {
        const double vc = v_critical(p, pop, cr, r), vo = unconstrained_v_opt(p, pop, cr, c).v;
        EXPECT_DOUBLE_EQ(v_star(p, pop, cr, c, r), std::min(1.0, std::max(vc, vo)));
        if (vc >= 1.0) continue;  // no feasible v
        // Grid argmax over the feasible interval.
        const int n = 10000;
        double best = -INFINITY, arg = 0;
        for (int i = 0; i <= n; ++i) {
            const double v = vc + (1.0 - vc) * i / n;
            const double o = reduced_objective(v, p, pop, cr, c);
            if (o > best) best = o, arg = v;
        }
        EXPECT_NEAR(v_star(p, pop, cr, c, r), arg, (1.0 - vc) / n + 1e-12) << p;
    }
}

TEST(VStar, PolynomialKernelPeak) {
    // x^a (b - c x) on [x0, inf) peaks at max(ab / (c (a + 1)), x0).
    const double a = 1.5, b = 2.0, cc = 0.7;
    for (double x0 : {0.5, 3.0}) {
        double best = -INFINITY, arg = 0;
        for (int i = 0; i <= 200000; ++i) {
            const double x = x0 + 10.0 * i / 200000;
            const double y = std::pow(x, a) * (b - cc * x);
            if (y > best) best = y, arg = x;
        }
        EXPECT_NEAR(arg, std::max(a * b / (cc * (a + 1)), x0), 1e-3);
    }
}

TEST(FStar, ConsistentWithVStar) {
    const auto pop = population();
    const CrimeParams cr{1.0, 0.1, 1000.0, 2.0, 0.0};
    const CostParams c{5, 20, 0, 0, 0, 2};
    for (double r : {0.005, 0.05}) {
        for (double p : {0.3, 0.6, 1.0}) {
            if (p < p_critical(1.0, pop, cr, r)) continue;
            const double pi = weighting_pi(p, pop.gamma.mu_gamma);
            const double w0 = pop.wealth.w_m / v_star(p, pop, cr, c, r);
            EXPECT_NEAR(f_star(p, pop, cr, c, r) / (w0 * (cr.b - pi * cr.s) / pi), 1.0, 1e-8) << r << " " << p;
        }
        const double second = (cr.l + c.c_f) * (cr.b - cr.s) / (cr.b - cr.g * cr.s);
        EXPECT_NEAR(f_star(1.0, pop, cr, c, r), std::min(2 * pop.wealth.w_m * r / pop.discount.beta, second), 1e-9);
    }
    EXPECT_DOUBLE_EQ(2 * pop.wealth.w_m * 0.05 / pop.discount.beta, thresholds(pop, cr, 0.05).fine_bound);
}

TEST(Optimize, PhaseFailureBelowThreshold) {
    const auto pop = population();
    const CrimeParams cr{1.0, 0.2, 1000.0, 2.0, 0.0};
    const double r_th = (cr.b - cr.s) * pop.discount.beta / 2.0;
    const auto res = optimize(pop, cr, CostParams{}, 0.9 * r_th);
    ASSERT_TRUE(std::holds_alternative<PhaseFailure>(res));
    EXPECT_DOUBLE_EQ(std::get<PhaseFailure>(res).r_threshold, r_th);
}

TEST(Optimize, SpecialCaseBranch) {
    // l below b w_m and cheap fines push p_o(1) above p_min.
    auto pop = population(0.0);
    const CrimeParams cr{1.0, 0.05, 20.0, 1.5, 0.0};
    const CostParams c{1, 1, 0, 0, 0, 2};
    const double r = 0.004;
    ASSERT_GE(unconstrained_p_opt(1.0, pop, cr, c), p_critical(1.0, pop, cr, r));
    const auto res = optimize(pop, cr, c, r);
    const auto& s = std::get<ReducedSolution>(res);
    EXPECT_EQ(s.branch, Branch::special_case);
    EXPECT_EQ(s.v_star, 1.0);
    EXPECT_NEAR(weighting_pi(s.p_star, pop.gamma.mu_gamma),
                cr.b * pop.discount.beta / (2 * r + cr.s * pop.discount.beta), 1e-10);
    EXPECT_DOUBLE_EQ(s.f_star, 2 * r * pop.wealth.w_m / pop.discount.beta);
}

TEST(Optimize, DecreasingInPAndMonotoneAlongTheUnconstrainedCurve) {
    const auto pop = population();
    const CrimeParams cr{1.0, 0.1, 1000.0, 2.0, 0.0};
    const CostParams c{5, 20, 0, 0, 0, 2};
    for (double v : {0.2, 0.5, 0.9})
        for (int i = 1; i < 1000; ++i) {
            const double p = i / 1000.0;
            EXPECT_LT(reduced_objective(v, p + 1e-3, pop, cr, c), reduced_objective(v, p, pop, cr, c));
        }
    const double r = 0.01;
    const double vmin = v_critical(1.0, pop, cr, r);
    double prev = -INFINITY;
    for (int i = 0; i <= 500; ++i) {
        const double v = vmin + (1.0 - vmin) * i / 500;
        const double po = unconstrained_p_opt(v, pop, cr, c);
        if (po < 0.0 || po > 1.0) continue;
        const double j = reduced_objective(v, po, pop, cr, c);
        EXPECT_GE(j, prev - 1e-9);
        prev = j;
    }
}

TEST(Optimize, VStarDominatesFeasibleGrid) {
    const auto pop = population();
    const CrimeParams cr{1.0, 0.1, 1000.0, 2.0, 0.0};
    const CostParams c{5, 20, 0, 0, 0, 2};
    const double r = 0.01;
    const double pmin = p_critical(1.0, pop, cr, r);
    for (int i = 1; i <= 100; ++i) {
        const double p = pmin + (1.0 - pmin) * i / 100;
        const double vc = v_critical(p, pop, cr, r);
        const double best = reduced_objective(v_star(p, pop, cr, c, r), p, pop, cr, c);
        for (int j = 0; j <= 1000; ++j) {
            const double v = vc + (1.0 - vc) * j / 1000;
            EXPECT_GE(best, reduced_objective(v, p, pop, cr, c) - 1e-9);
        }
    }
}

TEST(Optimize, SpecialCaseAndNumericBranchAgreeNearTheSwitch) {
    auto pop = population(0.0);
    CrimeParams cr{1.0, 0.05, 20.0, 1.5, 0.0};
    const CostParams c{1, 1, 0, 0, 0, 2};
    const double r = 0.004;
    const double pmin = p_critical(1.0, pop, cr, r);
    // Raise l until p_o(1) drops just below p_min.
    double lo = cr.l, hi = 5000.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        cr.l = mid;
        (unconstrained_p_opt(1.0, pop, cr, c) >= pmin ? lo : hi) = mid;
    }
    cr.l = lo;
    const auto special = std::get<ReducedSolution>(optimize(pop, cr, c, r));
    cr.l = hi * (1 + 1e-9);
    const auto numeric_branch = std::get<ReducedSolution>(optimize(pop, cr, c, r));
    EXPECT_EQ(special.branch, Branch::special_case);
    EXPECT_NE(numeric_branch.branch, Branch::special_case);
    EXPECT_NEAR(numeric_branch.p_star, special.p_star, 1e-4);
    EXPECT_NEAR(numeric_branch.objective, special.objective, 1e-4 * std::abs(special.objective));
}

TEST(GridOracle, FeasibleCellsAndStability) {
    const auto pop = population();
    const CrimeParams cr{1.0, 0.1, 1000.0, 2.0, 0.0};
    const CostParams c{5, 20, 0, 0, 0, 2};
    const double r = 0.01;
    const auto g1 = grid_oracle(pop, cr, c, r, 100);
    const auto g2 = grid_oracle(pop, cr, c, r, 200);
    ASSERT_TRUE(g1.found && g2.found);
    EXPECT_TRUE(phase_condition(g1.v, g1.p, pop, cr, r));
    EXPECT_LE(std::abs(g1.p - g2.p), 1.0 / 100);
    EXPECT_LE(std::abs(g1.v - g2.v), 1.0 / 100);
    const auto g4 = grid_oracle(pop, cr, c, r, 200, 4);
    EXPECT_EQ(g4.v, g2.v);
    EXPECT_EQ(g4.p, g2.p);
    const auto s = std::get<ReducedSolution>(optimize(pop, cr, c, r));
    EXPECT_LE(std::abs(s.p_star - g2.p), 1.0 / 200);
    EXPECT_LE(std::abs(s.v_star - g2.v), 1.0 / 200);
    EXPECT_THROW(grid_oracle(pop, cr, c, r, 1), DomainError);
}
