#include <deterrence/behavior.hpp>

#include <cmath>
#include <random>

#include <gtest/gtest.h>

using namespace deterrence;

TEST(DiscountedDisutility, Examples) {
    EXPECT_DOUBLE_EQ(discounted_disutility(0.0, 0.05, 24.0, 48.0), -0.05 * 48.0);
    EXPECT_NEAR(discounted_disutility(1e-12, 0.05, 24.0, 48.0), -0.05 * 48.0, 1e-8);
    EXPECT_NEAR(discounted_disutility(1.0, 1.0, 0.0, std::exp(1.0) - 1.0), -1.0, 1e-15);
    EXPECT_NEAR(discounted_disutility(0.005, 0.05, 24.0, 48.0), -1.9416, 1e-4);
}

TEST(DiscountedDisutility, MagnitudeDecreasesInKAndVanishes) {
    double prev = std::abs(discounted_disutility(0.0, 0.05, 24.0, 48.0));
    for (int i = 1; i <= 1000; ++i) {
        const double k = 1e-4 * std::pow(1.02, i);
        const double m = std::abs(discounted_disutility(k, 0.05, 24.0, 48.0));
        EXPECT_LT(m, prev) << k;
        prev = m;
    }
    EXPECT_LT(std::abs(discounted_disutility(1e12, 0.05, 24.0, 48.0)), 1e-10);
}

TEST(ImprisonmentDisutility, Examples) {
    const PenalStrategy st{0.5, 100.0, 0.0, 10.0, 0.05};
    EXPECT_DOUBLE_EQ(imprisonment_disutility(Agent{100.0, 0.0}, st), -50.0);
    const PenalStrategy late{0.5, 100.0, 24.0, 48.0, 0.05};
    const double one = imprisonment_disutility(Agent{5000.0, 0.005}, late);
    EXPECT_NEAR(one, -9708.0, 1.0);
    EXPECT_DOUBLE_EQ(imprisonment_disutility(Agent{10000.0, 0.005}, late), 2.0 * one);
}

TEST(NetOffenseUtility, Examples) {
    const CrimeParams cr{1.0, 0.5, 1000.0, 1.5, 0.0};
    Agent a{100.0, 0.0, 1.0, true};
    EXPECT_DOUBLE_EQ(net_offense_utility(a, PenalStrategy{0.0, 200.0, 0.0, 10.0, 1.0}, cr), 100.0);

    // pi(0.5) = 0.5 at gamma = 1; prison (-1000) is worse than the fine.
    const PenalStrategy st{0.5, 200.0, 0.0, 10.0, 1.0};
    EXPECT_DOUBLE_EQ(net_offense_utility(a, st, cr), -25.0);
    EXPECT_EQ(classify(a, st, cr), PartitionLabel::NonOffender);

    a.informed = false;
    for (double w : {1.0, 100.0, 1e6}) {
        a.w = w;
        EXPECT_GT(net_offense_utility(a, st, cr), 0.0);
        EXPECT_NE(classify(a, st, cr), PartitionLabel::NonOffender);
    }
}

TEST(Targets, W0AndPsiExamples) {
    const CrimeParams cr{1.0, 0.5, 1000.0, 1.5, 0.0};
    EXPECT_NEAR(target_w0(PenalStrategy{0.5, 200.0, 1.0, 1.0, 0.05}, cr, 1.0), 400.0 / 3.0, 1e-12);
    EXPECT_EQ(target_w0(PenalStrategy{0.5, 0.0, 1.0, 1.0, 0.05}, cr, 1.0), 0.0);
    const CrimeParams no_stigma{2.0, 0.0, 1000.0, 1.5, 0.0};
    const double pi = weighting_pi(0.3, 0.61);
    EXPECT_NEAR(target_w0(PenalStrategy{0.3, 200.0, 1.0, 1.0, 0.05}, no_stigma, 0.61), pi * 200.0 / 2.0, 1e-12);

    EXPECT_NEAR(psi(0.5, cr, 0.05, 1.0), 30.0, 1e-12);
    EXPECT_NEAR(psi(1.0, no_stigma, 0.05, 0.61), 2.0 / 0.05, 1e-12);
    double prev = psi(0.05, cr, 0.05, 0.61);
    for (double p = 0.1; p <= 1.0; p += 0.05) {
        const double now = psi(p, cr, 0.05, 0.61);
        EXPECT_LT(now, prev);
        prev = now;
    }
    const CrimeParams all_stigma{1.0, 0.9, 1000.0, 1.5, 0.0};
    EXPECT_THROW(psi(1.0, CrimeParams{1.0, 1.0, 1.0, 1.5, 0.0}, 0.05, 0.61), DegenerateStrategy);
    EXPECT_NO_THROW(psi(1.0, all_stigma, 0.05, 0.61));
}

TEST(Targets, TauForTarget) {
    EXPECT_NEAR(tau_for_target(1e-12, 0.0, 200.0), 200.0, 1e-6);
    EXPECT_NEAR(tau_for_target(0.005, 0.0, 200.0), (std::exp(1.0) - 1.0) * 200.0, 1e-10);
    EXPECT_NEAR(tau_for_target(0.005, 0.0, 200.0), 343.66, 5e-3);
    const double slope = tau_for_target(0.005, 11.0, 200.0) - tau_for_target(0.005, 10.0, 200.0);
    EXPECT_NEAR(slope, std::expm1(1.0), 1e-9);
    EXPECT_TRUE(std::isinf(tau_for_target(1.0, 1.0, 1e4)));
}

TEST(Targets, K0RoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lk(std::log(1e-4), std::log(1.0)), lt(std::log(0.1), std::log(1e3));
    for (int i = 0; i < 200; ++i) {
        const double k0 = std::exp(lk(rng));
        const double t = std::exp(lt(rng));
        const double ps = 30.0;
        if (ps * k0 > 300) continue;
        const double tau = tau_for_target(k0, t, ps);
        EXPECT_NEAR(target_k0_from_psi(ps, t, tau) / k0, 1.0, 1e-9) << k0 << " " << t;
    }
}

TEST(Targets, K0NeedsTauAbovePsi) {
    // partition_ratio(0) = 1/tau and it increases in k, so a root needs 1/tau < 1/psi.
    EXPECT_THROW(target_k0_from_psi(30.0, 5.0, 30.0), NoRootError);
    EXPECT_THROW(target_k0_from_psi(30.0, 5.0, 20.0), NoRootError);
    EXPECT_GT(target_k0_from_psi(30.0, 5.0, 30.5), 0.0);
}

TEST(Partition, RatioIncreasingAndConcave) {
    for (auto [t, tau] : {std::pair{0.0, 50.0}, std::pair{24.0, 48.0}, std::pair{1e3, 1.0}}) {
        double prev = partition_ratio(0.0, t, tau);
        const double h = 1e-3;
        for (int i = 1; i < 2000; ++i) {
            const double k = i * h;
            const double now = partition_ratio(k, t, tau);
            EXPECT_GT(now, prev);
            const double second = partition_ratio(k + h, t, tau) - 2.0 * now + prev;
            EXPECT_LE(second, 1e-12 * now) << k;
            prev = now;
        }
    }
}

TEST(Partition, CurvePassesThroughTargets) {
    const CrimeParams cr{1.0, 0.3, 1000.0, 1.5, 0.0};
    const double mu = 0.61;
    for (double k0 : {1e-3, 0.01, 0.05}) {
        PenalStrategy st{0.4, 300.0, 12.0, 0.0, 0.02};
        st.tau = tau_for_target(k0, st.t, psi(st.p, cr, st.r, mu));
        const double w0 = target_w0(st, cr, mu);
        EXPECT_NEAR(partition_curve_w(k0, st.f, st.r, st.t, st.tau) / w0, 1.0, 1e-12);
    }
    EXPECT_NEAR(partition_curve_w(0.0, 300.0, 0.02, 0.0, 50.0), 300.0 / (0.02 * 50.0), 1e-12);
    EXPECT_NEAR(partition_curve_w(1e-10, 300.0, 0.02, 0.0, 50.0), 300.0 / (0.02 * 50.0), 1e-5);
}

// Chord through the origin and (w0, k0) versus the exact curve, for k in [k0/2, 2 k0].
TEST(Partition, LinearInTheTwoExtremeRegimes) {
    auto max_dev = [](double t, double tau, double k0) {
        const double slope = partition_ratio(k0, t, tau) / k0;
        double dev = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double k = k0 * (0.5 + 1.5 * i / 200.0);
            dev = std::max(dev, std::abs(partition_ratio(k, t, tau) / (slope * k) - 1.0));
        }
        return dev;
    };
    const double k0 = 0.01;
    EXPECT_LT(max_dev(1e7, 1e5, k0), 0.01);  // tau / t = 1e-2, k0 t = 1e5
    EXPECT_LT(max_dev(1e3, 1e8, k0), 0.01);  // tau / t = 1e5, k0 t = 10
    EXPECT_LT(max_dev(1e5, 1e9, k0), 0.01);  // tau / t = 1e4
    // Between the extremes the chord is only a rough guide.
    EXPECT_GT(max_dev(10.0, 50.0, k0), 0.01);
}

TEST(Partition, LinearWithinFivePercentForSmallTauOverT) {
    const double k0 = 0.02;
    for (double t : {1e4, 1e5}) {
        const double tau = 1e-3 * t;
        const double slope = partition_ratio(k0, t, tau) / k0;
        for (double k = 0.2 * k0; k <= 5.0 * k0; k *= 1.1)
            EXPECT_NEAR(partition_ratio(k, t, tau) / (slope * k), 1.0, 0.05) << t << " " << k;
    }
}

TEST(Classify, RectangleMatchesTargets) {
    const CrimeParams cr{1.0, 0.3, 1000.0, 1.5, 0.0};
    const double mu = 0.61;
    PenalStrategy st{0.6, 400.0, 6.0, 0.0, 0.03};
    const double k0 = 0.02;
    st.tau = tau_for_target(k0, st.t, psi(st.p, cr, st.r, mu));
    const double w0 = target_w0(st, cr, mu);
    ASSERT_NEAR(target_k0(st, cr, mu) / k0, 1.0, 1e-9);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uw(0.2 * w0, 3.0 * w0), uk(0.0, 3.0 * k0);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        Agent a{uw(rng), uk(rng), mu, true};
        if (std::abs(a.w / w0 - 1.0) < 1e-9 || std::abs(a.k / k0 - 1.0) < 1e-9) continue;
        const bool inside = a.w < w0 && a.k < k0;
        EXPECT_EQ(classify(a, st, cr) == PartitionLabel::NonOffender, inside) << a.w << " " << a.k;
        ++checked;
    }
    EXPECT_GT(checked, 9990);
}

TEST(Classify, FineOnIndifferenceCurve) {
    const CrimeParams cr{1.0, 0.3, 1000.0, 1.5, 0.0};
    // k = 0, t = 0: prison disutility is r w tau; choose w so it equals f exactly.
    const PenalStrategy st{0.0, 500.0, 0.0, 10.0, 0.5};
    const Agent a{100.0, 0.0, 0.61, true};
    ASSERT_EQ(-imprisonment_disutility(a, st), st.f);
    EXPECT_EQ(classify(a, st, cr), PartitionLabel::FineChooser);
}

TEST(Burglary, Examples) {
    const PenalStrategy st{1.0, 300.0, 10.0, 100.0, 0.05};
    // f < B: nobody is deterred.
    for (double w : {10.0, 1e3, 1e5})
        for (double k : {0.0, 0.01, 1.0}) {
            EXPECT_NE(burglary_classify(Agent{w, k}, st, 400.0), PartitionLabel::NonOffender);
            EXPECT_NE(burglary_classify(Agent{w, k}, st, 1e300), PartitionLabel::NonOffender);
        }
    EXPECT_TRUE(burglary_omega0_empty(st, 400.0));
    EXPECT_FALSE(burglary_omega0_empty(st, 200.0));
    EXPECT_EQ(burglary_classify(Agent{50.0, 0.0}, st, 200.0), PartitionLabel::NonOffender);
    EXPECT_EQ(burglary_classify(Agent{50.0, 0.0, 0.61, false}, st, 200.0), PartitionLabel::FineChooser);
    // Line slopes: k = (r w / x) log(1 + tau / t) is steeper for the smaller of B and f.
    const double L = std::log1p(st.tau / st.t);
    EXPECT_NEAR((st.r * L / 200.0) / (st.r * L / st.f), st.f / 200.0, 1e-15);
    EXPECT_THROW(burglary_classify(Agent{50.0, 0.0}, st, 0.0), DomainError);
}
