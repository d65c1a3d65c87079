#ifndef DETERRENCE_BEHAVIOR_HPP
#define DETERRENCE_BEHAVIOR_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include "distributions.hpp"
#include "errors.hpp"
#include "numeric.hpp"

namespace deterrence {

struct Agent {
    double w = 1.0;
    double k = 0.0;
    double gamma = 0.61;
    bool informed = true;
};

struct PenalStrategy {
    double p = 0.0;
    double f = 0.0;
    double t = 0.0;
    double tau = 0.0;
    double r = 1.0;

    void validate() const {
        detail::require(p >= 0.0 && p <= 1.0, "PenalStrategy: p outside [0,1]");
        detail::require(f >= 0.0 && t >= 0.0 && tau >= 0.0, "PenalStrategy: f, t, tau must be >= 0");
        detail::require(r > 0.0, "PenalStrategy: r must be > 0");
    }
};

struct CrimeParams {
    double b = 1.0;
    double s = 0.0;
    double l = 1.0;
    double g = 1.5;
    double Lambda = 0.0;

    void validate() const {
        detail::require(b > 0.0, "CrimeParams: b must be > 0");
        detail::require(s >= 0.0, "CrimeParams: s must be >= 0");
        detail::require(b > s, "CrimeParams: b must exceed s");
        detail::require(g > 1.0, "CrimeParams: g must be > 1");
        detail::require(l > 0.0, "CrimeParams: l must be > 0");
        detail::require(Lambda >= 0.0, "CrimeParams: Lambda must be >= 0");
    }
};

struct StrategyTargets {
    double p = 0.0;
    double w0 = 0.0;
    double k0 = 0.0;
    double t = 0.0;
    double r = 1.0;
};

enum class PartitionLabel { NonOffender, FineChooser, PrisonChooser };

inline const char* to_string(PartitionLabel l) {
    switch (l) {
        case PartitionLabel::NonOffender: return "non_offender";
        case PartitionLabel::FineChooser: return "fine_chooser";
        case PartitionLabel::PrisonChooser: return "prison_chooser";
    }
    return "?";
}

namespace detail {

// log(1 + k tau / (1 + k t)).
inline double discount_log(double k, double t, double tau) {
    return std::log1p(k * tau / (1.0 + k * t));
}

}  // namespace detail

// u = -(r/k) log(1 + k tau / (1 + k t)); k = 0 gives -r tau.
inline double discounted_disutility(double k, double r, double t, double tau) {
    if (k == 0.0) return -r * tau;
    return -(r / k) * detail::discount_log(k, t, tau);
}

inline double imprisonment_disutility(const Agent& a, const PenalStrategy& st) {
    return a.w * discounted_disutility(a.k, st.r, st.t, st.tau);
}

inline double net_offense_utility(const Agent& a, const PenalStrategy& st, const CrimeParams& c) {
    const double pi = weighting_pi(st.p, a.gamma);
    if (!a.informed) return (c.b - pi * c.s) * a.w;
    const double punish = std::min(st.f, -imprisonment_disutility(a, st));
    return c.b * a.w - pi * (punish + c.s * a.w);
}

inline double psi(double p, const CrimeParams& c, double r, double gamma) {
    const double pi = weighting_pi(p, gamma);
    const double net = c.b - pi * c.s;
    if (!(net > 0.0)) throw DegenerateStrategy("psi: b - pi(p) s <= 0");
    return net / (pi * r);
}

inline double target_w0(const PenalStrategy& st, const CrimeParams& c, double gamma) {
    const double pi = weighting_pi(st.p, gamma);
    const double net = c.b - pi * c.s;
    if (!(net > 0.0)) throw DegenerateStrategy("target_w0: b - pi(p) s <= 0, stigma alone deters everyone");
    return pi * st.f / net;
}

// tau = (e^(psi k0) - 1)(1/k0 + t); +inf once psi k0 overflows.
inline double tau_for_target(double k0, double t, double psi_value) {
    if (!(k0 > 0.0)) throw DomainError("tau_for_target: k0 must be > 0");
    const double x = psi_value * k0;
    if (x > 709.0) return std::numeric_limits<double>::infinity();
    return std::expm1(x) * (1.0 / k0 + t);
}

// k / log(1 + k tau / (1 + k t)); tends to 1/tau as k -> 0.
inline double partition_ratio(double k, double t, double tau) {
    if (k == 0.0) return 1.0 / tau;
    return k / detail::discount_log(k, t, tau);
}

// Root of partition_ratio(k) = 1/psi.
inline double target_k0_from_psi(double psi_value, double t, double tau) {
    if (!(tau > 0.0) || !(t >= 0.0)) throw DomainError("target_k0: need t >= 0, tau > 0");
    const double goal = 1.0 / psi_value;
    auto h = [&](double k) { return partition_ratio(k, t, tau) - goal; };
    if (!(tau > psi_value))
        throw NoRootError("target_k0: imprisonment too weak to deter any discount rate (tau <= psi)");
    double lo = 1e-12;
    while (h(lo) >= 0.0) {
        lo *= 1e-3;
        if (lo < 1e-300) throw NoRootError("target_k0: root below representable range");
    }
    double hi = lo;
    while (h(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NoRootError("target_k0: no upper bracket");
    }
    return numeric::bisect(h, lo, hi, 1e-15);
}

inline double target_k0(const PenalStrategy& st, const CrimeParams& c, double gamma) {
    return target_k0_from_psi(psi(st.p, c, st.r, gamma), st.t, st.tau);
}

// Wealth on the fine/prison indifference curve at discount rate k.
inline double partition_curve_w(double k, double f, double r, double t, double tau) {
    return f * partition_ratio(k, t, tau) / r;
}

// Ties: zero utility offends; fine/prison indifference picks the fine.
inline PartitionLabel classify(const Agent& a, const PenalStrategy& st, const CrimeParams& c) {
    if (a.informed && net_offense_utility(a, st, c) < 0.0) return PartitionLabel::NonOffender;
    return st.f <= -imprisonment_disutility(a, st) ? PartitionLabel::FineChooser
                                                   : PartitionLabel::PrisonChooser;
}

// Fixed gain B, p = 1, linearised lines k = (r w / x) log(1 + tau/t) for x in {B, f}.
inline bool burglary_omega0_empty(const PenalStrategy& st, double gain) { return !(gain < st.f); }

inline PartitionLabel burglary_classify(const Agent& a, const PenalStrategy& st, double gain) {
    if (!(gain > 0.0)) throw DomainError("burglary_classify: gain must be > 0");
    if (!(st.t > 0.0)) throw DomainError("burglary_classify: linearised lines need t > 0");
    const double L = std::log1p(st.tau / st.t);
    if (a.informed && gain < st.f && a.k < st.r * a.w * L / gain) return PartitionLabel::NonOffender;
    return a.k <= st.r * a.w * L / st.f ? PartitionLabel::FineChooser : PartitionLabel::PrisonChooser;
}

}  // namespace deterrence

#endif
