#ifndef DETERRENCE_WELFARE_HPP
#define DETERRENCE_WELFARE_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include "behavior.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "numeric.hpp"
#include "special_functions.hpp"

namespace deterrence {

struct CostParams {
    double c_p = 0.0;
    double c_f = 0.0;
    double c_0 = 0.0;
    double c_t = 0.0;
    double c_tau = 0.0;
    double m_options = 2.0;  // punishment-option count in c_t / (m t)

    void validate() const {
        detail::require(c_p >= 0 && c_f >= 0 && c_0 >= 0 && c_t >= 0 && c_tau >= 0,
                        "CostParams: costs must be >= 0");
        detail::require(m_options >= 1.0, "CostParams: m_options must be >= 1");
    }
};

enum class Tier { quadrature, closed, asymptotic };

inline const char* to_string(Tier t) {
    switch (t) {
        case Tier::quadrature: return "quadrature";
        case Tier::closed: return "closed";
        case Tier::asymptotic: return "asymptotic";
    }
    return "?";
}

struct WelfareBreakdown {
    double j0 = 0.0;
    double j1 = 0.0;
    double j2 = 0.0;
    double detection = 0.0;
    double total = 0.0;
    Tier tier = Tier::quadrature;

    static WelfareBreakdown assemble(double j0, double j1, double j2, double p, double c_p, Tier tier) {
        WelfareBreakdown w;
        w.j0 = j0;
        w.j1 = j1;
        w.j2 = j2;
        w.detection = c_p * p;
        w.total = j0 - p * (j1 + j2) - w.detection;
        w.tier = tier;
        return w;
    }
};

inline double imprisonment_cost_Ci(double t, double tau, const CostParams& c) {
    if (!(t > 0.0)) throw DomainError("imprisonment_cost_Ci: t must be > 0");
    return c.c_0 + c.c_t / (c.m_options * t) + c.c_tau * tau;
}

enum class PunishmentChoice { fine, prison };

inline double punishment_social_cost(double w, double t, double tau, double r, PunishmentChoice choice,
                                     const CrimeParams& cr, const CostParams& c) {
    if (choice == PunishmentChoice::fine) return c.c_f + cr.g * cr.s * w;
    return imprisonment_cost_Ci(t, tau, c) + cr.g * w * (cr.s + r * tau) - cr.Lambda * tau * (cr.l - cr.b * w);
}

namespace detail {

struct Geometry {
    double w0, k0, v, u, k_m, kappa0, kappa_m;
};

inline Geometry geometry(const StrategyTargets& x, const PopulationModel& pop) {
    if (!(x.w0 >= pop.wealth.w_m))
        throw DegenerateStrategy("welfare: w0 < w_m, the strategy deters nobody");
    if (!(x.k0 > 0.0)) throw DomainError("welfare: k0 must be > 0");
    Geometry g{};
    g.w0 = x.w0;
    g.k0 = x.k0;
    g.v = pop.wealth.w_m / x.w0;
    g.u = x.k0 / x.w0;
    g.k_m = g.u * pop.wealth.w_m;
    g.kappa0 = x.k0 / pop.discount.beta;
    g.kappa_m = g.k_m / pop.discount.beta;
    return g;
}

// Exponential tails beyond 60 scale lengths are below 1e-26 and are dropped.
inline constexpr double kExpSpan = 60.0;
inline constexpr double kInnerTol = 1e-13;
inline constexpr double kOuterTol = 1e-12;

// int_0^min(x, span) e^-y dy, numerically.
inline double exp_mass_below(double x) {
    return numeric::integrate([](double y) { return std::exp(-y); }, 0.0, std::min(x, kExpSpan), kInnerTol).value;
}

// int_x^inf e^-y dy, numerically after the shift y -> x + y.
inline double exp_mass_above(double x) {
    return numeric::integrate([x](double y) { return std::exp(-x - y); }, 0.0, kExpSpan, kInnerTol).value;
}

// int_lower^inf g(w) f_W(w) dw with w = lower z^(-1/(alpha-1)); the Jacobian
// times the Pareto density reduces to alpha c (w_m/lower)^alpha z^(c alpha - 1).
template <class G>
double pareto_tail_integral(const WealthDist& d, double lower, G&& g) {
    const double c = 1.0 / (d.alpha - 1.0);
    const double scale = d.alpha * c * std::pow(d.w_m / lower, d.alpha);
    auto h = [&](double z) {
        const double w = lower * std::pow(z, -c);
        if (!std::isfinite(w)) return 0.0;
        return g(w) * scale * std::pow(z, c * d.alpha - 1.0);
    };
    return numeric::integrate(h, 0.0, 1.0, kOuterTol).value;
}

template <class G>
double pareto_range_integral(const WealthDist& d, double lo, double hi, G&& g) {
    auto h = [&](double w) { return g(w) * pareto_pdf_cdf(d, w).pdf; };
    return numeric::integrate(h, lo, hi, kOuterTol).value;
}

}  // namespace detail

// Nested quadrature over the three regions of the (w, k) plane under the
// linear fine/prison partition k = u w. The k = 0 atom enters analytically.
inline WelfareBreakdown welfare_quadrature(const StrategyTargets& x, const PopulationModel& pop,
                                           const CrimeParams& cr, const CostParams& c, double tau) {
    const auto g = detail::geometry(x, pop);
    const auto& W = pop.wealth;
    const double rho = pop.discount.rho;
    const double beta = pop.discount.beta;
    const double eps = pop.epsilon;

    auto below = [&](double k) { return (1.0 - rho) + rho * detail::exp_mass_below(k / beta); };
    auto above = [&](double k) { return rho * detail::exp_mass_above(k / beta); };
    auto fine = [&](double w) {
        return punishment_social_cost(w, x.t, tau, x.r, PunishmentChoice::fine, cr, c);
    };
    auto prison = [&](double w) {
        return punishment_social_cost(w, x.t, tau, x.r, PunishmentChoice::prison, cr, c);
    };

    double j0 = 0.0;
    if (g.w0 > W.w_m) {
        const double kmass = below(g.k0);
        j0 = detail::pareto_range_integral(W, W.w_m, g.w0, [&](double w) { return (cr.l - cr.b * w) * kmass; });
    }

    double j1 = detail::pareto_tail_integral(W, g.w0, [&](double w) { return fine(w) * below(g.u * w); });
    if (eps > 0.0)
        j1 += eps * detail::pareto_tail_integral(W, W.w_m, [&](double w) { return fine(w) * below(g.u * w); });

    double j2 = detail::pareto_tail_integral(W, g.w0, [&](double w) { return prison(w) * above(g.u * w); });
    if (g.w0 > W.w_m) {
        const double kmass = above(g.k0);
        j2 += detail::pareto_range_integral(W, W.w_m, g.w0, [&](double w) { return prison(w) * kmass; });
    }
    if (eps > 0.0)
        j2 += eps * detail::pareto_tail_integral(W, W.w_m, [&](double w) { return prison(w) * above(g.u * w); });

    return WelfareBreakdown::assemble(j0, j1, j2, x.p, c.c_p, Tier::quadrature);
}

namespace detail {

// J2 = rho [c0 + c_t/(m t) + (c_tau - Lambda l) tau] * constant
//    + rho alpha/(alpha-1) [g s + (g r + Lambda b) tau] w_m * linear
struct J2Braces {
    double constant;
    double linear;
};

inline J2Braces j2_braces_closed(double alpha, double v, double kappa0, double eps) {
    const double km = v * kappa0;
    J2Braces out{};
    out.constant = std::exp(-kappa0) - std::pow(v, alpha) * kappa0 * exp_integral_E(alpha, kappa0);
    out.linear = std::exp(-kappa0) -
                 std::pow(km, alpha - 1.0) * upper_gamma(2.0 - alpha, kappa0);
    if (eps > 0.0) {
        out.constant += eps * (std::exp(-km) - km * exp_integral_E(alpha, km));
        out.linear += eps * (std::exp(-km) - std::pow(km, alpha - 1.0) * upper_gamma(2.0 - alpha, km));
    }
    return out;
}

inline J2Braces j2_braces_asymptotic(double alpha, double v, double kappa0, double eps) {
    const double km = v * kappa0;
    const double e0 = std::exp(-kappa0);
    const double em = std::exp(-km);
    J2Braces out{};
    out.constant = (1.0 - std::pow(v, alpha)) * e0 + alpha * std::pow(v, alpha) * e0 / kappa0 + alpha * eps * em / km;
    out.linear = (1.0 - std::pow(v, alpha - 1.0)) * e0 + (alpha - 1.0) * std::pow(v, alpha - 1.0) * e0 / kappa0 +
                 (alpha - 1.0) * eps * em / km;
    return out;
}

inline double j2_from_braces(const J2Braces& br, double rho, double alpha, double w_m, double t, double tau, double r,
                             const CrimeParams& cr, const CostParams& c) {
    const double a = c.c_0 + c.c_t / (c.m_options * t) + (c.c_tau - cr.Lambda * cr.l) * tau;
    const double b = cr.g * cr.s + (cr.g * r + cr.Lambda * cr.b) * tau;
    return rho * a * br.constant + rho * alpha / (alpha - 1.0) * b * w_m * br.linear;
}

inline double j0_closed(const PopulationModel& pop, double l, double b, double v, double kappa0) {
    const double a = pop.wealth.alpha;
    return (1.0 - pop.discount.rho * std::exp(-kappa0)) *
           (l * (1.0 - std::pow(v, a)) - a / (a - 1.0) * b * pop.wealth.w_m * (1.0 - std::pow(v, a - 1.0)));
}

}  // namespace detail

inline WelfareBreakdown welfare_closed_form(const StrategyTargets& x, const PopulationModel& pop,
                                            const CrimeParams& cr, const CostParams& c, double tau) {
    const auto g = detail::geometry(x, pop);
    const double a = pop.wealth.alpha;
    const double wm = pop.wealth.w_m;
    const double rho = pop.discount.rho;
    const double eps = pop.epsilon;
    const double va = std::pow(g.v, a);

    const double j0 = detail::j0_closed(pop, cr.l, cr.b, g.v, g.kappa0);

    double j1 = c.c_f * va * (1.0 - a * rho * exp_integral_E(a + 1.0, g.kappa0)) +
                cr.g * cr.s * (a / (a - 1.0) * va * g.w0 - a * rho * va * g.w0 * exp_integral_E(a, g.kappa0));
    if (eps > 0.0)
        j1 += c.c_f * eps * (1.0 - a * rho * exp_integral_E(a + 1.0, g.kappa_m)) +
              cr.g * cr.s * (a / (a - 1.0) * eps * wm - a * rho * eps * wm * exp_integral_E(a, g.kappa_m));

    const auto br = detail::j2_braces_closed(a, g.v, g.kappa0, eps);
    const double j2 = detail::j2_from_braces(br, rho, a, wm, x.t, tau, x.r, cr, c);
    return WelfareBreakdown::assemble(j0, j1, j2, x.p, c.c_p, Tier::closed);
}

inline WelfareBreakdown welfare_asymptotic(const StrategyTargets& x, const PopulationModel& pop,
                                           const CrimeParams& cr, const CostParams& c, double tau) {
    const auto g = detail::geometry(x, pop);
    const double a = pop.wealth.alpha;
    const double wm = pop.wealth.w_m;
    const double rho = pop.discount.rho;
    const double eps = pop.epsilon;
    const double k0 = g.kappa0;
    const double km = g.v * k0;
    const double e0 = std::exp(-k0) / k0;
    const double em = std::exp(-km) / km;

    const double j0 = detail::j0_closed(pop, cr.l, cr.b, g.v, k0);
    const double j1 = c.c_f * (std::pow(g.v, a) * (1.0 - a * rho * e0) + eps * (1.0 - a * rho * em)) +
                      cr.g * cr.s *
                          (std::pow(g.v, a - 1.0) * wm * (a / (a - 1.0) - a * rho * e0) +
                           eps * wm * (a / (a - 1.0) - a * rho * em));
    const auto br = detail::j2_braces_asymptotic(a, g.v, k0, eps);
    const double j2 = detail::j2_from_braces(br, rho, a, wm, x.t, tau, x.r, cr, c);
    return WelfareBreakdown::assemble(j0, j1, j2, x.p, c.c_p, Tier::asymptotic);
}

// Strategy targets from raw levers under a shared weighting factor.
inline StrategyTargets targets_from_strategy(const PenalStrategy& st, const CrimeParams& cr, double gamma) {
    StrategyTargets x;
    x.p = st.p;
    x.t = st.t;
    x.r = st.r;
    x.w0 = target_w0(st, cr, gamma);
    x.k0 = target_k0(st, cr, gamma);
    return x;
}

struct DelayOptimum {
    double t = 0.0;
    double tau = 0.0;
    double j2_min = 0.0;
    double psi = 0.0;
    double t_kernel = std::numeric_limits<double>::quiet_NaN();  // sqrt(a/b) of the a/t + b t kernel
    double log_t_slope = 0.0;    // predicted d log t* / d kappa0
    double log_tau_slope = 0.0;  // predicted d log tau* / d kappa0
    double log_j2_slope = 0.0;   // predicted d log(kappa0 J2_min) / d kappa0
    bool at_search_boundary = false;
};

// Minimises the closed-form J2 over t with tau tied to t by the target
// relation: golden section on log t within 30 of the kernel optimum
// (or of t = 1 when the kernel is degenerate).
inline DelayOptimum optimal_t_tau(double kappa0, const PopulationModel& pop, const CrimeParams& cr,
                                  const CostParams& c, double p, double v, double r) {
    if (!(kappa0 > 0.0)) throw DomainError("optimal_t_tau: kappa0 must be > 0");
    const double a = pop.wealth.alpha;
    const double wm = pop.wealth.w_m;
    const double beta = pop.discount.beta;
    const double rho = pop.discount.rho;
    DelayOptimum out;
    out.psi = psi(p, cr, r, pop.gamma.mu_gamma);
    const double k0 = kappa0 * beta;
    const auto br = detail::j2_braces_closed(a, v, kappa0, pop.epsilon);
    auto j2_at = [&](double logt) {
        const double t = std::exp(logt);
        const double tau = tau_for_target(k0, t, out.psi);
        return detail::j2_from_braces(br, rho, a, wm, t, tau, r, cr, c);
    };
    // J2 is A0 + ka/t + kb t exactly; the kernel centres the search when it exists.
    const double growth = std::expm1(out.psi * k0);
    const double ka = rho * br.constant * c.c_t / c.m_options;
    const double kb = rho * growth *
                      ((c.c_tau - cr.Lambda * cr.l) * br.constant +
                       a / (a - 1.0) * (cr.g * r + cr.Lambda * cr.b) * wm * br.linear);
    if (ka > 0.0 && kb > 0.0) out.t_kernel = std::sqrt(ka / kb);
    const double centre = std::isfinite(out.t_kernel) && out.t_kernel > 0.0 ? std::log(out.t_kernel) : 0.0;
    const double lo = centre - 30.0;
    const double hi = centre + 30.0;
    const auto m = numeric::golden_min(j2_at, lo, hi, 1e-12);
    out.t = std::exp(m.x);
    out.tau = tau_for_target(k0, out.t, out.psi);
    out.j2_min = m.fx;
    out.at_search_boundary = (m.x - lo) < 1e-6 || (hi - m.x) < 1e-6;

    out.log_t_slope = -out.psi * beta / 2.0;
    out.log_tau_slope = out.psi * beta / 2.0;
    out.log_j2_slope = out.psi * beta / 2.0 - v;
    return out;
}

// v_c(p) = beta (b - pi(p) s) / (2 pi(p) r).
inline double critical_v(double p, const PopulationModel& pop, const CrimeParams& cr, double r) {
    const double pi = weighting_pi(p, pop.gamma.mu_gamma);
    return pop.discount.beta * (cr.b - pi * cr.s) / (2.0 * pi * r);
}

// True iff the minimised prison cost decays as kappa0 grows.
inline bool phase_condition(double v, double p, const PopulationModel& pop, const CrimeParams& cr, double r) {
    return v > critical_v(p, pop, cr, r);
}

struct Thresholds {
    double r_threshold;
    double fine_bound;
};

inline Thresholds thresholds(const PopulationModel& pop, const CrimeParams& cr, double r) {
    return {(cr.b - cr.s) * pop.discount.beta / 2.0, 2.0 * r * pop.wealth.w_m / pop.discount.beta};
}

}  // namespace deterrence

#endif
