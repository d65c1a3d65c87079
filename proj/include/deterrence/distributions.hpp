#ifndef DETERRENCE_DISTRIBUTIONS_HPP
#define DETERRENCE_DISTRIBUTIONS_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace deterrence {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Pareto wealth.
struct WealthDist {
    double alpha = 2.0;
    double w_m = 1.0;

    void validate() const {
        detail::require(alpha > 1.0, "WealthDist: alpha must be > 1");
        detail::require(w_m > 0.0, "WealthDist: w_m must be > 0");
    }
};

// Zero-inflated exponential discount rate: mass 1-rho at k = 0.
struct DiscountDist {
    double rho = 1.0;
    double beta = 1.0;

    void validate() const {
        detail::require(rho >= 0.0 && rho <= 1.0, "DiscountDist: rho must lie in [0,1]");
        detail::require(beta > 0.0, "DiscountDist: beta must be > 0");
    }
};

struct GammaDist {
    double mu_gamma = 0.61;
    double sigma_gamma = 0.0;

    void validate() const {
        detail::require(mu_gamma > 0.0 && mu_gamma < 1.0, "GammaDist: mu_gamma must lie in (0,1)");
        detail::require(sigma_gamma >= 0.0, "GammaDist: sigma_gamma must be >= 0");
    }
};

struct PopulationModel {
    WealthDist wealth;
    DiscountDist discount;
    GammaDist gamma;
    double epsilon = 0.0;  // uninformed members per informed member

    void validate() const {
        wealth.validate();
        discount.validate();
        gamma.validate();
        detail::require(epsilon >= 0.0, "PopulationModel: epsilon must be >= 0");
    }
};

struct DensityCdf {
    double pdf;
    double cdf;
};

struct AtomDensityCdf {
    double atom;     // point mass at k (non-zero only for k == 0)
    double density;  // continuous part
    double cdf;
};

inline DensityCdf pareto_pdf_cdf(const WealthDist& d, double w) {
    if (!(w >= d.w_m)) throw DomainError("pareto_pdf_cdf: w below w_m");
    const double ratio = d.w_m / w;
    return {d.alpha * std::pow(ratio, d.alpha) / w, 1.0 - std::pow(ratio, d.alpha)};
}

inline AtomDensityCdf zie_pdf_cdf(const DiscountDist& d, double k) {
    if (!(k >= 0.0)) throw DomainError("zie_pdf_cdf: k must be >= 0");
    const double e = std::exp(-k / d.beta);
    return {k == 0.0 ? 1.0 - d.rho : 0.0, d.rho * e / d.beta, (1.0 - d.rho) + d.rho * -std::expm1(-k / d.beta)};
}

// Single draws from a caller-owned engine; the vector samplers below wrap these.
template <class Rng>
double draw_wealth(const WealthDist& d, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    return d.w_m * std::pow(1.0 - u01(rng), -1.0 / d.alpha);
}

template <class Rng>
double draw_discount(const DiscountDist& d, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double u = u01(rng);
    if (u < 1.0 - d.rho) return 0.0;
    return -d.beta * std::log((1.0 - u) / d.rho);
}

// Normal truncated to (0.01, 0.99) by rejection.
template <class Rng>
double draw_gamma(const GammaDist& d, Rng& rng) {
    if (d.sigma_gamma == 0.0) return d.mu_gamma;
    std::normal_distribution<double> nd(d.mu_gamma, d.sigma_gamma);
    for (int i = 0; i < 1000000; ++i) {
        const double g = nd(rng);
        if (g > 0.01 && g < 0.99) return g;
    }
    throw DomainError("draw_gamma: truncation window (0.01, 0.99) has negligible mass");
}

inline std::vector<double> sample_wealth(const WealthDist& d, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (auto& x : out) x = draw_wealth(d, rng);
    return out;
}

inline std::vector<double> sample_discount(const DiscountDist& d, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (auto& x : out) x = draw_discount(d, rng);
    return out;
}

inline std::vector<double> sample_gamma(const GammaDist& d, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (auto& x : out) x = draw_gamma(d, rng);
    return out;
}

// Probability weighting pi(p) = p^g / (p^g + (1-p)^g)^(1/g).
inline double weighting_pi(double p, double gamma) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("weighting_pi: p outside [0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("weighting_pi: gamma outside (0,1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    const double a = std::pow(p, gamma);
    const double b = std::pow(1.0 - p, gamma);
    return a / std::pow(a + b, 1.0 / gamma);
}

// Strictly increasing on a 10^4-point grid.
inline bool weighting_is_monotone(double gamma) {
    constexpr int n = 10000;
    double prev = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double y = weighting_pi(static_cast<double>(i) / n, gamma);
        if (!(y > prev)) return false;
        prev = y;
    }
    return true;
}

inline double weighting_pi_inverse(double y, double gamma) {
    if (!(y >= 0.0 && y <= 1.0)) throw DomainError("weighting_pi_inverse: y outside [0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("weighting_pi_inverse: gamma outside (0,1]");
    if (!weighting_is_monotone(gamma))
        throw NonMonotoneError("weighting_pi_inverse: pi is not monotone for this gamma");
    if (y == 0.0) return 0.0;
    if (y == 1.0) return 1.0;
    return numeric::bisect([&](double p) { return weighting_pi(p, gamma) - y; }, 0.0, 1.0, 0.0, 1e-17);
}

// Interior root of pi(p) = p, found as F(p) = p^(g(g-1)) / (p^g + (1-p)^g) = 1 on (0, 1/2).
inline double pi_fixed_point(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("pi_fixed_point: gamma must lie in (0,1)");
    auto logF = [gamma](double p) {
        return gamma * (gamma - 1.0) * std::log(p) - std::log(std::pow(p, gamma) + std::pow(1.0 - p, gamma));
    };
    double lo = 0.25;
    while (logF(lo) <= 0.0) {
        lo *= 0.5;
        if (lo < 1e-300) throw NoRootError("pi_fixed_point: bracket collapsed");
    }
    return numeric::bisect(logF, lo, 0.5, 1e-16);
}

}  // namespace deterrence

#endif
