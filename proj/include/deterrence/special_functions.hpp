#ifndef DETERRENCE_SPECIAL_FUNCTIONS_HPP
#define DETERRENCE_SPECIAL_FUNCTIONS_HPP

// Upper incomplete gamma for real (possibly negative) a, and the generalized
// exponential integral E_s(x) = x^(s-1) Gamma(1-s, x).

#include <cmath>
#include <limits>

#include "errors.hpp"
#include "numeric.hpp"

namespace deterrence {

namespace detail {

// Continued fraction for Gamma(a,x) * e^x * x^-a (modified Lentz).
inline double upper_gamma_cf_scaled(double a, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

// Lower incomplete gamma via its power series, a > 0.
inline double lower_gamma_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 100000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x));
}

// Direct quadrature of the defining integral in s = log t.
inline double upper_gamma_quadrature(double a, double x) {
    const double s0 = std::log(x);
    const double s1 = std::log(x + 800.0);
    auto g = [a](double s) { return std::exp(a * s - std::exp(s)); };
    return numeric::integrate(g, s0, s1, 1e-14).value;
}

}  // namespace detail

// Gamma(a, x) = int_x^inf t^(a-1) e^-t dt, x > 0, any real a.
inline double upper_gamma(double a, double x) {
    if (!(x > 0.0)) throw DomainError("upper_gamma: x must be > 0");
    if (x > 1.0 && x > a + 1.0)
        return std::exp(-x + a * std::log(x)) * detail::upper_gamma_cf_scaled(a, x);
    if (a >= 0.5) return std::tgamma(a) - detail::lower_gamma_series(a, x);

    // Small x, a < 0.5: lift a into [0.5, 1.5) and recur downward,
    // Gamma(a,x) = (Gamma(a+1,x) - x^a e^-x) / a.
    const int n = static_cast<int>(std::ceil(0.5 - a));
    for (int j = 0; j < n; ++j)
        if (std::abs(a + j) < 0.1) return detail::upper_gamma_quadrature(a, x);
    const double top = a + n;
    double g = std::tgamma(top) - detail::lower_gamma_series(top, x);
    for (int j = n - 1; j >= 0; --j) {
        const double aj = a + j;
        g = (g - std::exp(aj * std::log(x) - x)) / aj;
    }
    return g;
}

// E_s(x) = int_1^inf e^(-xt) t^-s dt for real s >= 1 and x > 0.
inline double exp_integral_E(double s, double x) {
    if (!(x > 0.0)) throw DomainError("exp_integral_E: x must be > 0");
    if (!(s >= 1.0)) throw DomainError("exp_integral_E: order must be >= 1");
    const double a = 1.0 - s;
    if (x > 1.0) return std::exp(-x) * detail::upper_gamma_cf_scaled(a, x);
    return std::exp((s - 1.0) * std::log(x)) * upper_gamma(a, x);
}

}  // namespace deterrence

#endif
