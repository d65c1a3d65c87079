#ifndef DETERRENCE_NUMERIC_HPP
#define DETERRENCE_NUMERIC_HPP

// Adaptive Gauss-Kronrod quadrature and 1-D root/min finders.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace deterrence::numeric {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

// Globally adaptive bisection driven by the Kronrod-Gauss difference.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                     double abs_tol = 0.0, int max_intervals = 4000) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::priority_queue<detail::Segment> heap;
    auto first = detail::gk15(f, a, b);
    double total = first.value;
    double err = first.error;
    heap.push(first);
    int n = 1;
    while (err > std::max(abs_tol, rel_tol * std::abs(total)) && n < max_intervals) {
        auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // interval no longer splittable
        heap.pop();
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = sign * total;
    out.error = err;
    out.intervals = n;
    out.converged = err <= std::max(abs_tol, rel_tol * std::abs(total)) || err == 0.0;
    return out;
}

// Bisection on a sign change of f over [lo, hi]. Stops when the bracket is
// below rel_tol relative to its upper end (or abs_tol).
template <class F>
double bisect(F&& f, double lo, double hi, double rel_tol = 1e-14, double abs_tol = 0.0,
              int max_iter = 400) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0) == (fhi < 0)) throw NoRootError("bisect: no sign change on bracket");
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (hi - lo <= std::max(abs_tol, rel_tol * std::max(std::abs(lo), std::abs(hi)))) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct MinResult {
    double x;
    double fx;
};

// Golden-section minimisation of a unimodal f on [a, b].
template <class F>
MinResult golden_min(F&& f, double a, double b, double tol = 1e-10, int max_iter = 500) {
    constexpr double invphi = 0.6180339887498948482;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    const double fx = f(x);
    // The bracket midpoint can lose to an interior probe on flat functions.
    if (fc < fx && fc <= fd) return {c, fc};
    if (fd < fx) return {d, fd};
    return {x, fx};
}

// Scan n points then polish with golden section around the best cell.
// Guards against multimodal objectives where a bare golden search can stall.
template <class F>
MinResult scan_then_golden(F&& f, double a, double b, int n = 64, double tol = 1e-10) {
    int best = 0;
    double fbest = std::numeric_limits<double>::infinity();
    const double h = (b - a) / n;
    auto node = [&](int i) { return i == n ? b : a + i * h; };
    for (int i = 0; i <= n; ++i) {
        const double fx = f(node(i));
        if (fx < fbest) {
            fbest = fx;
            best = i;
        }
    }
    auto r = golden_min(f, node(std::max(0, best - 1)), node(std::min(n, best + 1)), tol);
    if (fbest < r.fx) return {node(best), fbest};
    return r;
}

}  // namespace deterrence::numeric

#endif
