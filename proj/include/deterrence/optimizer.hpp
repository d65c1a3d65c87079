#ifndef DETERRENCE_OPTIMIZER_HPP
#define DETERRENCE_OPTIMIZER_HPP

// Reduced (v, p) problem in the kappa0 -> infinity limit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "distributions.hpp"
#include "welfare.hpp"

namespace deterrence {

enum class Branch { interior, special_case, boundary };

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::interior: return "interior";
        case Branch::special_case: return "special-case";
        case Branch::boundary: return "boundary";
    }
    return "?";
}

struct ReducedSolution {
    double p_star = 0.0;
    double v_star = 0.0;
    double f_star = 0.0;
    double objective = 0.0;
    Branch branch = Branch::interior;
    double p_min = 0.0;
};

struct PhaseFailure {
    double r = 0.0;
    double r_threshold = 0.0;
    std::string message;
};

using OptimizeResult = std::variant<ReducedSolution, PhaseFailure>;

inline double reduced_objective(double v, double p, const PopulationModel& pop, const CrimeParams& cr,
                                const CostParams& c) {
    const double a = pop.wealth.alpha;
    const double wm = pop.wealth.w_m;
    const double eps = pop.epsilon;
    const double ratio = a / (a - 1.0);
    const double va1 = std::pow(v, a - 1.0);
    return cr.l * (1.0 - va1 * v) - ratio * cr.b * wm * (1.0 - va1) - p * c.c_f * (va1 * v + eps) -
           ratio * p * cr.g * cr.s * wm * (va1 + eps) - c.c_p * p;
}

inline double v_critical(double p, const PopulationModel& pop, const CrimeParams& cr, double r) {
    return critical_v(p, pop, cr, r);
}

// Inverse of v_critical: pi(p_c) = b beta / (2 v r + s beta).
inline double p_critical(double v, const PopulationModel& pop, const CrimeParams& cr, double r) {
    const double beta = pop.discount.beta;
    const double y = cr.b * beta / (2.0 * v * r + cr.s * beta);
    if (!(y <= 1.0)) throw DomainError("p_critical: no p in [0,1] reaches this v");
    return weighting_pi_inverse(y, pop.gamma.mu_gamma);
}

struct UnconstrainedV {
    double v;
    bool degenerate;  // b - p g s <= 0
};

inline UnconstrainedV unconstrained_v_opt(double p, const PopulationModel& pop, const CrimeParams& cr,
                                          const CostParams& c) {
    const double num = cr.b - p * cr.g * cr.s;
    if (!(num > 0.0)) return {0.0, true};
    return {num * pop.wealth.w_m / (cr.l + p * c.c_f), false};
}

// p_o(v) = (b w_m - l v) / (g s w_m + c_f v).
inline double unconstrained_p_opt(double v, const PopulationModel& pop, const CrimeParams& cr, const CostParams& c) {
    const double wm = pop.wealth.w_m;
    return (cr.b * wm - cr.l * v) / (cr.g * cr.s * wm + c.c_f * v);
}

inline double v_star(double p, const PopulationModel& pop, const CrimeParams& cr, const CostParams& c, double r) {
    const double vc = v_critical(p, pop, cr, r);
    const auto vo = unconstrained_v_opt(p, pop, cr, c);
    const double v = vo.degenerate ? vc : std::max(vc, vo.v);
    return std::min(v, 1.0);
}

inline double f_star(double p, const PopulationModel& pop, const CrimeParams& cr, const CostParams& c, double r) {
    const double pi = weighting_pi(p, pop.gamma.mu_gamma);
    const double first = 2.0 * pop.wealth.w_m * r / pop.discount.beta;
    const auto vo = unconstrained_v_opt(p, pop, cr, c);
    if (vo.degenerate) return first;
    double second = (cr.b - pi * cr.s) / (cr.b - p * cr.g * cr.s) * (cr.l + c.c_f * p) / pi;
    if (vo.v > 1.0) second = pop.wealth.w_m * (cr.b - pi * cr.s) / pi;  // v clamps at 1
    return std::min(first, second);
}

inline OptimizeResult optimize(const PopulationModel& pop, const CrimeParams& cr, const CostParams& c, double r) {
    const auto th = thresholds(pop, cr, r);
    if (!(r > th.r_threshold)) {
        return PhaseFailure{r, th.r_threshold,
                            "harshness r is not above (b - s) beta / 2; the reduced problem does not apply, "
                            "search finite kappa0 with the welfare module instead"};
    }
    ReducedSolution sol;
    sol.p_min = p_critical(1.0, pop, cr, r);
    auto objective_at = [&](double p) { return reduced_objective(v_star(p, pop, cr, c, r), p, pop, cr, c); };

    if (unconstrained_p_opt(1.0, pop, cr, c) >= sol.p_min) {
        sol.p_star = sol.p_min;
        sol.v_star = 1.0;
        sol.f_star = 2.0 * r * pop.wealth.w_m / pop.discount.beta;
        sol.objective = reduced_objective(1.0, sol.p_min, pop, cr, c);
        sol.branch = Branch::special_case;
        return sol;
    }

    const double lo = sol.p_min + 1e-9;
    const double hi = 1.0;
    const auto m = numeric::scan_then_golden([&](double p) { return -objective_at(p); }, lo, hi, 200, 1e-8);
    sol.p_star = m.x;
    sol.v_star = v_star(m.x, pop, cr, c, r);
    sol.f_star = f_star(m.x, pop, cr, c, r);
    sol.objective = reduced_objective(sol.v_star, sol.p_star, pop, cr, c);
    sol.branch = (m.x - lo < 1e-7 || hi - m.x < 1e-7) ? Branch::boundary : Branch::interior;
    return sol;
}

struct GridArgmax {
    double v = 0.0;
    double p = 0.0;
    double objective = -std::numeric_limits<double>::infinity();
    bool found = false;
};

// Exhaustive argmax on p in {1/n, ..., 1}; each row scans v in {1/n, ..., 1}
// above v_c(p) plus the row's own endpoint just above v_c(p).
// Rows are split across threads; ties go to the lowest index.
inline GridArgmax grid_oracle(const PopulationModel& pop, const CrimeParams& cr, const CostParams& c, double r,
                              int resolution, int threads = 1) {
    if (resolution < 2) throw DomainError("grid_oracle: resolution must be >= 2");
    const int n = resolution;
    std::vector<GridArgmax> rows(n);
    auto run_rows = [&](int first, int stride) {
        for (int i = first; i < n; i += stride) {
            const double p = static_cast<double>(i + 1) / n;
            const double vc = v_critical(p, pop, cr, r);
            GridArgmax best;
            // The row's feasible interval starts at the constraint itself.
            const double v_edge = std::nextafter(vc, 2.0);
            if (v_edge > 0.0 && v_edge <= 1.0) best = {v_edge, p, reduced_objective(v_edge, p, pop, cr, c), true};
            for (int j = 0; j < n; ++j) {
                const double v = static_cast<double>(j + 1) / n;
                if (!(v > vc)) continue;
                const double obj = reduced_objective(v, p, pop, cr, c);
                if (obj > best.objective) best = {v, p, obj, true};
            }
            rows[i] = best;
        }
    };
    threads = std::max(1, threads);
    if (threads == 1) {
        run_rows(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(run_rows, w, threads);
    }
    GridArgmax best;
    for (const auto& row : rows)
        if (row.found && row.objective > best.objective) best = row;
    return best;
}

}  // namespace deterrence

#endif
