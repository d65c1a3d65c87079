#ifndef DETERRENCE_PHASE_HPP
#define DETERRENCE_PHASE_HPP

// (r, f) sweep of the finite-kappa0 welfare argmax.

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "welfare.hpp"

namespace deterrence {

struct PhaseCell {
    double r = 0.0;
    double f = 0.0;
    double v = 0.0;                 // w_m / w0; above 1 nobody is deterred
    bool feasible = false;
    bool decay_condition = false;   // v > v_c(p)
    bool analytic_severe = false;   // r above threshold and f below the fine bound
    double kappa_argmax = 0.0;
    double welfare_max = 0.0;
    double t_at_argmax = 0.0;
    double tau_at_argmax = 0.0;
    bool severe = false;            // argmax sits at the top of the kappa0 grid
};

struct KappaGrid {
    double kappa_max = 60.0;
    int points = 120;  // kappa0 = kappa_max * i / points, i = 1..points

    double at(int i) const { return kappa_max * i / points; }
};

inline PhaseCell phase_cell(const PopulationModel& pop, const CrimeParams& cr, const CostParams& c, double p,
                            double r, double f, const KappaGrid& grid) {
    PhaseCell cell;
    cell.r = r;
    cell.f = f;
    const double pi = weighting_pi(p, pop.gamma.mu_gamma);
    const double net = cr.b - pi * cr.s;
    if (!(net > 0.0)) throw DegenerateStrategy("phase_cell: b - pi(p) s <= 0");
    const double w0 = pi * f / net;
    cell.v = pop.wealth.w_m / w0;
    const auto th = thresholds(pop, cr, r);
    cell.analytic_severe = r > th.r_threshold && f < th.fine_bound;
    cell.feasible = cell.v <= 1.0;
    if (!cell.feasible) return cell;
    cell.decay_condition = phase_condition(cell.v, p, pop, cr, r);

    StrategyTargets x;
    x.p = p;
    x.r = r;
    x.w0 = w0;
    double best = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 1; i <= grid.points; ++i) {
        const double kappa = grid.at(i);
        const auto d = optimal_t_tau(kappa, pop, cr, c, p, cell.v, r);
        x.k0 = kappa * pop.discount.beta;
        x.t = d.t;
        const double w = welfare_closed_form(x, pop, cr, c, d.tau).total;
        if (w > best) {
            best = w;
            best_i = i;
            cell.t_at_argmax = d.t;
            cell.tau_at_argmax = d.tau;
        }
    }
    cell.kappa_argmax = grid.at(best_i);
    cell.welfare_max = best;
    cell.severe = best_i == grid.points;
    return cell;
}

struct PhaseSweep {
    std::vector<double> r_values;
    std::vector<double> f_values;
    std::vector<PhaseCell> cells;  // row-major: r index outer

    const PhaseCell& at(std::size_t i, std::size_t j) const { return cells[i * f_values.size() + j]; }
};

inline PhaseSweep phase_sweep(const PopulationModel& pop, const CrimeParams& cr, const CostParams& c, double p,
                              std::vector<double> r_values, std::vector<double> f_values, const KappaGrid& grid,
                              int threads = 1) {
    if (r_values.size() < 2 || f_values.size() < 2) throw DomainError("phase_sweep: grid must be at least 2x2");
    PhaseSweep out;
    out.r_values = std::move(r_values);
    out.f_values = std::move(f_values);
    const std::size_t nr = out.r_values.size();
    const std::size_t nf = out.f_values.size();
    out.cells.resize(nr * nf);
    auto run = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < nr; i += stride)
            for (std::size_t j = 0; j < nf; ++j)
                out.cells[i * nf + j] = phase_cell(pop, cr, c, p, out.r_values[i], out.f_values[j], grid);
    };
    const auto n_threads = static_cast<std::size_t>(std::max(1, threads));
    if (n_threads == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(run, w, n_threads);
    }
    return out;
}

struct BoundaryCheck {
    int mismatches = 0;           // cells whose numeric regime differs from the analytic one
    int beyond_one_cell = 0;      // mismatches with no analytic flip among the 8 neighbours
    int non_monotone_r_slices = 0;  // f columns where the regime flips more than once along r
};

inline BoundaryCheck check_boundary(const PhaseSweep& s) {
    BoundaryCheck out;
    const auto nr = static_cast<long>(s.r_values.size());
    const auto nf = static_cast<long>(s.f_values.size());
    for (long i = 0; i < nr; ++i)
        for (long j = 0; j < nf; ++j) {
            const auto& cell = s.at(i, j);
            if (cell.severe == cell.analytic_severe) continue;
            ++out.mismatches;
            bool near = false;
            for (long di = -1; di <= 1; ++di)
                for (long dj = -1; dj <= 1; ++dj) {
                    const long a = i + di, b = j + dj;
                    if (a >= 0 && a < nr && b >= 0 && b < nf && s.at(a, b).analytic_severe != cell.analytic_severe)
                        near = true;
                }
            if (!near) ++out.beyond_one_cell;
        }
    for (long j = 0; j < nf; ++j) {
        int flips = 0;
        for (long i = 1; i < nr; ++i) flips += s.at(i, j).severe != s.at(i - 1, j).severe;
        if (flips > 1) ++out.non_monotone_r_slices;
    }
    return out;
}

}  // namespace deterrence

#endif
