#include <deterrence/cli.hpp>

#include <deterrence/estimation.hpp>
#include <deterrence/optimizer.hpp>
#include <deterrence/phase.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace deterrence::cli {

namespace {

Json base_report(const RunConfig& c, const char* command) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["config"] = to_json(c);
    j["seed"] = c.seed;
    return j;
}

Json breakdown_json(const WelfareBreakdown& w) {
    return {{"j0", w.j0},
            {"j1", w.j1},
            {"j2", w.j2},
            {"detection", w.detection},
            {"total", w.total},
            {"tier", to_string(w.tier)}};
}

Json estimate_json(const EstimateWithSE& e) { return {{"value", e.value}, {"se", e.se}, {"n_used", e.n_used}}; }

Json insufficient(const std::string& why) { return {{"status", "insufficient data"}, {"reason", why}}; }

double rel_dev(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

std::filesystem::path prepare_dir(const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + out_dir + ": " + ec.message());
    return dir;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << text;
}

Json histogram_json(const std::vector<HistogramRow>& rows) {
    Json a = Json::array();
    for (const auto& r : rows)
        a.push_back({{"bin_left", r.bin_left},
                     {"bin_right", r.bin_right},
                     {"count", r.count},
                     {"fitted_density", r.fitted_density}});
    return a;
}

std::string histogram_csv(const std::vector<HistogramRow>& rows) {
    std::ostringstream os;
    write_histogram(os, rows);
    return os.str();
}

double require_r(const RunConfig& c) {
    if (c.optimize.r) return *c.optimize.r;
    if (c.strategy) return c.strategy->r;
    if (c.targets) return c.targets->r;
    throw ValidationError("optimize needs a harshness: set optimize.r");
}

// Raw strategy that realises the targets under the shared mean gamma.
PenalStrategy strategy_from_targets(const StrategyTargets& x, const RunConfig& c) {
    const double mu = c.population.gamma.mu_gamma;
    const double pi = weighting_pi(x.p, mu);
    PenalStrategy st;
    st.p = x.p;
    st.r = x.r;
    st.t = x.t;
    st.f = x.w0 * (c.crime.b - pi * c.crime.s) / pi;
    st.tau = tau_for_target(x.k0, x.t, psi(x.p, c.crime, x.r, mu));
    return st;
}

}  // namespace

// ---------------------------------------------------------------- eval-welfare

CommandResult cmd_eval_welfare(const RunConfig& c) {
    CommandResult res{base_report(c, "eval-welfare")};
    Json& out = res.report;
    if (!c.strategy && !c.targets) throw ValidationError("eval-welfare needs a strategy or targets block");
    const double mu = c.population.gamma.mu_gamma;

    StrategyTargets x;
    double tau = 0.0;
    try {
        if (c.targets) {
            x = *c.targets;
            tau = tau_for_target(x.k0, x.t, psi(x.p, c.crime, x.r, mu));
        } else {
            if (c.strategy->p == 0.0) throw DegenerateStrategy("p = 0: pi(0) = 0 and nobody is deterred");
            if (!(c.strategy->t > 0.0)) throw ValidationError("eval-welfare: strategy.t must be > 0");
            try {
                x = targets_from_strategy(*c.strategy, c.crime, mu);
            } catch (const NoRootError& e) {
                throw DegenerateStrategy(std::string(e.what()) + ": no discount rate is deterred");
            }
            tau = c.strategy->tau;
        }
        if (x.w0 < c.population.wealth.w_m) {
            std::ostringstream why;
            why << "w0 = " << x.w0 << " is below w_m = " << c.population.wealth.w_m
                << ": every informed member offends, so no deterrence region exists";
            throw DegenerateStrategy(why.str());
        }
    } catch (const DegenerateStrategy& e) {
        out["status"] = "degenerate";
        out["error"] = e.what();
        res.exit_code = c.strict ? kExitResult : kExitOk;
        return res;
    }

    out["targets"] = {{"p", x.p}, {"w0", x.w0}, {"k0", x.k0}, {"t", x.t}, {"r", x.r}};
    out["tau"] = tau;
    out["v"] = c.population.wealth.w_m / x.w0;
    out["kappa0"] = x.k0 / c.population.discount.beta;

    std::vector<std::pair<const char*, std::optional<WelfareBreakdown>>> tiers;
    Json tiers_json;
    auto run_tier = [&](const char* name, auto&& fn) {
        try {
            const WelfareBreakdown w = fn();
            tiers.emplace_back(name, w);
            tiers_json[name] = breakdown_json(w);
        } catch (const std::exception& e) {
            tiers.emplace_back(name, std::nullopt);
            tiers_json[name] = {{"error", e.what()}};
        }
    };
    run_tier("quadrature", [&] { return welfare_quadrature(x, c.population, c.crime, c.costs, tau); });
    run_tier("closed", [&] { return welfare_closed_form(x, c.population, c.crime, c.costs, tau); });
    run_tier("asymptotic", [&] { return welfare_asymptotic(x, c.population, c.crime, c.costs, tau); });
    out["tiers"] = tiers_json;

    Json dev;
    for (std::size_t i = 0; i < tiers.size(); ++i)
        for (std::size_t k = i + 1; k < tiers.size(); ++k) {
            const auto& [na, a] = tiers[i];
            const auto& [nb, b] = tiers[k];
            const std::string key = std::string(na) + "_vs_" + nb;
            if (!a || !b) {
                dev[key] = nullptr;
                continue;
            }
            dev[key] = {{"j0", rel_dev(a->j0, b->j0)},
                        {"j1", rel_dev(a->j1, b->j1)},
                        {"j2", rel_dev(a->j2, b->j2)},
                        {"total", rel_dev(a->total, b->total)}};
        }
    out["relative_deviation"] = dev;
    out["status"] = "ok";
    return res;
}

// ---------------------------------------------------------------- optimize

CommandResult cmd_optimize(const RunConfig& c) {
    CommandResult res{base_report(c, "optimize")};
    Json& out = res.report;
    const double r = require_r(c);
    const auto th = thresholds(c.population, c.crime, r);
    out["r"] = r;
    out["thresholds"] = {{"r_threshold", th.r_threshold}, {"fine_bound", th.fine_bound}};

    const auto result = optimize(c.population, c.crime, c.costs, r);
    if (const auto* fail = std::get_if<PhaseFailure>(&result)) {
        out["status"] = "phase-failure";
        out["message"] = fail->message;
        out["r_threshold"] = fail->r_threshold;
        out["r_threshold_formula"] = "(b - s) beta / 2";
        res.exit_code = c.strict ? kExitResult : kExitOk;
        return res;
    }
    const auto& sol = std::get<ReducedSolution>(result);
    out["status"] = "ok";
    out["solution"] = {{"p_star", sol.p_star},     {"v_star", sol.v_star},
                       {"f_star", sol.f_star},     {"objective", sol.objective},
                       {"branch", to_string(sol.branch)}, {"p_min", sol.p_min}};

    const double kappa0 = c.optimize.kappa0;
    const auto d = optimal_t_tau(kappa0, c.population, c.crime, c.costs, sol.p_star, sol.v_star, r);
    StrategyTargets x;
    x.p = sol.p_star;
    x.r = r;
    x.w0 = c.population.wealth.w_m / sol.v_star;
    x.k0 = kappa0 * c.population.discount.beta;
    x.t = d.t;
    const double pi = weighting_pi(x.p, c.population.gamma.mu_gamma);
    out["raw_strategy"] = {{"p", x.p},
                           {"f", x.w0 * (c.crime.b - pi * c.crime.s) / pi},
                           {"t", d.t},
                           {"tau", d.tau},
                           {"r", r},
                           {"kappa0", kappa0},
                           {"j2_min", d.j2_min},
                           {"at_search_boundary", d.at_search_boundary}};
    out["targets"] = {{"p", x.p}, {"w0", x.w0}, {"k0", x.k0}, {"t", x.t}, {"r", x.r}};
    try {
        const auto w = welfare_closed_form(x, c.population, c.crime, c.costs, d.tau);
        out["welfare_at_kappa0"] = breakdown_json(w);
    } catch (const std::exception& e) {
        out["welfare_at_kappa0"] = {{"error", e.what()}};
    }
    return res;
}

// ---------------------------------------------------------------- phase-sweep

CommandResult cmd_phase_sweep(const RunConfig& c, const std::string& out_dir) {
    CommandResult res{base_report(c, "phase-sweep")};
    Json& out = res.report;
    const auto& o = c.phase_sweep;
    const double pi = weighting_pi(o.p, c.population.gamma.mu_gamma);
    const double net = c.crime.b - pi * c.crime.s;
    if (!(net > 0.0)) throw ValidationError("phase-sweep: b - pi(p) s <= 0 at the configured p");
    const double r_th = thresholds(c.population, c.crime, 1.0).r_threshold;
    const double f_feasible = c.population.wealth.w_m * net / pi;  // fine at which w0 = w_m
    const double r_lo = o.r_min.value_or(0.5 * r_th), r_hi = o.r_max.value_or(3.0 * r_th);
    const double f_lo = o.f_min.value_or(f_feasible), f_hi = o.f_max.value_or(4.0 * f_feasible);
    if (!(r_lo < r_hi && f_lo < f_hi)) throw ValidationError("phase-sweep: empty r or f range");
    auto linspace = [](double a, double b, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1.0);
        return v;
    };
    const KappaGrid grid{o.kappa_max, o.kappa_points};
    const auto sweep = phase_sweep(c.population, c.crime, c.costs, o.p, linspace(r_lo, r_hi, o.r_points),
                                   linspace(f_lo, f_hi, o.f_points), grid, c.threads);
    const auto check = check_boundary(sweep);

    std::ostringstream csv;
    csv << "r,f,fine_bound,v,feasible,decay_condition,analytic_severe,kappa_argmax,welfare_max,t_at_argmax,"
           "tau_at_argmax,severe\n";
    Json cells = Json::array();
    for (std::size_t i = 0; i < sweep.r_values.size(); ++i)
        for (std::size_t j = 0; j < sweep.f_values.size(); ++j) {
            const auto& cell = sweep.at(i, j);
            const double fb = thresholds(c.population, c.crime, cell.r).fine_bound;
            using detail::format_number;
            csv << format_number(cell.r) << ',' << format_number(cell.f) << ',' << format_number(fb) << ','
                << format_number(cell.v) << ',' << cell.feasible << ',' << cell.decay_condition << ','
                << cell.analytic_severe << ',' << format_number(cell.kappa_argmax) << ','
                << format_number(cell.welfare_max) << ',' << format_number(cell.t_at_argmax) << ','
                << format_number(cell.tau_at_argmax) << ',' << cell.severe << '\n';
            cells.push_back({{"r", cell.r},
                             {"f", cell.f},
                             {"fine_bound", fb},
                             {"feasible", cell.feasible},
                             {"decay_condition", cell.decay_condition},
                             {"analytic_severe", cell.analytic_severe},
                             {"kappa_argmax", cell.kappa_argmax},
                             {"severe", cell.severe}});
        }
    out["r_threshold"] = r_th;
    out["grid"] = {{"r_min", r_lo},    {"r_max", r_hi},          {"r_points", o.r_points},
                   {"f_min", f_lo},    {"f_max", f_hi},          {"f_points", o.f_points},
                   {"kappa_max", o.kappa_max}, {"kappa_points", o.kappa_points}, {"p", o.p}};
    out["boundary_check"] = {{"mismatches", check.mismatches},
                             {"beyond_one_cell", check.beyond_one_cell},
                             {"non_monotone_r_slices", check.non_monotone_r_slices}};
    out["cells"] = cells;
    if (!out_dir.empty()) {
        const auto dir = prepare_dir(out_dir);
        write_file(dir / "phase_sweep.csv", csv.str());
        out["files"] = {"phase_sweep.csv"};
    }
    out["status"] = "ok";
    return res;
}

// ---------------------------------------------------------------- simulate

CommandResult cmd_simulate(const RunConfig& c) {
    CommandResult res{base_report(c, "simulate")};
    Json& out = res.report;
    if (!c.strategy && !c.targets) throw ValidationError("simulate needs a strategy or targets block");
    const PenalStrategy st = c.strategy ? *c.strategy : strategy_from_targets(*c.targets, c);

    SimConfig cfg;
    cfg.n_agents = c.simulation.n_agents;
    cfg.delta_t = c.simulation.delta_t;
    cfg.lambda_rate = c.simulation.lambda_rate;
    cfg.seed = c.seed;
    cfg.gamma_mode = c.simulation.gamma_mode;
    cfg.threads = c.threads;
    const auto agents = build_population(c.population, cfg);

    const bool burglary = c.simulation.burglary_gain.has_value();
    SimReport rep = burglary ? burglary_simulate(agents, st, *c.simulation.burglary_gain, c.crime, c.costs, cfg)
                             : simulate(agents, st, c.crime, c.costs, cfg);
    const double n = static_cast<double>(agents.size());

    Json labels;
    for (int k = 0; k < 3; ++k) {
        const char* name = to_string(static_cast<PartitionLabel>(k));
        labels[name] = {{"count", rep.label_counts[k]}, {"welfare_sum", rep.label_welfare[k]}};
    }
    out["strategy"] = {{"p", st.p}, {"f", st.f}, {"t", st.t}, {"tau", st.tau}, {"r", st.r}};
    out["report"] = {{"labels", labels},
                     {"n_informed", rep.n_informed},
                     {"n_uninformed", rep.n_uninformed},
                     {"opportunities", rep.opportunities},
                     {"offenses", rep.offenses},
                     {"expected_opportunities", rep.expected_opportunities},
                     {"detection", rep.detection},
                     {"welfare_per_capita", rep.welfare_per_capita},
                     {"welfare_se", rep.welfare_se}};
    out["mode"] = burglary ? "burglary" : "standard";

    if (burglary) {
        const auto fr = burglary_fractions(c.population, st, *c.simulation.burglary_gain,
                                           static_cast<double>(rep.n_informed) / n);
        const double expect[3] = {fr.non_offender, fr.fine, fr.prison};
        Json fractions;
        bool agree = true;
        for (int k = 0; k < 3; ++k) {
            const double got = static_cast<double>(rep.label_counts[k]) / n;
            const double se = std::sqrt(expect[k] * (1.0 - expect[k]) / n);
            const double z = se > 0.0 ? std::abs(got - expect[k]) / se : (got == expect[k] ? 0.0 : INFINITY);
            agree = agree && z <= 3.0;
            fractions[to_string(static_cast<PartitionLabel>(k))] = {
                {"simulated", got}, {"analytic", expect[k]}, {"binomial_se", se}, {"z", z}};
        }
        out["partition_fractions"] = fractions;
        out["omega0_empty"] = burglary_omega0_empty(st, *c.simulation.burglary_gain);
        out["agrees_within_3se"] = agree;
    } else {
        std::optional<double> analytic;
        std::string note;
        try {
            analytic = analytic_welfare(st, c.population, c.crime, c.costs);
            if (!analytic) note = "strategy deters nobody (w0 < w_m)";
        } catch (const std::exception& e) {
            note = e.what();
        }
        rep.analytic_welfare = analytic;
        if (analytic) {
            out["analytic_welfare"] = *analytic;
            out["z"] = rep.welfare_se > 0.0 ? std::abs(rep.welfare_per_capita - *analytic) / rep.welfare_se
                                            : (rep.welfare_per_capita == *analytic ? 0.0 : INFINITY);
        } else {
            out["analytic_welfare"] = nullptr;
            out["analytic_note"] = note;
        }
        if (c.simulation.gamma_mode == GammaMode::per_agent)
            out["analytic_note"] = "analytic welfare assumes a shared gamma; per-agent mode measures the gap";
        out["agrees_within_3se"] = rep.agrees_with_analytic(3.0);
    }
    out["status"] = "ok";
    return res;
}

// ---------------------------------------------------------------- fit-survey

namespace {

Json split_json(const SplitReport& s, const char* by, const char* of) {
    Json rows = Json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"parameter", r.name},
                        {"lower", estimate_json(r.lower)},
                        {"upper", estimate_json(r.upper)},
                        {"z", r.z}});
    return {{"split_by", by}, {"parameters_of", of}, {"median", s.median},
            {"n_lower", s.n_lower}, {"n_upper", s.n_upper}, {"rows", rows}};
}

Json insufficient_split(const char* by, const char* of) {
    Json j = insufficient("fewer than 4 respondents");
    j["split_by"] = by;
    j["parameters_of"] = of;
    return j;
}

std::vector<NamedEstimate> k_params(std::span<const KFit> fits) {
    const auto rb = estimate_rho_beta(fits);
    EstimateWithSE beta = rb.beta;
    if (!rb.beta_defined) beta.value = beta.se = std::numeric_limits<double>::quiet_NaN();
    return {{"rho", rb.rho}, {"beta", beta}};
}

std::vector<NamedEstimate> gamma_params(std::span<const EstimateWithSE> g) {
    const auto pop = estimate_gamma_population(g);
    return {{"mu_gamma", pop.mu}, {"sigma_gamma", pop.sd}};
}

}  // namespace

CommandResult cmd_fit_survey(const RunConfig& c, const std::string& input, const std::string& out_dir) {
    CommandResult res{base_report(c, "fit-survey")};
    Json& out = res.report;
    const std::string path = input.empty() ? c.survey.input : input;
    if (path.empty()) throw ValidationError("fit-survey needs an input CSV (--input or survey.input)");
    out["input"] = path;

    ParseReport parsed;
    try {
        parsed = parse_survey_file(path);
    } catch (const FormatError& e) {
        throw ValidationError(e.what());
    }
    std::filesystem::path dir;
    if (!out_dir.empty()) dir = prepare_dir(out_dir);
    if (!parsed.errors.empty()) {
        Json errs = Json::array();
        for (const auto& e : parsed.errors) errs.push_back({{"line", e.line}, {"message", e.message}});
        out["status"] = "invalid-input";
        out["row_errors"] = errs;
        out["n_valid_rows"] = parsed.responses.size();
        if (!out_dir.empty()) write_file(dir / "fit_report.json", out.dump(2) + "\n");
        res.exit_code = kExitValidation;
        return res;
    }
    const auto& rows = parsed.responses;
    out["n_respondents"] = rows.size();
    std::vector<std::string> files;

    // Discount rates.
    std::vector<KFit> kfits;
    std::vector<std::size_t> k_index(rows.size(), SIZE_MAX);
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!rows[i].delay_answers.empty()) {
            k_index[i] = kfits.size();
            kfits.push_back(fit_k(rows[i]));
        }
    std::optional<RhoBeta> rb;
    if (kfits.size() < 2) {
        out["k_distribution"] = insufficient("fewer than 2 respondents answered the delay questions");
    } else {
        rb = estimate_rho_beta(kfits);
        Json k{{"rho", estimate_json(rb->rho)}, {"n_respondents", kfits.size()}};
        if (rb->beta_defined)
            k["beta"] = estimate_json(rb->beta);
        else
            k["beta"] = insufficient("no respondent has a positive discount rate");
        out["k_distribution"] = k;
        if (rb->beta_defined) {
            std::vector<double> ks;
            for (const auto& f : kfits) ks.push_back(f.k.value);
            const auto hist = k_histogram(ks, rb->rho.value, rb->beta.value);
            out["k_histogram"] = histogram_json(hist);
            if (!out_dir.empty()) {
                write_file(dir / "k_histogram.csv", histogram_csv(hist));
                files.push_back("k_histogram.csv");
            }
        }
    }

    // Weighting factors.
    std::vector<EstimateWithSE> gammas;
    std::vector<std::size_t> g_index(rows.size(), SIZE_MAX);
    std::size_t n_degenerate = 0, n_boundary = 0, n_short = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].fine_answers.size() < 3) {
            ++n_short;
            continue;
        }
        const auto g = estimate_gamma(rows[i]);
        if (g.degenerate) {
            ++n_degenerate;
            continue;
        }
        n_boundary += g.at_boundary;
        g_index[i] = gammas.size();
        gammas.push_back(g.gamma);
    }
    std::optional<GammaPopulation> gp;
    if (gammas.size() < 2) {
        out["gamma_distribution"] = insufficient("fewer than 2 respondents with >= 3 usable fine-scenario answers");
    } else {
        gp = estimate_gamma_population(gammas);
        out["gamma_distribution"] = {{"mu_gamma", estimate_json(gp->mu)},
                                     {"sigma_gamma", estimate_json(gp->sd)},
                                     {"variance", estimate_json(gp->variance)},
                                     {"variance_clamped", gp->clamped},
                                     {"n_used", gammas.size()},
                                     {"n_degenerate", n_degenerate},
                                     {"n_too_few_answers", n_short},
                                     {"n_at_boundary", n_boundary}};
        std::vector<double> gv;
        for (const auto& g : gammas) gv.push_back(g.value);
        const auto hist = gamma_histogram(gv, gp->mu.value, gp->sd.value);
        out["gamma_histogram"] = histogram_json(hist);
        if (!out_dir.empty()) {
            write_file(dir / "gamma_histogram.csv", histogram_csv(hist));
            files.push_back("gamma_histogram.csv");
        }
    }

    // Harshness.
    std::vector<double> harsh;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto h = k_index[i] == SIZE_MAX ? std::nullopt
                                              : estimate_harshness(rows[i], kfits[k_index[i]].k.value);
        if (h)
            harsh.push_back(*h);
        else
            ++skipped;
    }
    if (harsh.empty())
        out["harshness"] = insufficient("no respondent has both delay answers and a detention tolerance");
    else
        out["harshness"] = {{"median", median_of(harsh)}, {"n_used", harsh.size()}, {"n_skipped", skipped}};

    // Median-split independence checks.
    Json table = Json::array();
    {
        std::vector<double> w;
        std::vector<KFit> kf;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (k_index[i] != SIZE_MAX) {
                w.push_back(rows[i].salary);
                kf.push_back(kfits[k_index[i]]);
            }
        if (kf.size() >= 4)
            table.push_back(split_json(
                independence_split<KFit>(w, kf, [](std::span<const KFit> s) { return k_params(s); }), "salary",
                "discount rate"));
        else
            table.push_back(insufficient_split("salary", "discount rate"));
    }
    {
        std::vector<double> w, k;
        std::vector<EstimateWithSE> gw, gk;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (g_index[i] == SIZE_MAX) continue;
            w.push_back(rows[i].salary);
            gw.push_back(gammas[g_index[i]]);
            if (k_index[i] != SIZE_MAX) {
                k.push_back(kfits[k_index[i]].k.value);
                gk.push_back(gammas[g_index[i]]);
            }
        }
        auto fitter = [](std::span<const EstimateWithSE> s) { return gamma_params(s); };
        for (auto [a, b, by] : {std::tuple{&w, &gw, "salary"}, std::tuple{&k, &gk, "discount rate"}}) {
            if (b->size() >= 4)
                table.push_back(split_json(independence_split<EstimateWithSE>(*a, *b, fitter), by, "weighting factor"));
            else
                table.push_back(insufficient_split(by, "weighting factor"));
        }
    }
    out["independence"] = table;
    out["files"] = files;
    out["status"] = "ok";
    if (!out_dir.empty()) write_file(dir / "fit_report.json", out.dump(2) + "\n");
    return res;
}

}  // namespace deterrence::cli
